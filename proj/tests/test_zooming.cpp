#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "perfbandit/zooming.hpp"
#include "test_support.hpp"

namespace pb = perfbandit;
using pb::Rational;

namespace {

const Rational kS(499999, 1000000);
const Rational kR(1, 4);

pb::FiniteInstance<double> random_instance(unsigned seed, std::size_t n = 5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<pb::ParameterVector> pts;
  std::vector<double> pr;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(pb::testing::pt(u(rng), u(rng)));
    pr.push_back(0.5 * (u(rng) + 1.0));
  }
  return pb::constant_map_instance<double>(pts, pr, pb::euclidean_distances(pts), 1.0 / 32.0);
}

/// Independent oracle: enumerate (subset, candidate cover) pairs directly.
int enumerate_band_count(const pb::FiniteInstance<double>& inst, double s, double r) {
  const std::size_t n = inst.size();
  std::vector<std::size_t> near;
  for (std::size_t i = 0; i < n; ++i) {
    if (inst.delta(i) <= 16.0 * inst.alpha * s) near.push_back(i);
  }
  int best = 0;
  for (std::uint32_t sub = 1; sub < (1U << near.size()); ++sub) {
    std::vector<std::size_t> subset;
    for (std::size_t k = 0; k < near.size(); ++k) {
      if (sub & (1U << k)) subset.push_back(near[k]);
    }
    std::size_t min_size = subset.size() + 1;
    std::vector<std::vector<std::size_t>> minimal;
    for (std::uint32_t c = 1; c < (1U << subset.size()); ++c) {
      std::vector<std::size_t> cover;
      for (std::size_t k = 0; k < subset.size(); ++k) {
        if (c & (1U << k)) cover.push_back(subset[k]);
      }
      const bool ok = std::all_of(subset.begin(), subset.end(), [&](std::size_t x) {
        return std::any_of(cover.begin(), cover.end(),
                           [&](std::size_t y) { return inst.dist[x][y] <= s; });
      });
      if (!ok || cover.size() > min_size) continue;
      if (cover.size() < min_size) {
        minimal.clear();
        min_size = cover.size();
      }
      minimal.push_back(cover);
    }
    for (const auto& cover : minimal) {
      const double lo = 16.0 * inst.alpha * r;
      const int count = static_cast<int>(std::count_if(cover.begin(), cover.end(), [&](std::size_t x) {
        return lo <= inst.delta(x) && inst.delta(x) < 2.0 * lo;
      }));
      best = std::max(best, count);
    }
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------- worked example

TEST(WorkedInstance, BandMembership) {
  const auto inst = pb::appendix_d_instance();
  EXPECT_FALSE(pb::in_band(inst, 0, kR));
  EXPECT_TRUE(pb::in_band(inst, 1, kR));
  EXPECT_TRUE(pb::in_band(inst, 2, kR));
  EXPECT_FALSE(pb::in_band(inst, 3, kR));
}

TEST(WorkedInstance, PairwiseLowerBoundIsSevenThirtySeconds) {
  const auto inst = pb::appendix_d_instance();
  EXPECT_EQ(pb::pairwise_lower_bound(inst, 1, 2), Rational(7, 32));
  EXPECT_EQ(pb::pairwise_lower_bound(inst, 2, 1), Rational(7, 64));
}

TEST(WorkedInstance, ZoomingCountIsTwo) {
  const auto res = pb::zooming_band_count(pb::appendix_d_instance(), kS, kR);
  EXPECT_EQ(res.count, 2);
  // Any witness must hold both band members as separate cover points.
  EXPECT_TRUE(std::count(res.cover.begin(), res.cover.end(), 1u) == 1);
  EXPECT_TRUE(std::count(res.cover.begin(), res.cover.end(), 2u) == 1);
}

TEST(WorkedInstance, SequentialCountIsThreeHalves) {
  const auto inst = pb::appendix_d_instance();
  EXPECT_EQ(pb::sequential_band_count(inst, {1, 2}, kS, kR), Rational(3, 2));
  EXPECT_EQ(pb::sequential_count_for_order(inst, {1, 2}, kS, kR, pb::PrMinScope::kDeployed), 1);
  EXPECT_EQ(pb::sequential_count_for_order(inst, {2, 1}, kS, kR, pb::PrMinScope::kDeployed), 2);
}

TEST(WorkedInstance, GlobalScopeGivesOne) {
  const auto inst = pb::appendix_d_instance();
  EXPECT_EQ(pb::sequential_band_count(inst, {1, 2}, kS, kR, pb::PrMinScope::kGlobal), Rational(1));
}

TEST(WorkedInstance, EmptyBandCountsZero) {
  const auto inst = pb::appendix_d_instance();
  EXPECT_EQ(pb::zooming_band_count(inst, kS, Rational(4)).count, 0);
  EXPECT_EQ(pb::sequential_band_count(inst, {1, 2}, kS, Rational(4)), Rational(0));
}

TEST(WorkedInstance, SinglePointCoverInBandCountsOne) {
  const auto inst = pb::appendix_d_instance();
  EXPECT_EQ(pb::sequential_band_count(inst, {2}, kS, kR), Rational(1));
  EXPECT_EQ(pb::sequential_band_count(inst, {0}, kS, kR), Rational(0));
}

// ---------------------------------------------------------------- random instances

TEST(ZoomingCount, MatchesIndependentEnumeration) {
  for (unsigned seed = 0; seed < 40; ++seed) {
    const auto inst = random_instance(seed);
    for (double s : {0.2, 0.6, 1.5}) {
      for (double r : {0.125, 0.25, 0.5}) {
        EXPECT_EQ(pb::zooming_band_count(inst, s, r).count, enumerate_band_count(inst, s, r))
            << "seed " << seed << " s " << s << " r " << r;
      }
    }
  }
}

TEST(SequentialCount, NeverExceedsBandMembersOfCover) {
  for (unsigned seed = 0; seed < 30; ++seed) {
    const auto inst = random_instance(seed, 6);
    for (double r : {0.125, 0.25, 0.5}) {
      const auto res = pb::zooming_band_count(inst, 0.4, r);
      if (res.cover.empty() || res.cover.size() > pb::kMaxSequentialCover) continue;
      for (auto scope : {pb::PrMinScope::kDeployed, pb::PrMinScope::kGlobal}) {
        const double seq = pb::sequential_band_count(inst, res.cover, 0.4, r, scope);
        EXPECT_LE(seq, res.count + 1e-12);
        EXPECT_GE(seq, 0.0);
      }
    }
  }
}

TEST(SequentialCount, MonteCarloAgreesWithEnumeration) {
  const auto inst = random_instance(7, 7);
  std::vector<std::size_t> cover = {0, 1, 2, 3, 4, 5, 6};
  for (double r : {0.125, 0.25}) {
    const double exact = pb::sequential_band_count(inst, cover, 0.3, r);
    auto rng = pb::make_stream(7, pb::StreamTag::kAuxiliary, 0);
    const auto mc = pb::sequential_band_count_mc(inst, cover, 0.3, r, 100000, rng);
    EXPECT_NEAR(mc.mean, exact, std::max(3.0 * mc.std_error, 1e-12));
  }
  const auto worked = pb::appendix_d_instance();
  auto rng = pb::make_stream(1, pb::StreamTag::kAuxiliary, 0);
  const auto mc = pb::sequential_band_count_mc(worked, {1, 2}, kS, kR, 100000, rng);
  EXPECT_NEAR(mc.mean, 1.5, 3.0 * mc.std_error);
}

TEST(Zooming, SizeCaps) {
  EXPECT_THROW(pb::zooming_band_count(random_instance(1, 15), 0.5, 0.25), pb::SizeLimitError);
  EXPECT_NO_THROW(pb::zooming_band_count(random_instance(1, 14), 0.5, 0.25));
  const auto inst = random_instance(2, 10);
  EXPECT_THROW(pb::sequential_band_count(inst, {0, 1, 2, 3, 4, 5, 6, 7, 8}, 0.5, 0.25),
               pb::SizeLimitError);
  EXPECT_THROW(pb::sequential_band_count(inst, {}, 0.5, 0.25), std::invalid_argument);
  EXPECT_THROW(pb::sequential_band_count(inst, {42}, 0.5, 0.25), std::out_of_range);
}

TEST(FiniteInstance, ValidationRejectsBadShapes) {
  auto inst = random_instance(3, 3);
  inst.dpr[1][1] += 1.0;
  EXPECT_THROW(inst.validate(), pb::ConfigError);
  auto ragged = random_instance(3, 3);
  ragged.dist[0].pop_back();
  EXPECT_THROW(ragged.validate(), pb::DimensionError);
}

// ---------------------------------------------------------------- dimension report

TEST(DimensionReport, WorkedValues) {
  const auto rep = pb::dimension_report({
      {"zooming", 499999.0 / 1e6, 0.25, 2.0, 0.5},
      {"sequential", 499999.0 / 1e6, 0.25, 1.5, 0.5},
      {"empty", 0.5, 0.25, 0.0, std::nullopt},
  });
  ASSERT_EQ(rep.size(), 3u);
  EXPECT_NEAR(*rep[0].d_limit, std::log(2.0) / std::log(6.0), 1e-12);
  EXPECT_NEAR(*rep[0].d_limit, 0.38685, 1e-5);
  EXPECT_NEAR(*rep[1].d_limit, 0.22629, 1e-5);
  EXPECT_LT(*rep[0].d_est, *rep[0].d_limit);
  EXPECT_FALSE(rep[2].d_est.has_value());
  EXPECT_FALSE(rep[2].d_limit.has_value());
}

TEST(DimensionReport, SingleMemberHasZeroDimension) {
  const auto rep = pb::dimension_report({{"one", 0.1, 0.1, 1.0, std::nullopt}});
  EXPECT_EQ(*rep[0].d_est, 0.0);
}
