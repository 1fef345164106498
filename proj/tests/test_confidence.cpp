#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "perfbandit/confidence.hpp"
#include "test_support.hpp"

namespace pb = perfbandit;
using pb::testing::pt;

namespace {

pb::DeploymentRecord oracle_record(const pb::ParameterVector& theta) {
  pb::DeploymentRecord r;
  r.theta = theta;
  return r;
}

pb::DeploymentRecord sampled_record(const pb::Environment& env, const pb::ParameterVector& theta,
                                    std::size_t n, std::uint64_t seed) {
  pb::DeploymentRecord r;
  r.theta = theta;
  auto rng = pb::make_stream(seed, pb::StreamTag::kAuxiliary, 0);
  r.samples = env.sample(theta, n, rng);
  return r;
}

std::vector<pb::ParameterVector> random_subset(const pb::CandidateGrid& grid, std::size_t k,
                                               std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  std::vector<pb::ParameterVector> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(grid[pick(rng)]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- empirical_dpr

TEST(EmpiricalDpr, SingleSampleIsLossAtThatSample) {
  const auto env = pb::testing::nonconvex_location_family();
  auto rec = sampled_record(env, pt(0.2), 1, 4);
  const double z = rec.samples(0, 0);
  EXPECT_DOUBLE_EQ(pb::empirical_dpr(rec, pt(-0.4), env.loss()),
                   env.loss().eval(pt(z), pt(-0.4)));
  rec.cache_moments();
  EXPECT_NEAR(pb::empirical_dpr(rec, pt(-0.4), env.loss()), env.loss().eval(pt(z), pt(-0.4)),
              1e-15);
}

TEST(EmpiricalDpr, PointMassMatchesOracleForAnyCount) {
  const auto env = pb::testing::linear_shift_env();
  for (std::size_t n : {1u, 7u, 100u}) {
    const auto rec = sampled_record(env, pt(0.35), n, n);
    for (double q : {-1.0, 0.0, 0.6}) {
      EXPECT_NEAR(pb::empirical_dpr(rec, pt(q), env.loss()), env.oracle_dpr(pt(0.35), pt(q)), 1e-14);
    }
  }
}

TEST(EmpiricalDpr, GaussianLinearLossWithinThreeStandardErrors) {
  const double sigma = 1.0;
  const auto env = pb::testing::nonconvex_location_family(0.8, sigma);
  const std::size_t n = 100000;
  const auto rec = sampled_record(env, pt(0.5), n, 77);
  const double se = sigma / std::sqrt(static_cast<double>(n));  // loss slope in z is 1
  for (double q : {-0.7, 0.1, 0.9}) {
    EXPECT_NEAR(pb::empirical_dpr(rec, pt(q), env.loss()), env.oracle_dpr(pt(0.5), pt(q)), 3 * se);
  }
}

TEST(EmpiricalDpr, EmptyRecordThrows) {
  const auto env = pb::testing::linear_shift_env();
  EXPECT_THROW(pb::empirical_dpr(oracle_record(pt(0.0)), pt(0.0), env.loss()),
               std::invalid_argument);
}

// ---------------------------------------------------------------- perf_bounds

TEST(PerfBounds, ZeroSlackCollapsesToPr) {
  const auto env = pb::testing::quadratic_constant_map();
  pb::ConfidenceState state(env, 0.0, pb::DprMode::kOracle);
  state.add(oracle_record(pt(-0.3)));
  for (double q : {-1.0, 0.2, 0.5}) {
    const auto b = pb::perf_bounds(state, pt(q));
    EXPECT_EQ(b.lb, b.ub);
    EXPECT_NEAR(b.lb, env.oracle_pr(pt(q)), 1e-15);
  }
}

TEST(PerfBounds, WorkedExampleLowerBound) {
  const pb::testing::ThreeModelExample d;
  const auto env = d.env();
  pb::ConfidenceState state(env, d.lz_eps, pb::DprMode::kOracle);
  state.add(oracle_record(d.points[1]));
  EXPECT_NEAR(pb::perf_bounds(state, d.points[2]).lb, 7.0 / 32.0, 1e-15);
}

TEST(PerfBounds, LinearShiftBandContainsPr) {
  const auto env = pb::testing::linear_shift_env();
  pb::ConfidenceState state(env, 1.0, pb::DprMode::kOracle);
  state.add(oracle_record(pt(-0.5)));
  state.add(oracle_record(pt(0.5)));
  const auto grid = pb::CandidateGrid::interval(200);
  for (const auto& q : grid.points()) {
    const auto b = pb::perf_bounds(state, q);
    EXPECT_LE(b.lb, env.oracle_pr(q) + 1e-12);
    EXPECT_GE(b.ub, env.oracle_pr(q) - 1e-12);
  }
}

TEST(PerfBounds, EmptyStateThrows) {
  const auto env = pb::testing::linear_shift_env();
  pb::ConfidenceState state(env, 1.0, pb::DprMode::kOracle);
  EXPECT_THROW(pb::perf_bounds(state, pt(0.0)), std::invalid_argument);
  EXPECT_THROW(pb::baseline_bounds(state, pt(0.0), 1.0), std::invalid_argument);
  EXPECT_THROW(pb::pr_min(state, std::vector<pb::ParameterVector>{pt(0.0)}), std::invalid_argument);
}

TEST(ConfidenceState, OracleModeNeedsOracle) {
  auto loss = std::make_shared<pb::CallableLoss>(
      [](const pb::Vector& z, const pb::ParameterVector& t) { return std::abs(z[0] - t[0]); }, 1.0);
  const auto env = pb::make_constant_map(pb::BaseDistribution::gaussian(pb::Vector::Zero(1), 1.0), loss);
  EXPECT_THROW(pb::ConfidenceState(env, 0.0, pb::DprMode::kOracle), std::invalid_argument);
  pb::ConfidenceState ok(env, 0.0, pb::DprMode::kEmpirical);
  EXPECT_THROW(ok.add(oracle_record(pt(0.0))), std::invalid_argument);
}

// ---------------------------------------------------------------- baseline_bounds

TEST(BaselineBounds, DeployedPointIsExact) {
  const auto env = pb::testing::linear_shift_env();
  pb::ConfidenceState state(env, 1.0, pb::DprMode::kOracle);
  state.add(oracle_record(pt(0.25)));
  const auto b = pb::baseline_bounds(state, pt(0.25), 3.8);
  EXPECT_EQ(b.lb, env.oracle_pr(pt(0.25)));
  EXPECT_EQ(b.ub, env.oracle_pr(pt(0.25)));
}

TEST(BaselineBounds, LinearShiftBandContainsPr) {
  const auto env = pb::testing::linear_shift_env();
  pb::ConfidenceState state(env, 1.0, pb::DprMode::kOracle);
  state.add(oracle_record(pt(-0.5)));
  state.add(oracle_record(pt(0.5)));
  const auto grid = pb::CandidateGrid::interval(400);
  for (const auto& q : grid.points()) {
    const auto b = pb::baseline_bounds(state, q, 3.8);
    EXPECT_LE(b.lb, env.oracle_pr(q) + 1e-12);
    EXPECT_GE(b.ub, env.oracle_pr(q) - 1e-12);
  }
  EXPECT_THROW(pb::baseline_bounds(state, pt(0.0), -1.0), std::invalid_argument);
}

TEST(BaselineBounds, PerformativeBandNestedInside) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::interval(400);
  const double l_theta = pb::measure_theta_lipschitz(env, grid.points(), grid.points());
  const double l_pr = l_theta + 1.0;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    pb::ConfidenceState state(env, 1.0, pb::DprMode::kOracle);
    for (const auto& th : random_subset(grid, 1 + trial % 4, rng)) state.add(oracle_record(th));
    for (const auto& q : grid.points()) {
      const auto p = pb::perf_bounds(state, q);
      const auto b = pb::baseline_bounds(state, q, l_pr);
      EXPECT_GE(p.lb, b.lb - 1e-12);
      EXPECT_LE(p.ub, b.ub + 1e-12);
    }
  }
}

// ---------------------------------------------------------------- pr_min

TEST(PrMin, ZeroSlackConstantMapIsMinPr) {
  const auto env = pb::testing::quadratic_constant_map();
  pb::ConfidenceState state(env, 0.0, pb::DprMode::kOracle);
  state.add(oracle_record(pt(0.9)));
  const auto grid = pb::CandidateGrid::interval(101);
  EXPECT_NEAR(pb::pr_min(state, grid.points()), pb::oracle_profile(env, grid).min_pr, 1e-15);
}

TEST(PrMin, WorkedExampleIsOneSixtyFourth) {
  const pb::testing::ThreeModelExample d;
  const auto env = d.env();
  pb::ConfidenceState state(env, d.lz_eps, pb::DprMode::kOracle);
  state.add(oracle_record(d.points[1]));
  const std::vector<pb::ParameterVector> cands(d.points.begin(), d.points.begin() + 3);
  EXPECT_NEAR(pb::pr_min(state, cands), 1.0 / 64.0, 1e-15);
}

TEST(PrMin, NeverIncreasesAsDeploymentsAccrue) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::interval(200);
  pb::ConfidenceState state(env, 1.0, pb::DprMode::kOracle);
  std::mt19937_64 rng(8);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& th : random_subset(grid, 15, rng)) {
    state.add(oracle_record(th));
    const double now = pb::pr_min(state, grid.points());
    EXPECT_LE(now, prev);
    prev = now;
  }
}

// ---------------------------------------------------------------- cover_estimate

TEST(CoverEstimate, NetPointIsExact) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::interval(41);
  const auto net = pb::greedy_net(grid.points(), 0.1);
  pb::ConfidenceState records(env, 1.0, pb::DprMode::kOracle);
  for (auto k : net.indices) records.add(oracle_record(grid[k]));
  for (auto k : net.indices) {
    EXPECT_EQ(pb::cover_estimate(net, grid.points(), records, grid[k]), env.oracle_pr(grid[k]));
  }
}

TEST(CoverEstimate, ErrorWithinGamma) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::interval(400);
  const double gamma = 0.1;
  const double lz_eps = env.loss().lipschitz_z() * env.sensitivity();
  const auto net = pb::greedy_net(grid.points(), gamma / lz_eps);
  pb::ConfidenceState records(env, lz_eps, pb::DprMode::kOracle);
  for (auto k : net.indices) records.add(oracle_record(grid[k]));
  int violations = 0;
  for (const auto& q : grid.points()) {
    const double err = std::abs(pb::cover_estimate(net, grid.points(), records, q) - env.oracle_pr(q));
    if (err > gamma + 1e-12) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(CoverEstimate, LocationFamilyAgainstClosedForm) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double mu = u(rng);
    const auto env = pb::testing::nonconvex_location_family(mu, 0.5);
    const auto grid = pb::CandidateGrid::interval(201);
    const double lz_eps = env.loss().lipschitz_z() * env.sensitivity();
    const double gamma = 0.05;
    const auto net = pb::greedy_net(grid.points(), gamma / std::max(lz_eps, 1e-9));
    pb::ConfidenceState records(env, lz_eps, pb::DprMode::kOracle);
    for (auto k : net.indices) records.add(oracle_record(grid[k]));
    for (const auto& q : grid.points()) {
      // Closed form for a linear-in-z loss: PR(theta) = mu * theta + f(theta).
      const double closed = mu * q[0] + env.oracle_dpr(pt(0.0), q);
      EXPECT_NEAR(pb::cover_estimate(net, grid.points(), records, q), closed, gamma + 1e-12);
    }
  }
}

TEST(CoverEstimate, MissingRecordThrows) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::interval(11);
  const auto net = pb::greedy_net(grid.points(), 0.3);
  pb::ConfidenceState records(env, 1.0, pb::DprMode::kOracle);
  records.add(oracle_record(grid[net.indices[0]]));
  EXPECT_THROW(pb::cover_estimate(net, grid.points(), records, grid[0]), std::invalid_argument);
}

// ---------------------------------------------------------------- invariants

TEST(ConfidenceInvariants, SoundnessAndEliminationSafety) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::interval(300);
  const auto prof = pb::oracle_profile(env, grid);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    pb::ConfidenceState state(env, 1.0, pb::DprMode::kOracle);
    for (const auto& th : random_subset(grid, 1 + trial % 5, rng)) state.add(oracle_record(th));
    const double m = pb::pr_min(state, grid.points());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto b = pb::perf_bounds(state, grid[i]);
      EXPECT_LE(b.lb, prof.pr[i] + 1e-12);
      EXPECT_GE(b.ub, prof.pr[i] - 1e-12);
      // Any candidate that the bounds would discard is strictly suboptimal.
      EXPECT_GE(prof.delta(i), b.lb - m - 1e-12);
      if (b.lb > m + 1e-12) {
        EXPECT_GT(prof.delta(i), 0.0);
      }
    }
  }
}

TEST(ConfidenceInvariants, AddingDeploymentsTightensBounds) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::interval(120);
  std::mt19937_64 rng(17);
  pb::ConfidenceState state(env, 1.0, pb::DprMode::kOracle);
  state.add(oracle_record(grid[0]));
  std::vector<pb::Bounds> prev;
  for (const auto& q : grid.points()) prev.push_back(pb::perf_bounds(state, q));
  for (const auto& th : random_subset(grid, 8, rng)) {
    state.add(oracle_record(th));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto b = pb::perf_bounds(state, grid[i]);
      EXPECT_GE(b.lb, prev[i].lb);
      EXPECT_LE(b.ub, prev[i].ub);
      prev[i] = b;
    }
  }
}

TEST(ConfidenceState, GridCacheMatchesDirectQueries) {
  const auto env = pb::testing::nonconvex_location_family();
  const auto grid = pb::CandidateGrid::interval(31);
  pb::ConfidenceState state(env, 0.8, pb::DprMode::kEmpirical, &grid);
  state.add(sampled_record(env, grid[3], 50, 1));
  state.add(sampled_record(env, grid[20], 50, 2));
  for (std::size_t k = 0; k < state.size(); ++k) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      EXPECT_NEAR(state.dpr_grid(k, j), state.dpr(k, grid[j]), 1e-15);
      EXPECT_NEAR(state.dpr_grid(k, j),
                  pb::mean_loss_direct(env.loss(), state.deployed()[k].samples, grid[j]), 1e-12);
    }
  }
}
