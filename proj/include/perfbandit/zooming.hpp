#pragma once

// Brute-force band counts behind the zooming dimension and its sequential variant, on small
// finite instances. Templated on the scalar so that rational instances are evaluated exactly.
//
// Bands use alpha-scaled thresholds: near set {Delta <= 16 alpha s}, band
// {16 alpha r <= Delta < 32 alpha r}. Covers are drawn from the covered subset itself.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "perfbandit/core.hpp"
#include "perfbandit/errors.hpp"
#include "perfbandit/geometry.hpp"
#include "perfbandit/rational.hpp"
#include "perfbandit/rng.hpp"

namespace perfbandit {

template <class Scalar>
struct FiniteInstance {
  std::string name;
  std::vector<ParameterVector> points;      ///< for display; distances come from `dist`
  std::vector<Scalar> pr;
  std::vector<std::vector<Scalar>> dpr;     ///< dpr[i][j] = DPR(theta_i, theta_j)
  std::vector<std::vector<Scalar>> dist;    ///< dist[i][j] = |theta_i - theta_j|
  Scalar alpha{};                           ///< L_z * eps

  [[nodiscard]] std::size_t size() const { return pr.size(); }

  [[nodiscard]] Scalar min_pr() const { return *std::min_element(pr.begin(), pr.end()); }
  [[nodiscard]] Scalar delta(std::size_t i) const { return pr[i] - min_pr(); }

  void validate() const {
    const std::size_t n = pr.size();
    if (n == 0) throw ConfigError("finite instance has no points");
    if (dpr.size() != n || dist.size() != n) throw DimensionError("finite instance: matrix size");
    for (std::size_t i = 0; i < n; ++i) {
      if (dpr[i].size() != n || dist[i].size() != n) {
        throw DimensionError("finite instance: ragged matrix");
      }
      if (dpr[i][i] != pr[i]) throw ConfigError("finite instance: dpr diagonal differs from pr");
    }
    if (!points.empty() && points.size() != n) throw DimensionError("finite instance: points");
    if (alpha < Scalar(0)) throw ConfigError("finite instance: alpha must be >= 0");
  }
};

/// Constant distribution map: DPR(theta_i, theta_j) = PR(theta_j).
template <class Scalar>
FiniteInstance<Scalar> constant_map_instance(std::vector<ParameterVector> points,
                                             std::vector<Scalar> pr,
                                             std::vector<std::vector<Scalar>> dist, Scalar alpha,
                                             std::string name = "constant_map") {
  FiniteInstance<Scalar> inst;
  inst.name = std::move(name);
  inst.points = std::move(points);
  inst.pr = std::move(pr);
  inst.dist = std::move(dist);
  inst.alpha = alpha;
  inst.dpr.assign(inst.pr.size(), inst.pr);
  inst.validate();
  return inst;
}

/// Euclidean distance matrix of double-valued points.
inline std::vector<std::vector<double>> euclidean_distances(
    const std::vector<ParameterVector>& points) {
  std::vector<std::vector<double>> d(points.size(), std::vector<double>(points.size(), 0.0));
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) d[i][j] = (points[i] - points[j]).norm();
  }
  return d;
}

/// Three models at mutual distance 1/2 with PR = 0, 1/8, 15/64 under a constant map and
/// L_z eps = 1/32, plus a sentinel standing in for "PR = 1 elsewhere". The sentinel sits at
/// (-7/16, 0), where its distances to the three models are the rationals 7/16, 15/16, 13/16.
inline FiniteInstance<Rational> appendix_d_instance() {
  std::vector<ParameterVector> pts = {
      (Vector(2) << 0.0, 0.0).finished(),
      (Vector(2) << 0.5, 0.0).finished(),
      (Vector(2) << 0.25, std::sqrt(3.0) / 4.0).finished(),
      (Vector(2) << -7.0 / 16.0, 0.0).finished(),
  };
  const Rational h(1, 2);
  std::vector<std::vector<Rational>> dist = {
      {Rational(0), h, h, Rational(7, 16)},
      {h, Rational(0), h, Rational(15, 16)},
      {h, h, Rational(0), Rational(13, 16)},
      {Rational(7, 16), Rational(15, 16), Rational(13, 16), Rational(0)},
  };
  return constant_map_instance<Rational>(
      std::move(pts), {Rational(0), Rational(1, 8), Rational(15, 64), Rational(1)},
      std::move(dist), Rational(1, 32), "appendix_d");
}

inline constexpr std::size_t kMaxZoomingPoints = 14;
inline constexpr std::size_t kMaxSequentialCover = 8;

template <class Scalar>
bool in_band(const FiniteInstance<Scalar>& inst, std::size_t i, const Scalar& r) {
  const Scalar d = inst.delta(i);
  return Scalar(16) * inst.alpha * r <= d && d < Scalar(32) * inst.alpha * r;
}

struct BandCountResult {
  int count = 0;
  std::vector<std::size_t> subset;  ///< covered subset attaining the count
  std::vector<std::size_t> cover;   ///< minimal cover attaining the count
};

/// Largest number of band members in a minimal s-cover of a subset of the near set, over all
/// subsets and all minimal covers.
template <class Scalar>
BandCountResult zooming_band_count(const FiniteInstance<Scalar>& inst, const Scalar& s,
                                   const Scalar& r) {
  inst.validate();
  if (inst.size() > kMaxZoomingPoints) {
    throw SizeLimitError("zooming_band_count enumerates at most " +
                         std::to_string(kMaxZoomingPoints) + " points");
  }
  std::vector<std::size_t> near;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (inst.delta(i) <= Scalar(16) * inst.alpha * s) near.push_back(i);
  }
  BandCountResult best;
  const std::uint32_t subsets = 1U << near.size();
  for (std::uint32_t mask = 1; mask < subsets; ++mask) {
    std::vector<std::size_t> subset;
    for (std::size_t k = 0; k < near.size(); ++k) {
      if ((mask >> k) & 1U) subset.push_back(near[k]);
    }
    std::vector<std::uint32_t> covers(subset.size(), 0);
    for (std::size_t a = 0; a < subset.size(); ++a) {
      for (std::size_t b = 0; b < subset.size(); ++b) {
        if (inst.dist[subset[a]][subset[b]] <= s) covers[a] |= (1U << b);
      }
    }
    for (const auto& cover : minimum_covers_from_masks(covers)) {
      int count = 0;
      for (auto local : cover) count += in_band(inst, subset[local], r) ? 1 : 0;
      if (best.cover.empty() || count > best.count) {
        best.count = count;
        best.subset = subset;
        best.cover.clear();
        for (auto local : cover) best.cover.push_back(subset[local]);
      }
    }
  }
  return best;
}

/// How PR_min is formed from the first k-1 deployments of an ordering.
enum class PrMinScope {
  /// min over deployed theta of the upper bound at theta: the counting used in the worked
  /// example (PR_min = 1/8 once theta_1 is deployed).
  kDeployed,
  /// min over every instance point, as the sequential definition reads literally.
  kGlobal,
};

/// PR_LB(theta_j) contributed by a single deployment of theta_i.
template <class Scalar>
Scalar pairwise_lower_bound(const FiniteInstance<Scalar>& inst, std::size_t deployed,
                            std::size_t query) {
  return inst.dpr[deployed][query] - inst.alpha * inst.dist[deployed][query];
}

/// Number of band members theta of the cover, in the given deployment order, that satisfy
/// PR^s_LB(pi(theta)) <= PR_min(pi(theta)) + 4 alpha s. The first point always qualifies.
template <class Scalar>
int sequential_count_for_order(const FiniteInstance<Scalar>& inst,
                               const std::vector<std::size_t>& order, const Scalar& s,
                               const Scalar& r, PrMinScope scope) {
  int count = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t theta = order[k];
    if (!in_band(inst, theta, r)) continue;
    if (k == 0) {
      ++count;
      continue;
    }
    std::optional<Scalar> lb_ball;
    for (std::size_t q = 0; q < inst.size(); ++q) {
      if (inst.dist[theta][q] > s) continue;
      std::optional<Scalar> lb;
      for (std::size_t i = 0; i < k; ++i) {
        const Scalar v = pairwise_lower_bound(inst, order[i], q);
        if (!lb || v > *lb) lb = v;
      }
      if (!lb_ball || *lb < *lb_ball) lb_ball = lb;
    }
    std::optional<Scalar> pr_min;
    auto consider = [&](std::size_t q) {
      for (std::size_t i = 0; i < k; ++i) {
        const Scalar v = inst.dpr[order[i]][q] + inst.alpha * inst.dist[order[i]][q];
        if (!pr_min || v < *pr_min) pr_min = v;
      }
    };
    if (scope == PrMinScope::kGlobal) {
      for (std::size_t q = 0; q < inst.size(); ++q) consider(q);
    } else {
      for (std::size_t i = 0; i < k; ++i) consider(order[i]);
    }
    if (*lb_ball <= *pr_min + Scalar(4) * inst.alpha * s) ++count;
  }
  return count;
}

/// Expected count over a uniformly random ordering of the cover, by exhaustive enumeration.
template <class Scalar>
Scalar sequential_band_count(const FiniteInstance<Scalar>& inst, std::vector<std::size_t> cover,
                             const Scalar& s, const Scalar& r,
                             PrMinScope scope = PrMinScope::kDeployed) {
  inst.validate();
  if (cover.empty()) throw std::invalid_argument("sequential_band_count: empty cover");
  if (cover.size() > kMaxSequentialCover) {
    throw SizeLimitError("sequential_band_count enumerates orderings of at most " +
                         std::to_string(kMaxSequentialCover) + " points");
  }
  for (auto c : cover) {
    if (c >= inst.size()) throw std::out_of_range("sequential_band_count: cover index");
  }
  std::sort(cover.begin(), cover.end());
  std::int64_t total = 0;
  std::int64_t orderings = 0;
  do {
    total += sequential_count_for_order(inst, cover, s, r, scope);
    ++orderings;
  } while (std::next_permutation(cover.begin(), cover.end()));
  return Scalar(total) / Scalar(orderings);
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Same expectation estimated from random orderings.
template <class Scalar>
MonteCarloEstimate sequential_band_count_mc(const FiniteInstance<Scalar>& inst,
                                            std::vector<std::size_t> cover, const Scalar& s,
                                            const Scalar& r, std::size_t draws, Rng& rng,
                                            PrMinScope scope = PrMinScope::kDeployed) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    std::shuffle(cover.begin(), cover.end(), rng);
    const double c = sequential_count_for_order(inst, cover, s, r, scope);
    sum += c;
    sum_sq += c * c;
  }
  const double n = static_cast<double>(draws);
  MonteCarloEstimate out;
  out.mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - out.mean * out.mean) * n / std::max(1.0, n - 1.0);
  out.std_error = std::sqrt(var / n);
  return out;
}

// ---------------------------------------------------------------------------------------
// Dimension report
// ---------------------------------------------------------------------------------------

struct BandEntry {
  std::string label;
  double s = 0.0;
  double r = 0.0;
  double count = 0.0;
  std::optional<double> s_limit;  ///< report log(count) / log(3 / s_limit) as well
};

struct DimensionEntry {
  BandEntry band;
  std::optional<double> d_est;    ///< empty when count = 0 (a -infinity band, skipped)
  std::optional<double> d_limit;
};

/// d_est = log(count) / log(3 / s) per band.
inline std::vector<DimensionEntry> dimension_report(const std::vector<BandEntry>& bands) {
  std::vector<DimensionEntry> out;
  for (const auto& b : bands) {
    DimensionEntry e;
    e.band = b;
    if (b.count > 0.0) {
      e.d_est = std::log(b.count) / std::log(3.0 / b.s);
      if (b.s_limit) e.d_limit = std::log(b.count) / std::log(3.0 / *b.s_limit);
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace perfbandit
