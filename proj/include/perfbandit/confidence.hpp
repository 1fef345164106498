#pragma once

// DPR estimation and the two confidence-bound families.
//
//   performative:  max_k DPR(theta_k, theta') - L_z eps |theta_k - theta'|  <=  PR(theta')
//                  PR(theta') <= min_k DPR(theta_k, theta') + L_z eps |theta_k - theta'|
//   Lipschitz:     same with PR(theta_k) in place of DPR(theta_k, theta') and L_pr for L_z eps.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "perfbandit/core.hpp"
#include "perfbandit/geometry.hpp"

namespace perfbandit {

enum class DprMode {
  kOracle,     ///< DPR queries go to the environment's exact oracle (testing).
  kEmpirical,  ///< DPR queries average the loss over the deployment's samples.
};

struct DeploymentRecord {
  ParameterVector theta;
  SampleSet samples;  ///< empty in oracle mode
  int phase = 0;
  std::int64_t first_step = 0;
  std::int64_t last_step = 0;
  std::optional<Moments> moments;  ///< sample moments, cached for moment-based losses

  void cache_moments() {
    if (samples.cols() > 0) moments = Moments::of(samples);
  }
};

/// Mean of l(z; theta_prime) over the record's samples.
inline double empirical_dpr(const DeploymentRecord& record, const ParameterVector& theta_prime,
                            const LossFunction& loss) {
  if (record.samples.cols() == 0) {
    throw std::invalid_argument("empirical_dpr: deployment record holds no samples");
  }
  if (record.moments) {
    if (auto v = loss.mean_from_moments(*record.moments, theta_prime)) return *v;
  }
  return mean_loss_direct(loss, record.samples, theta_prime);
}

struct Bounds {
  double lb = -std::numeric_limits<double>::infinity();
  double ub = std::numeric_limits<double>::infinity();
};

/// Running set of deployed models. Append-only; queries are read-only.
///
/// When a candidate grid is attached, every appended record also gets its DPR row over the
/// grid precomputed, which is what the phased algorithms query.
class ConfidenceState {
 public:
  ConfidenceState(const Environment& env, double lz_eps, DprMode mode,
                  const CandidateGrid* grid = nullptr)
      : env_(&env), lz_eps_(lz_eps), mode_(mode), grid_(grid) {
    if (!(lz_eps >= 0.0)) throw std::invalid_argument("L_z * eps must be >= 0");
    if (mode == DprMode::kOracle && !env.has_oracle()) {
      throw std::invalid_argument("oracle mode requested but environment '" + env.kind() +
                                  "' has no exact DPR oracle");
    }
  }

  void add(DeploymentRecord record) {
    if (mode_ == DprMode::kEmpirical) {
      if (record.samples.cols() == 0) {
        throw std::invalid_argument("empirical mode requires samples in every record");
      }
      record.cache_moments();
    }
    records_.push_back(std::move(record));
    if (grid_ != nullptr) {
      const auto& rec = records_.back();
      std::vector<double> row(grid_->size());
      std::vector<double> dist(grid_->size());
      for (std::size_t j = 0; j < grid_->size(); ++j) {
        row[j] = dpr_uncached(rec, (*grid_)[j]);
        dist[j] = (rec.theta - (*grid_)[j]).norm();
      }
      rows_.push_back(std::move(row));
      dists_.push_back(std::move(dist));
    }
  }

  void clear() {
    records_.clear();
    rows_.clear();
    dists_.clear();
  }

  [[nodiscard]] std::size_t size() const { return records_.size(); }
  [[nodiscard]] bool empty() const { return records_.empty(); }
  [[nodiscard]] const std::vector<DeploymentRecord>& deployed() const { return records_; }
  [[nodiscard]] double lz_eps() const { return lz_eps_; }
  [[nodiscard]] DprMode mode() const { return mode_; }
  [[nodiscard]] const Environment& env() const { return *env_; }
  [[nodiscard]] const CandidateGrid* grid() const { return grid_; }

  /// DPR(theta_k, theta) for the k-th deployed model, routed by mode.
  [[nodiscard]] double dpr(std::size_t k, const ParameterVector& theta) const {
    return dpr_uncached(records_.at(k), theta);
  }

  /// Cached DPR(theta_k, grid[j]); requires an attached grid.
  [[nodiscard]] double dpr_grid(std::size_t k, std::size_t j) const { return rows_[k][j]; }
  [[nodiscard]] double dist_grid(std::size_t k, std::size_t j) const { return dists_[k][j]; }

  /// PR-hat(theta_k) = DPR-hat(theta_k, theta_k).
  [[nodiscard]] double pr_hat(std::size_t k) const { return dpr(k, records_.at(k).theta); }

 private:
  [[nodiscard]] double dpr_uncached(const DeploymentRecord& rec,
                                    const ParameterVector& theta) const {
    if (mode_ == DprMode::kOracle) return env_->oracle_dpr(rec.theta, theta);
    return empirical_dpr(rec, theta, env_->loss());
  }

  const Environment* env_;
  double lz_eps_;
  DprMode mode_;
  const CandidateGrid* grid_;
  std::vector<DeploymentRecord> records_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::vector<double>> dists_;
};

inline void require_deployments(const ConfidenceState& state, const char* what) {
  if (state.empty()) throw std::invalid_argument(std::string(what) + ": no deployed models");
}

/// Performative confidence bounds at theta_prime.
inline Bounds perf_bounds(const ConfidenceState& state, const ParameterVector& theta_prime) {
  require_deployments(state, "perf_bounds");
  Bounds b;
  for (std::size_t k = 0; k < state.size(); ++k) {
    const double d = state.lz_eps() * (state.deployed()[k].theta - theta_prime).norm();
    const double v = state.dpr(k, theta_prime);
    b.lb = std::max(b.lb, v - d);
    b.ub = std::min(b.ub, v + d);
  }
  return b;
}

/// Zeroth-order bounds: only PR-hat of the deployed models, Lipschitz constant L_pr.
inline Bounds baseline_bounds(const ConfidenceState& state, const ParameterVector& theta_prime,
                              double lipschitz_pr) {
  require_deployments(state, "baseline_bounds");
  if (!(lipschitz_pr >= 0.0)) throw std::invalid_argument("baseline_bounds: L_pr must be >= 0");
  Bounds b;
  for (std::size_t k = 0; k < state.size(); ++k) {
    const double d = lipschitz_pr * (state.deployed()[k].theta - theta_prime).norm();
    const double v = state.pr_hat(k);
    b.lb = std::max(b.lb, v - d);
    b.ub = std::min(b.ub, v + d);
  }
  return b;
}

/// Upper confidence bound on the optimal risk: min over candidates of the performative upper
/// bound.
inline double pr_min(const ConfidenceState& state, std::span<const ParameterVector> candidates) {
  require_deployments(state, "pr_min");
  if (candidates.empty()) throw std::invalid_argument("pr_min: no candidates");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) best = std::min(best, perf_bounds(state, c).ub);
  return best;
}

/// Net-cover estimate: DPR-hat from the nearest net point (lowest index on ties).
/// `records` holds one deployment per net point, in net order.
inline double cover_estimate(const Net& net, std::span<const ParameterVector> universe,
                             const ConfidenceState& records, const ParameterVector& theta) {
  if (records.size() != net.size()) {
    throw std::invalid_argument("cover_estimate: every net point needs a deployment record");
  }
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < net.size(); ++k) {
    const double d = (universe[net.indices[k]] - theta).norm();
    if (d < best) {
      best = d;
      nearest = k;
    }
  }
  if ((records.deployed()[nearest].theta - universe[net.indices[nearest]]).norm() != 0.0) {
    throw std::invalid_argument("cover_estimate: record does not match its net point");
  }
  return records.dpr(nearest, theta);
}

/// Largest slope |DPR(phi, a) - DPR(phi, b)| / |a - b| over all candidate pairs, for anchors
/// phi. A numerical stand-in for L_theta on a finite grid.
inline double measure_theta_lipschitz(const Environment& env,
                                      std::span<const ParameterVector> points,
                                      std::span<const ParameterVector> anchors) {
  double worst = 0.0;
  std::vector<double> values(points.size());
  for (const auto& phi : anchors) {
    for (std::size_t i = 0; i < points.size(); ++i) values[i] = env.oracle_dpr(phi, points[i]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        const double d = (points[i] - points[j]).norm();
        if (d > 0.0) worst = std::max(worst, std::abs(values[i] - values[j]) / d);
      }
    }
  }
  return worst;
}

/// Largest slope of PR itself over all candidate pairs.
inline double measure_pr_lipschitz(const Environment& env,
                                   std::span<const ParameterVector> points) {
  std::vector<double> values(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) values[i] = env.oracle_pr(points[i]);
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = (points[i] - points[j]).norm();
      if (d > 0.0) worst = std::max(worst, std::abs(values[i] - values[j]) / d);
    }
  }
  return worst;
}

}  // namespace perfbandit
