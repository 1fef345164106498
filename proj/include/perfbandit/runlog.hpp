#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "perfbandit/core.hpp"

namespace perfbandit {

struct StepRecord {
  std::int64_t step = 0;  ///< 1-based
  int phase = 0;
  std::size_t candidate = 0;  ///< index into the candidate grid
  ParameterVector theta;
  std::optional<double> delta;  ///< PR(theta) - min PR over the grid, when an oracle exists
  double cum_regret = std::numeric_limits<double>::quiet_NaN();
};

struct PhaseRecord {
  int phase = 0;
  double gamma = 0.0;
  double radius = 0.0;
  std::int64_t steps_per_deployment = 0;
  std::vector<std::size_t> net;       ///< phase-initial net (candidate indices)
  std::vector<std::size_t> deployed;  ///< deployment order (candidate indices)
  std::size_t eliminated = 0;
  std::size_t alive_after = 0;
  std::vector<char> alive_snapshot;  ///< active set when the phase ended
  bool truncated = false;            ///< step budget ran out inside the phase
};

/// Extra state reported by the ellipsoid learner.
struct EstimatorTrace {
  Matrix final_mu_hat;
  double radius = 0.0;
  std::vector<char> membership;  ///< mu* in C_t, for t = 1..T (empty without mu*)
  double max_normal_residual = 0.0;
  double min_sigma_eigenvalue = 0.0;
};

struct RunLog {
  std::string algorithm;
  std::uint64_t seed = 0;
  int dim_theta = 0;
  std::int64_t horizon = 0;
  std::vector<StepRecord> steps;
  std::vector<PhaseRecord> phases;
  std::optional<ParameterVector> final_iterate;
  std::optional<EstimatorTrace> estimator;

  [[nodiscard]] double total_regret() const {
    return steps.empty() ? 0.0 : steps.back().cum_regret;
  }

  /// Mean instantaneous regret over steps [begin, end) (0-based positions).
  [[nodiscard]] double mean_delta(std::size_t begin, std::size_t end) const {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = begin; i < end && i < steps.size(); ++i) {
      if (steps[i].delta) {
        acc += *steps[i].delta;
        ++n;
      }
    }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : acc / static_cast<double>(n);
  }

  /// Cumulative regret after the given number of steps.
  [[nodiscard]] double regret_at(std::size_t step_count) const {
    if (step_count == 0 || steps.empty()) return 0.0;
    return steps[std::min(step_count, steps.size()) - 1].cum_regret;
  }
};

/// Appends a step and keeps the cumulative regret as the prefix sum of deltas.
inline void append_step(RunLog& log, int phase, std::size_t candidate,
                        const ParameterVector& theta, std::optional<double> delta) {
  StepRecord rec;
  rec.step = static_cast<std::int64_t>(log.steps.size()) + 1;
  rec.phase = phase;
  rec.candidate = candidate;
  rec.theta = theta;
  rec.delta = delta;
  const double prev = log.steps.empty() ? 0.0 : log.steps.back().cum_regret;
  rec.cum_regret = delta ? prev + *delta : std::numeric_limits<double>::quiet_NaN();
  log.steps.push_back(std::move(rec));
}

}  // namespace perfbandit
