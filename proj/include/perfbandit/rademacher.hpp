#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>

#include "perfbandit/core.hpp"
#include "perfbandit/rng.hpp"

namespace perfbandit {

/// Monte-Carlo proxy for the complexity bound: for each anchor theta, average over `reps`
/// draws of sqrt(n) * sup_{theta'} |(1/n) sum_j sign_j l(z_j; theta')| with z_j ~ D(theta),
/// and take the largest average. The sup runs over `candidates`, so this is a lower estimate
/// of the true quantity; use it to pick a plausible bound, not as a certificate.
inline double estimate_rademacher_proxy(const Environment& env,
                                        std::span<const ParameterVector> candidates,
                                        std::span<const ParameterVector> anchors, std::size_t n,
                                        std::size_t reps, Rng& rng) {
  if (n == 0 || reps == 0 || candidates.empty() || anchors.empty()) return 0.0;
  std::bernoulli_distribution coin(0.5);
  double worst = 0.0;
  for (const auto& anchor : anchors) {
    double acc = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const SampleSet z = env.sample(anchor, n, rng);
      std::vector<double> signs(n);
      for (auto& s : signs) s = coin(rng) ? 1.0 : -1.0;
      double sup = 0.0;
      for (const auto& theta : candidates) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          sum += signs[j] * env.loss().eval(z.col(static_cast<Eigen::Index>(j)), theta);
        }
        sup = std::max(sup, std::abs(sum) / static_cast<double>(n));
      }
      acc += sup;
    }
    worst = std::max(worst, std::sqrt(static_cast<double>(n)) * acc / static_cast<double>(reps));
  }
  return worst;
}

}  // namespace perfbandit
