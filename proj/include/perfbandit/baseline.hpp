#pragma once

// Zeroth-order Lipschitz baseline: the phased elimination loop of pcb.hpp driven by
// PR-hat of deployed models only, with L_pr = L_theta + L_z eps. Nets are correspondingly
// finer (r_p = gamma_p / L_pr), so the comparison isolates the bound family.

#include <stdexcept>

#include "perfbandit/pcb.hpp"

namespace perfbandit {

inline double baseline_lipschitz(const ProblemConfig& cfg, double lipschitz_theta) {
  return lipschitz_theta + cfg.lz_eps();
}

inline RunLog run_baseline(const ProblemConfig& cfg, const Environment& env,
                           const CandidateGrid& grid, double lipschitz_theta,
                           DprMode mode = DprMode::kEmpirical) {
  if (!(lipschitz_theta >= 0.0)) throw ConfigError("baseline: L_theta must be >= 0");
  PhasedOptions opts;
  opts.family = BoundFamily::kLipschitz;
  opts.lipschitz = baseline_lipschitz(cfg, lipschitz_theta);
  opts.mode = mode;
  opts.algorithm = "baseline";
  PhasedEliminationRunner runner(cfg, env, grid, opts);
  return runner.run();
}

}  // namespace perfbandit
