#pragma once

// Phased net elimination with performative confidence bounds.
//
// Phase p: tolerance gamma_p = 2^-p, net radius r_p = gamma_p / L, n_p steps per deployment.
// Net points are drawn uniformly from S_p and deployed; after each deployment the active set
// drops every candidate whose lower bound exceeds PR_min + 2 gamma_p, and S_p drops net points
// whose r_p-ball no longer meets the active set. The deployed set P_p is reset every phase.
//
// The same loop with Lipschitz (zeroth-order) bounds is the baseline; see baseline.hpp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "perfbandit/confidence.hpp"
#include "perfbandit/core.hpp"
#include "perfbandit/geometry.hpp"
#include "perfbandit/rng.hpp"
#include "perfbandit/runlog.hpp"

namespace perfbandit {

struct PhaseSchedule {
  int p = 0;
  double gamma = 1.0;
  double radius = std::numeric_limits<double>::infinity();
  std::int64_t steps_per_deployment = 1;  ///< n_p
};

/// n_p = ceil((2B + 3 sqrt(log T))^2 / (gamma^2 m0)), before clamping to the horizon.
inline double phase_steps(double gamma, std::int64_t m0, double rademacher_bound, double log_t) {
  const double width = 2.0 * rademacher_bound + 3.0 * std::sqrt(std::max(0.0, log_t));
  return std::ceil(width * width / (gamma * gamma * static_cast<double>(m0)));
}

/// Schedule for phase p with Lipschitz constant `lipschitz` (L_z eps for the performative
/// learner). A zero constant gives an infinite radius: the net is a single point.
inline PhaseSchedule phase_params(int p, const ProblemConfig& cfg, double lipschitz) {
  if (p < 0) throw std::invalid_argument("phase index must be >= 0");
  PhaseSchedule s;
  s.p = p;
  s.gamma = std::ldexp(1.0, -p);
  s.radius = lipschitz > 0.0 ? s.gamma / lipschitz : std::numeric_limits<double>::infinity();
  const double n = phase_steps(s.gamma, cfg.m0, cfg.rademacher_bound,
                               std::log(static_cast<double>(cfg.horizon)));
  // Anything past the horizon is equivalent to the horizon.
  const double cap = static_cast<double>(cfg.horizon);
  s.steps_per_deployment = static_cast<std::int64_t>(std::clamp(n, 1.0, std::max(1.0, cap)));
  return s;
}

inline PhaseSchedule phase_params(int p, const ProblemConfig& cfg) {
  return phase_params(p, cfg, cfg.lz_eps());
}

struct ActiveSet {
  std::vector<char> alive;

  explicit ActiveSet(std::size_t n = 0) : alive(n, 1) {}

  [[nodiscard]] std::size_t count() const {
    return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), 1));
  }
  [[nodiscard]] std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      if (alive[i] != 0) out.push_back(i);
    }
    return out;
  }
};

enum class BoundFamily {
  kPerformative,  ///< DPR-hat of every deployment at every candidate
  kLipschitz,     ///< PR-hat of deployments only
};

struct PhasedOptions {
  BoundFamily family = BoundFamily::kPerformative;
  double lipschitz = 0.0;  ///< L_z eps (performative) or L_pr (Lipschitz)
  DprMode mode = DprMode::kEmpirical;
  std::string algorithm = "pcb";
};

/// Picks the next net point to deploy from the remaining S_p (candidate indices).
using NetSelector = std::function<std::size_t(std::span<const std::size_t>, Rng&)>;

inline std::size_t uniform_selector(std::span<const std::size_t> remaining, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
  return remaining[pick(rng)];
}

/// One run of the phased elimination loop. Holds the active set, the step counter and the
/// log; run() iterates phases until the horizon is spent.
class PhasedEliminationRunner {
 public:
  PhasedEliminationRunner(const ProblemConfig& cfg, const Environment& env,
                          const CandidateGrid& grid, PhasedOptions opts)
      : cfg_(cfg),
        env_(&env),
        grid_(&grid),
        opts_(std::move(opts)),
        active_(grid.size()),
        state_(env, opts_.lipschitz, opts_.mode, &grid),
        selection_rng_(make_stream(cfg.seed, StreamTag::kNetSelection, 0)),
        selector_(uniform_selector) {
    cfg_.validate();
    if (grid.dim() != env.dim_theta()) {
      throw DimensionError("candidate grid has dimension " + std::to_string(grid.dim()) +
                           ", environment expects " + std::to_string(env.dim_theta()));
    }
    if (!(opts_.lipschitz >= 0.0)) throw ConfigError("Lipschitz constant must be >= 0");
    if (env.has_oracle()) oracle_ = oracle_profile(env, grid);
    log_.algorithm = opts_.algorithm;
    log_.seed = cfg.seed;
    log_.dim_theta = env.dim_theta();
    log_.horizon = cfg.horizon;
  }

  void set_selector(NetSelector selector) { selector_ = std::move(selector); }

  [[nodiscard]] const ActiveSet& active() const { return active_; }
  void set_active(ActiveSet active) {
    if (active.alive.size() != grid_->size()) throw std::invalid_argument("active set size");
    active_ = std::move(active);
  }
  [[nodiscard]] const RunLog& log() const { return log_; }
  [[nodiscard]] std::int64_t steps_used() const {
    return static_cast<std::int64_t>(log_.steps.size());
  }
  [[nodiscard]] bool budget_left() const { return steps_used() < cfg_.horizon; }
  [[nodiscard]] const std::optional<OracleProfile>& oracle() const { return oracle_; }

  [[nodiscard]] PhaseSchedule schedule(int p) const { return phase_params(p, cfg_, opts_.lipschitz); }

  /// Runs one phase with the given schedule and returns its record.
  PhaseRecord run_phase(const PhaseSchedule& sched) {
    if (active_.count() == 0) throw std::logic_error("run_phase: active set is empty");
    PhaseRecord rec;
    rec.phase = sched.p;
    rec.gamma = sched.gamma;
    rec.radius = sched.radius;
    rec.steps_per_deployment = sched.steps_per_deployment;

    const auto alive_idx = active_.indices();
    std::vector<ParameterVector> alive_pts;
    alive_pts.reserve(alive_idx.size());
    for (auto i : alive_idx) alive_pts.push_back((*grid_)[i]);
    const Net net = greedy_net(alive_pts, sched.radius);
    std::vector<std::size_t> remaining;
    for (auto k : net.indices) remaining.push_back(alive_idx[k]);
    rec.net = remaining;

    state_.clear();
    const std::size_t n = grid_->size();
    std::vector<double> lb(n, -std::numeric_limits<double>::infinity());
    double pr_min_value = std::numeric_limits<double>::infinity();

    while (!remaining.empty()) {
      if (!budget_left()) {
        rec.truncated = true;
        break;
      }
      const std::size_t chosen = selector_(remaining, selection_rng_);
      const auto it = std::find(remaining.begin(), remaining.end(), chosen);
      if (it == remaining.end()) throw std::logic_error("selector returned a point outside S_p");
      remaining.erase(it);

      const bool complete = deploy(chosen, sched, rec);
      rec.deployed.push_back(chosen);
      if (!complete) {
        rec.truncated = true;
        break;
      }

      // Fold the new deployment into PR_min and the lower bounds.
      const std::size_t k = state_.size() - 1;
      const double self_risk = state_.dpr_grid(k, chosen);
      for (std::size_t j = 0; j < n; ++j) {
        const double value = opts_.family == BoundFamily::kPerformative ? state_.dpr_grid(k, j)
                                                                         : self_risk;
        const double slack = opts_.lipschitz * state_.dist_grid(k, j);
        pr_min_value = std::min(pr_min_value, value + slack);
        lb[j] = std::max(lb[j], value - slack);
      }
      eliminate(lb, pr_min_value + 2.0 * sched.gamma, rec);

      // Drop net points whose r_p-ball holds no active candidate.
      std::erase_if(remaining, [&](std::size_t s) {
        for (std::size_t j = 0; j < n; ++j) {
          if (active_.alive[j] != 0 && ((*grid_)[j] - (*grid_)[s]).norm() <= sched.radius) {
            return false;
          }
        }
        return true;
      });
    }
    rec.alive_after = active_.count();
    rec.alive_snapshot = active_.alive;
    log_.phases.push_back(rec);
    return rec;
  }

  /// Phases p = 0, 1, ... until T steps are consumed.
  RunLog run() {
    for (int p = 0; budget_left(); ++p) {
      run_phase(schedule(p));
    }
    if (!log_.steps.empty()) log_.final_iterate = log_.steps.back().theta;
    return log_;
  }

 private:
  /// Deploys grid[chosen] for up to n_p steps; returns false if the budget ran out first.
  bool deploy(std::size_t chosen, const PhaseSchedule& sched, PhaseRecord& rec) {
    const auto& theta = (*grid_)[chosen];
    DeploymentRecord dep;
    dep.theta = theta;
    dep.phase = rec.phase;
    dep.first_step = steps_used() + 1;
    const bool empirical = opts_.mode == DprMode::kEmpirical;
    std::vector<SampleSet> chunks;
    std::int64_t done = 0;
    for (; done < sched.steps_per_deployment && budget_left(); ++done) {
      const auto t = static_cast<std::uint64_t>(steps_used() + 1);
      if (empirical) {
        Rng rng = make_stream(cfg_.seed, StreamTag::kStepSamples, t);
        chunks.push_back(env_->sample(theta, static_cast<std::size_t>(cfg_.m0), rng));
      }
      std::optional<double> delta;
      if (oracle_) delta = oracle_->delta(chosen);
      append_step(log_, rec.phase, chosen, theta, delta);
    }
    dep.last_step = steps_used();
    if (done < sched.steps_per_deployment) return false;
    if (empirical) {
      dep.samples.resize(env_->dim_z(), static_cast<Eigen::Index>(done * cfg_.m0));
      Eigen::Index col = 0;
      for (const auto& c : chunks) {
        dep.samples.middleCols(col, c.cols()) = c;
        col += c.cols();
      }
    }
    state_.add(std::move(dep));
    return true;
  }

  void eliminate(const std::vector<double>& lb, double threshold, PhaseRecord& rec) {
    std::vector<std::size_t> doomed;
    for (std::size_t j = 0; j < lb.size(); ++j) {
      if (active_.alive[j] != 0 && lb[j] > threshold) doomed.push_back(j);
    }
    if (doomed.size() == active_.count()) {
      // Never empty the active set: keep the candidates with the smallest lower bound.
      double best = std::numeric_limits<double>::infinity();
      for (auto j : doomed) best = std::min(best, lb[j]);
      std::erase_if(doomed, [&](std::size_t j) { return lb[j] == best; });
    }
    for (auto j : doomed) active_.alive[j] = 0;
    rec.eliminated += doomed.size();
  }

  ProblemConfig cfg_;
  const Environment* env_;
  const CandidateGrid* grid_;
  PhasedOptions opts_;
  ActiveSet active_;
  ConfidenceState state_;
  Rng selection_rng_;
  NetSelector selector_;
  std::optional<OracleProfile> oracle_;
  RunLog log_;
};

/// Performative confidence bounds learner with L = cfg.L_z * cfg.eps.
inline RunLog run_pcb(const ProblemConfig& cfg, const Environment& env, const CandidateGrid& grid,
                      DprMode mode = DprMode::kEmpirical) {
  PhasedOptions opts;
  opts.family = BoundFamily::kPerformative;
  opts.lipschitz = cfg.lz_eps();
  opts.mode = mode;
  opts.algorithm = "pcb";
  PhasedEliminationRunner runner(cfg, env, grid, opts);
  return runner.run();
}

}  // namespace perfbandit
