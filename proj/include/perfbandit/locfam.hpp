#pragma once

// Lower-confidence-bound learner for location families z = z0 + mu*^T theta.
//
// Ridge estimate of mu* from per-step sample means, an ellipsoidal confidence set around it,
// and deployment of the candidate with the smallest certified lower bound on PR.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "perfbandit/core.hpp"
#include "perfbandit/rng.hpp"
#include "perfbandit/runlog.hpp"

namespace perfbandit {

enum class RadiusVariant {
  kCovering,      ///< 8m term from the covering argument over the unit ball of R^m
  kAlgorithmBox,  ///< 8 m0 term, as printed in the algorithm listing
};

/// (M* + sqrt(8m + 8 log T + 2 d log(1 + T m0 / d))) / sqrt(m0); the 8m term becomes 8 m0
/// under kAlgorithmBox.
inline double confidence_radius(double m_star, std::int64_t m0, int m, int d_theta,
                                double horizon,
                                RadiusVariant variant = RadiusVariant::kCovering) {
  if (m0 < 1 || m < 1 || d_theta < 1 || !(horizon >= 1.0)) {
    throw std::invalid_argument("confidence_radius: dimensions and counts must be positive");
  }
  if (!(m_star >= 0.0)) throw std::invalid_argument("confidence_radius: M* must be >= 0");
  const double first = variant == RadiusVariant::kCovering ? 8.0 * m : 8.0 * static_cast<double>(m0);
  const double t = horizon;
  const double d = d_theta;
  const double inner = first + 8.0 * std::log(t) +
                       2.0 * d * std::log(1.0 + t * static_cast<double>(m0) / d);
  return (m_star + std::sqrt(inner)) / std::sqrt(static_cast<double>(m0));
}

/// Sigma_t = sum theta_i theta_i^T + I / m0 and mu_hat = Sigma_t^{-1} sum theta_i zbar_i^T.
class LinearEstimatorState {
 public:
  LinearEstimatorState(int dim_theta, int dim_z, std::int64_t m0)
      : m0_(m0),
        sigma_(Matrix::Identity(dim_theta, dim_theta) / static_cast<double>(m0)),
        cross_(Matrix::Zero(dim_theta, dim_z)),
        mu_hat_(Matrix::Zero(dim_theta, dim_z)) {
    if (m0 < 1) throw std::invalid_argument("m0 must be >= 1");
    refactor();
  }

  void update(const ParameterVector& theta, const Vector& zbar) {
    if (theta.size() != sigma_.rows() || zbar.size() != cross_.cols()) {
      throw DimensionError("estimator update: dimension mismatch");
    }
    sigma_.noalias() += theta * theta.transpose();
    cross_.noalias() += theta * zbar.transpose();
    refactor();
    mu_hat_ = llt_.solve(cross_);
    thetas_.push_back(theta);
    zbars_.push_back(zbar);
  }

  [[nodiscard]] std::int64_t t() const { return static_cast<std::int64_t>(thetas_.size()); }
  [[nodiscard]] std::int64_t m0() const { return m0_; }
  [[nodiscard]] const Matrix& sigma() const { return sigma_; }
  [[nodiscard]] const Matrix& mu_hat() const { return mu_hat_; }
  [[nodiscard]] const Matrix& cross() const { return cross_; }
  [[nodiscard]] const std::vector<ParameterVector>& thetas() const { return thetas_; }
  [[nodiscard]] const std::vector<Vector>& zbars() const { return zbars_; }

  /// ||Sigma^{-1/2} theta|| = sqrt(theta^T Sigma^{-1} theta).
  [[nodiscard]] double inverse_norm(const ParameterVector& theta) const {
    return std::sqrt(std::max(0.0, theta.dot(llt_.solve(theta))));
  }

  /// ||Sigma mu_hat - cross|| / ||cross||, the normal-equation residual.
  [[nodiscard]] double normal_residual() const {
    const double scale = cross_.norm();
    if (scale == 0.0) return (sigma_ * mu_hat_).norm();
    return (sigma_ * mu_hat_ - cross_).norm() / scale;
  }

  [[nodiscard]] double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
  }

 private:
  void refactor() { llt_.compute(sigma_); }

  std::int64_t m0_;
  Matrix sigma_;
  Matrix cross_;
  Matrix mu_hat_;
  Eigen::LLT<Matrix> llt_;
  std::vector<ParameterVector> thetas_;
  std::vector<Vector> zbars_;
};

/// {mu : ||Sigma^{1/2} (mu - center)||_op < radius}.
struct ConfidenceEllipsoid {
  Matrix center;
  Matrix sigma;
  double radius = 0.0;

  /// ||Sigma^{1/2} (mu - center)||_op = sqrt(lambda_max(D^T Sigma D)), D = mu - center.
  [[nodiscard]] double scaled_distance(const Matrix& mu) const {
    const Matrix diff = mu - center;
    const Matrix gram = diff.transpose() * sigma * diff;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
  }

  [[nodiscard]] bool contains(const Matrix& mu) const { return scaled_distance(mu) < radius; }
};

inline ConfidenceEllipsoid ellipsoid_of(const LinearEstimatorState& state, double radius) {
  return {state.mu_hat(), state.sigma(), radius};
}

/// Reference sample standing in for the known base distribution D0.
struct ReferenceSample {
  SampleSet samples;
  Moments moments;

  explicit ReferenceSample(SampleSet s) : samples(std::move(s)), moments(Moments::of(samples)) {
    if (samples.cols() == 0) throw std::invalid_argument("reference sample is empty");
  }
};

/// Mean over the reference sample of l(z0 + mu_hat^T theta; theta), minus
/// L_z * radius * ||Sigma^{-1/2} theta||. Whenever mu* is in the ellipsoid, this lower-bounds
/// the same mean at mu*.
inline double pr_lower_bound_locfam(const LinearEstimatorState& state, double radius,
                                    const ParameterVector& theta, const ReferenceSample& base,
                                    const LossFunction& loss, double lipschitz_z) {
  const Vector shift = state.mu_hat().transpose() * theta;
  double plug_in = 0.0;
  if (auto v = loss.mean_from_moments(base.moments.shifted(shift), theta)) {
    plug_in = *v;
  } else {
    SampleSet shifted = base.samples;
    shifted.colwise() += shift;
    plug_in = mean_loss_direct(loss, shifted, theta);
  }
  return plug_in - lipschitz_z * radius * state.inverse_norm(theta);
}

struct LocfamOptions {
  double m_star_bound = 1.0;             ///< M* >= ||mu*||
  std::size_t reference_size = 100000;   ///< size of the frozen D0 sample
  RadiusVariant variant = RadiusVariant::kCovering;
  bool track_membership = true;          ///< record mu* in C_t (simulation only)
};

/// The ellipsoid learner over a finite candidate set. mu* for the membership trace is read
/// from the environment's shift matrix.
inline RunLog select_and_run(const ProblemConfig& cfg, const Environment& env,
                             const CandidateGrid& candidates, const LocfamOptions& opts = {}) {
  cfg.validate();
  if (candidates.dim() != env.dim_theta()) {
    throw DimensionError("candidate grid has dimension " + std::to_string(candidates.dim()) +
                         ", environment expects " + std::to_string(env.dim_theta()));
  }
  if (opts.reference_size == 0) throw ConfigError("reference_size must be >= 1");
  const int d = env.dim_theta();
  const int m = env.dim_z();
  const double radius =
      confidence_radius(opts.m_star_bound, cfg.m0, m, d, static_cast<double>(cfg.horizon),
                        opts.variant);

  Rng ref_rng = make_stream(cfg.seed, StreamTag::kReferenceSample, 0);
  const ReferenceSample reference(env.base().sample(opts.reference_size, ref_rng));

  std::optional<OracleProfile> oracle;
  if (env.has_oracle()) oracle = oracle_profile(env, candidates);

  RunLog log;
  log.algorithm = "locfam";
  log.seed = cfg.seed;
  log.dim_theta = d;
  log.horizon = cfg.horizon;
  EstimatorTrace trace;
  trace.radius = radius;
  trace.min_sigma_eigenvalue = std::numeric_limits<double>::infinity();

  LinearEstimatorState state(d, m, cfg.m0);
  const Matrix& mu_star = env.shift_matrix();
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    if (opts.track_membership) {
      trace.membership.push_back(ellipsoid_of(state, radius).contains(mu_star) ? 1 : 0);
    }
    std::size_t best = 0;
    double best_lb = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double lb = pr_lower_bound_locfam(state, radius, candidates[i], reference,
                                              env.loss(), cfg.lipschitz_z);
      if (lb < best_lb) {
        best_lb = lb;
        best = i;
      }
    }
    const auto& theta = candidates[best];
    Rng rng = make_stream(cfg.seed, StreamTag::kStepSamples, static_cast<std::uint64_t>(t));
    const SampleSet z = env.sample(theta, static_cast<std::size_t>(cfg.m0), rng);
    const Vector zbar = z.rowwise().mean();
    state.update(theta, zbar);
    trace.max_normal_residual = std::max(trace.max_normal_residual, state.normal_residual());
    trace.min_sigma_eigenvalue = std::min(trace.min_sigma_eigenvalue, state.min_eigenvalue());

    std::optional<double> delta;
    if (oracle) delta = oracle->delta(best);
    append_step(log, 0, best, theta, delta);
  }
  trace.final_mu_hat = state.mu_hat();
  log.estimator = std::move(trace);
  if (!log.steps.empty()) log.final_iterate = log.steps.back().theta;
  return log;
}

}  // namespace perfbandit
