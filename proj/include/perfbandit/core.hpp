#pragma once

// Domain types, losses and synthetic distribution maps.
//
// Every environment here is a translation family: D(theta) is the law of z0 + mu^T theta
// with z0 drawn from a fixed base distribution. The constant map (mu = 0), the linear-shift
// diagnostic environment (point-mass base) and strategic classification (mu = Lambda^-1)
// are all special cases, which is what makes exact DPR oracles available for all of them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "perfbandit/errors.hpp"
#include "perfbandit/rng.hpp"

namespace perfbandit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A model theta. Plain Eigen vector; the unit-ball constraint is enforced where candidate
/// sets are built (see CandidateGrid).
using ParameterVector = Vector;

/// Samples stored column-wise: an m x n matrix holds n draws of dimension m.
using SampleSet = Matrix;

inline constexpr double kUnitBallTolerance = 1e-12;

/// First two moments of a distribution (or of an empirical sample): mean and E[z z^T].
struct Moments {
  Vector mean;
  Matrix second;

  static Moments of(const SampleSet& samples) {
    const auto n = static_cast<double>(samples.cols());
    Moments out;
    out.mean = samples.rowwise().sum() / n;
    out.second = (samples * samples.transpose()) / n;
    return out;
  }

  /// Moments of z + shift.
  [[nodiscard]] Moments shifted(const Vector& shift) const {
    Moments out;
    out.mean = mean + shift;
    out.second = second + mean * shift.transpose() + shift * mean.transpose() +
                 shift * shift.transpose();
    return out;
  }
};

// ---------------------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------------------

class LossFunction {
 public:
  virtual ~LossFunction() = default;

  [[nodiscard]] virtual double eval(const Vector& z, const ParameterVector& theta) const = 0;

  /// L_z: Lipschitz constant in z.
  [[nodiscard]] virtual double lipschitz_z() const = 0;

  /// L_theta, when known. Only the Lipschitz baseline needs it.
  [[nodiscard]] virtual std::optional<double> lipschitz_theta() const { return std::nullopt; }

  /// Mean of eval(z, theta) over any law (or sample) with the given moments, for losses that
  /// see z only through its first two moments. Algebraically identical to averaging eval.
  [[nodiscard]] virtual std::optional<double> mean_from_moments(
      const Moments& /*moments*/, const ParameterVector& /*theta*/) const {
    return std::nullopt;
  }

  /// Whether eval is guaranteed to lie in [0, 1].
  [[nodiscard]] virtual bool unit_range() const { return false; }

  /// Required sample dimension, or -1 if any.
  [[nodiscard]] virtual int dim_z() const { return -1; }
  /// Required model dimension, or -1 if any.
  [[nodiscard]] virtual int dim_theta() const { return -1; }
};

/// f(theta) = sum_j c0 cos(c1 theta_j) + c2 sin(c3 (theta_j - c4)).
struct CosSinProfile {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;

  [[nodiscard]] double operator()(const ParameterVector& theta) const {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      acc += c0 * std::cos(c1 * theta[j]) + c2 * std::sin(c3 * (theta[j] - c4));
    }
    return acc;
  }

  /// Bound on each partial derivative.
  [[nodiscard]] double slope_bound() const { return std::abs(c0 * c1) + std::abs(c2 * c3); }

  bool operator==(const CosSinProfile&) const = default;
};

/// l(z; theta) = w^T z + f(theta). Linear in z, arbitrary (here multi-modal) in theta.
class LinearShiftLoss final : public LossFunction {
 public:
  LinearShiftLoss(Vector weights, CosSinProfile profile)
      : weights_(std::move(weights)), profile_(profile) {}

  [[nodiscard]] double eval(const Vector& z, const ParameterVector& theta) const override {
    return weights_.dot(z) + profile_(theta);
  }
  [[nodiscard]] double lipschitz_z() const override { return weights_.norm(); }
  [[nodiscard]] std::optional<double> lipschitz_theta() const override {
    // Unknown dimension at this point: the caller scales by sqrt(d) for d > 1.
    return profile_.slope_bound();
  }
  [[nodiscard]] std::optional<double> mean_from_moments(
      const Moments& moments, const ParameterVector& theta) const override {
    return weights_.dot(moments.mean) + profile_(theta);
  }
  [[nodiscard]] int dim_z() const override { return static_cast<int>(weights_.size()); }

  [[nodiscard]] const Vector& weights() const { return weights_; }
  [[nodiscard]] const CosSinProfile& profile() const { return profile_; }

 private:
  Vector weights_;
  CosSinProfile profile_;
};

/// l(z; theta) = scale * ||z - A theta - b||^2 + offset.
///
/// Not globally Lipschitz in z, so L_z is declared by the caller for the support in use
/// (e.g. 2 * scale * diameter for bounded samples).
class QuadraticLoss final : public LossFunction {
 public:
  QuadraticLoss(Matrix a, Vector b, double scale, double lipschitz_z,
                std::optional<double> lipschitz_theta = std::nullopt, double offset = 0.0,
                bool unit_range = false)
      : a_(std::move(a)),
        b_(std::move(b)),
        scale_(scale),
        offset_(offset),
        lipschitz_z_(lipschitz_z),
        lipschitz_theta_(lipschitz_theta),
        unit_range_(unit_range) {
    if (a_.rows() != b_.size()) {
      throw DimensionError("quadratic loss: A has " + std::to_string(a_.rows()) +
                           " rows but b has " + std::to_string(b_.size()) + " entries");
    }
  }

  [[nodiscard]] double eval(const Vector& z, const ParameterVector& theta) const override {
    return scale_ * (z - a_ * theta - b_).squaredNorm() + offset_;
  }
  [[nodiscard]] double lipschitz_z() const override { return lipschitz_z_; }
  [[nodiscard]] std::optional<double> lipschitz_theta() const override {
    return lipschitz_theta_;
  }
  [[nodiscard]] std::optional<double> mean_from_moments(
      const Moments& moments, const ParameterVector& theta) const override {
    const Vector c = a_ * theta + b_;
    return scale_ * (moments.second.trace() - 2.0 * c.dot(moments.mean) + c.squaredNorm()) +
           offset_;
  }
  [[nodiscard]] bool unit_range() const override { return unit_range_; }
  [[nodiscard]] int dim_z() const override { return static_cast<int>(a_.rows()); }
  [[nodiscard]] int dim_theta() const override { return static_cast<int>(a_.cols()); }

 private:
  Matrix a_;
  Vector b_;
  double scale_;
  double offset_;
  double lipschitz_z_;
  std::optional<double> lipschitz_theta_;
  bool unit_range_;
};

/// Arbitrary loss from a callable; no closed-form moments, so empirical means loop.
class CallableLoss final : public LossFunction {
 public:
  using Fn = std::function<double(const Vector&, const ParameterVector&)>;

  CallableLoss(Fn fn, double lipschitz_z, std::optional<double> lipschitz_theta = std::nullopt,
               bool unit_range = false)
      : fn_(std::move(fn)),
        lipschitz_z_(lipschitz_z),
        lipschitz_theta_(lipschitz_theta),
        unit_range_(unit_range) {}

  [[nodiscard]] double eval(const Vector& z, const ParameterVector& theta) const override {
    return fn_(z, theta);
  }
  [[nodiscard]] double lipschitz_z() const override { return lipschitz_z_; }
  [[nodiscard]] std::optional<double> lipschitz_theta() const override {
    return lipschitz_theta_;
  }
  [[nodiscard]] bool unit_range() const override { return unit_range_; }

 private:
  Fn fn_;
  double lipschitz_z_;
  std::optional<double> lipschitz_theta_;
  bool unit_range_;
};

/// Plain average of loss.eval over the columns of `samples`.
inline double mean_loss_direct(const LossFunction& loss, const SampleSet& samples,
                               const ParameterVector& theta) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    acc += loss.eval(samples.col(i), theta);
  }
  return acc / static_cast<double>(samples.cols());
}

// ---------------------------------------------------------------------------------------
// Base distributions
// ---------------------------------------------------------------------------------------

enum class BaseKind { kPointMass, kGaussian, kUniform };

/// center + scale * xi, with xi a point mass at 0, a standard normal vector, or uniform on
/// the cube [-1, 1]^m.
struct BaseDistribution {
  BaseKind kind = BaseKind::kPointMass;
  Vector center = Vector::Zero(1);
  double scale = 0.0;

  static BaseDistribution point_mass(Vector at) {
    return {BaseKind::kPointMass, std::move(at), 0.0};
  }
  static BaseDistribution gaussian(Vector mean, double stddev) {
    return {BaseKind::kGaussian, std::move(mean), stddev};
  }
  static BaseDistribution uniform(Vector center, double half_width) {
    return {BaseKind::kUniform, std::move(center), half_width};
  }

  [[nodiscard]] int dim() const { return static_cast<int>(center.size()); }

  [[nodiscard]] Matrix covariance() const {
    const auto m = center.size();
    switch (kind) {
      case BaseKind::kPointMass:
        return Matrix::Zero(m, m);
      case BaseKind::kGaussian:
        return scale * scale * Matrix::Identity(m, m);
      case BaseKind::kUniform:
        return (scale * scale / 3.0) * Matrix::Identity(m, m);
    }
    return Matrix::Zero(m, m);
  }

  [[nodiscard]] Moments moments() const {
    return {center, covariance() + center * center.transpose()};
  }

  [[nodiscard]] SampleSet sample(std::size_t count, Rng& rng) const {
    const auto m = center.size();
    SampleSet out(m, static_cast<Eigen::Index>(count));
    switch (kind) {
      case BaseKind::kPointMass:
        out.colwise() = center;
        break;
      case BaseKind::kGaussian: {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < out.cols(); ++i) {
          for (Eigen::Index j = 0; j < m; ++j) out(j, i) = center[j] + scale * normal(rng);
        }
        break;
      }
      case BaseKind::kUniform: {
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (Eigen::Index i = 0; i < out.cols(); ++i) {
          for (Eigen::Index j = 0; j < m; ++j) out(j, i) = center[j] + scale * unif(rng);
        }
        break;
      }
    }
    return out;
  }
};

// ---------------------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------------------

/// Distribution map D(theta) = law of z0 + mu^T theta, z0 ~ base, with the loss attached.
/// Immutable after construction; safe to share between concurrent runs.
class Environment {
 public:
  Environment(std::string kind, BaseDistribution base, Matrix shift_matrix,
              std::shared_ptr<const LossFunction> loss, bool diagnostic = false)
      : kind_(std::move(kind)),
        base_(std::move(base)),
        mu_(std::move(shift_matrix)),
        loss_(std::move(loss)),
        diagnostic_(diagnostic) {
    if (!loss_) throw ConfigError("environment requires a loss");
    if (mu_.cols() != base_.dim()) {
      throw DimensionError("shift matrix has " + std::to_string(mu_.cols()) +
                           " columns but base distribution has dimension " +
                           std::to_string(base_.dim()));
    }
    if (loss_->dim_z() >= 0 && loss_->dim_z() != base_.dim()) {
      throw DimensionError("loss expects samples of dimension " +
                           std::to_string(loss_->dim_z()) + ", environment produces " +
                           std::to_string(base_.dim()));
    }
    if (loss_->dim_theta() >= 0 && loss_->dim_theta() != mu_.rows()) {
      throw DimensionError("loss expects models of dimension " +
                           std::to_string(loss_->dim_theta()) + ", environment has " +
                           std::to_string(mu_.rows()));
    }
    sensitivity_ = mu_.size() == 0 ? 0.0 : operator_norm(mu_);
  }

  [[nodiscard]] const std::string& kind() const { return kind_; }
  [[nodiscard]] int dim_theta() const { return static_cast<int>(mu_.rows()); }
  [[nodiscard]] int dim_z() const { return base_.dim(); }
  [[nodiscard]] const BaseDistribution& base() const { return base_; }
  [[nodiscard]] const Matrix& shift_matrix() const { return mu_; }
  [[nodiscard]] const LossFunction& loss() const { return *loss_; }
  [[nodiscard]] std::shared_ptr<const LossFunction> loss_ptr() const { return loss_; }
  /// Flags environments whose loss leaves [0, 1]; kept out of concentration tests.
  [[nodiscard]] bool diagnostic() const { return diagnostic_; }

  /// Declared epsilon: ||mu||_op, which is exactly the Wasserstein-1 Lipschitz constant of a
  /// translation family.
  [[nodiscard]] double sensitivity() const { return sensitivity_; }

  [[nodiscard]] Vector shift(const ParameterVector& theta) const {
    return mu_.transpose() * theta;
  }

  /// `count` i.i.d. draws from D(theta), consuming `rng`.
  [[nodiscard]] SampleSet sample(const ParameterVector& theta, std::size_t count,
                                 Rng& rng) const {
    check_theta(theta);
    SampleSet out = base_.sample(count, rng);
    out.colwise() += shift(theta);
    return out;
  }

  [[nodiscard]] Moments moments(const ParameterVector& phi) const {
    return base_.moments().shifted(shift(phi));
  }

  [[nodiscard]] bool has_oracle() const {
    if (base_.kind == BaseKind::kPointMass) return true;
    return loss_->mean_from_moments(base_.moments(), Vector::Zero(dim_theta())).has_value();
  }

  /// DPR(phi, theta) = E_{z ~ D(phi)} l(z; theta), exactly.
  [[nodiscard]] double oracle_dpr(const ParameterVector& phi,
                                  const ParameterVector& theta) const {
    check_theta(phi);
    check_theta(theta);
    if (base_.kind == BaseKind::kPointMass) {
      return loss_->eval(base_.center + shift(phi), theta);
    }
    if (auto v = loss_->mean_from_moments(moments(phi), theta)) return *v;
    throw std::logic_error("environment '" + kind_ + "' has no exact DPR oracle");
  }

  [[nodiscard]] double oracle_pr(const ParameterVector& theta) const {
    return oracle_dpr(theta, theta);
  }

  [[nodiscard]] static double operator_norm(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()[0];
  }

 private:
  void check_theta(const ParameterVector& theta) const {
    if (theta.size() != mu_.rows()) {
      throw DimensionError("model has dimension " + std::to_string(theta.size()) +
                           ", environment expects " + std::to_string(mu_.rows()));
    }
  }

  std::string kind_;
  BaseDistribution base_;
  Matrix mu_;
  std::shared_ptr<const LossFunction> loss_;
  bool diagnostic_ = false;
  double sensitivity_ = 0.0;
};

/// D(theta) = base for every theta.
inline Environment make_constant_map(BaseDistribution base,
                                     std::shared_ptr<const LossFunction> loss,
                                     int dim_theta = 1) {
  const int m = base.dim();
  return Environment("constant_map", std::move(base), Matrix::Zero(dim_theta, m),
                     std::move(loss));
}

/// One-dimensional illustration environment: D(theta) is a point mass at alpha * theta and
/// l(z; theta) = f(theta) + z, so DPR(phi, theta) = f(theta) + alpha * phi. The loss is not
/// confined to [0, 1]; the environment is marked diagnostic.
inline Environment make_appendix_e_env(double c0, double c1, double c2, double c3, double c4,
                                       double alpha) {
  for (double v : {c0, c1, c2, c3, c4, alpha}) {
    if (!std::isfinite(v)) throw ConfigError("linear-shift environment: non-finite parameter");
  }
  auto loss = std::make_shared<LinearShiftLoss>(Vector::Ones(1),
                                                CosSinProfile{c0, c1, c2, c3, c4});
  Matrix mu(1, 1);
  mu(0, 0) = alpha;
  return Environment("appendix_e", BaseDistribution::point_mass(Vector::Zero(1)), mu,
                     std::move(loss), /*diagnostic=*/true);
}

/// z = z0 + mu_star^T theta with mu_star of shape d_theta x m.
inline Environment make_location_family(Matrix mu_star, BaseDistribution base,
                                        std::shared_ptr<const LossFunction> loss) {
  if (mu_star.cols() != base.dim()) {
    throw DimensionError("location family: mu_star is " + std::to_string(mu_star.rows()) +
                         "x" + std::to_string(mu_star.cols()) +
                         " but base distribution has dimension " + std::to_string(base.dim()));
  }
  return Environment("location_family", std::move(base), std::move(mu_star), std::move(loss));
}

/// Agents best-respond to a linear score theta^T x' under cost (x - x')^T Lambda (x - x') / 2.
inline Vector best_response(const Vector& x, const ParameterVector& theta, const Matrix& lambda) {
  return x + lambda.llt().solve(theta);
}

inline Environment make_strategic_classification(const Matrix& lambda,
                                                 BaseDistribution feature_dist,
                                                 std::shared_ptr<const LossFunction> loss) {
  if (lambda.rows() != lambda.cols()) {
    throw ConfigError("strategic classification: Lambda must be square");
  }
  if (lambda.rows() != feature_dist.dim()) {
    throw DimensionError("strategic classification: Lambda is " +
                         std::to_string(lambda.rows()) + "-dimensional, features are " +
                         std::to_string(feature_dist.dim()) + "-dimensional");
  }
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if ((lambda - lambda.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("strategic classification: Lambda is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(lambda);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw ConfigError("strategic classification: Lambda is not positive definite");
  }
  Matrix mu_star = lambda.inverse();
  Environment env("strategic_classification", std::move(feature_dist), std::move(mu_star),
                  std::move(loss));
  return env;
}

/// Wasserstein-1 distance between two 1-d empirical distributions: the L1 distance between
/// their quantile functions.
inline double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
  }
  // Walk the merged quantile breakpoints i/na and j/nb.
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double u = 0.0;
  double acc = 0.0;
  while (i < a.size() && j < b.size()) {
    const double next_a = static_cast<double>(i + 1) / na;
    const double next_b = static_cast<double>(j + 1) / nb;
    const double next = std::min(next_a, next_b);
    acc += (next - u) * std::abs(a[i] - b[j]);
    u = next;
    if (next_a <= next) ++i;
    if (next_b <= next) ++j;
  }
  return acc;
}

// ---------------------------------------------------------------------------------------
// Candidate grid and problem configuration
// ---------------------------------------------------------------------------------------

/// Finite stand-in for the parameter space: every min/max over Theta is taken over it.
class CandidateGrid {
 public:
  explicit CandidateGrid(std::vector<ParameterVector> points) : points_(std::move(points)) {
    if (points_.empty()) throw ConfigError("candidate grid is empty");
    dim_ = static_cast<int>(points_.front().size());
    for (const auto& p : points_) {
      if (p.size() != dim_) throw DimensionError("candidate grid mixes dimensions");
      if (p.norm() > 1.0 + kUnitBallTolerance) {
        throw ConfigError("candidate lies outside the unit ball");
      }
    }
  }

  /// n evenly spaced points on [-1, 1].
  static CandidateGrid interval(std::size_t n) {
    if (n == 0) throw ConfigError("interval grid needs at least one point");
    std::vector<ParameterVector> pts;
    pts.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double x = n == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n - 1);
      pts.push_back(Vector::Constant(1, x));
    }
    return CandidateGrid(std::move(pts));
  }

  /// Lattice of the given spacing clipped to the unit ball. One dimension uses the lattice
  /// anchored at -1; two and three dimensions use the lattice through the origin.
  static CandidateGrid lattice(int dim, double spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
      throw ConfigError("candidate resolution must be positive");
    }
    if (dim < 1 || dim > 3) throw ConfigError("candidate lattice supports 1 to 3 dimensions");
    if (dim == 1) {
      const auto n = static_cast<std::size_t>(std::floor(2.0 / spacing + 1e-9)) + 1;
      std::vector<ParameterVector> pts;
      for (std::size_t k = 0; k < n; ++k) {
        pts.push_back(Vector::Constant(1, -1.0 + spacing * static_cast<double>(k)));
      }
      return CandidateGrid(std::move(pts));
    }
    const int half = static_cast<int>(std::floor(1.0 / spacing + 1e-9));
    std::vector<ParameterVector> pts;
    std::vector<int> idx(static_cast<std::size_t>(dim), -half);
    while (true) {
      Vector p(dim);
      for (int j = 0; j < dim; ++j) p[j] = spacing * idx[static_cast<std::size_t>(j)];
      if (p.norm() <= 1.0 + kUnitBallTolerance) {
        if (p.norm() > 1.0) p /= p.norm();
        pts.push_back(p);
      }
      int j = dim - 1;
      while (j >= 0 && idx[static_cast<std::size_t>(j)] == half) {
        idx[static_cast<std::size_t>(j)] = -half;
        --j;
      }
      if (j < 0) break;
      ++idx[static_cast<std::size_t>(j)];
    }
    return CandidateGrid(std::move(pts));
  }

  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const ParameterVector& operator[](std::size_t i) const { return points_[i]; }
  [[nodiscard]] const std::vector<ParameterVector>& points() const { return points_; }

 private:
  std::vector<ParameterVector> points_;
  int dim_ = 0;
};

/// PR over the grid plus its minimum, for regret accounting.
struct OracleProfile {
  std::vector<double> pr;
  double min_pr = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;

  [[nodiscard]] double delta(std::size_t i) const { return pr[i] - min_pr; }
};

inline OracleProfile oracle_profile(const Environment& env, const CandidateGrid& grid) {
  OracleProfile out;
  out.pr.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.pr.push_back(env.oracle_pr(grid[i]));
    if (out.pr.back() < out.min_pr) {
      out.min_pr = out.pr.back();
      out.argmin = i;
    }
  }
  return out;
}

/// Algorithm inputs shared by every learner.
struct ProblemConfig {
  std::int64_t horizon = 1000;        ///< T
  std::int64_t m0 = 1;                ///< samples per step
  double eps = 0.0;                   ///< sensitivity the learner assumes
  double lipschitz_z = 1.0;           ///< L_z the learner assumes
  double rademacher_bound = 1.0;      ///< complexity bound fed to the phase schedule
  std::uint64_t seed = 0;
  double candidate_resolution = 0.01; ///< grid spacing

  [[nodiscard]] double lz_eps() const { return lipschitz_z * eps; }

  void validate() const {
    if (horizon < 1) throw ConfigError("horizon T must be >= 1");
    if (m0 < 1) throw ConfigError("m0 must be >= 1");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be finite and >= 0");
    if (!(lipschitz_z >= 0.0) || !std::isfinite(lipschitz_z)) {
      throw ConfigError("lipschitz_z must be finite and >= 0");
    }
    if (!(rademacher_bound >= 0.0) || !std::isfinite(rademacher_bound)) {
      throw ConfigError("rademacher_bound must be finite and >= 0");
    }
    if (!(candidate_resolution > 0.0)) throw ConfigError("candidate_resolution must be > 0");
  }

  bool operator==(const ProblemConfig&) const = default;
};

/// Problem inputs read off an environment: its declared epsilon and its loss's L_z.
inline ProblemConfig problem_for(const Environment& env, std::int64_t horizon, std::int64_t m0,
                                 std::uint64_t seed) {
  ProblemConfig cfg;
  cfg.horizon = horizon;
  cfg.m0 = m0;
  cfg.eps = env.sensitivity();
  cfg.lipschitz_z = env.loss().lipschitz_z();
  cfg.seed = seed;
  return cfg;
}

}  // namespace perfbandit
