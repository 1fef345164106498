#pragma once

// Experiment configuration: YAML schema, lossless round-trip, and construction of the
// environment and candidate grid it describes. The schema is documented in README.md.

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "perfbandit/core.hpp"
#include "perfbandit/errors.hpp"
#include "perfbandit/locfam.hpp"

namespace perfbandit::harness {

using Row = std::vector<double>;
using Table = std::vector<Row>;

struct BaseSpec {
  std::string kind = "point_mass";  // point_mass | gaussian | uniform
  Row center = {0.0};
  double scale = 0.0;

  bool operator==(const BaseSpec&) const = default;
};

struct LossSpec {
  std::string kind = "linear_shift";  // linear_shift | quadratic
  // linear_shift
  Row weights = {1.0};
  Row profile = {0.0, 0.0, 0.0, 0.0, 0.0};  // c0..c4
  // quadratic: scale * |z - A theta - b|^2 + offset
  Table a;
  Row b;
  double scale = 1.0;
  double offset = 0.0;
  std::optional<double> lipschitz_z;
  std::optional<double> lipschitz_theta;
  bool unit_range = false;

  bool operator==(const LossSpec&) const = default;
};

struct EnvironmentSpec {
  std::string kind = "appendix_e";  // appendix_e | constant_map | location_family | strategic
  Row params = {-1.0, 0.7, 0.3, 3.0, 0.5, 1.0};  // appendix_e: c0..c4, alpha
  int dim_theta = 1;                             // constant_map
  Table mu_star;                                 // location_family, d_theta x m
  Table lambda;                                  // strategic, SPD m x m
  BaseSpec base;
  LossSpec loss;

  bool operator==(const EnvironmentSpec&) const = default;
};

struct ProblemSpec {
  std::int64_t horizon = 1000;
  std::int64_t m0 = 1;
  std::optional<double> eps;          // defaults to the environment's sensitivity
  std::optional<double> lipschitz_z;  // defaults to the loss's L_z
  double rademacher_bound = 1.0;
  double candidate_resolution = 0.01;
  std::optional<std::int64_t> grid_points;  // 1-d only: evenly spaced points on [-1, 1]

  bool operator==(const ProblemSpec&) const = default;
};

struct LocfamSpec {
  double m_star_bound = 1.0;
  std::int64_t reference_size = 100000;
  std::string radius_variant = "covering";  // covering | algorithm_box

  bool operator==(const LocfamSpec&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string algorithm = "pcb";  // pcb | locfam | baseline
  bool oracle_mode = false;
  EnvironmentSpec environment;
  ProblemSpec problem;
  LocfamSpec locfam;
  std::optional<double> baseline_lipschitz_theta;  // defaults to the loss's declared L_theta
  std::vector<std::uint64_t> seeds = {0};
  int repeat = 1;
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

inline void check_algorithm(const std::string& algo) {
  if (algo != "pcb" && algo != "locfam" && algo != "baseline") {
    throw ConfigError("unknown algorithm '" + algo + "' (expected pcb, locfam or baseline)");
  }
}

// ---------------------------------------------------------------------------------------
// YAML -> config
// ---------------------------------------------------------------------------------------

namespace detail {

template <class T>
T get(const YAML::Node& node, const char* key, const T& fallback) {
  const YAML::Node v = node[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

template <class T>
std::optional<T> get_opt(const YAML::Node& node, const char* key) {
  const YAML::Node v = node[key];
  if (!v || v.IsNull()) return std::nullopt;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

inline void reject_unknown(const YAML::Node& node, const std::vector<std::string>& allowed,
                           const std::string& where) {
  if (!node.IsMap()) throw ConfigError("'" + where + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

inline BaseSpec parse_base(const YAML::Node& n) {
  reject_unknown(n, {"kind", "center", "scale"}, "base");
  BaseSpec b;
  b.kind = get<std::string>(n, "kind", b.kind);
  b.center = get<Row>(n, "center", b.center);
  b.scale = get<double>(n, "scale", b.scale);
  return b;
}

inline LossSpec parse_loss(const YAML::Node& n) {
  reject_unknown(n,
                 {"kind", "weights", "profile", "a", "b", "scale", "offset", "lipschitz_z",
                  "lipschitz_theta", "unit_range"},
                 "loss");
  LossSpec l;
  l.kind = get<std::string>(n, "kind", l.kind);
  l.weights = get<Row>(n, "weights", l.weights);
  l.profile = get<Row>(n, "profile", l.profile);
  l.a = get<Table>(n, "a", l.a);
  l.b = get<Row>(n, "b", l.b);
  l.scale = get<double>(n, "scale", l.scale);
  l.offset = get<double>(n, "offset", l.offset);
  l.lipschitz_z = get_opt<double>(n, "lipschitz_z");
  l.lipschitz_theta = get_opt<double>(n, "lipschitz_theta");
  l.unit_range = get<bool>(n, "unit_range", l.unit_range);
  return l;
}

inline EnvironmentSpec parse_environment(const YAML::Node& n) {
  reject_unknown(n, {"kind", "params", "dim_theta", "mu_star", "lambda", "base", "loss"},
                 "environment");
  EnvironmentSpec e;
  e.kind = get<std::string>(n, "kind", e.kind);
  e.params = get<Row>(n, "params", e.params);
  e.dim_theta = get<int>(n, "dim_theta", e.dim_theta);
  e.mu_star = get<Table>(n, "mu_star", e.mu_star);
  e.lambda = get<Table>(n, "lambda", e.lambda);
  if (n["base"]) e.base = parse_base(n["base"]);
  if (n["loss"]) e.loss = parse_loss(n["loss"]);
  return e;
}

inline ProblemSpec parse_problem(const YAML::Node& n) {
  reject_unknown(n,
                 {"horizon", "m0", "eps", "lipschitz_z", "rademacher_bound",
                  "candidate_resolution", "grid_points"},
                 "problem");
  ProblemSpec p;
  p.horizon = get<std::int64_t>(n, "horizon", p.horizon);
  p.m0 = get<std::int64_t>(n, "m0", p.m0);
  p.eps = get_opt<double>(n, "eps");
  p.lipschitz_z = get_opt<double>(n, "lipschitz_z");
  p.rademacher_bound = get<double>(n, "rademacher_bound", p.rademacher_bound);
  p.candidate_resolution = get<double>(n, "candidate_resolution", p.candidate_resolution);
  p.grid_points = get_opt<std::int64_t>(n, "grid_points");
  return p;
}

}  // namespace detail

inline ExperimentConfig parse_config(const YAML::Node& root) {
  using namespace detail;
  if (!root.IsMap()) throw ConfigError("config root must be a mapping");
  reject_unknown(root,
                 {"name", "algorithm", "oracle_mode", "environment", "problem", "locfam",
                  "baseline", "seeds", "repeat", "output"},
                 "config");
  ExperimentConfig c;
  c.name = get<std::string>(root, "name", c.name);
  c.algorithm = get<std::string>(root, "algorithm", c.algorithm);
  check_algorithm(c.algorithm);
  c.oracle_mode = get<bool>(root, "oracle_mode", c.oracle_mode);
  if (root["environment"]) c.environment = parse_environment(root["environment"]);
  if (root["problem"]) c.problem = parse_problem(root["problem"]);
  if (const auto lf = root["locfam"]) {
    reject_unknown(lf, {"m_star_bound", "reference_size", "radius_variant"}, "locfam");
    c.locfam.m_star_bound = get<double>(lf, "m_star_bound", c.locfam.m_star_bound);
    c.locfam.reference_size = get<std::int64_t>(lf, "reference_size", c.locfam.reference_size);
    c.locfam.radius_variant = get<std::string>(lf, "radius_variant", c.locfam.radius_variant);
  }
  if (const auto bl = root["baseline"]) {
    reject_unknown(bl, {"lipschitz_theta"}, "baseline");
    c.baseline_lipschitz_theta = get_opt<double>(bl, "lipschitz_theta");
  }
  c.seeds = get<std::vector<std::uint64_t>>(root, "seeds", c.seeds);
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  c.repeat = get<int>(root, "repeat", c.repeat);
  if (c.repeat < 1) throw ConfigError("repeat must be >= 1");
  if (const auto out = root["output"]) {
    reject_unknown(out, {"dir"}, "output");
    c.output_dir = get<std::string>(out, "dir", c.output_dir);
  }
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  try {
    return parse_config(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------------------
// config -> YAML
// ---------------------------------------------------------------------------------------

inline std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  auto row = [&](const Row& r) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double v : r) out << v;
    out << YAML::EndSeq;
  };
  auto table = [&](const Table& t) {
    out << YAML::BeginSeq;
    for (const auto& r : t) row(r);
    out << YAML::EndSeq;
  };
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.name;
  out << YAML::Key << "algorithm" << YAML::Value << c.algorithm;
  out << YAML::Key << "oracle_mode" << YAML::Value << c.oracle_mode;

  const auto& e = c.environment;
  out << YAML::Key << "environment" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << e.kind;
  out << YAML::Key << "params" << YAML::Value;
  row(e.params);
  out << YAML::Key << "dim_theta" << YAML::Value << e.dim_theta;
  out << YAML::Key << "mu_star" << YAML::Value;
  table(e.mu_star);
  out << YAML::Key << "lambda" << YAML::Value;
  table(e.lambda);
  out << YAML::Key << "base" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << e.base.kind;
  out << YAML::Key << "center" << YAML::Value;
  row(e.base.center);
  out << YAML::Key << "scale" << YAML::Value << e.base.scale;
  out << YAML::EndMap;
  const auto& l = e.loss;
  out << YAML::Key << "loss" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << l.kind;
  out << YAML::Key << "weights" << YAML::Value;
  row(l.weights);
  out << YAML::Key << "profile" << YAML::Value;
  row(l.profile);
  out << YAML::Key << "a" << YAML::Value;
  table(l.a);
  out << YAML::Key << "b" << YAML::Value;
  row(l.b);
  out << YAML::Key << "scale" << YAML::Value << l.scale;
  out << YAML::Key << "offset" << YAML::Value << l.offset;
  if (l.lipschitz_z) out << YAML::Key << "lipschitz_z" << YAML::Value << *l.lipschitz_z;
  if (l.lipschitz_theta) {
    out << YAML::Key << "lipschitz_theta" << YAML::Value << *l.lipschitz_theta;
  }
  out << YAML::Key << "unit_range" << YAML::Value << l.unit_range;
  out << YAML::EndMap;
  out << YAML::EndMap;

  const auto& p = c.problem;
  out << YAML::Key << "problem" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "horizon" << YAML::Value << p.horizon;
  out << YAML::Key << "m0" << YAML::Value << p.m0;
  if (p.eps) out << YAML::Key << "eps" << YAML::Value << *p.eps;
  if (p.lipschitz_z) out << YAML::Key << "lipschitz_z" << YAML::Value << *p.lipschitz_z;
  out << YAML::Key << "rademacher_bound" << YAML::Value << p.rademacher_bound;
  out << YAML::Key << "candidate_resolution" << YAML::Value << p.candidate_resolution;
  if (p.grid_points) out << YAML::Key << "grid_points" << YAML::Value << *p.grid_points;
  out << YAML::EndMap;

  out << YAML::Key << "locfam" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "m_star_bound" << YAML::Value << c.locfam.m_star_bound;
  out << YAML::Key << "reference_size" << YAML::Value << c.locfam.reference_size;
  out << YAML::Key << "radius_variant" << YAML::Value << c.locfam.radius_variant;
  out << YAML::EndMap;

  if (c.baseline_lipschitz_theta) {
    out << YAML::Key << "baseline" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "lipschitz_theta" << YAML::Value << *c.baseline_lipschitz_theta;
    out << YAML::EndMap;
  }
  out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << c.seeds;
  out << YAML::Key << "repeat" << YAML::Value << c.repeat;
  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << c.output_dir;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------------------

inline Vector to_vector(const Row& r) {
  Vector v(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) v[static_cast<Eigen::Index>(i)] = r[i];
  return v;
}

inline Matrix to_matrix(const Table& t, const std::string& what) {
  if (t.empty()) throw ConfigError(what + " is empty");
  const std::size_t cols = t.front().size();
  Matrix m(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].size() != cols) throw DimensionError(what + " has ragged rows");
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t[i][j];
    }
  }
  return m;
}

inline BaseDistribution build_base(const BaseSpec& b) {
  if (b.center.empty()) throw ConfigError("base.center must not be empty");
  if (b.kind == "point_mass") return BaseDistribution::point_mass(to_vector(b.center));
  if (!(b.scale >= 0.0)) throw ConfigError("base.scale must be >= 0");
  if (b.kind == "gaussian") return BaseDistribution::gaussian(to_vector(b.center), b.scale);
  if (b.kind == "uniform") return BaseDistribution::uniform(to_vector(b.center), b.scale);
  throw ConfigError("unknown base kind '" + b.kind + "'");
}

inline CosSinProfile to_profile(const Row& r) {
  if (r.size() != 5) throw ConfigError("loss.profile needs five coefficients c0..c4");
  return {r[0], r[1], r[2], r[3], r[4]};
}

inline std::shared_ptr<const LossFunction> build_loss(const LossSpec& l, int dim_theta) {
  if (l.kind == "linear_shift") {
    if (l.weights.empty()) throw ConfigError("loss.weights must not be empty");
    return std::make_shared<LinearShiftLoss>(to_vector(l.weights), to_profile(l.profile));
  }
  if (l.kind == "quadratic") {
    if (!l.lipschitz_z) throw ConfigError("quadratic loss needs an explicit lipschitz_z");
    const Matrix a = l.a.empty() ? Matrix::Identity(static_cast<Eigen::Index>(l.b.size()),
                                                    dim_theta)
                                 : to_matrix(l.a, "loss.a");
    const Vector b = l.b.empty() ? Vector::Zero(a.rows()) : to_vector(l.b);
    return std::make_shared<QuadraticLoss>(a, b, l.scale, *l.lipschitz_z, l.lipschitz_theta,
                                           l.offset, l.unit_range);
  }
  throw ConfigError("unknown loss kind '" + l.kind + "'");
}

inline Environment build_environment(const EnvironmentSpec& e) {
  if (e.kind == "appendix_e") {
    if (e.params.size() != 6) throw ConfigError("appendix_e needs params c0..c4, alpha");
    const auto& p = e.params;
    return make_appendix_e_env(p[0], p[1], p[2], p[3], p[4], p[5]);
  }
  BaseDistribution base = build_base(e.base);
  if (e.kind == "constant_map") {
    if (e.dim_theta < 1) throw ConfigError("dim_theta must be >= 1");
    return make_constant_map(std::move(base), build_loss(e.loss, e.dim_theta), e.dim_theta);
  }
  if (e.kind == "location_family") {
    Matrix mu = to_matrix(e.mu_star, "mu_star");
    const int d = static_cast<int>(mu.rows());
    return make_location_family(std::move(mu), std::move(base), build_loss(e.loss, d));
  }
  if (e.kind == "strategic") {
    Matrix lambda = to_matrix(e.lambda, "lambda");
    const int d = static_cast<int>(lambda.rows());
    return make_strategic_classification(lambda, std::move(base), build_loss(e.loss, d));
  }
  throw ConfigError("unknown environment kind '" + e.kind + "'");
}

inline ProblemConfig build_problem(const ProblemSpec& p, const Environment& env,
                                   std::uint64_t seed) {
  ProblemConfig cfg;
  cfg.horizon = p.horizon;
  cfg.m0 = p.m0;
  cfg.eps = p.eps.value_or(env.sensitivity());
  cfg.lipschitz_z = p.lipschitz_z.value_or(env.loss().lipschitz_z());
  cfg.rademacher_bound = p.rademacher_bound;
  cfg.seed = seed;
  cfg.candidate_resolution = p.candidate_resolution;
  cfg.validate();
  return cfg;
}

inline CandidateGrid build_grid(const ProblemSpec& p, int dim_theta) {
  if (p.grid_points) {
    if (dim_theta != 1) throw DimensionError("grid_points applies to one-dimensional models only");
    if (*p.grid_points < 1) throw ConfigError("grid_points must be >= 1");
    return CandidateGrid::interval(static_cast<std::size_t>(*p.grid_points));
  }
  return CandidateGrid::lattice(dim_theta, p.candidate_resolution);
}

inline LocfamOptions build_locfam(const LocfamSpec& s) {
  LocfamOptions o;
  o.m_star_bound = s.m_star_bound;
  if (s.reference_size < 1) throw ConfigError("locfam.reference_size must be >= 1");
  o.reference_size = static_cast<std::size_t>(s.reference_size);
  if (s.radius_variant == "covering") {
    o.variant = RadiusVariant::kCovering;
  } else if (s.radius_variant == "algorithm_box") {
    o.variant = RadiusVariant::kAlgorithmBox;
  } else {
    throw ConfigError("unknown radius_variant '" + s.radius_variant + "'");
  }
  return o;
}

}  // namespace perfbandit::harness
