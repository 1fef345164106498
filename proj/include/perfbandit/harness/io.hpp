#pragma once

// Persistence: RunLog CSV (versioned header comment), summary JSON, band CSV, and the
// finite-instance JSON used by the zooming evaluator.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "perfbandit/confidence.hpp"
#include "perfbandit/errors.hpp"
#include "perfbandit/rational.hpp"
#include "perfbandit/runlog.hpp"
#include "perfbandit/zooming.hpp"

namespace perfbandit::harness {

using Json = nlohmann::ordered_json;

inline constexpr const char* kRunlogVersion = "# perfbandit runlog v1";

/// Shortest round-trippable text for a double.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Columns: step, phase, theta_0..theta_{d-1}, delta, cum_regret.
inline std::string runlog_csv(const RunLog& log) {
  std::ostringstream out;
  out << kRunlogVersion << " algorithm=" << log.algorithm << " seed=" << log.seed << "\n";
  out << "step,phase";
  for (int j = 0; j < log.dim_theta; ++j) out << ",theta_" << j;
  out << ",delta,cum_regret\n";
  for (const auto& s : log.steps) {
    out << s.step << ',' << s.phase;
    for (Eigen::Index j = 0; j < s.theta.size(); ++j) out << ',' << fmt(s.theta[j]);
    out << ',' << (s.delta ? fmt(*s.delta) : std::string("nan")) << ',' << fmt(s.cum_regret)
        << '\n';
  }
  return out.str();
}

inline Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json matrix_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

inline Json summary_json(const RunLog& log) {
  Json j;
  j["algorithm"] = log.algorithm;
  j["seed"] = log.seed;
  j["horizon"] = log.horizon;
  j["steps"] = log.steps.size();
  const bool has_regret = !log.steps.empty() && log.steps.back().delta.has_value();
  if (has_regret) {
    j["total_regret"] = log.total_regret();
  } else {
    j["total_regret"] = nullptr;
  }
  j["final_iterate"] = log.final_iterate ? vector_json(*log.final_iterate) : Json(nullptr);
  Json phases = Json::array();
  for (const auto& p : log.phases) {
    Json row;
    row["phase"] = p.phase;
    row["gamma"] = p.gamma;
    row["radius"] = std::isinf(p.radius) ? Json("inf") : Json(p.radius);
    row["steps_per_deployment"] = p.steps_per_deployment;
    row["net_size"] = p.net.size();
    row["deployments"] = p.deployed.size();
    row["eliminated"] = p.eliminated;
    row["alive_after"] = p.alive_after;
    row["truncated"] = p.truncated;
    phases.push_back(row);
  }
  j["phases"] = phases;
  if (log.estimator) {
    const auto& e = *log.estimator;
    j["mu_hat"] = matrix_json(e.final_mu_hat);
    j["radius"] = e.radius;
    std::string trace;
    trace.reserve(e.membership.size());
    for (char c : e.membership) trace.push_back(c != 0 ? '1' : '0');
    j["membership"] = trace;
    j["membership_all"] =
        std::all_of(e.membership.begin(), e.membership.end(), [](char c) { return c != 0; });
    j["max_normal_residual"] = e.max_normal_residual;
    j["min_sigma_eigenvalue"] = e.min_sigma_eigenvalue;
  }
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------------------
// Confidence bands
// ---------------------------------------------------------------------------------------

struct BandRow {
  double theta = 0.0;
  double pr = 0.0;
  Bounds perf;
  Bounds base;
};

struct BandSummary {
  std::vector<BandRow> rows;
  std::size_t soundness_violations = 0;  ///< PR outside either band
  std::size_t nesting_violations = 0;    ///< performative band not inside the baseline band
};

/// Both bands over a grid for a fixed deployed set, with oracle PR for reference.
/// `perf_lipschitz` multiplies distances in the performative band (L_z eps or a conservative
/// stand-in), `lipschitz_pr` in the baseline band.
inline BandSummary compute_bands(const Environment& env, const CandidateGrid& grid,
                                 const std::vector<ParameterVector>& deployed,
                                 double perf_lipschitz, double lipschitz_pr, double tol = 1e-12) {
  ConfidenceState state(env, perf_lipschitz, DprMode::kOracle);
  for (const auto& th : deployed) {
    DeploymentRecord rec;
    rec.theta = th;
    state.add(std::move(rec));
  }
  BandSummary out;
  for (const auto& th : grid.points()) {
    BandRow row;
    row.theta = th[0];
    row.pr = env.oracle_pr(th);
    row.perf = perf_bounds(state, th);
    row.base = baseline_bounds(state, th, lipschitz_pr);
    if (row.perf.lb > row.pr + tol || row.perf.ub < row.pr - tol || row.base.lb > row.pr + tol ||
        row.base.ub < row.pr - tol) {
      ++out.soundness_violations;
    }
    if (row.perf.lb < row.base.lb - tol || row.perf.ub > row.base.ub + tol) {
      ++out.nesting_violations;
    }
    out.rows.push_back(row);
  }
  return out;
}

inline std::string bands_csv(const BandSummary& bands) {
  std::ostringstream out;
  out << "# perfbandit bands v1\n";
  out << "theta,pr_true,perf_lb,perf_ub,base_lb,base_ub\n";
  for (const auto& r : bands.rows) {
    out << fmt(r.theta) << ',' << fmt(r.pr) << ',' << fmt(r.perf.lb) << ',' << fmt(r.perf.ub)
        << ',' << fmt(r.base.lb) << ',' << fmt(r.base.ub) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------------------
// Finite instances for the zooming evaluator
// ---------------------------------------------------------------------------------------

struct ZoomingQuery {
  std::string label;
  Rational s;
  Rational r;
  std::vector<std::size_t> cover;  ///< for the sequential count; empty = zooming count only
  std::optional<Rational> s_limit;
};

struct InstanceFile {
  FiniteInstance<Rational> instance;
  std::vector<ZoomingQuery> queries;
  /// (deployed, query) pairs whose single-deployment lower bound is reported.
  std::vector<std::pair<std::size_t, std::size_t>> ledger;
};

namespace detail {

inline Rational rational_of(const Json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  throw ConfigError("instance values must be integers or rational strings like \"15/64\"");
}

inline std::vector<Rational> rational_row(const Json& v) {
  if (!v.is_array()) throw ConfigError("expected an array of rationals");
  std::vector<Rational> out;
  for (const auto& x : v) out.push_back(rational_of(x));
  return out;
}

inline std::vector<std::vector<Rational>> rational_table(const Json& v) {
  if (!v.is_array()) throw ConfigError("expected a matrix of rationals");
  std::vector<std::vector<Rational>> out;
  for (const auto& row : v) out.push_back(rational_row(row));
  return out;
}

}  // namespace detail

inline InstanceFile parse_instance(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("instance JSON: ") + e.what());
  }
  try {
    InstanceFile f;
    auto& inst = f.instance;
    inst.name = j.value("name", std::string("instance"));
    inst.alpha = detail::rational_of(j.at("alpha"));
    inst.pr = detail::rational_row(j.at("pr"));
    inst.dist = detail::rational_table(j.at("dist"));
    if (j.contains("dpr")) {
      inst.dpr = detail::rational_table(j.at("dpr"));
    } else {
      inst.dpr.assign(inst.pr.size(), inst.pr);  // constant map
    }
    if (j.contains("points")) {
      for (const auto& p : j.at("points")) {
        std::vector<double> xs = p.get<std::vector<double>>();
        inst.points.push_back(Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size())));
      }
    }
    inst.validate();
    for (const auto& q : j.value("queries", Json::array())) {
      ZoomingQuery z;
      z.label = q.value("label", std::string("query"));
      z.s = detail::rational_of(q.at("s"));
      z.r = detail::rational_of(q.at("r"));
      z.cover = q.value("cover", std::vector<std::size_t>{});
      for (auto c : z.cover) {
        if (c >= inst.size()) throw DimensionError("query cover index out of range");
      }
      if (q.contains("s_limit")) z.s_limit = detail::rational_of(q.at("s_limit"));
      f.queries.push_back(z);
    }
    for (const auto& e : j.value("ledger", Json::array())) {
      const auto a = e.at(0).get<std::size_t>();
      const auto b = e.at(1).get<std::size_t>();
      if (a >= inst.size() || b >= inst.size()) throw DimensionError("ledger index out of range");
      f.ledger.emplace_back(a, b);
    }
    return f;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("instance JSON: ") + e.what());
  }
}

/// Band counts, sequential expectations and dimension numbers for every query.
inline Json zooming_report(const InstanceFile& f) {
  const auto& inst = f.instance;
  Json j;
  j["instance"] = inst.name;
  j["alpha"] = to_string(inst.alpha);
  Json ledger = Json::array();
  for (const auto& [a, b] : f.ledger) {
    const Rational lb = pairwise_lower_bound(inst, a, b);
    ledger.push_back({{"deployed", a}, {"query", b}, {"pr_lb", to_string(lb)},
                      {"pr_lb_value", to_double(lb)}});
  }
  j["ledger"] = ledger;
  Json queries = Json::array();
  std::vector<BandEntry> bands;
  for (const auto& q : f.queries) {
    Json row;
    row["label"] = q.label;
    row["s"] = to_string(q.s);
    row["r"] = to_string(q.r);
    const auto z = zooming_band_count(inst, q.s, q.r);
    row["zooming_count"] = z.count;
    row["zooming_cover"] = z.cover;
    bands.push_back({q.label + "/zooming", to_double(q.s), to_double(q.r),
                     static_cast<double>(z.count),
                     q.s_limit ? std::optional<double>(to_double(*q.s_limit)) : std::nullopt});
    if (!q.cover.empty()) {
      const Rational seq = sequential_band_count(inst, q.cover, q.s, q.r, PrMinScope::kDeployed);
      const Rational seq_global =
          sequential_band_count(inst, q.cover, q.s, q.r, PrMinScope::kGlobal);
      row["sequential_cover"] = q.cover;
      row["sequential_count"] = to_string(seq);
      row["sequential_count_value"] = to_double(seq);
      row["sequential_count_global_pr_min"] = to_string(seq_global);
      bands.push_back({q.label + "/sequential", to_double(q.s), to_double(q.r), to_double(seq),
                       q.s_limit ? std::optional<double>(to_double(*q.s_limit)) : std::nullopt});
    }
    queries.push_back(row);
  }
  j["queries"] = queries;
  Json dims = Json::array();
  for (const auto& d : dimension_report(bands)) {
    Json row;
    row["band"] = d.band.label;
    row["count"] = d.band.count;
    row["d_est"] = d.d_est ? Json(*d.d_est) : Json(nullptr);
    row["d_limit"] = d.d_limit ? Json(*d.d_limit) : Json(nullptr);
    dims.push_back(row);
  }
  j["dimensions"] = dims;
  return j;
}

}  // namespace perfbandit::harness
