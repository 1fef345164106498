#pragma once

// Command-line front end: run | bands | zooming | reproduce-figures | sweep.
//
// Exit codes: 0 success, 2 config or usage error, 3 dimension mismatch, 1 anything else.
// Failures print one line to stderr:  error_code=<CODE> message="<text>"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "perfbandit/baseline.hpp"
#include "perfbandit/harness/config.hpp"
#include "perfbandit/harness/io.hpp"
#include "perfbandit/locfam.hpp"
#include "perfbandit/pcb.hpp"

#ifndef PERFBANDIT_DATA_DIR
#define PERFBANDIT_DATA_DIR "data"
#endif

namespace perfbandit::harness {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kRuntime = 1, kConfig = 2, kDimension = 3 };

/// Seeds a config expands to: each listed seed s followed by s+1, ..., s+repeat-1, without
/// duplicates.
inline std::vector<std::uint64_t> expand_seeds(const ExperimentConfig& c) {
  std::vector<std::uint64_t> out;
  for (auto s : c.seeds) {
    for (int k = 0; k < c.repeat; ++k) {
      const std::uint64_t v = s + static_cast<std::uint64_t>(k);
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  }
  return out;
}

/// L_theta for the baseline: the config override, else the loss's declared value (scaled by
/// sqrt(d) for per-coordinate profiles).
inline double baseline_theta_lipschitz(const ExperimentConfig& c, const Environment& env) {
  if (c.baseline_lipschitz_theta) return *c.baseline_lipschitz_theta;
  const auto declared = env.loss().lipschitz_theta();
  if (!declared) throw ConfigError("baseline needs baseline.lipschitz_theta for this loss");
  return *declared * std::sqrt(static_cast<double>(env.dim_theta()));
}

inline RunLog run_experiment(const ExperimentConfig& c, std::uint64_t seed) {
  check_algorithm(c.algorithm);
  const Environment env = build_environment(c.environment);
  const ProblemConfig cfg = build_problem(c.problem, env, seed);
  const CandidateGrid grid = build_grid(c.problem, env.dim_theta());
  if (c.oracle_mode && !env.has_oracle()) {
    throw ConfigError("oracle_mode is on but environment '" + env.kind() +
                      "' has no exact DPR oracle");
  }
  const DprMode mode = c.oracle_mode ? DprMode::kOracle : DprMode::kEmpirical;
  if (c.algorithm == "pcb") return run_pcb(cfg, env, grid, mode);
  if (c.algorithm == "baseline") {
    return run_baseline(cfg, env, grid, baseline_theta_lipschitz(c, env), mode);
  }
  return select_and_run(cfg, env, grid, build_locfam(c.locfam));
}

inline std::string run_stem(const ExperimentConfig& c, std::uint64_t seed) {
  return c.name + "_" + c.algorithm + "_seed" + std::to_string(seed);
}

/// Writes <stem>.csv and <stem>.json under `dir`; returns the summary.
inline Json write_run(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir) {
  const RunLog log = run_experiment(c, seed);
  const std::string stem = run_stem(c, seed);
  write_text(dir / (stem + ".csv"), runlog_csv(log));
  Json summary = summary_json(log);
  summary["config"] = c.name;
  write_text(dir / (stem + ".json"), summary.dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------------------------------
// Figure datasets
// ---------------------------------------------------------------------------------------

struct FigureSetup {
  Row params;            // c0..c4, alpha
  double l_phi = 0.0;    // performative band constant
  std::optional<double> l_pr;  // baseline band constant; measured when absent
};

inline const FigureSetup kFigureOne{{-1.0, 0.7, 0.3, 3.0, 0.5, 1.0}, 1.6, 3.8};
inline const FigureSetup kFigureThree{{-3.0, 1.0, 0.9, 3.0, 0.5, 0.5}, 1.3, std::nullopt};

inline Environment figure_env(const FigureSetup& f) {
  const auto& p = f.params;
  return make_appendix_e_env(p[0], p[1], p[2], p[3], p[4], p[5]);
}

/// Lipschitz constant of PR measured on a fine grid.
inline double measured_pr_lipschitz(const Environment& env) {
  const auto fine = CandidateGrid::interval(2001);
  // Adjacent pairs suffice in one dimension.
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < fine.size(); ++i) {
    const double d = (fine[i + 1] - fine[i]).norm();
    worst = std::max(worst, std::abs(env.oracle_pr(fine[i + 1]) - env.oracle_pr(fine[i])) / d);
  }
  return worst;
}

inline std::vector<ParameterVector> as_points(const std::vector<double>& xs) {
  std::vector<ParameterVector> out;
  for (double x : xs) {
    if (std::abs(x) > 1.0) throw ConfigError("deployed model outside [-1, 1]");
    out.push_back(Vector::Constant(1, x));
  }
  return out;
}

/// Per grid point: PR, both lower bounds, both PR_min values and whether each family
/// discards the point (lb > PR_min).
inline std::string discarding_csv(const Environment& env, const CandidateGrid& grid,
                                  const std::vector<ParameterVector>& deployed, double l_phi,
                                  double l_pr) {
  const BandSummary bands = compute_bands(env, grid, deployed, l_phi, l_pr);
  double perf_min = std::numeric_limits<double>::infinity();
  double base_min = std::numeric_limits<double>::infinity();
  for (const auto& r : bands.rows) {
    perf_min = std::min(perf_min, r.perf.ub);
    base_min = std::min(base_min, r.base.ub);
  }
  std::ostringstream out;
  out << "# perfbandit discarding v1\n";
  out << "theta,pr_true,perf_lb,base_lb,perf_pr_min,base_pr_min,perf_discard,base_discard\n";
  for (const auto& r : bands.rows) {
    out << fmt(r.theta) << ',' << fmt(r.pr) << ',' << fmt(r.perf.lb) << ',' << fmt(r.base.lb)
        << ',' << fmt(perf_min) << ',' << fmt(base_min) << ',' << (r.perf.lb > perf_min ? 1 : 0)
        << ',' << (r.base.lb > base_min ? 1 : 0) << '\n';
  }
  return out.str();
}

/// Performative band after each prefix of the deployment sequence.
inline std::string sequential_csv(const Environment& env, const CandidateGrid& grid,
                                  const std::vector<ParameterVector>& deployed, double l_phi) {
  std::ostringstream out;
  out << "# perfbandit sequential v1\n";
  out << "stage,theta,pr_true,perf_lb,perf_ub,pr_min\n";
  for (std::size_t k = 1; k <= deployed.size(); ++k) {
    const std::vector<ParameterVector> prefix(deployed.begin(),
                                              deployed.begin() + static_cast<std::ptrdiff_t>(k));
    const BandSummary b = compute_bands(env, grid, prefix, l_phi, l_phi);
    double pr_min_value = std::numeric_limits<double>::infinity();
    for (const auto& r : b.rows) pr_min_value = std::min(pr_min_value, r.perf.ub);
    for (const auto& r : b.rows) {
      out << k << ',' << fmt(r.theta) << ',' << fmt(r.pr) << ',' << fmt(r.perf.lb) << ','
          << fmt(r.perf.ub) << ',' << fmt(pr_min_value) << '\n';
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------------------

struct CliOptions {
  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> algo;
  std::optional<std::string> oracle_mode;
  std::vector<double> deployed = {-0.5, 0.5};
  std::optional<double> l_phi;
  std::optional<double> l_pr;
  std::int64_t grid_points = 400;
  unsigned threads = 0;
};

inline ExperimentConfig load_with_overrides(const std::string& path, const CliOptions& o) {
  ExperimentConfig c = load_config(path);
  if (o.algo) {
    check_algorithm(*o.algo);
    c.algorithm = *o.algo;
  }
  if (o.oracle_mode) c.oracle_mode = *o.oracle_mode == "on";
  if (o.seed) c.seeds = {*o.seed}, c.repeat = 1;
  if (o.out) c.output_dir = *o.out;
  return c;
}

inline int cmd_run(const CliOptions& o, std::ostream& out) {
  if (o.configs.size() != 1) throw ConfigError("run takes exactly one --config");
  const ExperimentConfig c = load_with_overrides(o.configs.front(), o);
  for (auto seed : expand_seeds(c)) {
    const Json s = write_run(c, seed, c.output_dir);
    out << run_stem(c, seed) << " total_regret=" << s["total_regret"].dump()
        << " steps=" << s["steps"].dump() << "\n";
  }
  return kOk;
}

inline int cmd_bands(const CliOptions& o, std::ostream& out) {
  std::optional<Environment> env;
  double l_phi = 0.0;
  std::optional<double> l_pr = o.l_pr;
  if (o.configs.empty()) {
    env.emplace(figure_env(kFigureOne));
    l_phi = kFigureOne.l_phi;
    if (!l_pr) l_pr = kFigureOne.l_pr;
  } else {
    const ExperimentConfig c = load_with_overrides(o.configs.front(), o);
    env.emplace(build_environment(c.environment));
    const ProblemConfig cfg = build_problem(c.problem, *env, 0);
    l_phi = cfg.lz_eps();
  }
  if (env->dim_theta() != 1) throw DimensionError("bands requires a one-dimensional model");
  if (!env->has_oracle()) throw ConfigError("bands requires an environment with an exact oracle");
  if (o.l_phi) l_phi = *o.l_phi;
  if (!l_pr) l_pr = measured_pr_lipschitz(*env);
  if (o.grid_points < 1) throw ConfigError("--grid-points must be >= 1");
  const auto grid = CandidateGrid::interval(static_cast<std::size_t>(o.grid_points));
  const BandSummary b = compute_bands(*env, grid, as_points(o.deployed), l_phi, *l_pr);
  const fs::path dir = o.out.value_or("out");
  write_text(dir / "bands.csv", bands_csv(b));
  Json j;
  j["l_phi"] = l_phi;
  j["l_pr"] = *l_pr;
  j["deployed"] = o.deployed;
  j["grid_points"] = o.grid_points;
  j["soundness_violations"] = b.soundness_violations;
  j["nesting_violations"] = b.nesting_violations;
  write_text(dir / "bands.json", j.dump(2) + "\n");
  out << "bands: " << b.rows.size() << " points, soundness_violations="
      << b.soundness_violations << " nesting_violations=" << b.nesting_violations << "\n";
  return kOk;
}

inline fs::path default_instance_path() {
  return fs::path(PERFBANDIT_DATA_DIR) / "instances" / "appendix_d.json";
}

inline int cmd_zooming(const CliOptions& o, std::ostream& out) {
  const fs::path path = o.configs.empty() ? default_instance_path() : fs::path(o.configs.front());
  const InstanceFile f = parse_instance(read_text(path));
  const Json report = zooming_report(f);
  write_text(fs::path(o.out.value_or("out")) / "zooming_report.json", report.dump(2) + "\n");
  out << report.dump(2) << "\n";
  return kOk;
}

inline int cmd_reproduce(const CliOptions& o, std::ostream& out) {
  const fs::path dir = o.out.value_or("out");
  const auto grid = CandidateGrid::interval(static_cast<std::size_t>(std::max<std::int64_t>(1, o.grid_points)));
  const auto deployed = as_points(o.deployed);
  Json j;

  const Environment one = figure_env(kFigureOne);
  const double one_pr = kFigureOne.l_pr.value_or(measured_pr_lipschitz(one));
  const BandSummary b1 = compute_bands(one, grid, deployed, kFigureOne.l_phi, one_pr);
  write_text(dir / "figure1_bands.csv", bands_csv(b1));
  write_text(dir / "figure2_discarding.csv",
             discarding_csv(one, grid, deployed, kFigureOne.l_phi, one_pr));
  j["figure1"] = {{"l_phi", kFigureOne.l_phi},
                  {"l_pr", one_pr},
                  {"measured_pr_lipschitz", measured_pr_lipschitz(one)},
                  {"soundness_violations", b1.soundness_violations},
                  {"nesting_violations", b1.nesting_violations}};

  const Environment three = figure_env(kFigureThree);
  const double three_pr = kFigureThree.l_pr.value_or(measured_pr_lipschitz(three));
  const BandSummary b3 = compute_bands(three, grid, deployed, kFigureThree.l_phi, three_pr);
  write_text(dir / "figure3_bands.csv", bands_csv(b3));
  write_text(dir / "figure3_sequential.csv",
             sequential_csv(three, grid, deployed, kFigureThree.l_phi));
  j["figure3"] = {{"l_phi", kFigureThree.l_phi},
                  {"l_pr", three_pr},
                  {"soundness_violations", b3.soundness_violations},
                  {"nesting_violations", b3.nesting_violations}};
  j["deployed"] = o.deployed;
  write_text(dir / "figures.json", j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return kOk;
}

inline int cmd_sweep(const CliOptions& o, std::ostream& out) {
  if (o.configs.empty()) throw ConfigError("sweep needs at least one --config");
  struct Job {
    ExperimentConfig config;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& path : o.configs) {
    const ExperimentConfig c = load_with_overrides(path, o);
    for (auto seed : expand_seeds(c)) jobs.push_back({c, seed});
  }
  std::vector<std::optional<RunLog>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  const unsigned workers =
      std::min<unsigned>(o.threads > 0 ? o.threads : hw, static_cast<unsigned>(jobs.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          try {
            results[i] = run_experiment(jobs[i].config, jobs[i].seed);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::ostringstream csv;
  csv << "# perfbandit sweep v1\n";
  csv << "config,algorithm,seed,steps,total_regret,final_iterate\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const RunLog& log = *results[i];
    std::string final_theta;
    if (log.final_iterate) {
      for (Eigen::Index k = 0; k < log.final_iterate->size(); ++k) {
        if (k > 0) final_theta += ';';
        final_theta += fmt((*log.final_iterate)[k]);
      }
    }
    csv << jobs[i].config.name << ',' << log.algorithm << ',' << jobs[i].seed << ','
        << log.steps.size() << ',' << fmt(log.total_regret()) << ',' << final_theta << '\n';
  }
  const fs::path dir = o.out.value_or(jobs.front().config.output_dir);
  write_text(dir / "aggregate.csv", csv.str());
  out << "sweep: " << jobs.size() << " runs on " << workers << " workers -> "
      << (dir / "aggregate.csv").string() << "\n";
  return kOk;
}

inline void report_error(std::ostream& err, const char* code, const std::string& message) {
  std::string flat = message;
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  std::replace(flat.begin(), flat.end(), '"', '\'');
  err << "error_code=" << code << " message=\"" << flat << "\"\n";
}

/// Entry point; returns the process exit code.
inline int cli_run(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Performative regret minimization experiments"};
  app.require_subcommand(1);
  CliOptions o;

  auto add_common = [&](CLI::App* sub, bool many_configs) {
    auto* cfg = sub->add_option("--config", o.configs, "Config (YAML) or instance (JSON) path");
    if (!many_configs) cfg->expected(0, 1);
    sub->add_option("--seed", o.seed, "Override the seed list with a single seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--algo", o.algo, "Algorithm")
        ->check(CLI::IsMember({"pcb", "locfam", "baseline"}));
    sub->add_option("--oracle-mode", o.oracle_mode, "Exact DPR oracle")
        ->check(CLI::IsMember({"on", "off"}));
  };
  auto* run = app.add_subcommand("run", "Run one experiment config (all its seeds)");
  add_common(run, false);
  auto* bands = app.add_subcommand("bands", "Dump both confidence bands on a 1-d grid");
  add_common(bands, false);
  bands->add_option("--deployed", o.deployed, "Deployed models")->delimiter(',');
  bands->add_option("--l-phi", o.l_phi, "Distance multiplier of the performative band");
  bands->add_option("--l-pr", o.l_pr, "Distance multiplier of the baseline band");
  bands->add_option("--grid-points", o.grid_points, "Grid size");
  auto* zoom = app.add_subcommand("zooming", "Band counts on a finite instance file");
  add_common(zoom, false);
  auto* figs = app.add_subcommand("reproduce-figures", "Emit the band and discarding datasets");
  add_common(figs, false);
  figs->add_option("--deployed", o.deployed, "Deployed models")->delimiter(',');
  figs->add_option("--grid-points", o.grid_points, "Grid size");
  auto* sweep = app.add_subcommand("sweep", "Seed x config matrix into aggregate.csv");
  add_common(sweep, true);
  sweep->add_option("--threads", o.threads, "Worker threads (0 = hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "USAGE", e.what());
    return kConfig;
  }

  try {
    if (run->parsed()) return cmd_run(o, out);
    if (bands->parsed()) return cmd_bands(o, out);
    if (zoom->parsed()) return cmd_zooming(o, out);
    if (figs->parsed()) return cmd_reproduce(o, out);
    return cmd_sweep(o, out);
  } catch (const ConfigError& e) {
    report_error(err, "CONFIG_PARSE", e.what());
    return kConfig;
  } catch (const DimensionError& e) {
    report_error(err, "DIMENSION_MISMATCH", e.what());
    return kDimension;
  } catch (const std::exception& e) {
    report_error(err, "RUNTIME_FAILURE", e.what());
    return kRuntime;
  }
}

}  // namespace perfbandit::harness
