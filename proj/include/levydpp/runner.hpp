#pragma once

// Command-line front end: simulate / value / verify subcommands driven by an
// ExperimentConfig, writing CSV and structured-text reports. Identical
// config and seed produce byte-identical outputs at any worker count; every
// emitted number is copied from a CheckReport or estimate, never recomputed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levydpp/checks.hpp"
#include "levydpp/config.hpp"
#include "levydpp/problems.hpp"
#include "levydpp/reports.hpp"
#include "levydpp/value.hpp"

namespace levydpp {

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// One (x, y [, err]) file per dependent column, x taken from column 0;
// a column named *_se is consumed as the error band of the column before it.
inline void emit_plotdata(const CheckReport& report, const std::filesystem::path& dir) {
  for (const auto& table : report.tables) {
    if (table.columns.size() < 2) continue;
    for (std::size_t c = 1; c < table.columns.size(); ++c) {
      const std::string& name = table.columns[c];
      if (name.size() > 3 && name.compare(name.size() - 3, 3, "_se") == 0) continue;
      const bool has_err = c + 1 < table.columns.size() &&
                           table.columns[c + 1].size() > 3 &&
                           table.columns[c + 1].compare(table.columns[c + 1].size() - 3, 3,
                                                        "_se") == 0;
      std::string text = table.columns[0] + "," + name + (has_err ? ",err" : "") + "\n";
      for (const auto& row : table.rows) {
        text += format_double(row[0]) + "," + format_double(row[c]);
        if (has_err) text += "," + format_double(row[c + 1]);
        text += "\n";
      }
      write_file(dir / (report.check_name + "_" + table.name + "_" + name + ".csv"), text);
    }
  }
}

inline void emit_report(const CheckReport& report, const std::filesystem::path& out_dir,
                        std::ostream& out) {
  write_file(out_dir / (report.check_name + ".txt"), to_text(report));
  for (const auto& table : report.tables)
    write_file(out_dir / (report.check_name + "_" + table.name + ".csv"), to_csv(table));
  const std::filesystem::path plot_dir = out_dir / "plot";
  std::filesystem::create_directories(plot_dir);
  emit_plotdata(report, plot_dir);
  out << (report.pass ? "[PASS] " : "[FAIL] ") << report.check_name
      << ": lhs=" << format_double(report.lhs) << " rhs=" << format_double(report.rhs)
      << " tolerance=" << format_double(report.tolerance()) << "\n";
}

}  // namespace detail

inline int run_simulate(const ExperimentConfig& cfg, std::ostream& out) {
  const Problem prob = configured_problem(cfg);
  const auto family = prob.full_family();
  const ControlPolicy& policy = family.front();
  const std::vector<double> grid =
      make_grid(prob.s, prob.T, prob.dt, detail::family_breakpoints(family));
  const TruncationLevel M(cfg.M.value_or(prob.default_M));
  const std::size_t n_show = std::min<std::size_t>(cfg.n_paths, 16);
  const auto d = static_cast<std::size_t>(prob.coeffs.state_dim);

  Table table{"paths", {"path", "time"}, {}};
  for (std::size_t i = 0; i < d; ++i)
    table.columns.push_back("untruncated_" + std::to_string(i));
  for (std::size_t i = 0; i < d; ++i)
    table.columns.push_back("truncated_" + std::to_string(i));
  for (std::size_t k = 0; k < n_show; ++k) {
    const NoiseRealization noise =
        sample_noise(prob.spec, prob.coeffs.brownian_dim, prob.s, prob.T, grid,
                     derive_seed(cfg.seed, k));
    const StatePath full = integrate(prob.coeffs, policy, noise, prob.s, prob.x0, prob.T);
    const StatePath trunc =
        integrate_truncated(prob.coeffs, policy, noise, prob.s, prob.x0, prob.T, M);
    for (std::size_t i = 0; i < full.points(); ++i) {
      std::vector<double> row{static_cast<double>(k), full.time_grid[i]};
      for (double v : full.state_at(i)) row.push_back(v);
      for (double v : trunc.state_at(i)) row.push_back(v);
      table.rows.push_back(std::move(row));
    }
  }
  std::filesystem::create_directories(cfg.out_dir);
  detail::write_file(std::filesystem::path(cfg.out_dir) / "paths.csv", to_csv(table));
  out << "wrote " << (std::filesystem::path(cfg.out_dir) / "paths.csv").string() << " ("
      << n_show << " paths, problem " << prob.name << ", M=" << format_double(M.M) << ")\n";
  return 0;
}

inline int run_value(const ExperimentConfig& cfg, std::ostream& out) {
  const Problem prob = configured_problem(cfg);
  const auto family = prob.full_family();
  std::vector<std::optional<double>> levels;
  for (double m : cfg.M_list.value_or(prob.M_list)) levels.emplace_back(m);
  levels.emplace_back(std::nullopt);

  Table table{"value",
              {"s", "x0", "M", "policy_id", "mean", "std_error", "n_paths", "diverged"},
              {}};
  for (const auto& level : levels) {
    const std::optional<TruncationLevel> M =
        level ? std::optional<TruncationLevel>(TruncationLevel(*level)) : std::nullopt;
    const ValueResult r = value(family, prob.coeffs, prob.cost, prob.spec, prob.s, prob.x0,
                                prob.T, cfg.n_paths, cfg.seed, M, prob.dt, cfg.workers);
    const double m_col = level ? *level : std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < r.per_policy.size(); ++p) {
      const ValueEstimate& est = r.per_policy[p];
      table.rows.push_back({prob.s, prob.x0[0], m_col, static_cast<double>(p), est.mean,
                            est.std_error, static_cast<double>(est.n_paths),
                            static_cast<double>(est.diverged_count)});
    }
    out << "value problem=" << prob.name << " M=" << format_double(m_col)
        << " best=" << format_double(r.best.mean) << " se=" << format_double(r.best.std_error)
        << " argmax=" << r.argmax << "\n";
  }
  std::filesystem::create_directories(cfg.out_dir);
  detail::write_file(std::filesystem::path(cfg.out_dir) / "value_table.csv", to_csv(table));
  out << "wrote " << (std::filesystem::path(cfg.out_dir) / "value_table.csv").string() << "\n";
  return 0;
}

// The verify groups. Seeds per check derive from the base seed with fixed
// stream indices so groups stay decorrelated and reproducible individually.
inline std::vector<CheckReport> run_checks(const std::string& which,
                                           const ExperimentConfig& cfg) {
  std::vector<CheckReport> reports;
  const bool all = which == "all";
  const int w = cfg.workers;
  const double se = cfg.se_multiplier;

  if (all || which == "tau-law") {
    LevyMeasureSpec spec;
    spec.large_part = PowerLawPart{1.0, 0.5};
    reports.push_back(check_tau_law(spec, cfg.M_list.value_or(std::vector<double>{1, 2, 4, 8, 16}),
                                    0.0, 1.0, cfg.n_seeds, derive_seed(cfg.seed, 101), w, se));
  }
  if (all || which == "coupling") {
    const std::size_t n = std::max<std::size_t>(cfg.n_paths / 10, 50);
    std::size_t i = 0;
    for (const auto& name : registry_names()) {
      const Problem prob = make_problem(name);
      CheckReport r = check_coupling(prob, prob.M_list.front(), n,
                                     derive_seed(cfg.seed, 110 + i), w);
      r.check_name += "-" + prob.name;
      reports.push_back(std::move(r));
      ++i;
    }
  }
  if (all || which == "truncation") {
    const Problem prob = make_problem("heavy-tail");
    CheckReport r = check_truncation_convergence(prob, cfg.M_list.value_or(prob.M_list),
                                                 cfg.n_paths, derive_seed(cfg.seed, 120), w,
                                                 se);
    r.check_name += "-" + prob.name;
    reports.push_back(std::move(r));
  }
  if (all || which == "dpp") {
    {
      const Problem prob = make_problem("pure-jump");
      CheckReport stage = check_dpp_discrete_exact(prob, StoppingRule::at(1.0));
      stage.check_name = "dpp-exact-stage-" + prob.name;
      reports.push_back(std::move(stage));
      CheckReport fj = check_dpp_discrete_exact(prob, StoppingRule::first_jump());
      fj.check_name = "dpp-exact-first-jump-" + prob.name;
      reports.push_back(std::move(fj));
    }
    std::size_t i = 0;
    for (const auto& name : registry_names()) {
      const Problem prob = make_problem(name);
      const double mid = prob.family_breaks.empty()
                             ? 0.5 * (prob.s + prob.T)
                             : prob.family_breaks.front();
      CheckReport r = check_dpp(prob, StoppingRule::at(mid), cfg.n_outer, cfg.n_inner,
                                derive_seed(cfg.seed, 130 + i), w, se);
      r.check_name += "-" + prob.name;
      reports.push_back(std::move(r));
      ++i;
    }
    {
      const Problem prob = make_problem("pure-jump");
      CheckReport r = check_dpp(prob, StoppingRule::first_jump(), cfg.n_outer, cfg.n_inner,
                                derive_seed(cfg.seed, 140), w, se);
      r.check_name += "-first-jump-" + prob.name;
      reports.push_back(std::move(r));
    }
  }
  if (all || which == "supermartingale") {
    std::size_t i = 0;
    for (const auto& name : registry_names()) {
      const Problem prob = make_problem(name);
      CheckReport r = check_supermartingale(prob, prob.default_M, cfg.n_paths,
                                            cfg.n_table_paths, derive_seed(cfg.seed, 150 + i),
                                            w, se);
      r.check_name += "-" + prob.name;
      reports.push_back(std::move(r));
      ++i;
    }
  }
  if (all || which == "moments") {
    {
      const Problem prob = make_problem("linear-drift");
      CheckReport r = check_moment_bounds(prob, prob.default_M, {2, 4}, {0, 1, 4, 16},
                                          cfg.n_paths, 0, derive_seed(cfg.seed, 160), w);
      r.check_name += "-" + prob.name;
      reports.push_back(std::move(r));
    }
    {
      const Problem prob = make_problem("heavy-tail");
      CheckReport r = check_moment_bounds(prob, prob.default_M, {2}, {0, 1, 4},
                                          std::max<std::size_t>(cfg.n_paths / 2, 100),
                                          cfg.n_seeds, derive_seed(cfg.seed, 161), w);
      r.check_name += "-" + prob.name;
      reports.push_back(std::move(r));
    }
  }
  if (all || which == "continuity") {
    const Problem prob = make_problem("linear-drift");
    CheckReport r =
        check_value_continuity(prob, cfg.n_paths, derive_seed(cfg.seed, 170), w, se);
    r.check_name += "-" + prob.name;
    reports.push_back(std::move(r));
  }
  return reports;
}

inline int run_verify(const std::string& which, const ExperimentConfig& cfg,
                      std::ostream& out) {
  const std::vector<CheckReport> reports = run_checks(which, cfg);
  std::filesystem::create_directories(cfg.out_dir);
  std::size_t failed = 0;
  for (const auto& report : reports) {
    detail::emit_report(report, cfg.out_dir, out);
    if (!report.pass) ++failed;
  }
  out << reports.size() << " checks, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and verification toolkit for controlled jump diffusions"};
  app.require_subcommand(1);

  std::string config_path, problem_name, out_dir;
  std::uint64_t seed = 0;
  int workers = 1;
  auto* config_opt = app.add_option("--config", config_path, "JSON config file");
  auto* problem_opt = app.add_option("--problem", problem_name, "registry problem name");
  auto* seed_opt = app.add_option("--seed", seed, "base seed (overrides config)");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");

  auto* simulate = app.add_subcommand("simulate", "emit sample paths CSV");
  simulate->fallthrough();
  auto* value_cmd = app.add_subcommand("value", "emit value tables");
  value_cmd->fallthrough();
  auto* verify = app.add_subcommand("verify", "run property checks");
  verify->fallthrough();
  std::string which = "all";
  verify->add_option("which", which, "check group")
      ->check(CLI::IsMember({"dpp", "truncation", "supermartingale", "moments", "tau-law",
                             "coupling", "continuity", "all"}));

  std::vector<std::string> argv_like{"levydpp"};
  argv_like.insert(argv_like.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_like) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    ExperimentConfig cfg =
        config_opt->count() > 0 ? load_config(config_path) : ExperimentConfig{};
    if (problem_opt->count() > 0) cfg.problem = problem_name;
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (workers_opt->count() > 0) cfg.workers = workers;
    if (out_opt->count() > 0) cfg.out_dir = out_dir;
    if (cfg.workers < 1 || cfg.workers > 256) throw ConfigError("workers: must be in [1, 256]");

    if (simulate->parsed()) return run_simulate(cfg, out);
    if (value_cmd->parsed()) return run_value(cfg, out);
    if (verify->parsed()) return run_verify(which, cfg, out);
    err << "error: no subcommand\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace levydpp
