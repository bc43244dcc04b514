#pragma once

// Experiment configuration loaded from JSON. Unknown keys and type or range
// violations are all collected and reported together in one ConfigError so a
// bad file surfaces every problem at once.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "levydpp/problems.hpp"

namespace levydpp {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string problem = "linear-drift";
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = "out";
  std::size_t n_paths = 2000;
  std::size_t n_seeds = 10000;
  std::size_t n_outer = 2000;
  std::size_t n_inner = 200;
  std::size_t n_table_paths = 2000;
  double se_multiplier = 3.0;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<double> x0;
  std::optional<double> M;
  std::optional<std::vector<double>> M_list;
  std::optional<double> delta_dt;
  std::optional<double> near_martingale_allowance;
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const nlohmann::json& j) : j_(j) {
    if (!j_.is_object()) faults_.push_back("top level: expected an object");
  }

  void require_known_keys(const std::vector<std::string>& known) {
    if (!j_.is_object()) return;
    for (const auto& item : j_.items()) {
      bool ok = false;
      for (const auto& k : known) ok = ok || k == item.key();
      if (!ok) faults_.push_back(item.key() + ": unknown key");
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    if (!j_.is_object() || !j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      faults_.push_back(std::string(key) + ": wrong type");
    }
  }

  template <typename T>
  void read(const char* key, std::optional<T>& out) {
    if (!j_.is_object() || !j_.contains(key)) return;
    T value{};
    try {
      value = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      faults_.push_back(std::string(key) + ": wrong type");
      return;
    }
    out = value;
  }

  void fault(const std::string& message) { faults_.push_back(message); }

  void finish() const {
    if (faults_.empty()) return;
    std::string joined = "invalid config:";
    for (const auto& f : faults_) joined += "\n  " + f;
    throw ConfigError(joined);
  }

 private:
  const nlohmann::json& j_;
  std::vector<std::string> faults_;
};

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig c;
  detail::ConfigReader r(j);
  r.require_known_keys({"problem", "seed", "workers", "out_dir", "n_paths", "n_seeds",
                        "n_outer", "n_inner", "n_table_paths", "se_multiplier", "dt",
                        "horizon", "x0", "M", "M_list", "delta_dt",
                        "near_martingale_allowance"});
  r.read("problem", c.problem);
  r.read("seed", c.seed);
  r.read("workers", c.workers);
  r.read("out_dir", c.out_dir);
  r.read("n_paths", c.n_paths);
  r.read("n_seeds", c.n_seeds);
  r.read("n_outer", c.n_outer);
  r.read("n_inner", c.n_inner);
  r.read("n_table_paths", c.n_table_paths);
  r.read("se_multiplier", c.se_multiplier);
  r.read("dt", c.dt);
  r.read("horizon", c.horizon);
  r.read("x0", c.x0);
  r.read("M", c.M);
  r.read("M_list", c.M_list);
  r.read("delta_dt", c.delta_dt);
  r.read("near_martingale_allowance", c.near_martingale_allowance);

  {
    bool known = false;
    for (const auto& name : registry_names()) known = known || name == c.problem;
    if (!known) r.fault("problem: no registry entry named '" + c.problem + "'");
  }
  if (c.workers < 1 || c.workers > 256) r.fault("workers: must be in [1, 256]");
  if (c.n_paths < 2) r.fault("n_paths: must be at least 2");
  if (c.n_seeds < 2) r.fault("n_seeds: must be at least 2");
  if (c.n_outer < 2) r.fault("n_outer: must be at least 2");
  if (c.n_inner < 2) r.fault("n_inner: must be at least 2");
  if (c.n_table_paths < 2) r.fault("n_table_paths: must be at least 2");
  if (!(c.se_multiplier > 0)) r.fault("se_multiplier: must be positive");
  if (c.dt && !(*c.dt > 0)) r.fault("dt: must be positive");
  if (c.horizon && !(*c.horizon > 0)) r.fault("horizon: must be positive");
  if (c.M && !(*c.M >= 1)) r.fault("M: must be at least 1");
  if (c.delta_dt && !(*c.delta_dt >= 0)) r.fault("delta_dt: must be nonnegative");
  if (c.near_martingale_allowance && !(*c.near_martingale_allowance >= 0))
    r.fault("near_martingale_allowance: must be nonnegative");
  if (c.M_list) {
    if (c.M_list->empty()) r.fault("M_list: must be nonempty");
    for (std::size_t i = 0; i < c.M_list->size(); ++i) {
      if (!((*c.M_list)[i] >= 1)) r.fault("M_list: entries must be at least 1");
      if (i > 0 && (*c.M_list)[i] <= (*c.M_list)[i - 1])
        r.fault("M_list: entries must strictly increase");
    }
  }
  r.finish();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config file " + path + ": " + e.what());
  }
  return parse_config(j);
}

// Problem instance with the config's overrides applied.
inline Problem configured_problem(const ExperimentConfig& c) {
  Problem prob = make_problem(c.problem);
  if (c.dt) prob.dt = *c.dt;
  if (c.horizon) {
    if (*c.horizon <= prob.s) throw ConfigError("horizon: must exceed the start time");
    prob.T = *c.horizon;
  }
  if (c.x0) prob.x0 = Vec{*c.x0};
  if (c.M) prob.default_M = *c.M;
  if (c.M_list) prob.M_list = *c.M_list;
  if (c.delta_dt) prob.delta_dt = *c.delta_dt;
  if (c.near_martingale_allowance)
    prob.near_martingale_allowance = *c.near_martingale_allowance;
  return prob;
}

}  // namespace levydpp
