#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "levydpp/config.hpp"

namespace levydpp {
namespace {

TEST(ConfigTest, DefaultsSurviveEmptyObject) {
  const auto c = parse_config(nlohmann::json::object());
  EXPECT_EQ(c.problem, "linear-drift");
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.workers, 1);
  EXPECT_EQ(c.n_paths, 2000u);
  EXPECT_DOUBLE_EQ(c.se_multiplier, 3.0);
  EXPECT_FALSE(c.dt.has_value());
  EXPECT_FALSE(c.M_list.has_value());
}

TEST(ConfigTest, ReadsEveryField) {
  const nlohmann::json j = {
      {"problem", "pure-jump"}, {"seed", 7},       {"workers", 3},
      {"out_dir", "results"},   {"n_paths", 500},  {"n_seeds", 100},
      {"n_outer", 50},          {"n_inner", 25},   {"n_table_paths", 60},
      {"se_multiplier", 2.5},   {"dt", 0.125},     {"horizon", 2.0},
      {"x0", -0.5},             {"M", 4.0},        {"M_list", {1.0, 2.0, 4.0}},
      {"delta_dt", 0.05},       {"near_martingale_allowance", 0.02}};
  const auto c = parse_config(j);
  EXPECT_EQ(c.problem, "pure-jump");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.workers, 3);
  EXPECT_EQ(c.out_dir, "results");
  EXPECT_EQ(c.n_paths, 500u);
  EXPECT_EQ(c.n_seeds, 100u);
  EXPECT_EQ(c.n_outer, 50u);
  EXPECT_EQ(c.n_inner, 25u);
  EXPECT_EQ(c.n_table_paths, 60u);
  EXPECT_DOUBLE_EQ(c.se_multiplier, 2.5);
  ASSERT_TRUE(c.dt.has_value());
  EXPECT_DOUBLE_EQ(*c.dt, 0.125);
  ASSERT_TRUE(c.horizon.has_value());
  EXPECT_DOUBLE_EQ(*c.horizon, 2.0);
  ASSERT_TRUE(c.x0.has_value());
  EXPECT_DOUBLE_EQ(*c.x0, -0.5);
  ASSERT_TRUE(c.M.has_value());
  EXPECT_DOUBLE_EQ(*c.M, 4.0);
  ASSERT_TRUE(c.M_list.has_value());
  EXPECT_EQ(c.M_list->size(), 3u);
  EXPECT_DOUBLE_EQ(*c.delta_dt, 0.05);
  EXPECT_DOUBLE_EQ(*c.near_martingale_allowance, 0.02);
}

TEST(ConfigTest, UnknownKeyIsNamed) {
  try {
    parse_config({{"n_pathz", 100}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("n_pathz"), std::string::npos);
  }
}

TEST(ConfigTest, FaultsAggregate) {
  try {
    parse_config({{"workers", 0}, {"se_multiplier", -1.0}, {"problem", "no-such"}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("workers"), std::string::npos);
    EXPECT_NE(msg.find("se_multiplier"), std::string::npos);
    EXPECT_NE(msg.find("problem"), std::string::npos);
  }
}

TEST(ConfigTest, MListMustBeSortedAndAtLeastOne) {
  EXPECT_THROW(parse_config({{"M_list", {2.0, 1.0}}}), ConfigError);
  EXPECT_THROW(parse_config({{"M_list", {0.5, 2.0}}}), ConfigError);
  EXPECT_THROW(parse_config({{"M_list", nlohmann::json::array()}}), ConfigError);
  EXPECT_NO_THROW(parse_config({{"M_list", {1.0, 4.0}}}));
}

TEST(ConfigTest, WrongTypeIsRejected) {
  EXPECT_THROW(parse_config({{"n_paths", "many"}}), ConfigError);
  EXPECT_THROW(parse_config({{"dt", true}}), ConfigError);
}

TEST(ConfiguredProblemTest, OverridesApply) {
  ExperimentConfig c;
  c.problem = "deterministic";
  c.dt = 0.25;
  c.horizon = 3.0;
  c.x0 = 0.7;
  c.M = 2.0;
  c.M_list = std::vector<double>{1.0, 2.0};
  c.delta_dt = 0.5;
  const auto prob = configured_problem(c);
  EXPECT_DOUBLE_EQ(prob.dt, 0.25);
  EXPECT_DOUBLE_EQ(prob.T, 3.0);
  EXPECT_EQ(prob.x0, Vec{0.7});
  EXPECT_DOUBLE_EQ(prob.default_M, 2.0);
  EXPECT_EQ(prob.M_list, (std::vector<double>{1.0, 2.0}));
  EXPECT_DOUBLE_EQ(prob.delta_dt, 0.5);
}

TEST(ConfiguredProblemTest, HorizonMustExceedStart) {
  ExperimentConfig c;
  c.problem = "deterministic";
  c.horizon = -1.0;
  EXPECT_THROW(configured_problem(c), ConfigError);
}

TEST(LoadConfigTest, FileRoundTripAndMissingFile) {
  const std::string path = "/tmp/levydpp_config_test.json";
  {
    std::ofstream out(path);
    out << "{\"problem\": \"heavy-tail\", \"seed\": 42}";
  }
  const auto c = load_config(path);
  EXPECT_EQ(c.problem, "heavy-tail");
  EXPECT_EQ(c.seed, 42u);
  std::remove(path.c_str());
  EXPECT_THROW(load_config(path), ConfigError);
  const std::string bad = "/tmp/levydpp_config_bad.json";
  {
    std::ofstream out(bad);
    out << "{not json";
  }
  EXPECT_THROW(load_config(bad), ConfigError);
  std::remove(bad.c_str());
}

}  // namespace
}  // namespace levydpp
