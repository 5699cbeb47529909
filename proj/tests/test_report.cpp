#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "support/worlds.hpp"
#include "wolfbench/errors.hpp"
#include "wolfbench/report.hpp"
#include "wolfbench/run.hpp"

namespace wolfbench {
namespace {

using nlohmann::json;

RunConfig tiny_config(const std::string& policy, const std::string& command = "eval") {
  RunConfig c;
  c.command = command;
  c.population_json = population_to_json(testing::tiny_world());
  c.policy = policy;
  c.mode = EvalMode::exact();
  return c;
}

TEST(Report, TinyWorldValues) {
  const json r = json::parse(run_eval(tiny_config("fixed:1")));
  EXPECT_EQ(r["version"], "0.1.0");
  EXPECT_EQ(r["policy"], "fixed:1");
  EXPECT_EQ(r["mode"], "exact");
  EXPECT_NEAR(r["frr"].get<double>(), 0.45, 1e-15);
  EXPECT_NEAR(r["far"].get<double>(), 0.0, 1e-15);
  EXPECT_NEAR(r["ar"].get<double>(), 0.275, 1e-15);
  EXPECT_NEAR(r["wap"]["value"].get<double>(), 0.35, 1e-15);
  EXPECT_EQ(r["wap"]["probe_hex"], "0");
  EXPECT_EQ(r["wap"]["method"], "exhaustive");
  EXPECT_TRUE(r["lemma1_max_residual"].is_number());
  EXPECT_EQ(r["per_user"]["ids"].size(), 2U);
  EXPECT_TRUE(r["stderr"].is_null());
  EXPECT_TRUE(r["wolf_certificate"]["is_wolf"].get<bool>());
  EXPECT_EQ(r["config"]["policy"], "fixed:1");
}

TEST(Report, GeneralPolicyBelowDelta) {
  const json r = json::parse(run_eval(tiny_config("general:0.5")));
  EXPECT_LT(r["wap"]["value"].get<double>(), 0.5);
}

TEST(Report, ConfigRoundTrip) {
  RunConfig c = tiny_config("gaussian:-1.5", "wolf");
  c.mode = EvalMode::monte_carlo(1234, 99);
  c.search.budget = 77;
  c.search.seed = 99;
  const RunConfig back = RunConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.mode.samples, 1234U);
  EXPECT_EQ(back.search.budget, 77U);
  EXPECT_THROW(RunConfig::from_json("{}"), ParseError);
}

TEST(Report, ExactReplayIsBitIdentical) {
  for (const char* policy : {"fixed:1", "general:0.25", "gaussian:-1"}) {
    const std::string report = run_eval(tiny_config(policy));
    EXPECT_EQ(replay(report), report);
    EXPECT_EQ(replay(report, 3), report);
  }
}

TEST(Report, MonteCarloReplayAndJobsIndependence) {
  PopulationConfig pc;
  pc.users = 6;
  pc.length = 30;
  pc.p_min = 0.05;
  pc.p_max = 0.25;
  RunConfig c;
  c.population_json = population_to_json(generate_population(pc, 2));
  c.policy = "fixed:8";
  c.mode = EvalMode::monte_carlo(2000, 31);
  c.search.budget = 120;
  c.search.restarts = 3;
  c.search.confirm_samples = 4000;
  c.search.baseline_samples = 500;
  const std::string one = run_eval(c);
  c.jobs = 4;
  const std::string four = run_eval(c);
  EXPECT_EQ(one, four);
  EXPECT_EQ(replay(one, 2), one);
  const json r = json::parse(one);
  EXPECT_EQ(r["mode"], "monte-carlo");
  EXPECT_TRUE(r["stderr"]["wap"].is_number());
  EXPECT_TRUE(r["lemma1_max_residual"].is_null());
  EXPECT_EQ(r["wap"]["method"], "hill-climb");
}

TEST(Report, CertificateReplay) {
  const std::string cert = run_wolf(tiny_config("fixed:1", "wolf"));
  const json j = json::parse(cert);
  EXPECT_EQ(j["probe_hex"], "0");
  EXPECT_EQ(j["is_wolf"].get<bool>(), j["ar_w"].get<double>() > j["ar_baseline"].get<double>());
  EXPECT_EQ(replay(cert), cert);
}

TEST(Sweep, RowsOrderedAndFarMonotone) {
  RunConfig c = tiny_config("fixed", "sweep");
  c.grid = {3, 0, 2, 1};
  std::istringstream csv(run_sweep(c));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "parameter,frr,far,ar,wap,stderr_wap");
  double prev_param = -1, prev_far = -1;
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    ASSERT_GE(cells.size(), 5U);
    const double param = std::stod(cells[0]), far = std::stod(cells[2]);
    EXPECT_GT(param, prev_param);
    EXPECT_GE(far, prev_far);
    prev_param = param;
    prev_far = far;
    ++rows;
  }
  EXPECT_EQ(rows, 4);
  c.grid.clear();
  EXPECT_THROW(run_sweep(c), ConfigError);
}

TEST(Sweep, GaussianAlphaGridTracksNormalCdf) {
  PopulationConfig pc;
  pc.family = PopulationConfig::Family::gaussian_score;
  pc.users = 4;
  pc.length = 8;
  RunConfig c;
  c.command = "sweep";
  c.population_json = population_to_json(generate_population(pc, 5));
  c.policy = "gaussian";
  c.grid = {-1, -2, -3};
  c.mode = EvalMode::exact();
  std::istringstream csv(run_sweep(c));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    const double alpha = std::stod(line.substr(0, line.find(',')));
    const double wap = std::stod(line.substr(line.rfind(',', line.size() - 2) + 1));
    EXPECT_NEAR(wap, std_normal_cdf(alpha), 1e-10);
  }
}

TEST(Report, ModeAndCalibrationErrors) {
  PopulationConfig pc;
  pc.length = 22;
  RunConfig c;
  c.population_json = population_to_json(generate_population(pc, 1));
  c.policy = "fixed:3";
  EXPECT_THROW(run_eval(c), ModeError);
  PopulationConfig g;
  g.family = PopulationConfig::Family::gaussian_score;
  c.population_json = population_to_json(generate_population(g, 1));
  c.policy = "general:0.1";
  EXPECT_THROW(run_eval(c), CalibrationError);
}

}  // namespace
}  // namespace wolfbench
