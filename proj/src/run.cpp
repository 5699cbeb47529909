#include "wolfbench/run.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "json.hpp"
#include "wolfbench/errors.hpp"
#include "wolfbench/report.hpp"

namespace wolfbench {

using nlohmann::json;

namespace {

std::string_view mode_name(const EvalMode& m) { return m.is_exact() ? "exact" : "monte-carlo"; }

struct Prepared {
  Population pop;
  MatcherPolicy policy;
};

MatcherPolicy ready_policy(const MatcherPolicy& base, const Population& pop, const RunConfig& c) {
  if (!base.is_adaptive()) return base;
  if (c.calibration_path) {
    MatcherPolicy loaded = load_calibration(*c.calibration_path, pop.space());
    if (loaded.spec() != base.spec()) {
      throw ConfigError("calibration file is for " + loaded.spec() + ", not " + base.spec());
    }
    return loaded;
  }
  return calibrate(base, pop, c.mode, CalibrationOptions{c.search.calibration_samples, c.jobs});
}

Prepared prepare(const RunConfig& c, const std::string& spec) {
  Population pop = population_from_json(c.population_json);
  const MatcherPolicy base = MatcherPolicy::parse(spec);
  check_compatible(pop, base);
  if (c.mode.is_exact()) require_exact(pop);
  MatcherPolicy policy = ready_policy(base, pop, c);
  return {std::move(pop), std::move(policy)};
}

}  // namespace

std::string RunConfig::to_json() const {
  json j;
  j["command"] = command;
  j["population"] = json::parse(population_json);
  j["policy"] = policy;
  if (command == "sweep") j["grid"] = grid;
  j["mode"] = mode_name(mode);
  j["samples"] = mode.is_exact() ? json(nullptr) : json(mode.samples);
  j["seed"] = mode.seed;
  j["search"] = {{"budget", search.budget},
                 {"restarts", search.restarts},
                 {"samples", search.samples},
                 {"confirm_samples", search.confirm_samples},
                 {"baseline_samples", search.baseline_samples},
                 {"calibration_samples", search.calibration_samples}};
  j["calibration"] = calibration_path ? json(*calibration_path) : json(nullptr);
  return j.dump();
}

RunConfig RunConfig::from_json(std::string_view text) {
  try {
    const json j = json::parse(text.begin(), text.end());
    RunConfig c;
    c.command = j.at("command").get<std::string>();
    c.population_json = j.at("population").dump();
    c.policy = j.at("policy").get<std::string>();
    if (j.contains("grid")) c.grid = j.at("grid").get<std::vector<double>>();
    const std::string mode = j.at("mode").get<std::string>();
    const std::uint64_t seed = j.at("seed").get<std::uint64_t>();
    if (mode == "exact") {
      c.mode = EvalMode::exact();
      c.mode.seed = seed;
    } else if (mode == "monte-carlo") {
      c.mode = EvalMode::monte_carlo(j.at("samples").get<std::uint64_t>(), seed);
    } else {
      throw ParseError("unknown mode '" + mode + "'");
    }
    const json& s = j.at("search");
    c.search.budget = s.at("budget").get<std::uint64_t>();
    c.search.restarts = s.at("restarts").get<std::uint64_t>();
    c.search.samples = s.at("samples").get<std::uint64_t>();
    c.search.confirm_samples = s.at("confirm_samples").get<std::uint64_t>();
    c.search.baseline_samples = s.at("baseline_samples").get<std::uint64_t>();
    c.search.calibration_samples = s.at("calibration_samples").get<std::uint64_t>();
    c.search.seed = seed;
    if (j.contains("calibration") && !j.at("calibration").is_null()) {
      c.calibration_path = j.at("calibration").get<std::string>();
    }
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid run config: ") + e.what());
  }
}

std::string run_eval(const RunConfig& c, std::string* csv) {
  const Prepared p = prepare(c, c.policy);
  WolfSearchOptions search = c.search;
  search.seed = c.mode.seed;
  const EvalSummary s = evaluate(p.pop, p.policy, c.mode, search, RunOptions{c.jobs});
  if (csv) {
    const std::string_view spec = c.policy;
    const std::string_view value = spec.substr(spec.find(':') + 1);
    double parameter = 0.0;
    std::from_chars(value.data(), value.data() + value.size(), parameter);
    *csv = std::string(kSweepCsvHeader) + "\n" + sweep_csv_row(parameter, s) + "\n";
  }
  return eval_report_json(s, p.pop, p.policy, c.to_json());
}

std::string run_wolf(const RunConfig& c) {
  const Prepared p = prepare(c, c.policy);
  WolfCertificate cert = [&] {
    if (c.mode.is_exact()) return wap_exact(p.pop, p.policy, RunOptions{c.jobs}).certificate;
    WolfSearchOptions search = c.search;
    search.seed = c.mode.seed;
    return wolf_search_mc(p.pop, p.policy, search, RunOptions{c.jobs});
  }();
  return certificate_json(cert, p.pop, p.policy, c.mode, c.to_json());
}

std::string run_sweep(const RunConfig& c) {
  if (c.grid.empty()) throw ConfigError("sweep grid is empty");
  if (c.calibration_path) throw ConfigError("sweeps calibrate every grid point themselves");
  std::vector<double> grid = c.grid;
  std::sort(grid.begin(), grid.end());
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  for (double x : grid) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    const Prepared p = prepare(c, c.policy + ":" + std::string(buf, res.ptr));
    WolfSearchOptions search = c.search;
    search.seed = c.mode.seed;
    const EvalSummary s = evaluate(p.pop, p.policy, c.mode, search, RunOptions{c.jobs});
    out << sweep_csv_row(x, s) << '\n';
  }
  return out.str();
}

std::string run(const RunConfig& c) {
  if (c.command == "eval") return run_eval(c);
  if (c.command == "wolf") return run_wolf(c);
  if (c.command == "sweep") return run_sweep(c);
  throw ConfigError("unknown command '" + c.command + "'");
}

std::string replay(std::string_view report_json, unsigned jobs) {
  json doc;
  try {
    doc = json::parse(report_json.begin(), report_json.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("config")) throw ParseError("report has no embedded config");
  RunConfig c = RunConfig::from_json(doc.at("config").dump());
  c.jobs = jobs;
  return run(c);
}

}  // namespace wolfbench
