// wolfbench: population generation, calibration, evaluation, wolf search,
// parameter sweeps and report replay.
//
// Exit codes: 0 ok, 2 configuration error, 3 calibration error, 4 mode error.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wolfbench/errors.hpp"
#include "wolfbench/matcher.hpp"
#include "wolfbench/population.hpp"
#include "wolfbench/report.hpp"
#include "wolfbench/run.hpp"

namespace {

using namespace wolfbench;

constexpr int kExitConfig = 2;
constexpr int kExitCalibration = 3;
constexpr int kExitMode = 4;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

double number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError("invalid number '" + text + "' in " + what);
  }
  return v;
}

std::size_t count(const std::string& text, const std::string& what) {
  std::size_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError("invalid count '" + text + "' in " + what);
  }
  return v;
}

std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + what + " " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw ConfigError("cannot write " + out);
  file << text;
  if (!file) throw ConfigError("failed writing " + out);
}

// ---- gen ---------------------------------------------------------------

struct GenArgs {
  std::size_t n = 2;
  std::size_t len = 8;
  std::string noise = "iid:0.1";
  bool masked = false;
  double mask_keep = 1.0;
  std::string corr;
  std::string distance = "hamming";
  std::uint64_t seed = 0;
  std::string out;
};

PopulationConfig population_config(const GenArgs& a) {
  PopulationConfig c;
  c.users = a.n;
  c.length = a.len;
  c.masked = a.masked;
  c.mask_keep = a.mask_keep;
  c.distance = parse_distance_kind(a.distance);
  const auto parts = split(a.noise, ':');
  if (parts.empty()) throw ParseError("empty noise spec");
  if (parts[0] == "iid" && (parts.size() == 2 || parts.size() == 3)) {
    c.family = PopulationConfig::Family::iid_bit_flip;
    c.p_min = number(parts[1], "noise");
    c.p_max = parts.size() == 3 ? number(parts[2], "noise") : c.p_min;
  } else if (parts[0] == "gaussian" && (parts.size() == 3 || parts.size() == 4)) {
    c.family = PopulationConfig::Family::gaussian_score;
    c.score_mean = number(parts[1], "noise");
    c.score_sigma = number(parts[2], "noise");
    if (parts.size() == 4) c.score_spread = number(parts[3], "noise");
  } else {
    throw ParseError("noise spec must be iid:P, iid:LO:HI or gaussian:MEAN:SIGMA[:SPREAD]");
  }
  if (!a.corr.empty()) {
    const auto cp = split(a.corr, ':');
    if (cp.size() != 2) throw ParseError("--corr expects BITS:BLOCK");
    c.correlated_bits = count(cp[0], "--corr");
    c.correlated_block = count(cp[1], "--corr");
  }
  return c;
}

// ---- shared evaluation flags -------------------------------------------

struct EvalArgs {
  std::string pop;
  std::string policy;
  std::string calibration;
  std::string mode = "exact";
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  WolfSearchOptions search;
  std::string out;
  std::string csv;
  std::string grid;
};

void add_eval_flags(CLI::App* cmd, EvalArgs& a, bool with_policy = true) {
  cmd->add_option("--pop", a.pop, "Population JSON file")->required();
  if (with_policy) {
    cmd->add_option("--policy", a.policy, "fixed:TAU | general:DELTA | gaussian:ALPHA | daugman:ALPHA'")->required();
    cmd->add_option("--calibration", a.calibration, "Calibration JSON file from `calibrate`");
  }
  cmd->add_option("--mode", a.mode, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
  cmd->add_option("--samples", a.samples, "Monte Carlo trials per user");
  cmd->add_option("--seed", a.seed, "Master seed");
  cmd->add_option("--jobs", a.jobs, "Worker threads");
  cmd->add_option("--budget", a.search.budget, "Wolf search: AR_w evaluations");
  cmd->add_option("--restarts", a.search.restarts, "Wolf search: random restarts");
  cmd->add_option("--search-samples", a.search.samples, "Wolf search: trials per evaluation");
  cmd->add_option("--confirm-samples", a.search.confirm_samples, "Wolf search: trials for the reported AR_w");
  cmd->add_option("--baseline-samples", a.search.baseline_samples, "Wolf search: trials per user for AR");
  cmd->add_option("--calibration-samples", a.search.calibration_samples, "Monte Carlo calibration draws per probe");
  cmd->add_option("--out", a.out, "Output file (default stdout)");
}

RunConfig run_config(const EvalArgs& a, const std::string& command) {
  RunConfig c;
  c.command = command;
  c.population_json = population_to_json(load_population(a.pop));
  c.policy = a.policy;
  c.mode = a.mode == "exact" ? EvalMode::exact() : EvalMode::monte_carlo(a.samples, a.seed);
  c.mode.seed = a.seed;
  c.search = a.search;
  c.search.seed = a.seed;
  if (!a.calibration.empty()) c.calibration_path = a.calibration;
  c.jobs = a.jobs;
  return c;
}

int exit_code(const Error& e) {
  switch (e.error_class()) {
    case ErrorClass::config: return kExitConfig;
    case ErrorClass::calibration: return kExitCalibration;
    case ErrorClass::mode: return kExitMode;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Security workbench for biometric matchers: FRR, FAR, AR and wolf attack probability"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic population");
  gen_cmd->add_option("--n", gen.n, "Number of users")->required();
  gen_cmd->add_option("--len", gen.len, "Template length L")->required();
  gen_cmd->add_option("--noise", gen.noise, "iid:P | iid:LO:HI | gaussian:MEAN:SIGMA[:SPREAD]");
  gen_cmd->add_flag("--masked", gen.masked, "Masked template space");
  gen_cmd->add_option("--mask-keep", gen.mask_keep, "Probability that a reference bit is available");
  gen_cmd->add_option("--corr", gen.corr, "BITS:BLOCK correlated leading reference bits");
  gen_cmd->add_option("--distance", gen.distance, "hamming | fractional-hamming");
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_option("--out", gen.out, "Output file (default stdout)");

  EvalArgs cal;
  std::vector<std::string> cal_probes;
  auto* cal_cmd = app.add_subcommand("calibrate", "Tabulate per-probe thresholds of an adaptive policy");
  add_eval_flags(cal_cmd, cal);
  cal_cmd->add_option("--probe", cal_probes, "Probe to calibrate in Monte Carlo mode (hex)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate FRR, FAR, AR and WAP");
  add_eval_flags(eval_cmd, ev);
  eval_cmd->add_option("--csv", ev.csv, "Also write a one-row CSV summary");

  EvalArgs wolf;
  auto* wolf_cmd = app.add_subcommand("wolf", "Find the strongest wolf probe");
  add_eval_flags(wolf_cmd, wolf);

  EvalArgs sweep;
  std::string sweep_kind;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a policy over a parameter grid (CSV)");
  add_eval_flags(sweep_cmd, sweep, false);
  sweep_cmd->add_option("--kind", sweep_kind, "fixed | general | gaussian | daugman")->required();
  sweep_cmd->add_option("--grid", sweep.grid, "Comma-separated parameter values")->required();

  std::string replay_report;
  std::string replay_out;
  unsigned replay_jobs = 1;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the configuration embedded in a report");
  replay_cmd->add_option("--report", replay_report, "Report JSON")->required();
  replay_cmd->add_option("--jobs", replay_jobs, "Worker threads");
  replay_cmd->add_option("--out", replay_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen_cmd) {
      const Population pop = generate_population(population_config(gen), gen.seed);
      emit(population_to_json(pop), gen.out);
      std::cerr << "generated n=" << pop.size() << " L=" << pop.space().length
                << " noise=" << noise_kind(pop.user(0).noise) << (pop.space().masked ? " masked" : "") << '\n';
    } else if (*cal_cmd) {
      const Population pop = load_population(cal.pop);
      const MatcherPolicy base = MatcherPolicy::parse(cal.policy);
      const EvalMode mode = cal.mode == "exact" ? EvalMode::exact() : EvalMode::monte_carlo(cal.samples, cal.seed);
      if (!mode.is_exact() && cal_probes.empty()) {
        throw ModeError("Monte Carlo calibration is per probe; list probes with --probe");
      }
      MatcherPolicy policy = calibrate(base, pop, mode, CalibrationOptions{cal.search.calibration_samples, cal.jobs});
      if (!mode.is_exact()) {
        auto table = std::make_shared<CalibrationTable>();
        for (const auto& hex : cal_probes) {
          const MaskedTemplate probe = decode_template(hex, pop.space()).canonical();
          table->insert(probe, *policy.calibration()->find(probe));
        }
        policy = base.with_calibration(table);
      }
      emit(calibration_to_json(policy, pop.space()), cal.out);
    } else if (*eval_cmd) {
      std::string csv;
      emit(run_eval(run_config(ev, "eval"), ev.csv.empty() ? nullptr : &csv), ev.out);
      if (!ev.csv.empty()) emit(csv, ev.csv);
    } else if (*wolf_cmd) {
      emit(run_wolf(run_config(wolf, "wolf")), wolf.out);
    } else if (*sweep_cmd) {
      sweep.policy = sweep_kind;
      RunConfig c = run_config(sweep, "sweep");
      for (const auto& part : split(sweep.grid, ',')) {
        if (!part.empty()) c.grid.push_back(number(part, "--grid"));
      }
      emit(run_sweep(c), sweep.out);
    } else if (*replay_cmd) {
      emit(replay(read_file(replay_report, "report"), replay_jobs), replay_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
