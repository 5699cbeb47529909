#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wolfbench/distfit.hpp"
#include "wolfbench/errors.hpp"
#include "wolfbench/matcher.hpp"
#include "wolfbench/population.hpp"
#include "wolfbench/report.hpp"
#include "wolfbench/run.hpp"

namespace py = pybind11;
using namespace wolfbench;

namespace {

RunConfig make_config(const std::string& command, const std::string& population_json, const std::string& policy,
                      const std::string& mode, std::uint64_t samples, std::uint64_t seed, unsigned jobs,
                      const py::dict& search) {
  RunConfig c;
  c.command = command;
  c.population_json = population_to_json(population_from_json(population_json));
  c.policy = policy;
  if (mode == "exact") {
    c.mode = EvalMode::exact();
    c.mode.seed = seed;
  } else if (mode == "mc" || mode == "monte-carlo") {
    c.mode = EvalMode::monte_carlo(samples, seed);
  } else {
    throw ConfigError("mode must be 'exact' or 'mc'");
  }
  for (const auto& [key, value] : search) {
    const std::string k = py::cast<std::string>(key);
    const auto v = py::cast<std::uint64_t>(value);
    if (k == "budget") c.search.budget = v;
    else if (k == "restarts") c.search.restarts = v;
    else if (k == "search_samples") c.search.samples = v;
    else if (k == "confirm_samples") c.search.confirm_samples = v;
    else if (k == "baseline_samples") c.search.baseline_samples = v;
    else if (k == "calibration_samples") c.search.calibration_samples = v;
    else throw ConfigError("unknown search option '" + k + "'");
  }
  c.search.seed = seed;
  c.jobs = jobs;
  return c;
}

}  // namespace

PYBIND11_MODULE(_wolfbench, m) {
  m.doc() = "Biometric matcher security workbench: FRR, FAR, AR and wolf attack probability";
  m.attr("__version__") = std::string(kToolVersion);

  auto base = py::register_exception<Error>(m, "WolfbenchError");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<CalibrationError>(m, "CalibrationError", base.ptr());
  py::register_exception<ModeError>(m, "ModeError", base.ptr());

  m.def(
      "generate_population",
      [](std::size_t users, std::size_t length, std::uint64_t seed, const std::string& family, double p_min,
         double p_max, bool masked, double mask_keep, std::size_t correlated_bits, std::size_t correlated_block,
         const std::string& distance, double score_mean, double score_sigma, double score_spread) {
        PopulationConfig c;
        c.users = users;
        c.length = length;
        if (family == "iid") {
          c.family = PopulationConfig::Family::iid_bit_flip;
        } else if (family == "gaussian") {
          c.family = PopulationConfig::Family::gaussian_score;
        } else {
          throw ConfigError("family must be 'iid' or 'gaussian'");
        }
        c.p_min = p_min;
        c.p_max = p_max < 0 ? p_min : p_max;
        c.masked = masked;
        c.mask_keep = mask_keep;
        c.correlated_bits = correlated_bits;
        c.correlated_block = correlated_block;
        c.distance = parse_distance_kind(distance);
        c.score_mean = score_mean;
        c.score_sigma = score_sigma;
        c.score_spread = score_spread;
        return population_to_json(generate_population(c, seed));
      },
      "Population JSON for a synthetic world.", py::arg("users"), py::arg("length"), py::arg("seed") = 0,
      py::arg("family") = "iid", py::arg("p_min") = 0.1, py::arg("p_max") = -1.0, py::arg("masked") = false,
      py::arg("mask_keep") = 1.0, py::arg("correlated_bits") = 0, py::arg("correlated_block") = 1,
      py::arg("distance") = "hamming", py::arg("score_mean") = 0.5, py::arg("score_sigma") = 0.05,
      py::arg("score_spread") = 0.5);

  m.def("normalize_population", [](const std::string& text) { return population_to_json(population_from_json(text)); },
        "Validates population JSON and returns its canonical form.", py::arg("population_json"));

  m.def(
      "evaluate",
      [](const std::string& pop, const std::string& policy, const std::string& mode, std::uint64_t samples,
         std::uint64_t seed, unsigned jobs, const py::dict& search) {
        const RunConfig c = make_config("eval", pop, policy, mode, samples, seed, jobs, search);
        py::gil_scoped_release release;
        return run_eval(c);
      },
      "EvalReport JSON.", py::arg("population_json"), py::arg("policy"), py::arg("mode") = "exact",
      py::arg("samples") = 10000, py::arg("seed") = 0, py::arg("jobs") = 1, py::arg("search") = py::dict());

  m.def(
      "wolf",
      [](const std::string& pop, const std::string& policy, const std::string& mode, std::uint64_t samples,
         std::uint64_t seed, unsigned jobs, const py::dict& search) {
        const RunConfig c = make_config("wolf", pop, policy, mode, samples, seed, jobs, search);
        py::gil_scoped_release release;
        return run_wolf(c);
      },
      "Wolf certificate JSON.", py::arg("population_json"), py::arg("policy"), py::arg("mode") = "exact",
      py::arg("samples") = 10000, py::arg("seed") = 0, py::arg("jobs") = 1, py::arg("search") = py::dict());

  m.def(
      "sweep",
      [](const std::string& pop, const std::string& kind, const std::vector<double>& grid, const std::string& mode,
         std::uint64_t samples, std::uint64_t seed, unsigned jobs, const py::dict& search) {
        RunConfig c = make_config("sweep", pop, kind, mode, samples, seed, jobs, search);
        c.grid = grid;
        py::gil_scoped_release release;
        return run_sweep(c);
      },
      "Sweep CSV text.", py::arg("population_json"), py::arg("kind"), py::arg("grid"), py::arg("mode") = "exact",
      py::arg("samples") = 10000, py::arg("seed") = 0, py::arg("jobs") = 1, py::arg("search") = py::dict());

  m.def(
      "replay",
      [](const std::string& report, unsigned jobs) {
        py::gil_scoped_release release;
        return wolfbench::replay(report, jobs);
      },
      "Re-runs the configuration embedded in a report.", py::arg("report_json"), py::arg("jobs") = 1);

  m.def(
      "p_s_exact",
      [](const std::string& pop_json, const std::string& probe) {
        const Population pop = population_from_json(pop_json);
        const DistanceDistribution d = p_s_exact(decode_template(probe, pop.space()), pop);
        return std::make_pair(d.support(), d.mass());
      },
      "Support and masses of the impostor distance law of a probe.", py::arg("population_json"), py::arg("probe_hex"));

  m.def(
      "general_adaptive_threshold",
      [](std::vector<double> support, std::vector<double> mass, double delta) {
        return general_adaptive_threshold(DistanceDistribution(std::move(support), std::move(mass)), delta);
      },
      py::arg("support"), py::arg("mass"), py::arg("delta"));
  m.def("gaussian_adaptive_threshold",
        [](double mean, double sigma, double alpha) {
          return gaussian_adaptive_threshold(GaussianFit{mean, sigma, entropy_gaussian(sigma)}, alpha);
        },
        py::arg("mean"), py::arg("sigma"), py::arg("alpha"));
  m.def("daugman_threshold", &daugman_threshold, py::arg("k"), py::arg("alpha_prime"));
  m.def("std_normal_cdf", &std_normal_cdf, py::arg("alpha"));
  m.def("entropy_gaussian", &entropy_gaussian, py::arg("sigma"));
  m.def("parse_policy", [](const std::string& spec) { return MatcherPolicy::parse(spec).spec(); }, py::arg("spec"));
}
