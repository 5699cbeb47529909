// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Every tolerance is fixed below.

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "support/worlds.hpp"
#include "wolfbench/distfit.hpp"
#include "wolfbench/matcher.hpp"
#include "wolfbench/report.hpp"
#include "wolfbench/run.hpp"
#include "wolfbench/secmetrics.hpp"

namespace {

using namespace wolfbench;
using Clock = std::chrono::steady_clock;

// Criterion 1
constexpr int kDecompositionWorlds = 120;
constexpr double kDecompositionTolerance = 1e-12;
constexpr double kDecompositionSeconds = 60.0;
// Criterion 2
constexpr int kGeneralWorlds = 120;
constexpr double kOracleTolerance = 1e-12;
constexpr double kGeneralSeconds = 120.0;
// Criterion 3
constexpr double kAnalyticTolerance = 1e-10;
constexpr double kStderrMultiple = 3.0;
constexpr std::uint64_t kSamplingTrials = 1000000;
constexpr double kGaussianSeconds = 300.0;
constexpr double kFrozenPhiMinus2 = 0.022750131948179207;
// Criterion 4
constexpr double kFixedFarCeiling = 0.01;
constexpr double kWolfFarRatio = 5.0;
constexpr double kAdaptiveDelta = 0.01;
constexpr double kSpreadRatio = 4.0;
constexpr double kFixedSeconds = 60.0;
// Criterion 5
constexpr double kDaugmanRatio = 2.0;
constexpr double kDaugmanSeconds = 120.0;
// Criterion 6
constexpr int kCdfGridPoints = 10000;
constexpr double kCdfTolerance = 1e-12;
constexpr double kEntropyZeroTolerance = 1e-14;
constexpr double kThresholdFormTolerance = 1e-10;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("ACCEPTANCE %d %s: %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<MatcherPolicy> policies_for(const Population& pop, std::mt19937_64& rng) {
  std::vector<MatcherPolicy> out;
  const bool fractional = pop.distance() == DistanceKind::fractional_hamming;
  const double tau = fractional ? std::uniform_real_distribution<double>(0.1, 0.6)(rng)
                                : static_cast<double>(1 + rng() % 3);
  out.push_back(MatcherPolicy::fixed(tau));
  out.push_back(calibrate(MatcherPolicy::general(0.1), pop, EvalMode::exact()));
  out.push_back(calibrate(MatcherPolicy::gaussian(-1.0), pop, EvalMode::exact()));
  if (fractional) out.push_back(MatcherPolicy::daugman(-0.5));
  return out;
}

// ---------------------------------------------------------------------------

void decomposition_identity() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240101);
  double worst = 0.0;
  int runs = 0;
  for (int w = 0; w < kDecompositionWorlds; ++w) {
    const Population pop = testing::random_world(rng);
    for (const auto& policy : policies_for(pop, rng)) {
      const EvalSummary s = evaluate(pop, policy, EvalMode::exact());
      worst = std::max(worst, *s.lemma1_max_residual);
      for (std::size_t u = 0; u < pop.size(); ++u) {
        worst = std::max(worst, lemma1_check(Attacker::user(u), pop, policy));
      }
      ++runs;
    }
  }
  const double secs = seconds_since(start);
  report(1, worst <= kDecompositionTolerance && secs <= kDecompositionSeconds,
         fmt("%.0f worlds, %.0f policy runs, max residual %.3g (<= 1e-12), %.1f s", kDecompositionWorlds, runs, worst, secs));
}

void general_policy_secure() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240202);
  bool all_secure = true;
  double oracle_gap = 0.0;
  double tau_mismatches = 0;
  double worst_margin = 1.0;
  int checks = 0;
  for (int w = 0; w < kGeneralWorlds; ++w) {
    const Population pop = testing::random_world(rng);
    const testing::oracle::World world(pop);
    for (double delta : {0.5, 0.25, 0.1, 0.01}) {
      const MatcherPolicy policy = calibrate(MatcherPolicy::general(delta), pop, EvalMode::exact());
      const double wap = wap_exact(pop, policy).wap.value;
      // independent oracle: its own thresholds, its own triple loop
      std::vector<double> taus;
      for (std::size_t s = 0; s < world.all.size(); ++s) {
        taus.push_back(testing::oracle::general_tau(world, s, delta));
        if (taus.back() != policy.probe_threshold(world.all[s])) ++tau_mismatches;
      }
      std::size_t idx = 0;
      const auto points = testing::oracle::point_ars(world, [&](const MaskedTemplate& s, std::size_t) {
        while (!(world.all[idx] == s)) idx = (idx + 1) % world.all.size();
        return taus[idx];
      });
      const double oracle_wap = *std::max_element(points.begin(), points.end());
      oracle_gap = std::max(oracle_gap, std::fabs(oracle_wap - wap));
      all_secure = all_secure && wap < delta && oracle_wap < delta;
      worst_margin = std::min(worst_margin, delta - wap);
      ++checks;
    }
  }
  const double secs = seconds_since(start);
  report(2, all_secure && oracle_gap <= kOracleTolerance && tau_mismatches == 0 && secs <= kGeneralSeconds,
         fmt("%.0f (world, delta) pairs all WAP < delta (min margin %.3g), oracle gap %.3g, threshold mismatches "
             "%.0f",
             checks, worst_margin, oracle_gap, tau_mismatches) +
             fmt(", %.1f s", secs));
}

double high_precision_phi(double alpha) {
  using boost::multiprecision::cpp_bin_float_50;
  const cpp_bin_float_50 a(alpha);
  const cpp_bin_float_50 v = boost::math::erfc(-a / boost::multiprecision::sqrt(cpp_bin_float_50(2))) / 2;
  return v.convert_to<double>();
}

void gaussian_policy_rates() {
  const auto start = Clock::now();
  PopulationConfig pc;
  pc.family = PopulationConfig::Family::gaussian_score;
  pc.users = 8;
  pc.length = 10;
  pc.score_mean = 0.45;
  pc.score_sigma = 0.04;
  pc.score_spread = 0.8;
  const Population pop = generate_population(pc, 314159);
  bool ok = true;
  std::string detail;
  for (double alpha : {-1.0, -2.0, -3.0}) {
    const double delta = high_precision_phi(alpha);
    const MatcherPolicy policy = calibrate(MatcherPolicy::gaussian(alpha), pop, EvalMode::exact());
    // (a) analytic, every probe
    double analytic_gap = 0.0;
    TemplateEnumerator(pop.space()).for_each([&](const MaskedTemplate& s) {
      const double v = ar_w(Attacker::probe(s), pop, policy, EvalMode::exact()).value;
      analytic_gap = std::max(analytic_gap, std::fabs(v - delta));
    });
    const EvalSummary exact = evaluate(pop, policy, EvalMode::exact());
    analytic_gap = std::max({analytic_gap, std::fabs(exact.ar.value - delta), std::fabs(exact.wap.value - delta)});
    // (b) sampling: 10^6 trials in total across users
    const RateResult sampled =
        ar(pop, policy, EvalMode::monte_carlo(kSamplingTrials / pop.size(), 2718 + static_cast<int>(-alpha)));
    const bool sampled_ok = std::fabs(sampled.value - delta) <= kStderrMultiple * *sampled.std_error;
    // (c) wolf search
    WolfSearchOptions o;
    o.budget = 1500;
    o.restarts = 8;
    o.samples = 4000;
    o.confirm_samples = 200000;
    o.baseline_samples = 20000;
    o.seed = 161803 + static_cast<int>(-alpha);
    const WolfCertificate c = wolf_search_mc(pop, policy, o);
    const bool wolf_ok = c.ar_w.value <= delta + kStderrMultiple * *c.ar_w.std_error;
    ok = ok && analytic_gap <= kAnalyticTolerance && sampled_ok && wolf_ok;
    detail += fmt("alpha=%g: analytic gap %.2g, sampled %.5f (delta %.5f", alpha, analytic_gap, sampled.value, delta) +
              fmt(", 3se %.2g), best wolf %.5f; ", kStderrMultiple * *sampled.std_error, c.ar_w.value);
  }
  const double phi2 = std_normal_cdf(-2.0);
  const double oracle2 = high_precision_phi(-2.0);
  const bool phi_ok = std::fabs(phi2 - oracle2) <= kCdfTolerance && std::fabs(oracle2 - kFrozenPhiMinus2) <= 1e-16;
  const double secs = seconds_since(start);
  report(3, ok && phi_ok && secs <= kGaussianSeconds,
         detail + fmt("delta(-2)=%.17g vs oracle %.17g, %.1f s", phi2, oracle2, secs));
}

// Tight users (p = 0.01) spread over the space plus a noisy cluster
// (p = 0.25) around one centre.
Population heterogeneous_world() {
  constexpr std::size_t L = 12;
  constexpr std::size_t kTight = 14;
  constexpr std::size_t kNoisy = 4;
  std::mt19937_64 rng(4242);
  std::vector<UserModel> users;
  const std::uint64_t centre = rng() & ((1U << L) - 1);
  for (std::size_t i = 0; i < kNoisy; ++i) {
    std::uint64_t ref = centre;
    if (i > 0) ref ^= 1ULL << (rng() % L);
    users.push_back({"noisy" + std::to_string(i), MaskedTemplate(BitVector::from_value(ref, L)), IidBitFlip{0.25}});
  }
  for (std::size_t i = 0; i < kTight; ++i) {
    users.push_back({"tight" + std::to_string(i), MaskedTemplate(BitVector::from_value(rng() & ((1U << L) - 1), L)),
                     IidBitFlip{0.01}});
  }
  return Population(TemplateSpace{L, false, std::nullopt}, DistanceKind::hamming, std::move(users));
}

void fixed_threshold_vulnerability() {
  const auto start = Clock::now();
  const Population pop = heterogeneous_world();
  const double L = static_cast<double>(pop.space().length);
  const double noisy_sigma = std::sqrt(L * 0.25 * 0.75);
  const double tight_sigma = std::sqrt(L * 0.01 * 0.99);
  // largest integer tau with FAR <= 0.01
  double tau = -1.0;
  double far_at_tau = 0.0;
  for (double t = 0.0; t <= L + 1; t += 1.0) {
    const double f = far(pop, MatcherPolicy::fixed(t), EvalMode::exact()).value;
    if (f > kFixedFarCeiling) break;
    tau = t;
    far_at_tau = f;
  }
  const EvalSummary fixed = evaluate(pop, MatcherPolicy::fixed(tau), EvalMode::exact());
  const MatcherPolicy general = calibrate(MatcherPolicy::general(kAdaptiveDelta), pop, EvalMode::exact());
  const double general_wap = wap_exact(pop, general).wap.value;
  const double secs = seconds_since(start);
  const bool ok = tau >= 0.0 && noisy_sigma >= kSpreadRatio * tight_sigma && fixed.far.value <= kFixedFarCeiling &&
                  fixed.wap.value >= kWolfFarRatio * fixed.far.value && general_wap < kAdaptiveDelta &&
                  secs <= kFixedSeconds;
  report(4, ok,
         fmt("noise sigma ratio %.2f; fixed tau=%g FAR=%.4g WAP=%.4g", noisy_sigma / tight_sigma, tau, far_at_tau,
             fixed.wap.value) +
             fmt(" (ratio %.1f >= 5); general(0.01) WAP=%.4g; %.1f s", fixed.wap.value / far_at_tau, general_wap,
                 secs));
}

// Masked space; every user exposes all bits. The first six reference bits
// form one correlated block (all equal), the last six are independent.
Population correlated_world() {
  constexpr std::size_t L = 12;
  constexpr std::size_t n = 16;
  std::mt19937_64 rng(777);
  std::vector<UserModel> users;
  for (std::size_t i = 0; i < n; ++i) {
    const bool block = (i % 2) == 0;
    std::string b(L, '0');
    for (std::size_t j = 0; j < 6; ++j) b[j] = block ? '1' : '0';
    for (std::size_t j = 6; j < L; ++j) b[j] = (rng() & 1U) ? '1' : '0';
    users.push_back({"u" + std::to_string(i), MaskedTemplate(BitVector::from_string(b)), IidBitFlip{0.02}});
  }
  return Population(TemplateSpace{L, true, std::nullopt}, DistanceKind::fractional_hamming, std::move(users));
}

void daugman_non_optimality() {
  const auto start = Clock::now();
  const Population pop = correlated_world();
  const MatcherPolicy daugman = MatcherPolicy::daugman(-1.2);
  const EvalSummary d = evaluate(pop, daugman, EvalMode::exact());
  const std::string probe = encode_template(*d.wap_probe, pop.space());
  const double matched_delta = d.ar.value;
  const MatcherPolicy general = calibrate(MatcherPolicy::general(matched_delta), pop, EvalMode::exact());
  const double general_wap = wap_exact(pop, general).wap.value;
  const double secs = seconds_since(start);
  const bool ok = d.wap.value >= kDaugmanRatio * d.ar.value && general_wap < matched_delta && secs <= kDaugmanSeconds;
  report(5, ok,
         fmt("daugman(-1.2) AR=%.4g WAP=%.4g (ratio %.2f >= 2)", d.ar.value, d.wap.value, d.wap.value / d.ar.value) +
             " at probe " + probe + " (k=" + std::to_string(d.wap_probe->mask().count()) + ")" +
             fmt("; general(delta=AR) WAP=%.4g < %.4g; %.1f s", general_wap, matched_delta, secs));
}

void numerical_kernels() {
  double cdf_gap = 0.0;
  for (int i = 0; i < kCdfGridPoints; ++i) {
    const double a = -38.0 + 46.0 * i / (kCdfGridPoints - 1);
    cdf_gap = std::max(cdf_gap, std::fabs(std_normal_cdf(a) - high_precision_phi(a)));
  }
  const double zero_sigma = 1.0 / std::sqrt(2.0 * std::numbers::pi * std::numbers::e);
  const double entropy_gap = std::fabs(entropy_gaussian(zero_sigma));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> mean(-5.0, 5.0), sigma(1e-3, 100.0), alpha(-10.0, 10.0);
  double form_gap = 0.0;
  for (int i = 0; i < kCdfGridPoints; ++i) {
    const double m = mean(rng), s = sigma(rng), a = alpha(rng);
    const double h = entropy_gaussian(s);
    form_gap = std::max(form_gap, std::fabs(gaussian_adaptive_threshold(GaussianFit{m, s, h}, a) -
                                            gaussian_adaptive_threshold_from_entropy(m, h, a)));
  }
  report(6, cdf_gap <= kCdfTolerance && entropy_gap <= kEntropyZeroTolerance && form_gap <= kThresholdFormTolerance,
         fmt("normal CDF max gap %.3g over %.0f points, entropy zero %.3g, sigma/H threshold gap %.3g", cdf_gap,
             kCdfGridPoints, entropy_gap, form_gap));
}

void determinism() {
  bool ok = true;
  std::string notes;
  std::mt19937_64 rng(99);
  // exact reports from several worlds and policies
  for (int w = 0; w < 5; ++w) {
    RunConfig c;
    c.population_json = population_to_json(testing::random_world(rng));
    c.mode = EvalMode::exact();
    c.mode.seed = 17;
    for (const char* policy : {"fixed:1", "general:0.1", "gaussian:-1"}) {
      c.policy = policy;
      c.jobs = 1;
      const std::string report = run_eval(c);
      c.jobs = 3;
      ok = ok && run_eval(c) == report && replay(report) == report;
    }
  }
  notes += "exact replay identical";
  // Monte Carlo reports: same seed, different worker counts
  PopulationConfig pc;
  pc.users = 6;
  pc.length = 32;
  pc.p_min = 0.02;
  pc.p_max = 0.2;
  RunConfig c;
  c.population_json = population_to_json(generate_population(pc, 5));
  c.policy = "gaussian:-2";
  // adaptive thresholds are estimated per sampled probe, so counts stay small
  c.mode = EvalMode::monte_carlo(300, 2024);
  c.search.budget = 120;
  c.search.restarts = 4;
  c.search.samples = 300;
  c.search.confirm_samples = 2000;
  c.search.baseline_samples = 200;
  c.search.calibration_samples = 200;
  c.jobs = 1;
  const std::string one = run_eval(c);
  c.jobs = 4;
  const std::string four = run_eval(c);
  const bool mc_ok = one == four && replay(one, 2) == one;
  c.command = "wolf";
  const std::string cert = run_wolf(c);
  c.jobs = 1;
  const bool wolf_ok = run_wolf(c) == cert && replay(cert, 3) == cert;
  ok = ok && mc_ok && wolf_ok;
  notes += mc_ok ? ", Monte Carlo jobs 1/4 and replay identical" : ", Monte Carlo mismatch";
  notes += wolf_ok ? ", wolf certificate identical" : ", wolf certificate mismatch";
  report(7, ok, notes);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string only = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<void()>>> criteria{
      {"1", decomposition_identity},           {"2", general_policy_secure},       {"3", gaussian_policy_rates},  {"4", fixed_threshold_vulnerability},
      {"5", daugman_non_optimality}, {"6", numerical_kernels}, {"7", determinism}};
  for (const auto& [id, run] : criteria) {
    if (only.empty() || only == id) run();
  }
  std::printf("ACCEPTANCE SUMMARY: %d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
