#pragma once

// Security rates of a matcher over a population: FRR, FAR, the acceptance
// rate AR_w of an attacker sample w, the population AR, and the wolf attack
// probability WAP = max_w AR_w.
//
// Attacker samples are either an enrolled user's distribution or a point
// mass on one template. AR_w is linear in the attacker distribution, so the
// maximum over all distributions is reached at a point mass and exhaustive
// WAP only visits point masses.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wolfbench/matcher.hpp"
#include "wolfbench/population.hpp"

namespace wolfbench {

struct RateResult {
  double value = 0.0;
  EvalMode::Kind mode = EvalMode::Kind::exact;
  std::optional<double> std_error;
  std::optional<std::uint64_t> n_trials;

  static RateResult exact(double v) { return {v, EvalMode::Kind::exact, std::nullopt, std::nullopt}; }
  /// Binomial estimate from `accepted` successes in `trials`.
  static RateResult estimate(std::uint64_t accepted, std::uint64_t trials);
};

/// Enrolled user (by index) or a point mass on a template.
class Attacker {
 public:
  static Attacker user(std::size_t index) { return Attacker(index); }
  static Attacker probe(MaskedTemplate t) { return Attacker(std::move(t)); }

  bool enrolled() const noexcept { return std::holds_alternative<std::size_t>(who_); }
  std::size_t user_index() const { return std::get<std::size_t>(who_); }
  const MaskedTemplate& point() const { return std::get<MaskedTemplate>(who_); }

 private:
  explicit Attacker(std::size_t i) : who_(i) {}
  explicit Attacker(MaskedTemplate t) : who_(std::move(t)) {}
  std::variant<std::size_t, MaskedTemplate> who_;
};

struct WolfCertificate {
  MaskedTemplate probe;
  RateResult ar_w;
  RateResult ar_baseline;
  double p_level = 0.0;  // AR_w of the probe: it is a p-wolf for this p
  bool is_wolf = false;  // AR_w > AR
  std::string method;    // "exhaustive" or "hill-climb"
};

struct WapResult {
  RateResult wap;
  WolfCertificate certificate;
};

struct RunOptions {
  unsigned jobs = 1;
};

RateResult frr_u(std::size_t u, const Population& pop, const MatcherPolicy& policy, const EvalMode& mode,
                 const RunOptions& run = {});
RateResult frr(const Population& pop, const MatcherPolicy& policy, const EvalMode& mode,
               const RunOptions& run = {});
RateResult far_w(const Attacker& w, const Population& pop, const MatcherPolicy& policy,
                 const EvalMode& mode, const RunOptions& run = {});
RateResult far(const Population& pop, const MatcherPolicy& policy, const EvalMode& mode,
               const RunOptions& run = {});
RateResult ar_w(const Attacker& w, const Population& pop, const MatcherPolicy& policy,
                const EvalMode& mode, const RunOptions& run = {});
RateResult ar(const Population& pop, const MatcherPolicy& policy, const EvalMode& mode,
              const RunOptions& run = {});

/// |AR_w - ((1/n)(1 - FRR_w) + (1 - 1/n) FAR_w)| for enrolled w, or
/// |AR_w - FAR_w| for a point mass. Exact mode only.
double lemma1_check(const Attacker& w, const Population& pop, const MatcherPolicy& policy,
                    const RunOptions& run = {});

/// Exhaustive WAP over every point-mass probe. Ties go to the template
/// enumerated first (ascending value; masked spaces order by mask, then bits).
WapResult wap_exact(const Population& pop, const MatcherPolicy& policy, const RunOptions& run = {});

struct WolfSearchOptions {
  std::uint64_t budget = 2000;          // AR_w evaluations across all restarts
  std::uint64_t restarts = 16;
  std::uint64_t samples = 2000;         // trials per AR_w evaluation during the climb
  std::uint64_t confirm_samples = 100000;  // fresh trials for the reported AR_w
  std::uint64_t baseline_samples = 20000;  // per-user trials for the AR baseline
  std::uint64_t calibration_samples = 2000;
  std::uint64_t seed = 0;
};

/// Single-bit-flip hill climbing on Monte Carlo AR_w estimates with random
/// restarts. The reported AR_w is re-estimated on an independent stream so
/// the climb's selection bias does not leak into it. Never claims optimality.
WolfCertificate wolf_search_mc(const Population& pop, const MatcherPolicy& policy,
                               const WolfSearchOptions& options, const RunOptions& run = {});

struct SecurityVerdict {
  bool secure = false;     // exact: WAP < delta; Monte Carlo: no wolf found at or above delta
  bool exhaustive = false;
  double evidence = 0.0;   // WAP, or best AR_w found
  std::string label;
  std::optional<WolfCertificate> certificate;
};

SecurityVerdict is_delta_secure(const Population& pop, const MatcherPolicy& policy, double delta,
                                const EvalMode& mode, const WolfSearchOptions& search = {},
                                const RunOptions& run = {});

/// Every rate of one evaluation run.
struct EvalSummary {
  EvalMode mode;
  bool has_frr_far = true;  // false for score-model populations
  RateResult frr;
  RateResult far;
  RateResult ar;
  RateResult wap;
  std::optional<MaskedTemplate> wap_probe;
  std::string wap_method;
  std::optional<double> lemma1_max_residual;
  std::vector<RateResult> frr_u;
  std::vector<RateResult> far_u;
  std::vector<RateResult> ar_u;
  /// Exact mode: the highest point-probe AR_w values, descending.
  std::vector<std::pair<MaskedTemplate, double>> top_probes;
};

inline constexpr std::size_t kTopProbes = 10;

/// Exact mode: one pass over the template space. Monte Carlo mode: per-user
/// sampling plus a wolf search for the WAP estimate.
EvalSummary evaluate(const Population& pop, const MatcherPolicy& policy, const EvalMode& mode,
                     const WolfSearchOptions& search = {}, const RunOptions& run = {});

}  // namespace wolfbench
