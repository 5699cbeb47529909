#include "wolfbench/secmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "wolfbench/detail/accumulate.hpp"
#include "wolfbench/detail/lanes.hpp"
#include "wolfbench/detail/laws.hpp"
#include "wolfbench/detail/parallel.hpp"
#include "wolfbench/distfit.hpp"
#include "wolfbench/errors.hpp"

namespace wolfbench {

RateResult RateResult::estimate(std::uint64_t accepted, std::uint64_t trials) {
  const double p = static_cast<double>(accepted) / static_cast<double>(trials);
  return {p, EvalMode::Kind::monte_carlo, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials};
}

namespace {

using detail::CompensatedSum;

constexpr std::uint64_t kUserLane = 0;
constexpr std::uint64_t kProbeLane = 1;

/// Thresholding of one probe's comparisons under a policy.
class ProbeRule {
 public:
  ProbeRule(const MatcherPolicy& policy, DistanceKind distance, const MaskedTemplate& probe)
      : distance_(distance) {
    if (const auto* d = std::get_if<DaugmanRule>(&policy.rule())) {
      daugman_ = true;
      alpha_prime_ = d->alpha_prime;
    } else {
      tau_ = policy.probe_threshold(probe);
    }
  }

  bool accepts(std::size_t differing, std::size_t comparable) const {
    if (comparable == 0) return false;
    const double d = distance_ == DistanceKind::hamming
                         ? static_cast<double>(differing)
                         : static_cast<double>(differing) / static_cast<double>(comparable);
    const double threshold = daugman_ ? daugman_threshold(comparable, alpha_prime_) : tau_;
    return d < threshold;
  }

 private:
  DistanceKind distance_;
  bool daugman_ = false;
  double alpha_prime_ = 0.0;
  double tau_ = 0.0;
};

void check_ready(const Population& pop, const MatcherPolicy& policy) {
  check_compatible(pop, policy);
  if (pop.space().is_score_space() && std::holds_alternative<DaugmanRule>(policy.rule())) {
    throw ConfigError("daugman policy needs bit templates");
  }
  if (policy.is_adaptive() && !policy.calibrated()) {
    throw CalibrationError("adaptive policy " + policy.spec() + " is not calibrated");
  }
}

void require_bit_space(const Population& pop, std::string_view what) {
  if (pop.space().is_score_space()) {
    throw ModeError(std::string(what) + " is undefined for score-model populations");
  }
}

/// Acceptance probabilities in exact mode.
class ExactEngine {
 public:
  ExactEngine(const Population& pop, const MatcherPolicy& policy) : pop_(pop), policy_(policy) {
    require_exact(pop);
    check_ready(pop, policy);
    if (!pop.space().is_score_space()) laws_.emplace(pop);
  }

  const Population& population() const { return pop_; }

  /// acc[v] = P(probe accepted against a template drawn from X_v).
  void acceptance(const MaskedTemplate& s, std::vector<double>& acc, std::vector<detail::Atom>& scratch) const {
    acc.assign(pop_.size(), 0.0);
    if (pop_.space().is_score_space()) {
      std::fill(acc.begin(), acc.end(), score_acceptance(s));
      return;
    }
    const ProbeRule rule(policy_, pop_.distance(), s);
    for (std::size_t v = 0; v < pop_.size(); ++v) acc[v] = acceptance_one(rule, s, v, scratch);
  }

  double acceptance_one(const MaskedTemplate& s, std::size_t v, std::vector<detail::Atom>& scratch) const {
    if (pop_.space().is_score_space()) return score_acceptance(s);
    return acceptance_one(ProbeRule(policy_, pop_.distance(), s), s, v, scratch);
  }

  /// Mean acceptance over enrolled users: AR of a point mass on s.
  double point_ar(const MaskedTemplate& s, std::vector<double>& acc, std::vector<detail::Atom>& scratch) const {
    acceptance(s, acc, scratch);
    CompensatedSum sum;
    for (double a : acc) sum += a;
    return sum.value() / static_cast<double>(pop_.size());
  }

 private:
  double acceptance_one(const ProbeRule& rule, const MaskedTemplate& s, std::size_t v,
                        std::vector<detail::Atom>& scratch) const {
    laws_->atoms(s, v, scratch);
    CompensatedSum sum;
    for (const auto& a : scratch) {
      if (rule.accepts(a.differing, a.comparable)) sum += a.prob;
    }
    return sum.value();
  }

  double score_acceptance(const MaskedTemplate& s) const {
    const ScoreParams sp = pop_.score_params(s);
    const double threshold = policy_.probe_threshold(s);
    return std_normal_cdf((threshold - sp.mean) / sp.sigma);
  }

  const Population& pop_;
  const MatcherPolicy& policy_;
  std::optional<detail::ComparisonLaws> laws_;
};

/// Support of an attacker's distribution.
std::vector<std::pair<MaskedTemplate, double>> attacker_support(const Attacker& w, const Population& pop) {
  if (!w.enrolled()) {
    pop.check_template(w.point());
    return {{w.point().canonical(), 1.0}};
  }
  const UserModel& u = pop.user(w.user_index());
  if (pop.space().is_score_space()) return {{u.reference, 1.0}};
  return exact_distribution(u, pop.space());
}

struct ExactAttackerRates {
  double accepted_by_self = 0.0;   // sum_s P(s) acc(s, w); enrolled only
  double accepted_by_others = 0.0; // sum_s P(s) mean_{v != w} acc(s, v)
  double accepted_by_all = 0.0;    // sum_s P(s) mean_v acc(s, v)
};

ExactAttackerRates exact_attacker_rates(const Attacker& w, const ExactEngine& engine) {
  const Population& pop = engine.population();
  const std::size_t n = pop.size();
  const auto support = attacker_support(w, pop);
  std::vector<double> acc;
  std::vector<detail::Atom> scratch;
  CompensatedSum self;
  CompensatedSum others;
  CompensatedSum all;
  for (const auto& [s, prob] : support) {
    if (prob == 0.0) continue;
    engine.acceptance(s, acc, scratch);
    CompensatedSum total;
    CompensatedSum rest;
    for (std::size_t v = 0; v < n; ++v) {
      total += acc[v];
      if (!w.enrolled() || v != w.user_index()) rest += acc[v];
    }
    all += prob * total.value() / static_cast<double>(n);
    if (w.enrolled()) {
      self += prob * acc[w.user_index()];
      others += prob * rest.value() / static_cast<double>(n - 1);
    } else {
      others += prob * rest.value() / static_cast<double>(n);
    }
  }
  return {self.value(), others.value(), all.value()};
}

RateResult mean_of(const std::vector<RateResult>& parts, EvalMode::Kind mode) {
  CompensatedSum sum;
  CompensatedSum var;
  std::uint64_t trials = 0;
  for (const auto& r : parts) {
    sum += r.value;
    if (r.std_error) var += *r.std_error * *r.std_error;
    if (r.n_trials) trials += *r.n_trials;
  }
  const double n = static_cast<double>(parts.size());
  if (mode == EvalMode::Kind::exact) return RateResult::exact(sum.value() / n);
  return {sum.value() / n, mode, std::sqrt(var.value()) / n, trials};
}

// ---- Monte Carlo -----------------------------------------------------------

/// Probe-side decision for sampled comparisons; caches the probe threshold.
class SampledMatcher {
 public:
  SampledMatcher(const Population& pop, const MatcherPolicy& policy) : pop_(pop), policy_(policy) {
    check_ready(pop, policy);
  }

  bool accepts(const MaskedTemplate& s, const MaskedTemplate& t) const {
    const Comparison c = compare(s, t);
    return ProbeRule(policy_, pop_.distance(), s).accepts(c.differing, c.comparable);
  }

  /// `trials` comparisons of probe s against templates of uniformly drawn users.
  std::uint64_t count_point_accepts(const MaskedTemplate& s, std::uint64_t trials, std::mt19937_64& rng) const {
    std::uint64_t accepted = 0;
    if (pop_.space().is_score_space()) {
      const ScoreParams sp = pop_.score_params(s);
      const double threshold = policy_.probe_threshold(s);
      std::normal_distribution<double> score(sp.mean, sp.sigma);
      for (std::uint64_t i = 0; i < trials; ++i) accepted += score(rng) < threshold ? 1U : 0U;
      return accepted;
    }
    const ProbeRule rule(policy_, pop_.distance(), s);
    std::uniform_int_distribution<std::size_t> pick(0, pop_.size() - 1);
    for (std::uint64_t i = 0; i < trials; ++i) {
      const MaskedTemplate t = sample_probe(pop_.user(pick(rng)), rng);
      const Comparison c = compare(s, t);
      accepted += rule.accepts(c.differing, c.comparable) ? 1U : 0U;
    }
    return accepted;
  }

  const Population& population() const { return pop_; }

 private:
  const Population& pop_;
  const MatcherPolicy& policy_;
};

RateResult mc_frr_u(std::size_t u, const SampledMatcher& m, const EvalMode& mode) {
  const Population& pop = m.population();
  require_bit_space(pop, "FRR");
  auto rng = detail::lane_rng(mode.seed, {detail::kFrrTrials, kUserLane, u});
  std::uint64_t accepted = 0;
  for (std::uint64_t i = 0; i < mode.samples; ++i) {
    const MaskedTemplate s = sample_probe(pop.user(u), rng);
    const MaskedTemplate t = sample_probe(pop.user(u), rng);
    accepted += m.accepts(s, t) ? 1U : 0U;
  }
  RateResult r = RateResult::estimate(mode.samples - accepted, mode.samples);
  return r;
}

RateResult mc_far_w(const Attacker& w, const SampledMatcher& m, const EvalMode& mode) {
  const Population& pop = m.population();
  require_bit_space(pop, "FAR");
  if (!w.enrolled()) {
    auto rng = detail::lane_rng(mode.seed, {detail::kFarTrials, kProbeLane, MaskedTemplateHash{}(w.point())});
    return RateResult::estimate(m.count_point_accepts(w.point().canonical(), mode.samples, rng), mode.samples);
  }
  const std::size_t u = w.user_index();
  auto rng = detail::lane_rng(mode.seed, {detail::kFarTrials, kUserLane, u});
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 2);
  std::uint64_t accepted = 0;
  for (std::uint64_t i = 0; i < mode.samples; ++i) {
    std::size_t v = pick(rng);
    if (v >= u) ++v;
    const MaskedTemplate s = sample_probe(pop.user(u), rng);
    const MaskedTemplate t = sample_probe(pop.user(v), rng);
    accepted += m.accepts(s, t) ? 1U : 0U;
  }
  return RateResult::estimate(accepted, mode.samples);
}

RateResult mc_ar_w(const Attacker& w, const SampledMatcher& m, const EvalMode& mode) {
  const Population& pop = m.population();
  if (!w.enrolled()) {
    auto rng = detail::lane_rng(mode.seed, {detail::kArTrials, kProbeLane, MaskedTemplateHash{}(w.point())});
    return RateResult::estimate(m.count_point_accepts(w.point().canonical(), mode.samples, rng), mode.samples);
  }
  const std::size_t u = w.user_index();
  auto rng = detail::lane_rng(mode.seed, {detail::kArTrials, kUserLane, u});
  if (pop.space().is_score_space()) {
    return RateResult::estimate(m.count_point_accepts(pop.user(u).reference, mode.samples, rng), mode.samples);
  }
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  std::uint64_t accepted = 0;
  for (std::uint64_t i = 0; i < mode.samples; ++i) {
    const std::size_t v = pick(rng);
    const MaskedTemplate s = sample_probe(pop.user(u), rng);
    const MaskedTemplate t = sample_probe(pop.user(v), rng);
    accepted += m.accepts(s, t) ? 1U : 0U;
  }
  return RateResult::estimate(accepted, mode.samples);
}

std::vector<RateResult> per_user(const Population& pop, const RunOptions& run,
                                 const std::function<RateResult(std::size_t)>& rate) {
  std::vector<std::optional<RateResult>> slots(pop.size());
  detail::parallel_for(pop.size(), run.jobs, [&](std::size_t u) { slots[u] = rate(u); });
  std::vector<RateResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(*s);
  return out;
}

}  // namespace

RateResult frr_u(std::size_t u, const Population& pop, const MatcherPolicy& policy, const EvalMode& mode,
                 const RunOptions&) {
  require_bit_space(pop, "FRR");
  if (u >= pop.size()) throw ConfigError("user index out of range");
  if (!mode.is_exact()) return mc_frr_u(u, SampledMatcher(pop, policy), mode);
  const ExactEngine engine(pop, policy);
  return RateResult::exact(1.0 - exact_attacker_rates(Attacker::user(u), engine).accepted_by_self);
}

RateResult frr(const Population& pop, const MatcherPolicy& policy, const EvalMode& mode, const RunOptions& run) {
  require_bit_space(pop, "FRR");
  if (!mode.is_exact()) {
    const SampledMatcher m(pop, policy);
    return mean_of(per_user(pop, run, [&](std::size_t u) { return mc_frr_u(u, m, mode); }), mode.kind);
  }
  const ExactEngine engine(pop, policy);
  return mean_of(per_user(pop, run,
                          [&](std::size_t u) {
                            return RateResult::exact(
                                1.0 - exact_attacker_rates(Attacker::user(u), engine).accepted_by_self);
                          }),
                 mode.kind);
}

RateResult far_w(const Attacker& w, const Population& pop, const MatcherPolicy& policy, const EvalMode& mode,
                 const RunOptions&) {
  require_bit_space(pop, "FAR");
  if (w.enrolled() && w.user_index() >= pop.size()) throw ConfigError("user index out of range");
  if (!mode.is_exact()) return mc_far_w(w, SampledMatcher(pop, policy), mode);
  const ExactEngine engine(pop, policy);
  return RateResult::exact(exact_attacker_rates(w, engine).accepted_by_others);
}

RateResult far(const Population& pop, const MatcherPolicy& policy, const EvalMode& mode, const RunOptions& run) {
  require_bit_space(pop, "FAR");
  if (!mode.is_exact()) {
    const SampledMatcher m(pop, policy);
    return mean_of(per_user(pop, run, [&](std::size_t u) { return mc_far_w(Attacker::user(u), m, mode); }),
                   mode.kind);
  }
  const ExactEngine engine(pop, policy);
  return mean_of(per_user(pop, run,
                          [&](std::size_t u) {
                            return RateResult::exact(
                                exact_attacker_rates(Attacker::user(u), engine).accepted_by_others);
                          }),
                 mode.kind);
}

RateResult ar_w(const Attacker& w, const Population& pop, const MatcherPolicy& policy, const EvalMode& mode,
                const RunOptions&) {
  if (w.enrolled() && w.user_index() >= pop.size()) throw ConfigError("user index out of range");
  if (!mode.is_exact()) return mc_ar_w(w, SampledMatcher(pop, policy), mode);
  const ExactEngine engine(pop, policy);
  return RateResult::exact(exact_attacker_rates(w, engine).accepted_by_all);
}

RateResult ar(const Population& pop, const MatcherPolicy& policy, const EvalMode& mode, const RunOptions& run) {
  if (!mode.is_exact()) {
    const SampledMatcher m(pop, policy);
    return mean_of(per_user(pop, run, [&](std::size_t u) { return mc_ar_w(Attacker::user(u), m, mode); }),
                   mode.kind);
  }
  const ExactEngine engine(pop, policy);
  return mean_of(per_user(pop, run,
                          [&](std::size_t u) {
                            return RateResult::exact(
                                exact_attacker_rates(Attacker::user(u), engine).accepted_by_all);
                          }),
                 mode.kind);
}

double lemma1_check(const Attacker& w, const Population& pop, const MatcherPolicy& policy, const RunOptions&) {
  require_bit_space(pop, "the AR decomposition check");
  const ExactEngine engine(pop, policy);
  const ExactAttackerRates r = exact_attacker_rates(w, engine);
  if (!w.enrolled()) return std::fabs(r.accepted_by_all - r.accepted_by_others);
  const double n = static_cast<double>(pop.size());
  const double frr_w = 1.0 - r.accepted_by_self;
  const double rhs = (1.0 / n) * (1.0 - frr_w) + (1.0 - 1.0 / n) * r.accepted_by_others;
  return std::fabs(r.accepted_by_all - rhs);
}

namespace {

struct BlockBest {
  double value = -1.0;
  std::optional<MaskedTemplate> probe;
  std::vector<std::pair<MaskedTemplate, double>> top;  // descending AR, first-enumerated wins ties
};

void keep_top(std::vector<std::pair<MaskedTemplate, double>>& top, const MaskedTemplate& s, double v) {
  if (top.size() == kTopProbes && !(v > top.back().second)) return;
  auto at = std::find_if(top.begin(), top.end(), [v](const auto& e) { return v > e.second; });
  top.insert(at, {s, v});
  if (top.size() > kTopProbes) top.pop_back();
}

/// Exhaustive pass over the template space. `visit(s, acc, point_ar)` sees
/// every probe of block b; returns the per-block maxima of point AR.
template <typename Visit>
std::vector<BlockBest> exhaustive_pass(const ExactEngine& engine, const RunOptions& run, Visit&& visit) {
  const TemplateEnumerator templates(engine.population().space());
  std::vector<BlockBest> best(templates.block_count());
  detail::parallel_for(templates.block_count(), run.jobs, [&](std::size_t b) {
    std::vector<double> acc;
    std::vector<detail::Atom> scratch;
    templates.for_each_in_block(b, [&](const MaskedTemplate& s) {
      const double point = engine.point_ar(s, acc, scratch);
      visit(b, s, acc, point);
      keep_top(best[b].top, s, point);
      if (point > best[b].value) {
        best[b].value = point;
        best[b].probe = s;
      }
    });
  });
  return best;
}

BlockBest overall_best(const std::vector<BlockBest>& blocks) {
  BlockBest best;
  std::vector<std::pair<MaskedTemplate, double>> top;
  for (const auto& b : blocks) {
    if (b.probe && b.value > best.value) {
      best.value = b.value;
      best.probe = b.probe;
    }
    for (const auto& [s, v] : b.top) keep_top(top, s, v);
  }
  best.top = std::move(top);
  return best;
}

}  // namespace

WapResult wap_exact(const Population& pop, const MatcherPolicy& policy, const RunOptions& run) {
  const ExactEngine engine(pop, policy);
  const BlockBest best = overall_best(
      exhaustive_pass(engine, run, [](std::size_t, const MaskedTemplate&, const std::vector<double>&, double) {}));
  const RateResult baseline = ar(pop, policy, EvalMode::exact(), run);
  WolfCertificate cert{*best.probe, RateResult::exact(best.value), baseline, best.value,
                       best.value > baseline.value, "exhaustive"};
  return {RateResult::exact(best.value), std::move(cert)};
}

namespace {

std::vector<MaskedTemplate> neighbours(const MaskedTemplate& s, bool masked) {
  std::vector<MaskedTemplate> out;
  const std::size_t L = s.size();
  out.reserve(masked ? 2 * L : L);
  for (std::size_t i = 0; i < L; ++i) {
    if (!masked) {
      BitVector bits = s.bits();
      bits.flip(i);
      out.emplace_back(std::move(bits), s.mask());
      continue;
    }
    if (s.mask().test(i)) {
      BitVector flipped = s.bits();
      flipped.flip(i);
      out.emplace_back(std::move(flipped), s.mask());
      BitVector cleared = s.bits();
      cleared.set(i, false);
      BitVector mask = s.mask();
      mask.set(i, false);
      out.emplace_back(std::move(cleared), std::move(mask));
    } else {
      BitVector mask = s.mask();
      mask.set(i, true);
      out.emplace_back(s.bits(), mask);
      BitVector bits = s.bits();
      bits.set(i, true);
      out.emplace_back(std::move(bits), std::move(mask));
    }
  }
  return out;
}

MaskedTemplate random_template(const TemplateSpace& space, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  BitVector bits(space.length);
  BitVector mask = BitVector::ones(space.length);
  for (std::size_t i = 0; i < space.length; ++i) {
    if (space.masked) mask.set(i, coin(rng));
    bits.set(i, mask.test(i) && coin(rng));
  }
  return MaskedTemplate(std::move(bits), std::move(mask));
}

struct ClimbResult {
  double value = -1.0;
  std::optional<MaskedTemplate> probe;
};

}  // namespace

WolfCertificate wolf_search_mc(const Population& pop, const MatcherPolicy& policy,
                               const WolfSearchOptions& options, const RunOptions& run) {
  if (options.budget == 0) throw ConfigError("wolf search budget must be at least 1");
  if (options.restarts == 0) throw ConfigError("wolf search needs at least one restart");
  if (options.samples == 0 || options.confirm_samples == 0 || options.baseline_samples == 0) {
    throw ConfigError("wolf search sample counts must be positive");
  }
  const SampledMatcher matcher(pop, policy);
  const bool masked = pop.space().masked;

  auto estimate = [&](const MaskedTemplate& s) {
    auto rng = detail::lane_rng(options.seed, {detail::kWolfEvaluate, MaskedTemplateHash{}(s)});
    return static_cast<double>(matcher.count_point_accepts(s, options.samples, rng)) /
           static_cast<double>(options.samples);
  };

  const std::uint64_t restarts = std::min(options.restarts, options.budget);
  std::vector<ClimbResult> results(restarts);
  detail::parallel_for(restarts, run.jobs, [&](std::size_t r) {
    std::uint64_t budget = options.budget / restarts + (r < options.budget % restarts ? 1 : 0);
    std::unordered_map<MaskedTemplate, double, MaskedTemplateHash> seen;
    ClimbResult& best = results[r];
    auto evaluate = [&](const MaskedTemplate& s) -> std::optional<double> {
      if (auto it = seen.find(s); it != seen.end()) return it->second;
      if (budget == 0) return std::nullopt;
      --budget;
      const double v = estimate(s);
      seen.emplace(s, v);
      if (v > best.value || (v == best.value && best.probe && s < *best.probe)) {
        best.value = v;
        best.probe = s;
      }
      return v;
    };
    auto rng = detail::lane_rng(options.seed, {detail::kWolfStart, r});
    MaskedTemplate current = random_template(pop.space(), rng);
    double current_value = *evaluate(current);
    for (;;) {
      std::optional<MaskedTemplate> step;
      double step_value = current_value;
      bool exhausted = false;
      for (const auto& nb : neighbours(current, masked)) {
        const auto v = evaluate(nb);
        if (!v) {
          exhausted = true;
          break;
        }
        if (*v > step_value) {
          step_value = *v;
          step = nb;
        }
      }
      if (!step || exhausted) break;
      current = *step;
      current_value = step_value;
    }
  });

  ClimbResult best;
  for (const auto& r : results) {
    if (!r.probe) continue;
    if (r.value > best.value || (r.value == best.value && *r.probe < *best.probe)) best = r;
  }

  auto confirm_rng = detail::lane_rng(options.seed, {detail::kWolfConfirm, MaskedTemplateHash{}(*best.probe)});
  const RateResult confirmed = RateResult::estimate(
      matcher.count_point_accepts(*best.probe, options.confirm_samples, confirm_rng), options.confirm_samples);
  const RateResult baseline =
      ar(pop, policy, EvalMode::monte_carlo(options.baseline_samples, options.seed), run);
  return WolfCertificate{*best.probe, confirmed, baseline, confirmed.value,
                         confirmed.value > baseline.value, "hill-climb"};
}

SecurityVerdict is_delta_secure(const Population& pop, const MatcherPolicy& policy, double delta,
                                const EvalMode& mode, const WolfSearchOptions& search, const RunOptions& run) {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  SecurityVerdict verdict;
  if (mode.is_exact()) {
    WapResult w = wap_exact(pop, policy, run);
    verdict.exhaustive = true;
    verdict.evidence = w.wap.value;
    verdict.secure = w.wap.value < delta;
    verdict.label = verdict.secure ? "delta-secure: WAP < delta" : "not delta-secure: WAP >= delta";
    verdict.certificate = std::move(w.certificate);
    return verdict;
  }
  WolfSearchOptions opts = search;
  opts.seed = mode.seed;
  WolfCertificate cert = wolf_search_mc(pop, policy, opts, run);
  verdict.exhaustive = false;
  verdict.evidence = cert.ar_w.value;
  verdict.secure = cert.ar_w.value < delta;
  verdict.label = verdict.secure ? "no wolf found above delta" : "wolf found at or above delta";
  verdict.certificate = std::move(cert);
  return verdict;
}

EvalSummary evaluate(const Population& pop, const MatcherPolicy& policy, const EvalMode& mode,
                     const WolfSearchOptions& search, const RunOptions& run) {
  EvalSummary out;
  out.mode = mode;
  const std::size_t n = pop.size();
  const bool score_space = pop.space().is_score_space();
  out.has_frr_far = !score_space;

  if (!mode.is_exact()) {
    const SampledMatcher m(pop, policy);
    out.ar_u = per_user(pop, run, [&](std::size_t u) { return mc_ar_w(Attacker::user(u), m, mode); });
    out.ar = mean_of(out.ar_u, mode.kind);
    if (!score_space) {
      out.frr_u = per_user(pop, run, [&](std::size_t u) { return mc_frr_u(u, m, mode); });
      out.far_u = per_user(pop, run, [&](std::size_t u) { return mc_far_w(Attacker::user(u), m, mode); });
      out.frr = mean_of(out.frr_u, mode.kind);
      out.far = mean_of(out.far_u, mode.kind);
    }
    WolfSearchOptions opts = search;
    opts.seed = mode.seed;
    const WolfCertificate cert = wolf_search_mc(pop, policy, opts, run);
    out.wap = cert.ar_w;
    out.wap_probe = cert.probe;
    out.wap_method = cert.method;
    return out;
  }

  const ExactEngine engine(pop, policy);
  if (score_space) {
    std::vector<double> acc;
    std::vector<detail::Atom> scratch;
    for (std::size_t u = 0; u < n; ++u) {
      out.ar_u.push_back(RateResult::exact(engine.point_ar(pop.user(u).reference, acc, scratch)));
    }
    out.ar = mean_of(out.ar_u, mode.kind);
    const BlockBest best = overall_best(
        exhaustive_pass(engine, run, [](std::size_t, const MaskedTemplate&, const std::vector<double>&, double) {}));
    out.wap = RateResult::exact(best.value);
    out.wap_probe = best.probe;
    out.wap_method = "exhaustive";
    out.top_probes = best.top;
    return out;
  }

  // One pass over the template space: every probe contributes to the users
  // whose distributions contain it.
  const TemplateEnumerator templates(pop.space());
  struct UserSums {
    CompensatedSum self;
    CompensatedSum others;
    CompensatedSum all;
  };
  std::vector<std::vector<UserSums>> partial(templates.block_count(), std::vector<UserSums>(n));
  const auto blocks = exhaustive_pass(engine, run,
                                      [&](std::size_t b, const MaskedTemplate& s, const std::vector<double>& acc,
                                          double point) {
                                        CompensatedSum total;
                                        bool totalled = false;
                                        for (std::size_t u = 0; u < n; ++u) {
                                          const double prob = probability(pop.user(u), s);
                                          if (prob == 0.0) continue;
                                          if (!totalled) {
                                            for (double a : acc) total += a;
                                            totalled = true;
                                          }
                                          auto& sums = partial[b][u];
                                          sums.self += prob * acc[u];
                                          sums.others += prob * (total.value() - acc[u]) / static_cast<double>(n - 1);
                                          sums.all += prob * point;
                                        }
                                      });
  std::vector<UserSums> totals(n);
  for (const auto& block : partial) {
    for (std::size_t u = 0; u < n; ++u) {
      totals[u].self += block[u].self;
      totals[u].others += block[u].others;
      totals[u].all += block[u].all;
    }
  }
  double max_residual = 0.0;
  const double dn = static_cast<double>(n);
  for (std::size_t u = 0; u < n; ++u) {
    const double frr_value = 1.0 - totals[u].self.value();
    const double far_value = totals[u].others.value();
    const double ar_value = totals[u].all.value();
    out.frr_u.push_back(RateResult::exact(frr_value));
    out.far_u.push_back(RateResult::exact(far_value));
    out.ar_u.push_back(RateResult::exact(ar_value));
    const double rhs = (1.0 / dn) * (1.0 - frr_value) + (1.0 - 1.0 / dn) * far_value;
    max_residual = std::max(max_residual, std::fabs(ar_value - rhs));
  }
  out.frr = mean_of(out.frr_u, mode.kind);
  out.far = mean_of(out.far_u, mode.kind);
  out.ar = mean_of(out.ar_u, mode.kind);
  out.lemma1_max_residual = max_residual;
  const BlockBest best = overall_best(blocks);
  out.wap = RateResult::exact(best.value);
  out.wap_probe = best.probe;
  out.wap_method = "exhaustive";
  out.top_probes = best.top;
  return out;
}

}  // namespace wolfbench
