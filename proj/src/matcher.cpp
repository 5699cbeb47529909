#include "wolfbench/matcher.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "wolfbench/detail/lanes.hpp"
#include "wolfbench/detail/laws.hpp"
#include "wolfbench/detail/parallel.hpp"
#include "wolfbench/errors.hpp"

namespace wolfbench {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError("invalid number '" + std::string(text) + "' in " + std::string(what));
  }
  return value;
}

void validate_rule(const ThresholdRule& rule) {
  std::visit(Overloaded{
                 [](const FixedThreshold& r) {
                   if (!(r.tau >= 0.0)) throw ConfigError("fixed threshold must be >= 0");
                 },
                 [](const GeneralAdaptive& r) {
                   if (!(r.delta > 0.0 && r.delta < 1.0)) {
                     throw ConfigError("general-adaptive delta must lie in (0, 1)");
                   }
                 },
                 [](const GaussianAdaptive& r) {
                   if (!std::isfinite(r.alpha)) throw ConfigError("alpha must be finite");
                 },
                 [](const DaugmanRule& r) {
                   if (!std::isfinite(r.alpha_prime)) throw ConfigError("alpha' must be finite");
                 },
             },
             rule);
}

}  // namespace

void CalibrationTable::insert(const MaskedTemplate& probe, CalibrationEntry entry) {
  std::unique_lock lock(mutex_);
  entries_.insert_or_assign(probe, entry);
}

std::optional<CalibrationEntry> CalibrationTable::find(const MaskedTemplate& probe) const {
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(probe); it != entries_.end()) return it->second;
  }
  if (!provider_) return std::nullopt;
  CalibrationEntry computed = provider_(probe);
  std::unique_lock lock(mutex_);
  return entries_.try_emplace(probe, computed).first->second;
}

std::size_t CalibrationTable::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<std::pair<MaskedTemplate, CalibrationEntry>> CalibrationTable::entries() const {
  std::vector<std::pair<MaskedTemplate, CalibrationEntry>> out;
  {
    std::shared_lock lock(mutex_);
    out.assign(entries_.begin(), entries_.end());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

MatcherPolicy::MatcherPolicy(ThresholdRule rule) : rule_(rule) { validate_rule(rule_); }

MatcherPolicy MatcherPolicy::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError("policy '" + std::string(spec) + "' must look like kind:value");
  }
  const std::string_view kind = spec.substr(0, colon);
  const double value = parse_number(spec.substr(colon + 1), "policy");
  if (kind == "fixed") return fixed(value);
  if (kind == "general") return general(value);
  if (kind == "gaussian") return gaussian(value);
  if (kind == "daugman") return daugman(value);
  throw ParseError("unknown policy kind '" + std::string(kind) + "'");
}

std::string MatcherPolicy::spec() const {
  return std::visit(Overloaded{
                        [](const FixedThreshold& r) { return "fixed:" + format_number(r.tau); },
                        [](const GeneralAdaptive& r) { return "general:" + format_number(r.delta); },
                        [](const GaussianAdaptive& r) { return "gaussian:" + format_number(r.alpha); },
                        [](const DaugmanRule& r) { return "daugman:" + format_number(r.alpha_prime); },
                    },
                    rule_);
}

bool MatcherPolicy::is_adaptive() const noexcept {
  return std::holds_alternative<GeneralAdaptive>(rule_) || std::holds_alternative<GaussianAdaptive>(rule_);
}

MatcherPolicy MatcherPolicy::with_calibration(std::shared_ptr<CalibrationTable> table) const {
  MatcherPolicy out(*this);
  out.calibration_ = std::move(table);
  return out;
}

double MatcherPolicy::probe_threshold(const MaskedTemplate& probe) const {
  if (const auto* fixed_rule = std::get_if<FixedThreshold>(&rule_)) return fixed_rule->tau;
  if (std::holds_alternative<DaugmanRule>(rule_)) {
    throw ConfigError("daugman thresholds depend on the comparison, not the probe alone");
  }
  if (!calibration_) throw CalibrationError("adaptive policy " + spec() + " is not calibrated");
  const auto entry = calibration_->find(probe);
  if (!entry) {
    throw CalibrationError("no calibration entry for probe " + probe.bits().to_hex());
  }
  return entry_threshold(*this, *entry);
}

double MatcherPolicy::threshold_for(const MaskedTemplate& probe, std::size_t k) const {
  if (const auto* d = std::get_if<DaugmanRule>(&rule_)) return daugman_threshold(k, d->alpha_prime);
  return probe_threshold(probe);
}

MatchOutcome decide(const MatcherPolicy& policy, const MaskedTemplate& s, const MaskedTemplate& t,
                    DistanceKind distance) {
  const Comparison c = compare(s, t);
  if (c.comparable == 0) return {Decision::reject, "no comparable bits"};
  if (std::holds_alternative<DaugmanRule>(policy.rule()) &&
      distance != DistanceKind::fractional_hamming) {
    throw ConfigError("daugman policy needs the fractional-hamming distance");
  }
  const double d = distance_value(distance, c);
  const double threshold = policy.threshold_for(s, c.comparable);
  return {d < threshold ? Decision::accept : Decision::reject, std::nullopt};
}

double general_adaptive_threshold(const DistanceDistribution& dist, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  const auto& support = dist.support();
  const auto& below = dist.cumulative_below();
  if (support.empty()) throw ConfigError("empty distance distribution");
  // A support value whose mass below sits within rounding of delta may equal
  // delta exactly, so it is not admissible.
  const double limit = delta - kGeneralBoundaryGuard;
  // cumulative_below is nondecreasing, so the admissible support values form a prefix
  const auto first_bad = std::lower_bound(below.begin(), below.end(), limit);
  const auto idx = static_cast<std::size_t>(first_bad - below.begin());
  return idx == 0 ? support.front() : support[idx - 1];
}

double gaussian_adaptive_threshold(const GaussianFit& fit, double alpha) {
  return alpha * fit.sigma + fit.mean;
}

double gaussian_adaptive_threshold_from_entropy(double mean, double entropy_bits, double alpha) {
  static const double kSqrtTwoPiE = std::sqrt(2.0 * std::numbers::pi * std::numbers::e);
  return alpha * std::exp2(entropy_bits) / kSqrtTwoPiE + mean;
}

double daugman_threshold(std::size_t k, double alpha_prime) {
  if (k == 0) throw NoComparableBitsError();
  return alpha_prime / std::sqrt(static_cast<double>(k)) + 0.5;
}

double entry_threshold(const MatcherPolicy& policy, const CalibrationEntry& entry) {
  return std::visit(
      Overloaded{
          [&](const TauEntry& e) -> double {
            if (!std::holds_alternative<GeneralAdaptive>(policy.rule())) {
              throw CalibrationError("tau entry used with policy " + policy.spec());
            }
            return e.tau;
          },
          [&](const MomentEntry& e) -> double {
            const auto* g = std::get_if<GaussianAdaptive>(&policy.rule());
            if (g == nullptr) throw CalibrationError("moment entry used with policy " + policy.spec());
            if (e.sigma == 0.0) return e.mean;
            return gaussian_adaptive_threshold(GaussianFit{e.mean, e.sigma, 0.0}, g->alpha);
          },
      },
      entry);
}

void check_compatible(const Population& pop, const MatcherPolicy& policy) {
  if (std::holds_alternative<DaugmanRule>(policy.rule()) &&
      pop.distance() != DistanceKind::fractional_hamming) {
    throw ConfigError("daugman policy needs a fractional-hamming population");
  }
}

namespace {

CalibrationEntry entry_from_distribution(const ThresholdRule& rule, const DistanceDistribution& dist) {
  if (const auto* g = std::get_if<GeneralAdaptive>(&rule)) {
    return TauEntry{general_adaptive_threshold(dist, g->delta)};
  }
  try {
    const GaussianFit fit = fit_gaussian(dist);
    return MomentEntry{fit.mean, fit.sigma};
  } catch (const DegenerateFitError&) {
    if (dist.has_infinite_mass() || dist.support().empty() || std::isinf(dist.support().front())) {
      return MomentEntry{0.0, 0.0};
    }
    const auto& s = dist.support();
    const auto& m = dist.mass();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (m[i] > 0.0) return MomentEntry{s[i], 0.0};
    }
    return MomentEntry{0.0, 0.0};
  }
}

}  // namespace

MatcherPolicy calibrate(const MatcherPolicy& policy, const Population& pop, const EvalMode& mode,
                        const CalibrationOptions& options) {
  if (!policy.is_adaptive()) {
    throw CalibrationError("policy " + policy.spec() + " has nothing to calibrate");
  }
  check_compatible(pop, policy);
  const ThresholdRule rule = policy.rule();
  const bool score_space = pop.space().is_score_space();
  if (score_space && std::holds_alternative<GeneralAdaptive>(rule)) {
    throw CalibrationError(
        "general-adaptive thresholds need a discrete distance law; score-model spaces are continuous");
  }

  if (mode.is_exact()) {
    if (!pop.exact_admissible()) {
      throw CalibrationError("exact calibration requested on a space with " +
                             std::to_string(pop.space().template_count()) + " templates");
    }
    const TemplateEnumerator templates(pop.space());
    std::optional<detail::ComparisonLaws> laws;
    if (!score_space) laws.emplace(pop);
    std::vector<std::vector<std::pair<MaskedTemplate, CalibrationEntry>>> blocks(templates.block_count());
    detail::parallel_for(templates.block_count(), options.jobs, [&](std::size_t b) {
      templates.for_each_in_block(b, [&](const MaskedTemplate& s) {
        if (score_space) {
          const ScoreParams sp = pop.score_params(s);
          blocks[b].emplace_back(s, MomentEntry{sp.mean, sp.sigma});
        } else {
          blocks[b].emplace_back(s, entry_from_distribution(rule, detail::p_s_from_laws(s, *laws)));
        }
      });
    });
    auto table = std::make_shared<CalibrationTable>();
    for (auto& block : blocks) {
      for (auto& [s, e] : block) table->insert(s, e);
    }
    return policy.with_calibration(std::move(table));
  }

  // Monte Carlo: thresholds are estimated the first time a probe shows up.
  // The population is copied so the policy stays valid on its own.
  auto owned = std::make_shared<const Population>(pop);
  const std::uint64_t seed = mode.seed;
  const std::uint64_t samples = options.samples;
  if (samples == 0) throw ConfigError("calibration needs at least one sample per probe");
  CalibrationTable::Provider provider = [owned, rule, seed, samples](const MaskedTemplate& s) -> CalibrationEntry {
    if (owned->space().is_score_space()) {
      const ScoreParams sp = owned->score_params(s);
      return MomentEntry{sp.mean, sp.sigma};
    }
    const std::uint64_t probe_seed =
        detail::lane_seed(seed, {detail::kProbeCalibration, MaskedTemplateHash{}(s)});
    return entry_from_distribution(rule, p_s_empirical(s, *owned, samples, probe_seed));
  };
  return policy.with_calibration(std::make_shared<CalibrationTable>(std::move(provider)));
}

namespace {

json tau_to_json(double tau) {
  if (std::isinf(tau)) return tau > 0 ? json("inf") : json("-inf");
  return json(tau);
}

double tau_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ParseError("invalid tau '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace

std::string calibration_to_json(const MatcherPolicy& policy, const TemplateSpace& space) {
  if (!policy.calibrated()) throw CalibrationError("policy " + policy.spec() + " is not calibrated");
  json entries = json::object();
  for (const auto& [probe, entry] : policy.calibration()->entries()) {
    entries[encode_template(probe, space)] =
        std::visit(Overloaded{
                       [](const TauEntry& e) { return json{{"tau", tau_to_json(e.tau)}}; },
                       [](const MomentEntry& e) { return json{{"m", e.mean}, {"sigma", e.sigma}}; },
                   },
                   entry);
  }
  json doc{{"version", kCalibrationFormatVersion},
           {"policy", policy.spec()},
           {"space", json{{"L", space.length}, {"masked", space.masked}}},
           {"entries", entries}};
  return doc.dump(2) + "\n";
}

MatcherPolicy calibration_from_json(std::string_view text, const TemplateSpace& space) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed calibration file: ") + e.what());
  }
  try {
    if (doc.at("version").get<int>() != kCalibrationFormatVersion) {
      throw ParseError("unsupported calibration format version");
    }
    const MatcherPolicy policy = MatcherPolicy::parse(doc.at("policy").get<std::string>());
    if (!policy.is_adaptive()) throw ParseError("calibration file names a non-adaptive policy");
    if (doc.at("space").at("L").get<std::size_t>() != space.length ||
        doc.at("space").at("masked").get<bool>() != space.masked) {
      throw ValidationError("calibration file was made for a different template space");
    }
    const bool general = std::holds_alternative<GeneralAdaptive>(policy.rule());
    auto table = std::make_shared<CalibrationTable>();
    for (const auto& [key, value] : doc.at("entries").items()) {
      const MaskedTemplate probe = decode_template(key, space);
      if (general) {
        table->insert(probe, TauEntry{tau_from_json(value.at("tau"))});
      } else {
        const double sigma = value.at("sigma").get<double>();
        if (!(sigma >= 0.0)) throw ValidationError("calibration sigma must be >= 0");
        table->insert(probe, MomentEntry{value.at("m").get<double>(), sigma});
      }
    }
    return policy.with_calibration(std::move(table));
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid calibration file: ") + e.what());
  }
}

void save_calibration(const MatcherPolicy& policy, const TemplateSpace& space,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << calibration_to_json(policy, space);
}

MatcherPolicy load_calibration(const std::filesystem::path& path, const TemplateSpace& space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open calibration file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return calibration_from_json(buf.str(), space);
}

}  // namespace wolfbench
