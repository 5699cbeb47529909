#pragma once

// Threshold policies and the accept/reject rule: a probe s is accepted
// against template t iff d(s, t) < threshold, strictly.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "wolfbench/core.hpp"
#include "wolfbench/distfit.hpp"
#include "wolfbench/population.hpp"

namespace wolfbench {

struct FixedThreshold {
  double tau;
};
/// tau_s = max{x >= 0 : P_s(x) < delta}.
struct GeneralAdaptive {
  double delta;
};
/// tau_s = alpha * sigma_s + m_s.
struct GaussianAdaptive {
  double alpha;
};
/// Per-comparison threshold alpha' / sqrt(k) + 1/2 on fractional Hamming distance.
struct DaugmanRule {
  double alpha_prime;
};

using ThresholdRule = std::variant<FixedThreshold, GeneralAdaptive, GaussianAdaptive, DaugmanRule>;

struct TauEntry {
  double tau;
};
/// sigma == 0 marks a probe whose distance law could not be fitted; its
/// threshold collapses to the mean, which accepts nothing.
struct MomentEntry {
  double mean;
  double sigma;
};
using CalibrationEntry = std::variant<TauEntry, MomentEntry>;

/// Per-probe calibration. Entries are either precomputed (exact mode) or
/// produced on demand by a provider and cached. The provider is
/// deterministic, so concurrent first lookups of one probe agree.
class CalibrationTable {
 public:
  using Provider = std::function<CalibrationEntry(const MaskedTemplate&)>;

  CalibrationTable() = default;
  explicit CalibrationTable(Provider provider) : provider_(std::move(provider)) {}

  void insert(const MaskedTemplate& probe, CalibrationEntry entry);
  std::optional<CalibrationEntry> find(const MaskedTemplate& probe) const;
  bool on_demand() const noexcept { return static_cast<bool>(provider_); }
  std::size_t size() const;
  /// Snapshot sorted by template.
  std::vector<std::pair<MaskedTemplate, CalibrationEntry>> entries() const;

 private:
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<MaskedTemplate, CalibrationEntry, MaskedTemplateHash> entries_;
  Provider provider_;
};

class MatcherPolicy {
 public:
  explicit MatcherPolicy(ThresholdRule rule);

  static MatcherPolicy fixed(double tau) { return MatcherPolicy(FixedThreshold{tau}); }
  static MatcherPolicy general(double delta) { return MatcherPolicy(GeneralAdaptive{delta}); }
  static MatcherPolicy gaussian(double alpha) { return MatcherPolicy(GaussianAdaptive{alpha}); }
  static MatcherPolicy daugman(double alpha_prime) { return MatcherPolicy(DaugmanRule{alpha_prime}); }

  /// Parses "fixed:0.32", "general:0.01", "gaussian:-5.4" or "daugman:-0.35".
  static MatcherPolicy parse(std::string_view spec);
  std::string spec() const;

  const ThresholdRule& rule() const noexcept { return rule_; }
  bool is_adaptive() const noexcept;
  bool calibrated() const noexcept { return calibration_ != nullptr; }
  const std::shared_ptr<CalibrationTable>& calibration() const noexcept { return calibration_; }
  MatcherPolicy with_calibration(std::shared_ptr<CalibrationTable> table) const;

  /// Threshold applied to every comparison of `probe`. Daugman thresholds
  /// depend on k and go through threshold_for().
  double probe_threshold(const MaskedTemplate& probe) const;
  /// Threshold for comparing `probe` when k positions are comparable.
  double threshold_for(const MaskedTemplate& probe, std::size_t k) const;

 private:
  ThresholdRule rule_;
  std::shared_ptr<CalibrationTable> calibration_;
};

enum class Decision { accept, reject };

struct MatchOutcome {
  Decision decision;
  std::optional<std::string> diagnostic;
  bool accepted() const noexcept { return decision == Decision::accept; }
};

/// Decides probe `s` against stored template `t`. An empty joint mask or a
/// probe the policy cannot threshold is a reject with a diagnostic, except
/// that a missing calibration throws CalibrationError.
MatchOutcome decide(const MatcherPolicy& policy, const MaskedTemplate& s, const MaskedTemplate& t,
                    DistanceKind distance);

/// Guard band for the general-adaptive rule: P(D < v) must stay below
/// delta - guard, so rounding in the cumulative sums cannot admit a value
/// whose exact mass below equals delta.
inline constexpr double kGeneralBoundaryGuard = 1e-12;

/// Largest support value v with P(D < v) < delta - kGeneralBoundaryGuard;
/// the smallest support value (accept nothing) when there is none.
double general_adaptive_threshold(const DistanceDistribution& dist, double delta);
double gaussian_adaptive_threshold(const GaussianFit& fit, double alpha);
/// Same threshold written through the entropy: alpha * 2^H / sqrt(2 pi e) + m.
double gaussian_adaptive_threshold_from_entropy(double mean, double entropy_bits, double alpha);
double daugman_threshold(std::size_t k, double alpha_prime);

/// Threshold a calibration entry yields under `policy`.
double entry_threshold(const MatcherPolicy& policy, const CalibrationEntry& entry);

struct CalibrationOptions {
  std::uint64_t samples = 2000;  // per-probe draws in Monte Carlo mode
  unsigned jobs = 1;
};

/// Exact mode tabulates every template of the space; Monte Carlo mode
/// returns a policy whose thresholds are estimated on first use.
MatcherPolicy calibrate(const MatcherPolicy& policy, const Population& pop, const EvalMode& mode,
                        const CalibrationOptions& options = {});

/// Checks that the policy can run on the population. Throws ConfigError.
void check_compatible(const Population& pop, const MatcherPolicy& policy);

inline constexpr int kCalibrationFormatVersion = 1;

std::string calibration_to_json(const MatcherPolicy& policy, const TemplateSpace& space);
/// Restores a calibrated policy; the policy spec is read from the file.
MatcherPolicy calibration_from_json(std::string_view text, const TemplateSpace& space);
void save_calibration(const MatcherPolicy& policy, const TemplateSpace& space,
                      const std::filesystem::path& path);
MatcherPolicy load_calibration(const std::filesystem::path& path, const TemplateSpace& space);

}  // namespace wolfbench
