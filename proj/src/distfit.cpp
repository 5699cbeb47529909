#include "wolfbench/distfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "wolfbench/detail/accumulate.hpp"
#include "wolfbench/detail/lanes.hpp"
#include "wolfbench/detail/laws.hpp"
#include "wolfbench/errors.hpp"

namespace wolfbench {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

DistanceDistribution::DistanceDistribution(std::vector<double> support, std::vector<double> mass)
    : support_(std::move(support)), mass_(std::move(mass)) {
  if (support_.size() != mass_.size() || support_.empty()) {
    throw ValidationError("distance distribution needs matching, non-empty support and mass");
  }
  detail::CompensatedSum total;
  cumulative_below_.resize(support_.size());
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (i > 0 && !(support_[i] > support_[i - 1])) {
      throw ValidationError("distance support must be strictly increasing");
    }
    if (!(mass_[i] >= 0.0)) throw ValidationError("negative distance mass");
    cumulative_below_[i] = total.value();
    total += mass_[i];
  }
  if (std::fabs(total.value() - 1.0) > kMassTolerance) {
    throw ValidationError("distance masses sum to " + std::to_string(total.value()));
  }
}

DistanceDistribution DistanceDistribution::from_atoms(std::vector<std::pair<double, double>> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> support;
  std::vector<double> mass;
  detail::CompensatedSum run;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    run += atoms[i].second;
    if (i + 1 == atoms.size() || atoms[i + 1].first != atoms[i].first) {
      // zero-mass outcomes are not part of the support
      if (run.value() > 0.0) {
        support.push_back(atoms[i].first);
        mass.push_back(run.value());
      }
      run = {};
    }
  }
  return DistanceDistribution(std::move(support), std::move(mass));
}

double DistanceDistribution::below(double x) const noexcept {
  const auto it = std::lower_bound(support_.begin(), support_.end(), x);
  if (it == support_.end()) {
    return cumulative_below_.empty() ? 0.0 : cumulative_below_.back() + mass_.back();
  }
  return cumulative_below_[static_cast<std::size_t>(it - support_.begin())];
}

std::size_t DistanceDistribution::positive_support_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(mass_.begin(), mass_.end(), [](double m) { return m > 0.0; }));
}

bool DistanceDistribution::has_infinite_mass() const noexcept {
  return !support_.empty() && std::isinf(support_.back()) && mass_.back() > 0.0;
}

DistanceDistribution p_s_exact(const MaskedTemplate& probe, const Population& pop) {
  if (pop.space().is_score_space()) {
    throw ModeError("score-model spaces have continuous distances; use p_s_empirical");
  }
  pop.check_template(probe);
  return detail::p_s_from_laws(probe, detail::ComparisonLaws(pop));
}

DistanceDistribution detail::p_s_from_laws(const MaskedTemplate& probe, const ComparisonLaws& laws) {
  const Population& pop = laws.population();
  const double weight = 1.0 / static_cast<double>(pop.size());
  std::vector<std::pair<double, double>> atoms;
  std::vector<detail::Atom> user_atoms;
  for (std::size_t v = 0; v < pop.size(); ++v) {
    laws.atoms(probe, v, user_atoms);
    for (const auto& a : user_atoms) {
      const double d = a.comparable == 0
                           ? kInf
                           : distance_value(pop.distance(), {a.differing, a.comparable});
      atoms.emplace_back(d, a.prob * weight);
    }
  }
  return DistanceDistribution::from_atoms(std::move(atoms));
}

DistanceDistribution p_s_empirical(const MaskedTemplate& probe, const Population& pop,
                                   std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw ConfigError("p_s_empirical needs at least one sample");
  pop.check_template(probe);
  auto rng = detail::lane_rng(seed, {detail::kEmpiricalPs});
  std::uniform_int_distribution<std::size_t> pick_user(0, pop.size() - 1);
  std::map<double, std::uint64_t> counts;
  if (pop.space().is_score_space()) {
    const ScoreParams sp = pop.score_params(probe);
    std::normal_distribution<double> score(sp.mean, sp.sigma);
    for (std::uint64_t i = 0; i < samples; ++i) ++counts[score(rng)];
  } else {
    for (std::uint64_t i = 0; i < samples; ++i) {
      const std::size_t v = pick_user(rng);
      const MaskedTemplate t = sample_probe(pop.user(v), rng);
      const Comparison c = compare(probe, t);
      ++counts[c.comparable == 0 ? kInf : distance_value(pop.distance(), c)];
    }
  }
  std::vector<double> support;
  std::vector<double> mass;
  support.reserve(counts.size());
  mass.reserve(counts.size());
  const double n = static_cast<double>(samples);
  for (const auto& [value, count] : counts) {
    support.push_back(value);
    mass.push_back(static_cast<double>(count) / n);
  }
  return DistanceDistribution(std::move(support), std::move(mass));
}

GaussianFit fit_gaussian(const DistanceDistribution& dist) {
  if (dist.has_infinite_mass()) {
    throw DegenerateFitError("distribution has mass at infinity");
  }
  if (dist.positive_support_count() < 2) {
    throw DegenerateFitError("distribution has fewer than two support points");
  }
  const auto& support = dist.support();
  const auto& mass = dist.mass();
  detail::CompensatedSum mean_sum;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (mass[i] > 0.0) mean_sum += mass[i] * support[i];
  }
  const double mean = mean_sum.value();
  detail::CompensatedSum var_sum;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (mass[i] > 0.0) var_sum += mass[i] * (support[i] - mean) * (support[i] - mean);
  }
  const double sigma = std::sqrt(var_sum.value());
  if (!(sigma > 0.0)) throw DegenerateFitError("zero-variance distribution");
  return {mean, sigma, entropy_gaussian(sigma)};
}

double entropy_gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("entropy needs a positive standard deviation");
  }
  // log2(sqrt(2 pi e)) + log2(sigma)
  static const double kHalfLog2TwoPiE =
      0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e);
  return kHalfLog2TwoPiE + std::log2(sigma);
}

double std_normal_cdf(double alpha) {
  return 0.5 * std::erfc(-alpha / std::numbers::sqrt2);
}

}  // namespace wolfbench
