#pragma once

// Impostor-distance distributions P_s(x): the probability that a template of
// a uniformly chosen enrolled user lies at distance strictly less than x from
// probe s.

#include <cstdint>
#include <utility>
#include <vector>

#include "wolfbench/core.hpp"
#include "wolfbench/population.hpp"

namespace wolfbench {

/// Left-continuous step function over achievable distances. The support may
/// end with +infinity, which holds the mass of comparisons with no
/// comparable bits; that mass is never below any finite threshold.
class DistanceDistribution {
 public:
  DistanceDistribution() = default;
  /// `support` strictly increasing, masses >= 0 summing to 1 within 1e-12.
  DistanceDistribution(std::vector<double> support, std::vector<double> mass);

  /// Builds from unsorted (value, mass) atoms, merging equal values and
  /// dropping values whose total mass is zero.
  static DistanceDistribution from_atoms(std::vector<std::pair<double, double>> atoms);

  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& mass() const noexcept { return mass_; }
  /// cumulative_below()[i] = P(D < support()[i]); the first entry is 0.
  const std::vector<double>& cumulative_below() const noexcept { return cumulative_below_; }

  /// P(D < x).
  double below(double x) const noexcept;

  std::size_t positive_support_count() const noexcept;
  bool has_infinite_mass() const noexcept;

 private:
  std::vector<double> support_;
  std::vector<double> mass_;
  std::vector<double> cumulative_below_;
};

struct GaussianFit {
  double mean;
  double sigma;
  double entropy_bits;
};

/// Exact P_s for a bit-template population. Throws ModeError when the
/// population cannot be enumerated.
DistanceDistribution p_s_exact(const MaskedTemplate& probe, const Population& pop);

/// Estimate of P_s from `samples` draws (uniform user, then a template of
/// that user, or a Gaussian score for score-model spaces).
DistanceDistribution p_s_empirical(const MaskedTemplate& probe, const Population& pop,
                                   std::uint64_t samples, std::uint64_t seed);

/// Method-of-moments fit. Throws DegenerateFitError for fewer than two
/// positive support points, infinite support or zero variance.
GaussianFit fit_gaussian(const DistanceDistribution& dist);

/// Differential entropy in bits of a normal law with standard deviation sigma.
double entropy_gaussian(double sigma);

/// Standard normal CDF, evaluated through erfc so the lower tail keeps full
/// relative precision. Absolute error stays below 1e-12 everywhere.
double std_normal_cdf(double alpha);

}  // namespace wolfbench
