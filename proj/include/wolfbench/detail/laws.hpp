#pragma once

#include <cstdint>
#include <vector>

#include "wolfbench/core.hpp"
#include "wolfbench/population.hpp"

namespace wolfbench::detail {

/// One outcome of compare(probe, X_v): `prob` mass at (differing, comparable).
struct Atom {
  std::uint32_t differing;
  std::uint32_t comparable;
  double prob;
};

/// Exact laws of compare(s, X_v) for bit-template populations. Bit-flip users
/// have closed forms: over the k jointly unmasked positions, with a of them
/// disagreeing with the reference, HD ~ Bin(a, 1-p) + Bin(k-a, p).
class ComparisonLaws {
 public:
  explicit ComparisonLaws(const Population& pop);

  /// Replaces `out` with the atoms of compare(probe, X_v).
  void atoms(const MaskedTemplate& probe, std::size_t v, std::vector<Atom>& out) const;

  const Population& population() const noexcept { return *pop_; }

 private:
  struct FlipTable {
    // laws[k][a][h] = P(HD = h) given k comparable and a disagreeing positions
    std::vector<std::vector<std::vector<double>>> laws;
  };

  const Population* pop_;
  std::vector<FlipTable> flip_tables_;
};

std::vector<double> binomial_pmf(std::size_t n, double q);

}  // namespace wolfbench::detail

namespace wolfbench {
class DistanceDistribution;
}

namespace wolfbench::detail {

/// P_s built from precomputed laws (shared by every probe of a pass).
DistanceDistribution p_s_from_laws(const MaskedTemplate& probe, const ComparisonLaws& laws);

}  // namespace wolfbench::detail
