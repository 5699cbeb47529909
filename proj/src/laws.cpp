#include "wolfbench/detail/laws.hpp"

#include <cmath>
#include <variant>

#include "wolfbench/errors.hpp"

namespace wolfbench::detail {

std::vector<double> binomial_pmf(std::size_t n, double q) {
  std::vector<double> pmf(n + 1);
  double coeff = 1.0;
  for (std::size_t j = 0; j <= n; ++j) {
    pmf[j] = coeff * std::pow(q, static_cast<double>(j)) *
             std::pow(1.0 - q, static_cast<double>(n - j));
    coeff = coeff * static_cast<double>(n - j) / static_cast<double>(j + 1);
  }
  return pmf;
}

ComparisonLaws::ComparisonLaws(const Population& pop) : pop_(&pop) {
  if (pop.space().is_score_space()) {
    throw ModeError("comparison laws need a bit-template population");
  }
  require_exact(pop);
  flip_tables_.resize(pop.size());
  for (std::size_t v = 0; v < pop.size(); ++v) {
    const auto* flip = std::get_if<IidBitFlip>(&pop.user(v).noise);
    if (flip == nullptr) continue;
    const std::size_t K = pop.user(v).reference.mask().count();
    auto& laws = flip_tables_[v].laws;
    laws.resize(K + 1);
    for (std::size_t k = 0; k <= K; ++k) {
      laws[k].resize(k + 1);
      for (std::size_t a = 0; a <= k; ++a) {
        const auto disagree = binomial_pmf(a, 1.0 - flip->p);
        const auto agree = binomial_pmf(k - a, flip->p);
        std::vector<double> law(k + 1, 0.0);
        for (std::size_t i = 0; i < disagree.size(); ++i) {
          for (std::size_t j = 0; j < agree.size(); ++j) law[i + j] += disagree[i] * agree[j];
        }
        laws[k][a] = std::move(law);
      }
    }
  }
}

void ComparisonLaws::atoms(const MaskedTemplate& probe, std::size_t v, std::vector<Atom>& out) const {
  out.clear();
  const UserModel& user = pop_->user(v);
  if (const auto* table = std::get_if<ExplicitTable>(&user.noise)) {
    for (const auto& [t, prob] : table->entries) {
      if (prob == 0.0) continue;
      const Comparison c = compare(probe, t);
      out.push_back({static_cast<std::uint32_t>(c.differing), static_cast<std::uint32_t>(c.comparable), prob});
    }
    return;
  }
  const Comparison c = compare(probe, user.reference);
  const auto& law = flip_tables_[v].laws.at(c.comparable).at(c.differing);
  for (std::size_t h = 0; h < law.size(); ++h) {
    if (law[h] == 0.0) continue;
    out.push_back({static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(c.comparable), law[h]});
  }
}

}  // namespace wolfbench::detail
