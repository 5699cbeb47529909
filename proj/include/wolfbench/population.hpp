#pragma once

// Synthetic user populations: each user u carries a reference template and a
// noise model describing the random variable X_u of its measured templates.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wolfbench/core.hpp"

namespace wolfbench {

/// Each unmasked bit flips independently with probability p.
struct IidBitFlip {
  double p = 0.0;
};

/// Arbitrary finite distribution; entries are sorted by template and unique.
struct ExplicitTable {
  std::vector<std::pair<MaskedTemplate, double>> entries;
};

/// Score-model user: the impostor distance seen by its probe is N(mean, sigma).
struct GaussianScore {
  double mean = 0.0;
  double sigma = 1.0;
};

using NoiseModel = std::variant<IidBitFlip, ExplicitTable, GaussianScore>;

std::string_view noise_kind(const NoiseModel& noise);

struct UserModel {
  std::string id;
  MaskedTemplate reference;
  NoiseModel noise;
};

struct ScoreParams {
  double mean;
  double sigma;
};

/// Probe-dependent distance law of a score-model space:
/// mean(s) = base_mean + sum_i mean_weights[i] * s_i,
/// sigma(s) = base_sigma * exp(sum_i log_sigma_weights[i] * s_i).
struct ScoreLandscape {
  double base_mean = 0.0;
  double base_sigma = 1.0;
  std::vector<double> mean_weights;
  std::vector<double> log_sigma_weights;

  ScoreParams at(const BitVector& probe) const;
  friend bool operator==(const ScoreLandscape&, const ScoreLandscape&) = default;
};

struct TemplateSpace {
  std::size_t length = 0;
  bool masked = false;
  std::optional<ScoreLandscape> score_model;

  bool is_score_space() const noexcept { return score_model.has_value(); }
  /// Number of canonical templates (2^L, or 3^L when masked), saturating.
  std::uint64_t template_count() const noexcept;
};

/// Largest template space that exact mode enumerates.
inline constexpr std::uint64_t kExactTemplateCap = std::uint64_t{1} << 20;

class Population {
 public:
  /// Validates every invariant; throws ValidationError on violation.
  Population(TemplateSpace space, DistanceKind distance, std::vector<UserModel> users);

  const TemplateSpace& space() const noexcept { return space_; }
  DistanceKind distance() const noexcept { return distance_; }
  const std::vector<UserModel>& users() const noexcept { return users_; }
  const UserModel& user(std::size_t i) const { return users_.at(i); }
  std::size_t size() const noexcept { return users_.size(); }
  std::optional<std::size_t> index_of(std::string_view id) const;

  /// Exact enumeration admissible: small space, no continuous-noise requirement.
  bool exact_admissible() const noexcept;
  /// Score parameters of a probe in a score-model space.
  ScoreParams score_params(const MaskedTemplate& probe) const;

  /// Checks that `t` belongs to this population's template space.
  void check_template(const MaskedTemplate& t) const;

 private:
  TemplateSpace space_;
  DistanceKind distance_;
  std::vector<UserModel> users_;
};

struct EvalMode {
  enum class Kind { exact, monte_carlo };
  Kind kind = Kind::exact;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  static EvalMode exact() { return {}; }
  static EvalMode monte_carlo(std::uint64_t samples, std::uint64_t seed);
  bool is_exact() const noexcept { return kind == Kind::exact; }
};

/// Throws ModeError unless exact evaluation of `pop` is possible.
void require_exact(const Population& pop);

struct PopulationConfig {
  enum class Family { iid_bit_flip, gaussian_score };

  std::size_t users = 2;
  std::size_t length = 8;
  Family family = Family::iid_bit_flip;
  DistanceKind distance = DistanceKind::hamming;

  // iid-bit-flip: p_u ~ U[p_min, p_max]
  double p_min = 0.1;
  double p_max = 0.1;

  // masked spaces: each reference bit is available with probability mask_keep
  bool masked = false;
  double mask_keep = 1.0;

  // the first correlated_bits reference bits come in blocks of correlated_block
  // equal bits
  std::size_t correlated_bits = 0;
  std::size_t correlated_block = 1;

  // gaussian-score landscape
  double score_mean = 0.5;
  double score_sigma = 0.05;
  double score_spread = 0.5;

  std::string id_prefix = "u";
};

/// Deterministic for a given (config, seed). Throws ConfigError on bad ranges.
Population generate_population(const PopulationConfig& config, std::uint64_t seed);

/// Probability of template `t` under X_u (0 outside the support).
double probability(const UserModel& u, const MaskedTemplate& t);

/// Full support of X_u with probabilities, sorted by template. Throws ModeError
/// for score-model users or when the support exceeds the exact cap.
std::vector<std::pair<MaskedTemplate, double>> exact_distribution(const UserModel& u,
                                                                  const TemplateSpace& space);

/// One draw from X_u. Score-model users always present their reference.
MaskedTemplate sample_probe(const UserModel& u, std::mt19937_64& rng);

/// Hex codec for templates of a space ("bits" or "bits/mask").
std::string encode_template(const MaskedTemplate& t, const TemplateSpace& space);
MaskedTemplate decode_template(std::string_view text, const TemplateSpace& space);

inline constexpr int kPopulationFormatVersion = 1;

std::string population_to_json(const Population& pop);
Population population_from_json(std::string_view text);
void save_population(const Population& pop, const std::filesystem::path& path);
Population load_population(const std::filesystem::path& path);

bool operator==(const Population& a, const Population& b);

/// Canonical templates of an exact space, split into blocks whose order is
/// fixed: masked spaces by ascending mask then ascending bits, unmasked by
/// ascending value.
class TemplateEnumerator {
 public:
  explicit TemplateEnumerator(const TemplateSpace& space);

  std::size_t block_count() const noexcept { return block_count_; }
  std::uint64_t size() const noexcept { return size_; }

  template <typename F>
  void for_each_in_block(std::size_t block, F&& f) const {
    const std::size_t L = space_length_;
    if (!masked_) {
      const std::uint64_t begin = static_cast<std::uint64_t>(block) * kBlock;
      const std::uint64_t end = std::min<std::uint64_t>(begin + kBlock, size_);
      const BitVector full = BitVector::ones(L);
      for (std::uint64_t v = begin; v < end; ++v) f(MaskedTemplate(BitVector::from_value(v, L), full));
      return;
    }
    const std::uint64_t mask = block;
    const BitVector mask_bits = BitVector::from_value(mask, L);
    std::uint64_t sub = 0;
    do {
      f(MaskedTemplate(BitVector::from_value(sub, L), mask_bits));
      sub = (sub - mask) & mask;
    } while (sub != 0);
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t b = 0; b < block_count_; ++b) for_each_in_block(b, f);
  }

 private:
  static constexpr std::uint64_t kBlock = 4096;
  std::size_t space_length_;
  bool masked_;
  std::uint64_t size_;
  std::size_t block_count_;
};

}  // namespace wolfbench
