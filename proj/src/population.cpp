#include "wolfbench/population.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wolfbench/detail/accumulate.hpp"
#include "wolfbench/detail/lanes.hpp"
#include "wolfbench/errors.hpp"

namespace wolfbench {

using nlohmann::json;

namespace {

constexpr double kTableSumTolerance = 1e-12;
constexpr double kScoreParamTolerance = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool close_relative(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

double flip_probability(double p, std::size_t flips, std::size_t positions) {
  return std::pow(p, static_cast<double>(flips)) *
         std::pow(1.0 - p, static_cast<double>(positions - flips));
}

}  // namespace

std::string_view noise_kind(const NoiseModel& noise) {
  return std::visit(Overloaded{
                        [](const IidBitFlip&) { return std::string_view("iid-bit-flip"); },
                        [](const ExplicitTable&) { return std::string_view("explicit-table"); },
                        [](const GaussianScore&) { return std::string_view("gaussian-score"); },
                    },
                    noise);
}

ScoreParams ScoreLandscape::at(const BitVector& probe) const {
  if (probe.size() != mean_weights.size() || probe.size() != log_sigma_weights.size()) {
    throw DimensionError("probe length does not match score landscape");
  }
  double mean = base_mean;
  double log_sigma = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    if (probe.test(i)) {
      mean += mean_weights[i];
      log_sigma += log_sigma_weights[i];
    }
  }
  return {mean, base_sigma * std::exp(log_sigma)};
}

std::uint64_t TemplateSpace::template_count() const noexcept {
  const std::uint64_t base = masked ? 3 : 2;
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < length; ++i) {
    if (count > (std::uint64_t{1} << 62) / base) return std::uint64_t{1} << 62;
    count *= base;
  }
  return count;
}

Population::Population(TemplateSpace space, DistanceKind distance, std::vector<UserModel> users)
    : space_(std::move(space)), distance_(distance), users_(std::move(users)) {
  const std::size_t L = space_.length;
  if (L < kMinTemplateBits || L > kMaxTemplateBits) {
    throw ValidationError("template length " + std::to_string(L) + " outside [2, 4096]");
  }
  if (users_.size() < 2) throw ValidationError("population needs at least 2 users");
  if (space_.is_score_space()) {
    if (space_.masked) throw ValidationError("score-model spaces are unmasked");
    if (distance_ != DistanceKind::absolute_score_difference) {
      throw ValidationError("score-model spaces use the absolute-score-difference distance");
    }
    const auto& land = *space_.score_model;
    if (land.mean_weights.size() != L || land.log_sigma_weights.size() != L) {
      throw ValidationError("score landscape weights must have length L");
    }
    if (!(land.base_sigma > 0.0) || !std::isfinite(land.base_sigma)) {
      throw ValidationError("score landscape base sigma must be positive");
    }
  } else if (distance_ == DistanceKind::absolute_score_difference) {
    throw ValidationError("bit-template spaces use hamming or fractional-hamming distance");
  }

  std::set<std::string> ids;
  for (auto& u : users_) {
    if (!ids.insert(u.id).second) throw ValidationError("duplicate user id '" + u.id + "'");
    check_template(u.reference);
    u.reference = u.reference.canonical();
    std::visit(
        Overloaded{
            [&](const IidBitFlip& n) {
              if (space_.is_score_space()) {
                throw ValidationError("user '" + u.id + "': bit noise in a score-model space");
              }
              if (!(n.p >= 0.0 && n.p <= 0.5)) {
                throw ValidationError("user '" + u.id + "': flip probability must lie in [0, 0.5]");
              }
            },
            [&](ExplicitTable& n) {
              if (space_.is_score_space()) {
                throw ValidationError("user '" + u.id + "': bit noise in a score-model space");
              }
              if (n.entries.empty()) throw ValidationError("user '" + u.id + "': empty table");
              detail::CompensatedSum total;
              for (auto& [t, prob] : n.entries) {
                check_template(t);
                t = t.canonical();
                if (!(prob >= 0.0) || !std::isfinite(prob)) {
                  throw ValidationError("user '" + u.id + "': negative table probability");
                }
                total += prob;
              }
              if (std::fabs(total.value() - 1.0) > kTableSumTolerance) {
                throw ValidationError("user '" + u.id + "': table probabilities sum to " +
                                      std::to_string(total.value()));
              }
              std::sort(n.entries.begin(), n.entries.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; });
              for (std::size_t i = 1; i < n.entries.size(); ++i) {
                if (n.entries[i].first == n.entries[i - 1].first) {
                  throw ValidationError("user '" + u.id + "': duplicate table template");
                }
              }
            },
            [&](const GaussianScore& n) {
              if (!space_.is_score_space()) {
                throw ValidationError("user '" + u.id + "': gaussian-score noise needs a score-model space");
              }
              if (!(n.sigma > 0.0) || !std::isfinite(n.sigma) || !std::isfinite(n.mean)) {
                throw ValidationError("user '" + u.id + "': sigma must be positive");
              }
              const ScoreParams expected = space_.score_model->at(u.reference.bits());
              if (!close_relative(expected.mean, n.mean, kScoreParamTolerance) ||
                  !close_relative(expected.sigma, n.sigma, kScoreParamTolerance)) {
                throw ValidationError("user '" + u.id +
                                      "': score parameters disagree with the landscape");
              }
            },
        },
        u.noise);
  }
}

std::optional<std::size_t> Population::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < users_.size(); ++i) {
    if (users_[i].id == id) return i;
  }
  return std::nullopt;
}

bool Population::exact_admissible() const noexcept {
  return space_.template_count() <= kExactTemplateCap;
}

ScoreParams Population::score_params(const MaskedTemplate& probe) const {
  if (!space_.is_score_space()) throw ModeError("population has no score model");
  check_template(probe);
  return space_.score_model->at(probe.bits());
}

void Population::check_template(const MaskedTemplate& t) const {
  if (t.size() != space_.length) {
    throw DimensionError("template length " + std::to_string(t.size()) +
                         " does not match space length " + std::to_string(space_.length));
  }
  if (!space_.masked && t.mask().count() != space_.length) {
    throw ValidationError("masked template in an unmasked space");
  }
}

EvalMode EvalMode::monte_carlo(std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw ConfigError("Monte Carlo mode needs at least one sample");
  return {Kind::monte_carlo, samples, seed};
}

void require_exact(const Population& pop) {
  if (!pop.exact_admissible()) {
    throw ModeError("template space too large for exact mode (" +
                    std::to_string(pop.space().template_count()) + " templates, cap " +
                    std::to_string(kExactTemplateCap) + ")");
  }
}

Population generate_population(const PopulationConfig& c, std::uint64_t seed) {
  if (c.users < 2) throw ConfigError("n must be at least 2");
  if (c.length < kMinTemplateBits || c.length > kMaxTemplateBits) {
    throw ConfigError("length must lie in [2, 4096]");
  }
  if (c.correlated_bits > c.length) throw ConfigError("correlated bits exceed template length");
  if (c.correlated_block == 0) throw ConfigError("correlated block size must be positive");
  if (c.masked && !(c.mask_keep > 0.0 && c.mask_keep <= 1.0)) {
    throw ConfigError("mask keep probability must lie in (0, 1]");
  }

  const std::size_t L = c.length;
  TemplateSpace space{L, c.masked, std::nullopt};
  DistanceKind distance = c.distance;

  if (c.family == PopulationConfig::Family::iid_bit_flip) {
    if (!(c.p_min >= 0.0 && c.p_min <= c.p_max && c.p_max <= 0.5)) {
      throw ConfigError("flip probability range must satisfy 0 <= p_min <= p_max <= 0.5");
    }
    if (distance == DistanceKind::absolute_score_difference) {
      throw ConfigError("bit populations use hamming or fractional-hamming distance");
    }
  } else {
    if (!(c.score_sigma > 0.0)) throw ConfigError("score sigma must be positive");
    if (!(c.score_spread >= 0.0)) throw ConfigError("score spread must be nonnegative");
    if (c.masked) throw ConfigError("score-model populations are unmasked");
    distance = DistanceKind::absolute_score_difference;
    auto rng = detail::lane_rng(seed, {detail::kPopulationLandscape});
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    ScoreLandscape land;
    land.base_mean = c.score_mean;
    land.base_sigma = c.score_sigma;
    const double scale = c.score_spread / std::sqrt(static_cast<double>(L));
    land.mean_weights.resize(L);
    land.log_sigma_weights.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
      land.mean_weights[i] = unit(rng) * scale * c.score_sigma;
      land.log_sigma_weights[i] = unit(rng) * scale;
    }
    space.score_model = std::move(land);
  }

  std::vector<UserModel> users;
  users.reserve(c.users);
  for (std::size_t i = 0; i < c.users; ++i) {
    auto ref_rng = detail::lane_rng(seed, {detail::kPopulationReferences, i});
    std::bernoulli_distribution coin(0.5);
    BitVector bits(L);
    std::size_t pos = 0;
    while (pos < c.correlated_bits) {
      const bool b = coin(ref_rng);
      for (std::size_t j = 0; j < c.correlated_block && pos < c.correlated_bits; ++j) {
        bits.set(pos++, b);
      }
    }
    for (; pos < L; ++pos) bits.set(pos, coin(ref_rng));

    BitVector mask = BitVector::ones(L);
    if (c.masked && c.mask_keep < 1.0) {
      std::bernoulli_distribution keep(c.mask_keep);
      for (std::size_t j = 0; j < L; ++j) mask.set(j, keep(ref_rng));
      if (mask.none()) {
        std::uniform_int_distribution<std::size_t> any(0, L - 1);
        mask.set(any(ref_rng));
      }
    }

    MaskedTemplate reference(bits, mask);
    NoiseModel noise;
    if (c.family == PopulationConfig::Family::iid_bit_flip) {
      auto noise_rng = detail::lane_rng(seed, {detail::kPopulationNoise, i});
      std::uniform_real_distribution<double> pick(c.p_min, c.p_max);
      const double p = c.p_min == c.p_max ? c.p_min : std::min(pick(noise_rng), c.p_max);
      noise = IidBitFlip{p};
    } else {
      const ScoreParams sp = space.score_model->at(bits);
      noise = GaussianScore{sp.mean, sp.sigma};
    }
    users.push_back(UserModel{c.id_prefix + std::to_string(i), std::move(reference), std::move(noise)});
  }
  return Population(std::move(space), distance, std::move(users));
}

double probability(const UserModel& u, const MaskedTemplate& t) {
  return std::visit(
      Overloaded{
          [&](const IidBitFlip& n) -> double {
            if (t.mask() != u.reference.mask() || !t.is_canonical()) return 0.0;
            const std::size_t positions = t.mask().count();
            const std::size_t h = masked_difference_count(t.bits(), u.reference.bits(), t.mask());
            return flip_probability(n.p, h, positions);
          },
          [&](const ExplicitTable& n) -> double {
            auto it = std::lower_bound(n.entries.begin(), n.entries.end(), t,
                                       [](const auto& e, const MaskedTemplate& x) { return e.first < x; });
            return (it != n.entries.end() && it->first == t) ? it->second : 0.0;
          },
          [&](const GaussianScore&) -> double { return t == u.reference ? 1.0 : 0.0; },
      },
      u.noise);
}

std::vector<std::pair<MaskedTemplate, double>> exact_distribution(const UserModel& u,
                                                                  const TemplateSpace& space) {
  return std::visit(
      Overloaded{
          [&](const IidBitFlip& n) {
            const BitVector& mask = u.reference.mask();
            std::vector<std::size_t> free_positions;
            for (std::size_t i = 0; i < mask.size(); ++i) {
              if (mask.test(i)) free_positions.push_back(i);
            }
            if (free_positions.size() > 20) {
              throw ModeError("support of user '" + u.id + "' too large to enumerate");
            }
            std::vector<std::pair<MaskedTemplate, double>> out;
            if (n.p == 0.0) {
              out.emplace_back(u.reference, 1.0);
              return out;
            }
            const std::size_t k = free_positions.size();
            out.reserve(std::size_t{1} << k);
            for (std::uint64_t flips = 0; flips < (std::uint64_t{1} << k); ++flips) {
              BitVector bits = u.reference.bits();
              for (std::size_t j = 0; j < k; ++j) {
                if ((flips >> j) & 1U) bits.flip(free_positions[j]);
              }
              const auto h = static_cast<std::size_t>(std::popcount(flips));
              out.emplace_back(MaskedTemplate(std::move(bits), mask), flip_probability(n.p, h, k));
            }
            std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            return out;
          },
          [&](const ExplicitTable& n) { return n.entries; },
          [&](const GaussianScore&) -> std::vector<std::pair<MaskedTemplate, double>> {
            (void)space;
            throw ModeError("gaussian-score users have no template distribution to enumerate");
          },
      },
      u.noise);
}

MaskedTemplate sample_probe(const UserModel& u, std::mt19937_64& rng) {
  return std::visit(
      Overloaded{
          [&](const IidBitFlip& n) {
            if (n.p == 0.0) return u.reference;
            std::bernoulli_distribution flip(n.p);
            BitVector bits = u.reference.bits();
            const BitVector& mask = u.reference.mask();
            for (std::size_t i = 0; i < bits.size(); ++i) {
              if (mask.test(i) && flip(rng)) bits.flip(i);
            }
            return MaskedTemplate(std::move(bits), mask);
          },
          [&](const ExplicitTable& n) {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double r = unit(rng);
            double acc = 0.0;
            for (const auto& [t, prob] : n.entries) {
              acc += prob;
              if (r < acc) return t;
            }
            // rounding left r above the final partial sum
            for (auto it = n.entries.rbegin(); it != n.entries.rend(); ++it) {
              if (it->second > 0.0) return it->first;
            }
            return n.entries.back().first;
          },
          [&](const GaussianScore&) { return u.reference; },
      },
      u.noise);
}

std::string encode_template(const MaskedTemplate& t, const TemplateSpace& space) {
  if (space.masked) return t.bits().to_hex() + "/" + t.mask().to_hex();
  return t.bits().to_hex();
}

MaskedTemplate decode_template(std::string_view text, const TemplateSpace& space) {
  const std::size_t L = space.length;
  const auto slash = text.find('/');
  if (space.masked) {
    if (slash == std::string_view::npos) {
      throw ParseError("masked template '" + std::string(text) + "' needs a bits/mask form");
    }
    return MaskedTemplate(BitVector::from_hex(text.substr(0, slash), L),
                          BitVector::from_hex(text.substr(slash + 1), L));
  }
  if (slash != std::string_view::npos) {
    throw ParseError("unmasked space does not accept mask in '" + std::string(text) + "'");
  }
  return MaskedTemplate(BitVector::from_hex(text, L));
}

namespace {

json noise_to_json(const NoiseModel& noise, const TemplateSpace& space) {
  json params = std::visit(
      Overloaded{
          [](const IidBitFlip& n) { return json{{"p", n.p}}; },
          [&](const ExplicitTable& n) {
            json table = json::object();
            for (const auto& [t, prob] : n.entries) table[encode_template(t, space)] = prob;
            return json{{"table", table}};
          },
          [](const GaussianScore& n) { return json{{"m", n.mean}, {"sigma", n.sigma}}; },
      },
      noise);
  return json{{"kind", std::string(noise_kind(noise))}, {"params", params}};
}

NoiseModel noise_from_json(const json& j, const TemplateSpace& space) {
  const std::string kind = j.at("kind").get<std::string>();
  const json& params = j.at("params");
  if (kind == "iid-bit-flip") return IidBitFlip{params.at("p").get<double>()};
  if (kind == "gaussian-score") {
    return GaussianScore{params.at("m").get<double>(), params.at("sigma").get<double>()};
  }
  if (kind == "explicit-table") {
    ExplicitTable table;
    for (const auto& [key, value] : params.at("table").items()) {
      table.entries.emplace_back(decode_template(key, space), value.get<double>());
    }
    return table;
  }
  throw ParseError("unknown noise kind '" + kind + "'");
}

}  // namespace

std::string population_to_json(const Population& pop) {
  const auto& space = pop.space();
  json jspace{{"L", space.length}, {"masked", space.masked}};
  if (space.score_model) {
    const auto& land = *space.score_model;
    jspace["score_model"] = json{{"base_mean", land.base_mean},
                                 {"base_sigma", land.base_sigma},
                                 {"mean_weights", land.mean_weights},
                                 {"log_sigma_weights", land.log_sigma_weights}};
  }
  json users = json::array();
  for (const auto& u : pop.users()) {
    users.push_back(json{{"id", u.id},
                         {"reference", encode_template(u.reference, space)},
                         {"noise", noise_to_json(u.noise, space)}});
  }
  json doc{{"version", kPopulationFormatVersion},
           {"space", jspace},
           {"distance", std::string(to_string(pop.distance()))},
           {"users", users}};
  return doc.dump(2) + "\n";
}

Population population_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed population file: ") + e.what());
  }
  try {
    const int version = doc.at("version").get<int>();
    if (version != kPopulationFormatVersion) {
      throw ParseError("unsupported population format version " + std::to_string(version));
    }
    const json& jspace = doc.at("space");
    TemplateSpace space;
    space.length = jspace.at("L").get<std::size_t>();
    space.masked = jspace.at("masked").get<bool>();
    if (jspace.contains("score_model") && !jspace.at("score_model").is_null()) {
      const json& jl = jspace.at("score_model");
      ScoreLandscape land;
      land.base_mean = jl.at("base_mean").get<double>();
      land.base_sigma = jl.at("base_sigma").get<double>();
      land.mean_weights = jl.at("mean_weights").get<std::vector<double>>();
      land.log_sigma_weights = jl.at("log_sigma_weights").get<std::vector<double>>();
      space.score_model = std::move(land);
    }
    if (space.length < kMinTemplateBits || space.length > kMaxTemplateBits) {
      throw ValidationError("template length outside [2, 4096]");
    }
    const DistanceKind distance = parse_distance_kind(doc.at("distance").get<std::string>());
    std::vector<UserModel> users;
    for (const auto& ju : doc.at("users")) {
      users.push_back(UserModel{ju.at("id").get<std::string>(),
                                decode_template(ju.at("reference").get<std::string>(), space),
                                noise_from_json(ju.at("noise"), space)});
    }
    return Population(std::move(space), distance, std::move(users));
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid population file: ") + e.what());
  }
}

void save_population(const Population& pop, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << population_to_json(pop);
  if (!out) throw ConfigError("failed writing " + path.string());
}

Population load_population(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open population file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return population_from_json(buf.str());
}

namespace {

bool same_noise(const NoiseModel& a, const NoiseModel& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      Overloaded{
          [&](const IidBitFlip& x) { return x.p == std::get<IidBitFlip>(b).p; },
          [&](const ExplicitTable& x) { return x.entries == std::get<ExplicitTable>(b).entries; },
          [&](const GaussianScore& x) {
            const auto& y = std::get<GaussianScore>(b);
            return x.mean == y.mean && x.sigma == y.sigma;
          },
      },
      a);
}

}  // namespace

bool operator==(const Population& a, const Population& b) {
  if (a.space().length != b.space().length || a.space().masked != b.space().masked ||
      a.space().score_model != b.space().score_model || a.distance() != b.distance() ||
      a.size() != b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& ua = a.user(i);
    const auto& ub = b.user(i);
    if (ua.id != ub.id || !(ua.reference == ub.reference) || !same_noise(ua.noise, ub.noise)) {
      return false;
    }
  }
  return true;
}

TemplateEnumerator::TemplateEnumerator(const TemplateSpace& space)
    : space_length_(space.length), masked_(space.masked), size_(space.template_count()) {
  if (size_ > kExactTemplateCap) {
    throw ModeError("template space too large to enumerate (" + std::to_string(size_) + ")");
  }
  block_count_ = masked_ ? (std::size_t{1} << space_length_)
                         : static_cast<std::size_t>((size_ + kBlock - 1) / kBlock);
}

}  // namespace wolfbench
