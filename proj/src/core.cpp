#include "wolfbench/core.hpp"

#include <bit>

#include "wolfbench/errors.hpp"

namespace wolfbench {

namespace {

constexpr std::size_t word_count(std::size_t bits) { return (bits + 63) / 64; }

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionError("template length mismatch: " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

BitVector::BitVector(std::size_t size) : size_(size), words_(word_count(size), 0) {}

BitVector BitVector::from_string(std::string_view binary) {
  BitVector v(binary.size());
  for (std::size_t i = 0; i < binary.size(); ++i) {
    if (binary[i] == '1') {
      v.set(i);
    } else if (binary[i] != '0') {
      throw ParseError("invalid binary digit in '" + std::string(binary) + "'");
    }
  }
  return v;
}

BitVector BitVector::from_value(std::uint64_t value, std::size_t size) {
  if (size > 64) throw DimensionError("from_value supports at most 64 bits");
  if (size < 64 && (value >> size) != 0) {
    throw DimensionError("value does not fit in " + std::to_string(size) + " bits");
  }
  BitVector v(size);
  for (std::size_t i = 0; i < size; ++i) {
    if ((value >> (size - 1 - i)) & 1U) v.set(i);
  }
  return v;
}

BitVector BitVector::from_hex(std::string_view hex, std::size_t size) {
  const std::size_t digits = (size + 3) / 4;
  if (hex.size() != digits) {
    throw ParseError("hex template '" + std::string(hex) + "' must have " +
                     std::to_string(digits) + " digits for length " + std::to_string(size));
  }
  const std::size_t pad = digits * 4 - size;
  BitVector v(size);
  for (std::size_t d = 0; d < digits; ++d) {
    const int nibble = hex_digit(hex[d]);
    if (nibble < 0) throw ParseError("invalid hex digit in '" + std::string(hex) + "'");
    for (int b = 0; b < 4; ++b) {
      const bool bit = (nibble >> (3 - b)) & 1;
      const std::size_t padded_pos = d * 4 + static_cast<std::size_t>(b);
      if (padded_pos < pad) {
        if (bit) throw ParseError("hex template '" + std::string(hex) + "' exceeds length");
        continue;
      }
      if (bit) v.set(padded_pos - pad);
    }
  }
  return v;
}

BitVector BitVector::ones(std::size_t size) {
  BitVector v(size);
  for (auto& w : v.words_) w = ~std::uint64_t{0};
  v.clear_tail();
  return v;
}

void BitVector::set(std::size_t pos, bool value) noexcept {
  const std::uint64_t bit = std::uint64_t{1} << (pos & 63);
  if (value) {
    words_[pos >> 6] |= bit;
  } else {
    words_[pos >> 6] &= ~bit;
  }
}

std::size_t BitVector::count() const noexcept {
  std::size_t total = 0;
  for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::uint64_t BitVector::value() const {
  if (size_ > 64) throw DimensionError("value() supports at most 64 bits");
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < size_; ++i) out = (out << 1) | (test(i) ? 1U : 0U);
  return out;
}

std::string BitVector::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (test(i)) s[i] = '1';
  }
  return s;
}

std::string BitVector::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t digits = (size_ + 3) / 4;
  const std::size_t pad = digits * 4 - size_;
  std::string out(digits, '0');
  for (std::size_t d = 0; d < digits; ++d) {
    int nibble = 0;
    for (int b = 0; b < 4; ++b) {
      const std::size_t padded_pos = d * 4 + static_cast<std::size_t>(b);
      const bool bit = padded_pos >= pad && test(padded_pos - pad);
      nibble = (nibble << 1) | (bit ? 1 : 0);
    }
    out[d] = kDigits[nibble];
  }
  return out;
}

BitVector BitVector::operator^(const BitVector& other) const {
  require_same_size(size_, other.size_);
  BitVector out(*this);
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] ^= other.words_[i];
  return out;
}

BitVector BitVector::operator&(const BitVector& other) const {
  require_same_size(size_, other.size_);
  BitVector out(*this);
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= other.words_[i];
  return out;
}

BitVector BitVector::operator|(const BitVector& other) const {
  require_same_size(size_, other.size_);
  BitVector out(*this);
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] |= other.words_[i];
  return out;
}

BitVector BitVector::operator~() const {
  BitVector out(*this);
  for (auto& w : out.words_) w = ~w;
  out.clear_tail();
  return out;
}

void BitVector::clear_tail() noexcept {
  const std::size_t used = size_ & 63;
  if (used != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << used) - 1;
}

std::strong_ordering operator<=>(const BitVector& a, const BitVector& b) {
  if (auto c = a.size_ <=> b.size_; c != 0) return c;
  for (std::size_t i = 0; i < a.words_.size(); ++i) {
    const std::uint64_t diff = a.words_[i] ^ b.words_[i];
    if (diff != 0) {
      // lowest differing position is the most significant one
      const std::uint64_t low = diff & (~diff + 1);
      return (a.words_[i] & low) ? std::strong_ordering::greater : std::strong_ordering::less;
    }
  }
  return std::strong_ordering::equal;
}

std::size_t masked_difference_count(const BitVector& a, const BitVector& b, const BitVector& mask) {
  require_same_size(a.size(), b.size());
  require_same_size(a.size(), mask.size());
  const auto wa = a.words();
  const auto wb = b.words();
  const auto wm = mask.words();
  std::size_t total = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    total += static_cast<std::size_t>(std::popcount((wa[i] ^ wb[i]) & wm[i]));
  }
  return total;
}

std::size_t intersection_count(const BitVector& a, const BitVector& b) {
  require_same_size(a.size(), b.size());
  const auto wa = a.words();
  const auto wb = b.words();
  std::size_t total = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    total += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
  }
  return total;
}

BitTemplate::BitTemplate(BitVector bits) : bits_(std::move(bits)) {
  if (bits_.size() < kMinTemplateBits || bits_.size() > kMaxTemplateBits) {
    throw DimensionError("template length " + std::to_string(bits_.size()) + " outside [" +
                         std::to_string(kMinTemplateBits) + ", " +
                         std::to_string(kMaxTemplateBits) + "]");
  }
}

MaskedTemplate::MaskedTemplate(BitVector bits, BitVector mask)
    : bits_(std::move(bits)), mask_(std::move(mask)) {
  require_same_size(bits_.size(), mask_.size());
  if (bits_.size() < kMinTemplateBits || bits_.size() > kMaxTemplateBits) {
    throw DimensionError("template length " + std::to_string(bits_.size()) + " outside [" +
                         std::to_string(kMinTemplateBits) + ", " +
                         std::to_string(kMaxTemplateBits) + "]");
  }
}

MaskedTemplate::MaskedTemplate(BitVector bits)
    : MaskedTemplate(bits, BitVector::ones(bits.size())) {}

MaskedTemplate MaskedTemplate::canonical() const { return MaskedTemplate(bits_ & mask_, mask_); }

bool MaskedTemplate::is_canonical() const {
  const auto wb = bits_.words();
  const auto wm = mask_.words();
  for (std::size_t i = 0; i < wb.size(); ++i) {
    if ((wb[i] & ~wm[i]) != 0) return false;
  }
  return true;
}

std::strong_ordering operator<=>(const MaskedTemplate& a, const MaskedTemplate& b) {
  if (auto c = a.bits_ <=> b.bits_; c != 0) return c;
  return a.mask_ <=> b.mask_;
}

std::size_t MaskedTemplateHash::operator()(const MaskedTemplate& t) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ t.size();
  auto mix = [&h](std::uint64_t w) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  for (auto w : t.bits().words()) mix(w);
  for (auto w : t.mask().words()) mix(w);
  return static_cast<std::size_t>(h);
}

std::string_view to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::hamming: return "hamming";
    case DistanceKind::fractional_hamming: return "fractional-hamming";
    case DistanceKind::absolute_score_difference: return "absolute-score-difference";
  }
  return "unknown";
}

DistanceKind parse_distance_kind(std::string_view name) {
  if (name == "hamming") return DistanceKind::hamming;
  if (name == "fractional-hamming") return DistanceKind::fractional_hamming;
  if (name == "absolute-score-difference") return DistanceKind::absolute_score_difference;
  throw ParseError("unknown distance kind '" + std::string(name) + "'");
}

Comparison compare(const MaskedTemplate& a, const MaskedTemplate& b) {
  require_same_size(a.size(), b.size());
  const auto ba = a.bits().words();
  const auto bb = b.bits().words();
  const auto ma = a.mask().words();
  const auto mb = b.mask().words();
  Comparison c;
  for (std::size_t i = 0; i < ba.size(); ++i) {
    const std::uint64_t joint = ma[i] & mb[i];
    c.comparable += static_cast<std::size_t>(std::popcount(joint));
    c.differing += static_cast<std::size_t>(std::popcount((ba[i] ^ bb[i]) & joint));
  }
  return c;
}

std::size_t hamming_distance(const BitTemplate& a, const BitTemplate& b) {
  require_same_size(a.size(), b.size());
  const auto wa = a.bits().words();
  const auto wb = b.bits().words();
  std::size_t total = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    total += static_cast<std::size_t>(std::popcount(wa[i] ^ wb[i]));
  }
  return total;
}

FractionalHd fractional_hd(const MaskedTemplate& a, const MaskedTemplate& b) {
  const Comparison c = compare(a, b);
  if (c.comparable == 0) throw NoComparableBitsError();
  return {static_cast<double>(c.differing) / static_cast<double>(c.comparable), c.comparable};
}

double distance_value(DistanceKind kind, const Comparison& c) {
  if (c.comparable == 0) throw NoComparableBitsError();
  switch (kind) {
    case DistanceKind::hamming:
      return static_cast<double>(c.differing);
    case DistanceKind::fractional_hamming:
      return static_cast<double>(c.differing) / static_cast<double>(c.comparable);
    case DistanceKind::absolute_score_difference:
      break;
  }
  throw ConfigError("distance kind '" + std::string(to_string(kind)) +
                    "' does not apply to bit templates");
}

}  // namespace wolfbench
