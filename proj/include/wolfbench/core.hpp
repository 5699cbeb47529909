#pragma once

// Templates and the distance functions used by every matcher.
//
// Bit position 0 is the leftmost character of a template's binary string and
// the most significant bit of its integer value, so "10110" has value 22 and
// hex form "16".

#include <compare>
#include <span>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wolfbench {

inline constexpr std::size_t kMinTemplateBits = 2;
inline constexpr std::size_t kMaxTemplateBits = 4096;

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size);

  /// Parses a string of '0'/'1' characters.
  static BitVector from_string(std::string_view binary);
  /// Template with integer value `value`; requires size <= 64.
  static BitVector from_value(std::uint64_t value, std::size_t size);
  static BitVector from_hex(std::string_view hex, std::size_t size);
  static BitVector ones(std::size_t size);

  std::size_t size() const noexcept { return size_; }
  bool test(std::size_t pos) const noexcept {
    return (words_[pos >> 6] >> (pos & 63)) & 1U;
  }
  void set(std::size_t pos, bool value = true) noexcept;
  void flip(std::size_t pos) noexcept { words_[pos >> 6] ^= std::uint64_t{1} << (pos & 63); }

  std::size_t count() const noexcept;
  bool none() const noexcept { return count() == 0; }

  std::uint64_t value() const;  // requires size <= 64
  std::string to_string() const;
  std::string to_hex() const;

  BitVector operator^(const BitVector& other) const;
  BitVector operator&(const BitVector& other) const;
  BitVector operator|(const BitVector& other) const;
  BitVector operator~() const;

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const BitVector&, const BitVector&) = default;
  friend std::strong_ordering operator<=>(const BitVector& a, const BitVector& b);

 private:
  void clear_tail() noexcept;

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Popcount of (a XOR b) AND mask, without allocating.
std::size_t masked_difference_count(const BitVector& a, const BitVector& b, const BitVector& mask);
/// Popcount of a AND b, without allocating.
std::size_t intersection_count(const BitVector& a, const BitVector& b);

class BitTemplate {
 public:
  explicit BitTemplate(BitVector bits);
  explicit BitTemplate(std::string_view binary) : BitTemplate(BitVector::from_string(binary)) {}

  const BitVector& bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return bits_.size(); }

  friend bool operator==(const BitTemplate&, const BitTemplate&) = default;

 private:
  BitVector bits_;
};

/// Bit vector plus availability mask; only positions unmasked on both sides
/// take part in a comparison.
class MaskedTemplate {
 public:
  MaskedTemplate(BitVector bits, BitVector mask);
  /// Fully unmasked template.
  explicit MaskedTemplate(BitVector bits);
  explicit MaskedTemplate(const BitTemplate& t) : MaskedTemplate(t.bits()) {}

  const BitVector& bits() const noexcept { return bits_; }
  const BitVector& mask() const noexcept { return mask_; }
  std::size_t size() const noexcept { return bits_.size(); }

  /// Copy with bits outside the mask cleared.
  MaskedTemplate canonical() const;
  bool is_canonical() const;

  friend bool operator==(const MaskedTemplate&, const MaskedTemplate&) = default;
  friend std::strong_ordering operator<=>(const MaskedTemplate& a, const MaskedTemplate& b);

 private:
  BitVector bits_;
  BitVector mask_;
};

struct MaskedTemplateHash {
  std::size_t operator()(const MaskedTemplate& t) const noexcept;
};

enum class DistanceKind { hamming, fractional_hamming, absolute_score_difference };

std::string_view to_string(DistanceKind kind);
DistanceKind parse_distance_kind(std::string_view name);

/// Raw outcome of comparing two masked templates.
struct Comparison {
  std::size_t differing = 0;  // HD over jointly unmasked positions
  std::size_t comparable = 0; // k
};

Comparison compare(const MaskedTemplate& a, const MaskedTemplate& b);

std::size_t hamming_distance(const BitTemplate& a, const BitTemplate& b);

struct FractionalHd {
  double fhd;
  std::size_t k;
};

/// Throws NoComparableBitsError when the joint mask is empty.
FractionalHd fractional_hd(const MaskedTemplate& a, const MaskedTemplate& b);

inline double absolute_score_difference(double a, double b) { return a < b ? b - a : a - b; }

/// Distance value of a comparison under `kind`; throws NoComparableBitsError when k == 0.
double distance_value(DistanceKind kind, const Comparison& c);

}  // namespace wolfbench
