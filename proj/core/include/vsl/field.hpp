#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "vsl/bytes.hpp"

namespace vsl {

/// Element of the BN254 scalar field
///   P = 21888242871839275222246405745257275088548364400416034343698204186575808495617
/// held in Montgomery form over four 64-bit limbs. Values are always fully
/// reduced, so limb equality is field equality.
class Fr {
 public:
  static constexpr std::size_t kBytes = 32;
  using Limbs = std::array<std::uint64_t, 4>;

  static const Limbs kModulus;

  constexpr Fr() = default;

  static Fr zero() { return Fr{}; }
  static Fr one();
  static Fr from_u64(std::uint64_t v);
  static Fr from_i64(std::int64_t v);
  static Fr from_i128(__int128 v);
  /// 2^k for any k >= 0.
  static Fr pow2(unsigned k);
  /// Canonical integer given as little-endian limbs; throws DecodeError when >= P.
  static Fr from_canonical(const Limbs& limbs);
  static Fr from_bytes_le(ByteView bytes);
  static Fr from_decimal(std::string_view dec);

  Limbs canonical() const;
  std::array<std::uint8_t, kBytes> to_bytes_le() const;
  std::string to_decimal() const;
  /// Signed reading: values above P/2 are reported as v - P. Only meaningful
  /// for elements that fit in 127 bits either way; throws otherwise.
  __int128 to_i128() const;
  bool fits_i128() const;

  bool is_zero() const { return mont_ == Limbs{}; }

  Fr operator+(const Fr& o) const;
  Fr operator-(const Fr& o) const;
  Fr operator*(const Fr& o) const;
  Fr operator-() const;
  Fr& operator+=(const Fr& o) { return *this = *this + o; }
  Fr& operator-=(const Fr& o) { return *this = *this - o; }
  Fr& operator*=(const Fr& o) { return *this = *this * o; }

  bool operator==(const Fr& o) const = default;

 private:
  static Fr from_raw(const Limbs& canonical);

  Limbs mont_{};
};

}  // namespace vsl
