#include "vsl/field.hpp"

#include <algorithm>

#include "vsl/error.hpp"

namespace vsl {
namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using Limbs = Fr::Limbs;

constexpr Limbs kP = {0x43e1f593f0000001ULL, 0x2833e84879b97091ULL,
                      0xb85045b68181585dULL, 0x30644e72e131a029ULL};
// 2^256 mod P, 2^512 mod P, -P^{-1} mod 2^64.
constexpr Limbs kR = {0xac96341c4ffffffbULL, 0x36fc76959f60cd29ULL,
                      0x666ea36f7879462eULL, 0x0e0a77c19a07df2fULL};
constexpr Limbs kR2 = {0x1bb8e645ae216da7ULL, 0x53fe3ab1e35c59e3ULL,
                       0x8c49833d53bb8085ULL, 0x0216d0b17f4e44a5ULL};
constexpr u64 kInv = 0xc2e1f593efffffffULL;
// (P - 1) / 2
constexpr Limbs kHalf = {0xa1f0fac9f8000000ULL, 0x9419f4243cdcb848ULL,
                         0xdc2822db40c0ac2eULL, 0x183227397098d014ULL};

inline u64 adc(u64 a, u64 b, u64& carry) {
  u128 t = static_cast<u128>(a) + b + carry;
  carry = static_cast<u64>(t >> 64);
  return static_cast<u64>(t);
}

inline u64 sbb(u64 a, u64 b, u64& borrow) {
  u128 t = static_cast<u128>(a) - b - borrow;
  borrow = static_cast<u64>(t >> 64) & 1;
  return static_cast<u64>(t);
}

inline bool geq(const Limbs& a, const Limbs& b) {
  for (int i = 3; i >= 0; --i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return true;
}

inline Limbs sub_raw(const Limbs& a, const Limbs& b) {
  Limbs r;
  u64 borrow = 0;
  for (int i = 0; i < 4; ++i) r[i] = sbb(a[i], b[i], borrow);
  return r;
}

Limbs mont_mul(const Limbs& a, const Limbs& b) {
  u64 t[6] = {0, 0, 0, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    u64 carry = 0;
    for (int j = 0; j < 4; ++j) {
      u128 acc = static_cast<u128>(a[j]) * b[i] + t[j] + carry;
      t[j] = static_cast<u64>(acc);
      carry = static_cast<u64>(acc >> 64);
    }
    u64 c2 = 0;
    t[4] = adc(t[4], carry, c2);
    t[5] = c2;

    const u64 m = t[0] * kInv;
    u128 acc = static_cast<u128>(m) * kP[0] + t[0];
    carry = static_cast<u64>(acc >> 64);
    for (int j = 1; j < 4; ++j) {
      acc = static_cast<u128>(m) * kP[j] + t[j] + carry;
      t[j - 1] = static_cast<u64>(acc);
      carry = static_cast<u64>(acc >> 64);
    }
    c2 = 0;
    t[3] = adc(t[4], carry, c2);
    t[4] = t[5] + c2;
  }
  Limbs r = {t[0], t[1], t[2], t[3]};
  if (t[4] != 0 || geq(r, kP)) r = sub_raw(r, kP);
  return r;
}

// Divides limbs in place by a small divisor, returning the remainder.
u64 div_small(Limbs& v, u64 d) {
  u128 rem = 0;
  for (int i = 3; i >= 0; --i) {
    u128 cur = (rem << 64) | v[i];
    v[i] = static_cast<u64>(cur / d);
    rem = cur % d;
  }
  return static_cast<u64>(rem);
}

}  // namespace

const Fr::Limbs Fr::kModulus = kP;

Fr Fr::from_raw(const Limbs& canonical) {
  Fr r;
  r.mont_ = mont_mul(canonical, kR2);
  return r;
}

Fr Fr::one() {
  Fr r;
  r.mont_ = kR;
  return r;
}

Fr Fr::from_u64(std::uint64_t v) { return from_raw({v, 0, 0, 0}); }

Fr Fr::from_i64(std::int64_t v) { return from_i128(v); }

Fr Fr::from_i128(__int128 v) {
  const bool negative = v < 0;
  // Magnitude of the most negative value still fits in an unsigned 128.
  u128 mag = negative ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
  Fr r = from_raw({static_cast<u64>(mag), static_cast<u64>(mag >> 64), 0, 0});
  return negative ? -r : r;
}

Fr Fr::pow2(unsigned k) {
  if (k <= 253) {
    Limbs l{};
    l[k / 64] = u64{1} << (k % 64);
    return from_raw(l);
  }
  return pow2(253) * pow2(k - 253);
}

Fr Fr::from_canonical(const Limbs& limbs) {
  if (geq(limbs, kP)) throw DecodeError("non-canonical field element");
  return from_raw(limbs);
}

Fr Fr::from_bytes_le(ByteView bytes) {
  if (bytes.size() != kBytes) throw DecodeError("field element must be 32 bytes");
  Limbs l{};
  for (std::size_t i = 0; i < kBytes; ++i) {
    l[i / 8] |= static_cast<u64>(bytes[i]) << (8 * (i % 8));
  }
  return from_canonical(l);
}

Fr Fr::from_decimal(std::string_view dec) {
  if (dec.empty()) throw DecodeError("empty decimal field element");
  bool negative = false;
  if (dec.front() == '-') {
    negative = true;
    dec.remove_prefix(1);
    if (dec.empty()) throw DecodeError("empty decimal field element");
  }
  Limbs acc{};
  for (char ch : dec) {
    if (ch < '0' || ch > '9') throw DecodeError("invalid decimal field element");
    u64 carry = static_cast<u64>(ch - '0');
    for (auto& limb : acc) {
      u128 t = static_cast<u128>(limb) * 10 + carry;
      limb = static_cast<u64>(t);
      carry = static_cast<u64>(t >> 64);
    }
    if (carry != 0 || geq(acc, kP)) throw DecodeError("decimal field element out of range");
  }
  Fr r = from_raw(acc);
  return negative ? -r : r;
}

Fr::Limbs Fr::canonical() const { return mont_mul(mont_, {1, 0, 0, 0}); }

std::array<std::uint8_t, Fr::kBytes> Fr::to_bytes_le() const {
  const Limbs l = canonical();
  std::array<std::uint8_t, kBytes> out{};
  for (std::size_t i = 0; i < kBytes; ++i) {
    out[i] = static_cast<std::uint8_t>(l[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

std::string Fr::to_decimal() const {
  Limbs v = canonical();
  if (v == Limbs{}) return "0";
  std::string digits;
  while (v != Limbs{}) digits.push_back(static_cast<char>('0' + div_small(v, 10)));
  std::reverse(digits.begin(), digits.end());
  return digits;
}

bool Fr::fits_i128() const {
  Limbs c = canonical();
  if (!geq(kHalf, c)) c = sub_raw(kP, c);
  return c[2] == 0 && c[3] == 0 && (c[1] >> 63) == 0;
}

__int128 Fr::to_i128() const {
  Limbs c = canonical();
  const bool negative = !geq(kHalf, c);
  if (negative) c = sub_raw(kP, c);
  if (c[2] != 0 || c[3] != 0 || (c[1] >> 63) != 0) {
    throw Error("field element does not fit a signed 128-bit integer");
  }
  const __int128 mag = static_cast<__int128>((static_cast<u128>(c[1]) << 64) | c[0]);
  return negative ? -mag : mag;
}

Fr Fr::operator+(const Fr& o) const {
  Fr r;
  u64 carry = 0;
  for (int i = 0; i < 4; ++i) r.mont_[i] = adc(mont_[i], o.mont_[i], carry);
  if (carry != 0 || geq(r.mont_, kP)) r.mont_ = sub_raw(r.mont_, kP);
  return r;
}

Fr Fr::operator-(const Fr& o) const {
  Fr r;
  u64 borrow = 0;
  for (int i = 0; i < 4; ++i) r.mont_[i] = sbb(mont_[i], o.mont_[i], borrow);
  if (borrow != 0) {
    u64 carry = 0;
    for (int i = 0; i < 4; ++i) r.mont_[i] = adc(r.mont_[i], kP[i], carry);
  }
  return r;
}

Fr Fr::operator*(const Fr& o) const {
  Fr r;
  r.mont_ = mont_mul(mont_, o.mont_);
  return r;
}

Fr Fr::operator-() const {
  if (is_zero()) return *this;
  Fr r;
  r.mont_ = sub_raw(kP, mont_);
  return r;
}

}  // namespace vsl
