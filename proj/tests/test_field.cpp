#include <random>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "vsl/error.hpp"
#include "vsl/field.hpp"

using namespace vsl;
using oracle::cpp_int;

namespace {

cpp_int to_int(const Fr& x) {
  cpp_int v = 0;
  const auto limbs = x.canonical();
  for (int i = 3; i >= 0; --i) v = (v << 64) | cpp_int(limbs[static_cast<std::size_t>(i)]);
  return v;
}

Fr from_int(cpp_int v) {
  Fr::Limbs limbs{};
  for (auto& l : limbs) {
    l = static_cast<std::uint64_t>(v & cpp_int(~std::uint64_t{0}));
    v >>= 64;
  }
  return Fr::from_canonical(limbs);
}

cpp_int mod(cpp_int v) {
  v %= oracle::modulus();
  if (v < 0) v += oracle::modulus();
  return v;
}

class FieldRandom : public ::testing::Test {
 protected:
  std::mt19937_64 rng{1234};
  cpp_int sample() {
    cpp_int v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 64) | cpp_int(rng());
    return mod(v);
  }
};

}  // namespace

TEST_F(FieldRandom, ArithmeticMatchesBigInteger) {
  for (int i = 0; i < 2000; ++i) {
    const cpp_int a = sample(), b = sample();
    const Fr fa = from_int(a), fb = from_int(b);
    ASSERT_EQ(to_int(fa + fb), mod(a + b));
    ASSERT_EQ(to_int(fa - fb), mod(a - b));
    ASSERT_EQ(to_int(fa * fb), mod(a * b));
    ASSERT_EQ(to_int(-fa), mod(-a));
  }
}

TEST_F(FieldRandom, EdgeValuesNearModulus) {
  const cpp_int p = oracle::modulus();
  const cpp_int edges[] = {0, 1, 2, p - 1, p - 2, (p - 1) / 2, (p + 1) / 2};
  for (const auto& a : edges) {
    for (const auto& b : edges) {
      EXPECT_EQ(to_int(from_int(a) * from_int(b)), mod(a * b));
      EXPECT_EQ(to_int(from_int(a) + from_int(b)), mod(a + b));
      EXPECT_EQ(to_int(from_int(a) - from_int(b)), mod(a - b));
    }
  }
}

TEST(Field, SignedConversions) {
  EXPECT_EQ(Fr::from_i64(-1), -Fr::one());
  EXPECT_EQ(to_int(Fr::from_i64(-5)), oracle::modulus() - 5);
  EXPECT_EQ(Fr::from_i64(-123456789).to_i128(), -123456789);
  const __int128 big = (static_cast<__int128>(1) << 100) + 17;
  EXPECT_EQ(Fr::from_i128(big).to_i128(), big);
  EXPECT_EQ(Fr::from_i128(-big).to_i128(), -big);
  EXPECT_EQ(Fr::from_u64(7) - Fr::from_u64(9), Fr::from_i64(-2));
}

TEST(Field, Pow2) {
  for (unsigned k : {0u, 1u, 63u, 64u, 100u, 200u, 253u, 300u}) {
    EXPECT_EQ(to_int(Fr::pow2(k)), mod(cpp_int(1) << k)) << k;
  }
}

TEST(Field, DecimalAndBytesRoundTrip) {
  const std::string p_minus_1 =
      "21888242871839275222246405745257275088548364400416034343698204186575808495616";
  const Fr x = Fr::from_decimal(p_minus_1);
  EXPECT_EQ(x, -Fr::one());
  EXPECT_EQ(x.to_decimal(), p_minus_1);
  const auto bytes = x.to_bytes_le();
  EXPECT_EQ(Fr::from_bytes_le(bytes), x);
  EXPECT_EQ(Fr::from_u64(0).to_decimal(), "0");
}

TEST(Field, RejectsNonCanonicalInputs) {
  EXPECT_THROW(Fr::from_canonical(Fr::kModulus), DecodeError);
  EXPECT_THROW(Fr::from_decimal(oracle::modulus().str()), DecodeError);
  std::array<std::uint8_t, 32> all_ones{};
  all_ones.fill(0xff);
  EXPECT_THROW(Fr::from_bytes_le(all_ones), DecodeError);
  const std::array<std::uint8_t, 31> short_bytes{};
  EXPECT_THROW(Fr::from_bytes_le(short_bytes), DecodeError);
}

TEST(Field, I128ReadingRefusesLargeElements) {
  const Fr huge = Fr::pow2(200);
  EXPECT_FALSE(huge.fits_i128());
  EXPECT_THROW((void)huge.to_i128(), Error);
}
