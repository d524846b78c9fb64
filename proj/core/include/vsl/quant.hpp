#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

namespace vsl {

inline constexpr std::int64_t kDefaultQMin = -32767;
inline constexpr std::int64_t kDefaultQMax = 32767;

/// Fixed-point mapping q = floor(x / s) + z with s = 2^-scale_exp.
///
/// Scales are exact powers of two so every ratio of scales that appears in
/// the circuits is itself an exact power of two.
struct QuantParams {
  int scale_exp = 0;
  std::int64_t zero_point = 0;
  double eps = 0.0;
  std::int64_t q_min = kDefaultQMin;
  std::int64_t q_max = kDefaultQMax;

  double scale() const { return std::ldexp(1.0, -scale_exp); }
  /// Smallest representable real, s * (q_min - z).
  double range_lo() const;
  /// Exclusive upper end of the values that quantize without overflow,
  /// s * (q_max - z + 1).
  double range_hi() const;

  bool operator==(const QuantParams&) const = default;
};

/// Bounds on the power-of-two exponent that calibration may pick.
struct ScaleLimits {
  int min_scale_exp = 0;
  int max_scale_exp = 60;
};

/// Solves a - eps = s (q_min - z), b + eps = s (q_max - z), rounds s down to
/// a power of two and z to the nearest integer, then halves the exponent
/// further until [a - eps, b + eps] is covered.
///
/// Throws QuantizationError("empty calibration range") when a >= b and
/// QuantizationError("range exceeds bit budget") when covering the range
/// would need scale_exp < limits.min_scale_exp.
QuantParams calibrate(double a, double b, double eps = 0.0,
                      std::int64_t q_min = kDefaultQMin, std::int64_t q_max = kDefaultQMax,
                      ScaleLimits limits = {});

/// Throws QuantizationError("quantization overflow") outside the effective range.
std::int64_t quantize(double x, const QuantParams& p);

/// Exact for the supported budgets. Throws QuantizationError("invalid quantized value").
double dequantize(std::int64_t q, const QuantParams& p);

struct QuantVector {
  std::vector<std::int64_t> values;
  QuantParams params;

  std::size_t size() const { return values.size(); }
};

QuantVector quantize(std::span<const double> xs, const QuantParams& p);
std::vector<double> dequantize(const QuantVector& v);

void to_json(nlohmann::json& j, const QuantParams& p);
void from_json(const nlohmann::json& j, QuantParams& p);

}  // namespace vsl
