#include "vsl/quant.hpp"

#include <limits>

#include "vsl/error.hpp"

namespace vsl {
namespace {

bool covers(int f, std::int64_t z, std::int64_t q_min, std::int64_t q_max, double lo, double hi) {
  const double s_lo = std::ldexp(static_cast<double>(q_min - z), -f);
  const double s_hi = std::ldexp(static_cast<double>(q_max - z), -f);
  return s_lo <= lo && s_hi >= hi;
}

}  // namespace

double QuantParams::range_lo() const {
  return std::ldexp(static_cast<double>(q_min - zero_point), -scale_exp);
}

double QuantParams::range_hi() const {
  return std::ldexp(static_cast<double>(q_max - zero_point + 1), -scale_exp);
}

QuantParams calibrate(double a, double b, double eps, std::int64_t q_min, std::int64_t q_max,
                      ScaleLimits limits) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw QuantizationError("empty calibration range");
  }
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw QuantizationError("negative calibration eps");
  if (!(q_min < q_max)) throw QuantizationError("empty integer range");
  if (limits.min_scale_exp > limits.max_scale_exp) throw QuantizationError("invalid scale limits");

  const double lo = a - eps;
  const double hi = b + eps;
  const double exact_scale = (hi - lo) / static_cast<double>(q_max - q_min);
  const double exact_zero = static_cast<double>(q_min) - lo / exact_scale;
  if (!std::isfinite(exact_scale) || exact_scale <= 0.0 || !std::isfinite(exact_zero)) {
    throw QuantizationError("range exceeds bit budget");
  }
  const std::int64_t z = std::llround(exact_zero);

  // exact_scale = mant * 2^e with mant in [0.5, 1): the power of two at or
  // below it is 2^(e-1), i.e. scale_exp = 1 - e.
  int e = 0;
  std::frexp(exact_scale, &e);
  int f = std::min(1 - e, limits.max_scale_exp);

  // Rounding the scale moves the ends of the covered range; when the range
  // sits away from zero, re-anchor z at its low end instead.
  std::int64_t z_f = z;
  for (;; --f) {
    if (f < limits.min_scale_exp) throw QuantizationError("range exceeds bit budget");
    if (covers(f, z, q_min, q_max, lo, hi)) {
      z_f = z;
      break;
    }
    const double anchored = static_cast<double>(q_min) - std::floor(std::ldexp(lo, f));
    if (std::abs(anchored) < 0x1p62) {
      z_f = static_cast<std::int64_t>(anchored);
      if (covers(f, z_f, q_min, q_max, lo, hi)) break;
    }
  }

  QuantParams p;
  p.scale_exp = f;
  p.zero_point = z_f;
  p.eps = eps;
  p.q_min = q_min;
  p.q_max = q_max;
  return p;
}

std::int64_t quantize(double x, const QuantParams& p) {
  const double scaled = std::floor(std::ldexp(x, p.scale_exp));
  const double lo = static_cast<double>(p.q_min - p.zero_point);
  const double hi = static_cast<double>(p.q_max - p.zero_point);
  if (!(scaled >= lo && scaled <= hi)) throw QuantizationError("quantization overflow");
  return static_cast<std::int64_t>(scaled) + p.zero_point;
}

double dequantize(std::int64_t q, const QuantParams& p) {
  if (q < p.q_min || q > p.q_max) throw QuantizationError("invalid quantized value");
  return std::ldexp(static_cast<double>(q - p.zero_point), -p.scale_exp);
}

QuantVector quantize(std::span<const double> xs, const QuantParams& p) {
  QuantVector out;
  out.params = p;
  out.values.reserve(xs.size());
  for (double x : xs) out.values.push_back(quantize(x, p));
  return out;
}

std::vector<double> dequantize(const QuantVector& v) {
  std::vector<double> out;
  out.reserve(v.values.size());
  for (auto q : v.values) out.push_back(dequantize(q, v.params));
  return out;
}

void to_json(nlohmann::json& j, const QuantParams& p) {
  j = nlohmann::json{{"scale_exp", p.scale_exp},
                     {"zero_point", p.zero_point},
                     {"eps", p.eps},
                     {"q_min", p.q_min},
                     {"q_max", p.q_max}};
}

void from_json(const nlohmann::json& j, QuantParams& p) {
  j.at("scale_exp").get_to(p.scale_exp);
  j.at("zero_point").get_to(p.zero_point);
  j.at("eps").get_to(p.eps);
  j.at("q_min").get_to(p.q_min);
  j.at("q_max").get_to(p.q_max);
}

}  // namespace vsl
