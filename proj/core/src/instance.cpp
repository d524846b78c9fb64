#include "vsl/instance.hpp"

#include "vsl/error.hpp"

namespace vsl {
namespace {

using i128 = __int128;

i128 floor_shr(i128 v, unsigned s) { return s >= 127 ? (v < 0 ? -1 : 0) : (v >> s); }

std::int64_t requantize(i128 centered, const QuantParams& out) {
  const i128 q = centered + out.zero_point;
  if (q < out.q_min || q > out.q_max) throw QuantizationError("quantization overflow");
  return static_cast<std::int64_t>(q);
}

i128 scaled(i128 v, unsigned shift) {
  // Shifts are bounded by eta + 60 and inputs by 2^17, far inside 127 bits
  // for the supported eta range; guard anyway.
  if (shift >= 100) throw CircuitError("arithmetic overflow in witness");
  return v * (static_cast<i128>(1) << shift);
}

std::int64_t uniform_q(const QuantParams& p, std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::int64_t>(p.q_min, p.q_max)(rng);
}

}  // namespace

CircuitConstants cut_layer_constants(unsigned eta, double update_bound, double weight_bound) {
  CircuitConstants c;
  c.eta = eta;
  c.w = calibrate(-weight_bound, weight_bound);
  c.w_prime = c.w;
  c.u = calibrate(-update_bound, update_bound);
  c.u_prime = c.u;
  c.k = calibrate(-1.0, 1.0);
  return c;
}

CircuitInstance honest_aggregation(const CircuitConstants& c, std::size_t m,
                                   std::span<const std::int64_t> k,
                                   std::span<const std::int64_t> u) {
  const std::size_t n = k.size();
  if (m == 0 || n == 0 || u.size() != n * m) throw ShapeError("aggregation inputs do not match m x n");
  const unsigned shift = aggregation_shift(c);
  CircuitInstance inst{CircuitKind::aggregation, m, n, {}, {u.begin(), u.end()}};
  inst.public_values.reserve(m + n);
  for (std::size_t j = 0; j < m; ++j) {
    i128 sum = 0;
    for (std::size_t kk = 0; kk < n; ++kk) {
      sum += static_cast<i128>(k[kk] - c.k.zero_point) * (u[kk * m + j] - c.u.zero_point);
    }
    inst.public_values.push_back(requantize(floor_shr(scaled(sum, shift), c.eta), c.u_prime));
  }
  inst.public_values.insert(inst.public_values.end(), k.begin(), k.end());
  return inst;
}

CircuitInstance honest_update(const CircuitConstants& c, std::span<const std::int64_t> w,
                              std::span<const std::int64_t> u_prime) {
  const std::size_t m = w.size();
  if (m == 0 || u_prime.size() != m) throw ShapeError("update inputs differ in length");
  const unsigned sw = update_shift_w(c);
  const unsigned su = update_shift_u(c);
  CircuitInstance inst{CircuitKind::update, m, 1, {}, {u_prime.begin(), u_prime.end()}};
  inst.public_values.reserve(2 * m);
  for (std::size_t j = 0; j < m; ++j) {
    const i128 lhs = scaled(w[j] - c.w.zero_point, sw) + scaled(u_prime[j] - c.u_prime.zero_point, su);
    inst.public_values.push_back(requantize(floor_shr(lhs, c.eta), c.w_prime));
  }
  inst.public_values.insert(inst.public_values.end(), w.begin(), w.end());
  return inst;
}

CircuitInstance honest_cut_update(const CircuitConstants& c, std::span<const std::int64_t> w,
                                  std::int64_t k, std::span<const std::int64_t> u) {
  const std::size_t m = w.size();
  if (m == 0 || u.size() != m) throw ShapeError("cut update inputs differ in length");
  const std::int64_t ks[] = {k};
  const auto agg = honest_aggregation(c, m, ks, u);
  const auto upd = honest_update(c, w, std::span(agg.public_values).first(m));
  CircuitInstance inst{CircuitKind::cut_update, m, 1, upd.public_values, {u.begin(), u.end()}};
  inst.public_values.push_back(k);
  return inst;
}

CircuitInstance quantize_cut_update(const CircuitConstants& c, std::span<const double> w, double k,
                                    std::span<const double> u) {
  if (w.size() != u.size()) throw ShapeError("cut update inputs differ in length");
  const auto wq = quantize(w, c.w);
  const auto uq = quantize(u, c.u);
  return honest_cut_update(c, wq.values, quantize(k, c.k), uq.values);
}

CircuitInstance random_instance(CircuitKind kind, std::size_t m, std::size_t n,
                                const CircuitConstants& c, std::mt19937_64& rng) {
  if (m == 0) throw CircuitError("circuit width must be positive");
  if (kind == CircuitKind::empty) return {};
  if (kind != CircuitKind::aggregation) n = 1;

  // Element-wise rejection keeps each output inside its range; a whole-vector
  // redraw would almost never succeed at m = 1000.
  constexpr int kAttempts = 10000;
  std::vector<std::int64_t> k(n), w(m), u(n * m);
  for (auto& v : k) v = uniform_q(c.k, rng);
  for (std::size_t j = 0; j < m; ++j) {
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt == kAttempts) throw CircuitError("could not draw an in-range instance");
      if (kind != CircuitKind::aggregation) w[j] = uniform_q(c.w, rng);
      for (std::size_t kk = 0; kk < n; ++kk) {
        u[kk * m + j] = uniform_q(kind == CircuitKind::update ? c.u_prime : c.u, rng);
      }
      try {
        std::vector<std::int64_t> uj(n);
        for (std::size_t kk = 0; kk < n; ++kk) uj[kk] = u[kk * m + j];
        if (kind == CircuitKind::aggregation) {
          honest_aggregation(c, 1, k, uj);
        } else if (kind == CircuitKind::update) {
          honest_update(c, std::span(&w[j], 1), uj);
        } else {
          honest_cut_update(c, std::span(&w[j], 1), k[0], uj);
        }
        break;
      } catch (const QuantizationError&) {
      }
    }
  }
  switch (kind) {
    case CircuitKind::aggregation: return honest_aggregation(c, m, k, u);
    case CircuitKind::update: return honest_update(c, w, u);
    default: return honest_cut_update(c, w, k[0], u);
  }
}

ConstraintSystem build_circuit(const CircuitInstance& inst, const CircuitConstants& c) {
  switch (inst.kind) {
    case CircuitKind::empty: return build_empty_circuit();
    case CircuitKind::aggregation: return build_aggregation_circuit(inst.m, inst.n, c);
    case CircuitKind::update: return build_update_circuit(inst.m, c);
    case CircuitKind::cut_update: return build_cut_update_circuit(inst.m, c);
  }
  throw CircuitError("unknown circuit kind");
}

std::span<const std::int64_t> instance_output(const CircuitInstance& inst) {
  return std::span(inst.public_values).first(inst.m);
}

}  // namespace vsl
