#include "vsl/circuit.hpp"

#include <limits>

#include "vsl/error.hpp"

namespace vsl {
namespace {

using i128 = __int128;

void check_eta(unsigned eta) {
  if (eta < kMinEta || eta > kMaxEta) throw CircuitError("eta outside supported range");
}

unsigned nonneg_shift(long long v) {
  if (v < 0) throw CircuitError("scale exponent underflow");
  return static_cast<unsigned>(v);
}

i128 mul_checked(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw CircuitError("arithmetic overflow in witness");
  return r;
}

i128 add_checked(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) throw CircuitError("arithmetic overflow in witness");
  return r;
}

i128 shl_checked(i128 v, unsigned s) {
  if (s >= 126) {
    if (v == 0) return 0;
    throw CircuitError("arithmetic overflow in witness");
  }
  return mul_checked(v, static_cast<i128>(1) << s);
}

// Floor division by 2^s.
i128 floor_shr(i128 v, unsigned s) { return s >= 127 ? (v < 0 ? -1 : 0) : (v >> s); }

void check_range(std::int64_t q, const QuantParams& p) {
  if (q < p.q_min || q > p.q_max) throw CircuitError("value outside quantized range");
}

class Builder {
 public:
  Builder(CircuitKind kind, std::size_t m, std::size_t n, const CircuitConstants& c) {
    cs_.kind = kind;
    cs_.m = m;
    cs_.n = n;
    cs_.constants = c;
  }

  std::size_t add_block(std::string name, std::size_t count, bool is_public) {
    const std::size_t offset = next_;
    cs_.blocks.push_back({std::move(name), offset, count});
    next_ += count;
    (is_public ? cs_.num_public : cs_.num_private) += count;
    return offset;
  }

  void add(Constraint c) { cs_.constraints.push_back(std::move(c)); }

  // Booleanity of every bit and the weighted sum of the bits as an LC.
  LinearCombination range_bits(std::size_t first_bit, unsigned eta) {
    LinearCombination sum;
    sum.reserve(eta);
    for (unsigned i = 0; i < eta; ++i) {
      const auto b = static_cast<std::uint32_t>(first_bit + i);
      add({{{b, Fr::one()}}, {{b, Fr::one()}, {0, -Fr::one()}}, {}});
      sum.push_back({b, Fr::pow2(i)});
    }
    return sum;
  }

  ConstraintSystem finish() && { return std::move(cs_); }

 private:
  ConstraintSystem cs_;
  std::size_t next_ = 1;
};

// 2^eta (out_j - z_out) + remainder bits.
LinearCombination output_side(std::uint32_t out_var, std::int64_t z_out, unsigned eta,
                              LinearCombination bits) {
  const Fr scale = Fr::pow2(eta);
  LinearCombination c;
  c.reserve(bits.size() + 2);
  c.push_back({out_var, scale});
  if (z_out != 0) c.push_back({0, -(scale * Fr::from_i64(z_out))});
  for (auto& t : bits) c.push_back(t);
  return c;
}

void emit_aggregation(Builder& b, std::size_t m, std::size_t n, const CircuitConstants& c,
                      std::size_t u_prime, std::size_t k, std::size_t u, std::size_t products,
                      std::size_t bits) {
  const unsigned shift = aggregation_shift(c);
  const Fr coeff = Fr::pow2(shift);
  const Fr one = Fr::one();
  for (std::size_t j = 0; j < m; ++j) {
    auto sum = b.range_bits(bits + j * c.eta, c.eta);
    auto out = output_side(static_cast<std::uint32_t>(u_prime + j), c.u_prime.zero_point, c.eta,
                           std::move(sum));
    if (n == 1) {
      LinearCombination a{{static_cast<std::uint32_t>(k), one}};
      if (c.k.zero_point != 0) a.push_back({0, -Fr::from_i64(c.k.zero_point)});
      LinearCombination bb{{static_cast<std::uint32_t>(u + j), coeff}};
      if (c.u.zero_point != 0) bb.push_back({0, -(coeff * Fr::from_i64(c.u.zero_point))});
      b.add({std::move(a), std::move(bb), std::move(out)});
      continue;
    }
    LinearCombination total;
    for (std::size_t kk = 0; kk < n; ++kk) {
      const auto p = static_cast<std::uint32_t>(products + kk * m + j);
      LinearCombination a{{static_cast<std::uint32_t>(k + kk), one}};
      if (c.k.zero_point != 0) a.push_back({0, -Fr::from_i64(c.k.zero_point)});
      LinearCombination bb{{static_cast<std::uint32_t>(u + kk * m + j), one}};
      if (c.u.zero_point != 0) bb.push_back({0, -Fr::from_i64(c.u.zero_point)});
      b.add({std::move(a), std::move(bb), {{p, one}}});
      total.push_back({p, coeff});
    }
    b.add({std::move(total), {{0, one}}, std::move(out)});
  }
}

void emit_update(Builder& b, std::size_t m, const CircuitConstants& c, std::size_t w_prime,
                 std::size_t w, std::size_t u_prime, std::size_t bits) {
  const Fr cw = Fr::pow2(update_shift_w(c));
  const Fr cu = Fr::pow2(update_shift_u(c));
  const Fr offset = -(cw * Fr::from_i64(c.w.zero_point) + cu * Fr::from_i64(c.u_prime.zero_point));
  for (std::size_t j = 0; j < m; ++j) {
    auto sum = b.range_bits(bits + j * c.eta, c.eta);
    auto out = output_side(static_cast<std::uint32_t>(w_prime + j), c.w_prime.zero_point, c.eta,
                           std::move(sum));
    LinearCombination a{{static_cast<std::uint32_t>(w + j), cw},
                        {static_cast<std::uint32_t>(u_prime + j), cu}};
    if (!offset.is_zero()) a.push_back({0, offset});
    b.add({std::move(a), {{0, Fr::one()}}, std::move(out)});
  }
}

void write_bits(std::vector<Fr>& values, std::size_t first, i128 r, unsigned eta) {
  for (unsigned i = 0; i < eta; ++i) {
    values[first + i] = ((r >> i) & 1) ? Fr::one() : Fr::zero();
  }
}

i128 checked_remainder(i128 lhs, i128 out_minus_zero, unsigned eta) {
  const i128 r = add_checked(lhs, -shl_checked(out_minus_zero, eta));
  if (r < 0 || r >= (static_cast<i128>(1) << eta)) throw CircuitError("inconsistent statement");
  return r;
}

void check_lengths(std::span<const std::int64_t> got, std::size_t want, const char* what) {
  if (got.size() != want) throw CircuitError(std::string("wrong number of ") + what);
}

void check_width(std::size_t m) {
  if (m == 0) throw CircuitError("circuit width must be positive");
}

}  // namespace

std::string_view to_string(CircuitKind k) {
  switch (k) {
    case CircuitKind::empty: return "empty";
    case CircuitKind::aggregation: return "aggregation";
    case CircuitKind::update: return "update";
    case CircuitKind::cut_update: return "cut-update";
  }
  return "unknown";
}

CircuitKind circuit_kind_from_string(std::string_view s) {
  if (s == "empty") return CircuitKind::empty;
  if (s == "aggregation") return CircuitKind::aggregation;
  if (s == "update") return CircuitKind::update;
  if (s == "cut-update") return CircuitKind::cut_update;
  throw CircuitError("unknown circuit kind: " + std::string(s));
}

unsigned aggregation_shift(const CircuitConstants& c) {
  return nonneg_shift(static_cast<long long>(c.eta) + c.u_prime.scale_exp - c.k.scale_exp -
                      c.u.scale_exp);
}

unsigned update_shift_w(const CircuitConstants& c) {
  return nonneg_shift(static_cast<long long>(c.eta) + c.w_prime.scale_exp - c.w.scale_exp);
}

unsigned update_shift_u(const CircuitConstants& c) {
  return nonneg_shift(static_cast<long long>(c.eta) + c.w_prime.scale_exp - c.u_prime.scale_exp);
}

const VariableBlock& ConstraintSystem::block(std::string_view name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return b;
  }
  throw CircuitError("no variable block named " + std::string(name));
}

std::string ConstraintSystem::variable_name(std::size_t index) const {
  if (index == 0) return "one";
  for (const auto& b : blocks) {
    if (index < b.offset || index >= b.offset + b.count) continue;
    const std::size_t i = index - b.offset;
    if (b.name == "Ra" || b.name == "Ru") {
      return b.name + "[" + std::to_string(i / constants.eta) + "].bit" +
             std::to_string(i % constants.eta);
    }
    if ((b.name == "U" || b.name == "P") && n > 1) {
      return b.name + "[" + std::to_string(i / m) + "][" + std::to_string(i % m) + "]";
    }
    return b.name + "[" + std::to_string(i) + "]";
  }
  throw CircuitError("variable index out of range");
}

ConstraintSystem build_aggregation_circuit(std::size_t m, std::size_t n,
                                           const CircuitConstants& constants) {
  check_width(m);
  if (n == 0) throw CircuitError("aggregation needs at least one node");
  check_eta(constants.eta);
  aggregation_shift(constants);
  Builder b(CircuitKind::aggregation, m, n, constants);
  const auto u_prime = b.add_block("U'", m, true);
  const auto k = b.add_block("K", n, true);
  const auto u = b.add_block("U", n * m, false);
  const auto products = b.add_block("P", n > 1 ? n * m : 0, false);
  const auto bits = b.add_block("Ra", m * constants.eta, false);
  emit_aggregation(b, m, n, constants, u_prime, k, u, products, bits);
  return std::move(b).finish();
}

ConstraintSystem build_update_circuit(std::size_t m, const CircuitConstants& constants) {
  check_width(m);
  check_eta(constants.eta);
  update_shift_w(constants);
  update_shift_u(constants);
  Builder b(CircuitKind::update, m, 1, constants);
  const auto w_prime = b.add_block("W'", m, true);
  const auto w = b.add_block("W", m, true);
  const auto u_prime = b.add_block("U'", m, false);
  const auto bits = b.add_block("Ru", m * constants.eta, false);
  emit_update(b, m, constants, w_prime, w, u_prime, bits);
  return std::move(b).finish();
}

ConstraintSystem build_cut_update_circuit(std::size_t m, const CircuitConstants& constants) {
  check_width(m);
  check_eta(constants.eta);
  aggregation_shift(constants);
  update_shift_w(constants);
  update_shift_u(constants);
  Builder b(CircuitKind::cut_update, m, 1, constants);
  const auto w_prime = b.add_block("W'", m, true);
  const auto w = b.add_block("W", m, true);
  const auto k = b.add_block("K", 1, true);
  const auto u = b.add_block("U", m, false);
  const auto u_prime = b.add_block("U'", m, false);
  const auto bits_a = b.add_block("Ra", m * constants.eta, false);
  const auto bits_u = b.add_block("Ru", m * constants.eta, false);
  emit_aggregation(b, m, 1, constants, u_prime, k, u, 0, bits_a);
  emit_update(b, m, constants, w_prime, w, u_prime, bits_u);
  return std::move(b).finish();
}

ConstraintSystem build_empty_circuit() {
  ConstraintSystem cs;
  cs.kind = CircuitKind::empty;
  return cs;
}

Witness generate_witness(const ConstraintSystem& cs, std::span<const std::int64_t> public_values,
                         std::span<const std::int64_t> private_values) {
  Witness w;
  w.num_public = cs.num_public;
  w.values.assign(cs.num_variables(), Fr::zero());
  w.values[0] = Fr::one();
  check_lengths(public_values, cs.num_public, "public values");

  const auto& c = cs.constants;
  const std::size_t m = cs.m;
  const std::size_t n = cs.n;
  auto set = [&](std::size_t index, std::int64_t v) { w.values[index] = Fr::from_i64(v); };

  // Aggregation remainder for output j; returns c * sum_k (K_k - z_K)(U_kj - z_U).
  auto scaled_product = [&](std::span<const std::int64_t> k, std::span<const std::int64_t> u,
                            std::size_t j) {
    i128 sum = 0;
    for (std::size_t kk = 0; kk < k.size(); ++kk) {
      sum = add_checked(sum, mul_checked(k[kk] - c.k.zero_point, u[kk * m + j] - c.u.zero_point));
    }
    return shl_checked(sum, aggregation_shift(c));
  };

  auto update_lhs = [&](std::int64_t wj, std::int64_t upj) {
    return add_checked(shl_checked(static_cast<i128>(wj) - c.w.zero_point, update_shift_w(c)),
                       shl_checked(static_cast<i128>(upj) - c.u_prime.zero_point, update_shift_u(c)));
  };

  switch (cs.kind) {
    case CircuitKind::empty:
      check_lengths(private_values, 0, "private values");
      break;

    case CircuitKind::aggregation: {
      check_width(m);
      check_lengths(private_values, n * m, "private values");
      const auto u_prime = public_values.subspan(0, m);
      const auto k = public_values.subspan(m, n);
      for (auto q : u_prime) check_range(q, c.u_prime);
      for (auto q : k) check_range(q, c.k);
      for (auto q : private_values) check_range(q, c.u);
      const auto& ub = cs.block("U");
      const auto& bits = cs.block("Ra");
      for (std::size_t i = 0; i < m; ++i) set(1 + i, u_prime[i]);
      for (std::size_t i = 0; i < n; ++i) set(1 + m + i, k[i]);
      for (std::size_t i = 0; i < n * m; ++i) set(ub.offset + i, private_values[i]);
      if (n > 1) {
        const auto& pb = cs.block("P");
        for (std::size_t kk = 0; kk < n; ++kk) {
          for (std::size_t j = 0; j < m; ++j) {
            w.values[pb.offset + kk * m + j] =
                Fr::from_i128(mul_checked(k[kk] - c.k.zero_point,
                                          private_values[kk * m + j] - c.u.zero_point));
          }
        }
      }
      for (std::size_t j = 0; j < m; ++j) {
        const i128 r = checked_remainder(scaled_product(k, private_values, j),
                                         static_cast<i128>(u_prime[j]) - c.u_prime.zero_point, c.eta);
        write_bits(w.values, bits.offset + j * c.eta, r, c.eta);
      }
      break;
    }

    case CircuitKind::update: {
      check_width(m);
      check_lengths(private_values, m, "private values");
      const auto w_prime = public_values.subspan(0, m);
      const auto w_old = public_values.subspan(m, m);
      for (auto q : w_prime) check_range(q, c.w_prime);
      for (auto q : w_old) check_range(q, c.w);
      for (auto q : private_values) check_range(q, c.u_prime);
      const auto& up = cs.block("U'");
      const auto& bits = cs.block("Ru");
      for (std::size_t i = 0; i < 2 * m; ++i) set(1 + i, public_values[i]);
      for (std::size_t j = 0; j < m; ++j) {
        set(up.offset + j, private_values[j]);
        const i128 r = checked_remainder(update_lhs(w_old[j], private_values[j]),
                                         static_cast<i128>(w_prime[j]) - c.w_prime.zero_point, c.eta);
        write_bits(w.values, bits.offset + j * c.eta, r, c.eta);
      }
      break;
    }

    case CircuitKind::cut_update: {
      check_width(m);
      check_lengths(private_values, m, "private values");
      const auto w_prime = public_values.subspan(0, m);
      const auto w_old = public_values.subspan(m, m);
      const auto k = public_values.subspan(2 * m, 1);
      for (auto q : w_prime) check_range(q, c.w_prime);
      for (auto q : w_old) check_range(q, c.w);
      check_range(k[0], c.k);
      for (auto q : private_values) check_range(q, c.u);
      const auto& ub = cs.block("U");
      const auto& up = cs.block("U'");
      const auto& bits_a = cs.block("Ra");
      const auto& bits_u = cs.block("Ru");
      for (std::size_t i = 0; i < 2 * m + 1; ++i) set(1 + i, public_values[i]);
      for (std::size_t j = 0; j < m; ++j) {
        set(ub.offset + j, private_values[j]);
        // Honest U'_j is the floor quantization of the product.
        const i128 prod = scaled_product(k, private_values, j);
        const i128 up_centered = floor_shr(prod, c.eta);
        const i128 up_q = up_centered + c.u_prime.zero_point;
        if (up_q < c.u_prime.q_min || up_q > c.u_prime.q_max) {
          throw CircuitError("quantization overflow");
        }
        w.values[up.offset + j] = Fr::from_i128(up_q);
        write_bits(w.values, bits_a.offset + j * c.eta, checked_remainder(prod, up_centered, c.eta),
                   c.eta);
        const i128 r = checked_remainder(update_lhs(w_old[j], static_cast<std::int64_t>(up_q)),
                                         static_cast<i128>(w_prime[j]) - c.w_prime.zero_point, c.eta);
        write_bits(w.values, bits_u.offset + j * c.eta, r, c.eta);
      }
      break;
    }
  }
  return w;
}

Fr evaluate(const LinearCombination& lc, std::span<const Fr> assignment) {
  Fr acc;
  const Fr one = Fr::one();
  for (const auto& t : lc) {
    const Fr& v = assignment[t.var];
    acc += (t.coeff == one) ? v : t.coeff * v;
  }
  return acc;
}

std::ptrdiff_t first_unsatisfied(const ConstraintSystem& cs, std::span<const Fr> assignment) {
  if (assignment.size() != cs.num_variables()) throw CircuitError("witness length mismatch");
  if (!assignment.empty() && assignment[0] != Fr::one()) return 0;
  for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
    const auto& con = cs.constraints[i];
    if (evaluate(con.a, assignment) * evaluate(con.b, assignment) != evaluate(con.c, assignment)) {
      return static_cast<std::ptrdiff_t>(i);
    }
  }
  return -1;
}

bool is_satisfied(const ConstraintSystem& cs, const Witness& witness) {
  if (witness.num_public != cs.num_public) throw CircuitError("witness length mismatch");
  return first_unsatisfied(cs, witness.values) < 0;
}

__int128 remainder(const ConstraintSystem& cs, const Witness& w, std::string_view block, std::size_t j) {
  const auto& b = cs.block(block);
  const unsigned eta = cs.constants.eta;
  if (j >= cs.m) throw CircuitError("remainder index out of range");
  i128 r = 0;
  for (unsigned i = 0; i < eta; ++i) {
    const Fr& bit = w.values.at(b.offset + j * eta + i);
    if (bit == Fr::one()) {
      r |= static_cast<i128>(1) << i;
    } else if (!bit.is_zero()) {
      throw CircuitError("remainder bit is not boolean");
    }
  }
  return r;
}

}  // namespace vsl
