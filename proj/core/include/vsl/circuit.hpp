#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vsl/field.hpp"
#include "vsl/quant.hpp"
#include "vsl/sha256.hpp"

namespace vsl {

inline constexpr unsigned kDefaultEta = 22;
inline constexpr unsigned kMinEta = 22;
inline constexpr unsigned kMaxEta = 96;

enum class CircuitKind : std::uint8_t {
  empty = 0,
  aggregation = 1,  // U' = K . U
  update = 2,       // W' = W + U'
  cut_update = 3,   // W' = W + K . U, U' kept private
};

std::string_view to_string(CircuitKind k);
CircuitKind circuit_kind_from_string(std::string_view s);

/// Quantization parameters baked into a circuit at build time, plus the
/// precision exponent eta.
struct CircuitConstants {
  unsigned eta = kDefaultEta;
  QuantParams k;
  QuantParams u;
  QuantParams u_prime;
  QuantParams w;
  QuantParams w_prime;

  bool operator==(const CircuitConstants&) const = default;
};

/// log2 of the integer constant that replaces 2^eta * s_K s_U / s_U':
/// eta + f_U' - f_K - f_U. Throws CircuitError("scale exponent underflow") if negative.
unsigned aggregation_shift(const CircuitConstants& c);
/// log2 of 2^eta * s_W / s_W' and of 2^eta * s_U' / s_W'.
unsigned update_shift_w(const CircuitConstants& c);
unsigned update_shift_u(const CircuitConstants& c);

struct Term {
  std::uint32_t var;
  Fr coeff;
};
using LinearCombination = std::vector<Term>;

/// <A, w> * <B, w> = <C, w>.
struct Constraint {
  LinearCombination a;
  LinearCombination b;
  LinearCombination c;
};

/// A named, contiguous run of variables ("W'", "W", "K", "U'", "U", "P",
/// "Ra", "Ru").
struct VariableBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t count = 0;
};

/// Rank-1 constraint system. Variable 0 is the constant one; variables
/// 1..num_public form the statement; the rest are private.
struct ConstraintSystem {
  CircuitKind kind = CircuitKind::empty;
  std::size_t m = 0;
  std::size_t n = 0;
  CircuitConstants constants;
  std::size_t num_public = 0;
  std::size_t num_private = 0;
  std::vector<Constraint> constraints;
  std::vector<VariableBlock> blocks;

  std::size_t num_variables() const { return 1 + num_public + num_private; }
  const VariableBlock& block(std::string_view name) const;
  std::string variable_name(std::size_t index) const;
};

struct Witness {
  std::vector<Fr> values;  // [1, public..., private...]
  std::size_t num_public = 0;

  std::span<const Fr> statement() const { return {values.data() + 1, num_public}; }
};

/// Per output j, with n = 1:
///   (K - z_K) * c (U_j - z_U) = 2^eta (U'_j - z_U') + sum_i 2^i Ra_j,i
/// plus eta booleanity constraints on the remainder bits, so the remainder
/// lies in [0, 2^eta). For n > 1 each product (K_k - z_K)(U_kj - z_U) gets
/// its own constraint and the sum feeds a linear one.
/// Public: U' (m), K (n). Private: U (n * m, row-major), products, bits.
ConstraintSystem build_aggregation_circuit(std::size_t m, std::size_t n,
                                           const CircuitConstants& constants);

/// Per element j:
///   c_W (W_j - z_W) + c_U (U'_j - z_U') = 2^eta (W'_j - z_W') + sum_i 2^i Ru_j,i
/// Public: W' (m), W (m). Private: U' (m), bits.
ConstraintSystem build_update_circuit(std::size_t m, const CircuitConstants& constants);

/// Aggregation (n = 1) feeding update, with U' as an internal wire.
/// Public: W' (m), W (m), K (1). Private: U (m), U' (m), Ra bits, Ru bits.
ConstraintSystem build_cut_update_circuit(std::size_t m, const CircuitConstants& constants);

ConstraintSystem build_empty_circuit();

/// Computes the remainders and their bit decompositions.
///
/// public_values follow the circuit's statement order; private_values are
/// U for aggregation and cut_update (U' is derived in the latter) and U' for
/// update. Throws CircuitError("inconsistent statement") when a remainder
/// leaves [0, 2^eta), i.e. the public output is not the honest quantization
/// of the private inputs.
Witness generate_witness(const ConstraintSystem& cs, std::span<const std::int64_t> public_values,
                         std::span<const std::int64_t> private_values);

/// Throws CircuitError on length mismatch.
bool is_satisfied(const ConstraintSystem& cs, const Witness& witness);
/// Index of the first violated constraint, or -1.
std::ptrdiff_t first_unsatisfied(const ConstraintSystem& cs, std::span<const Fr> assignment);

Fr evaluate(const LinearCombination& lc, std::span<const Fr> assignment);

/// Remainder value recomposed from the bit block ("Ra" or "Ru") for output j.
__int128 remainder(const ConstraintSystem& cs, const Witness& w, std::string_view block, std::size_t j);

// --- encodings -------------------------------------------------------------

/// Compact form consumed by the Groth16 backend: u32 num_public, u32
/// num_private, u32 num_constraints, then A, B, C of each constraint as
/// u32 count followed by (u32 var, 32-byte LE coefficient) pairs.
Bytes encode_r1cs(const ConstraintSystem& cs);

/// Header (kind, m, n, constants) followed by the r1cs section.
Bytes encode_circuit(const ConstraintSystem& cs);
/// Rebuilds the circuit from the header and rejects encodings whose
/// constraint section differs from the rebuilt one.
ConstraintSystem decode_circuit(ByteView bytes);
Digest circuit_digest(const ConstraintSystem& cs);

/// Variable table, constraint triplets in sparse (index, coefficient) form,
/// and the constants block.
nlohmann::json circuit_to_json(const ConstraintSystem& cs);

/// u32 LE element count followed by 32-byte LE field elements.
Bytes encode_witness(const Witness& w);
Witness decode_witness(ByteView bytes, std::size_t num_public);

void to_json(nlohmann::json& j, const CircuitConstants& c);
void from_json(const nlohmann::json& j, CircuitConstants& c);

}  // namespace vsl
