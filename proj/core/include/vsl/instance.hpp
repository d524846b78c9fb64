#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "vsl/circuit.hpp"

namespace vsl {

/// Integer inputs for one circuit: the statement in circuit order plus the
/// private values generate_witness expects.
struct CircuitInstance {
  CircuitKind kind = CircuitKind::empty;
  std::size_t m = 0;
  std::size_t n = 1;
  std::vector<std::int64_t> public_values;
  std::vector<std::int64_t> private_values;
};

/// Constants used by the cut-layer circuits: W and W' calibrated on
/// [-weight_bound, weight_bound], U and U' on [-update_bound, update_bound],
/// K on [-1, 1].
CircuitConstants cut_layer_constants(unsigned eta = kDefaultEta, double update_bound = 0.25,
                                     double weight_bound = 2.0);

/// Honest U'_j = floor(c * sum_k (K_k - z_K)(U_kj - z_U) / 2^eta) + z_U'.
/// Throws QuantizationError("quantization overflow") if U' leaves its range.
CircuitInstance honest_aggregation(const CircuitConstants& c, std::size_t m,
                                   std::span<const std::int64_t> k,
                                   std::span<const std::int64_t> u);

/// Honest W'_j = floor((c_W (W_j - z_W) + c_U (U'_j - z_U')) / 2^eta) + z_W'.
CircuitInstance honest_update(const CircuitConstants& c, std::span<const std::int64_t> w,
                              std::span<const std::int64_t> u_prime);

/// Statement (W', W, K) and private U for the composed circuit.
CircuitInstance honest_cut_update(const CircuitConstants& c, std::span<const std::int64_t> w,
                                  std::int64_t k, std::span<const std::int64_t> u);

/// Quantizes real W, K and U with the circuit constants and builds the
/// honest composed instance.
CircuitInstance quantize_cut_update(const CircuitConstants& c, std::span<const double> w, double k,
                                    std::span<const double> u);

/// Uniform in-range inputs, redrawn until the honest outputs fit their ranges.
CircuitInstance random_instance(CircuitKind kind, std::size_t m, std::size_t n,
                                const CircuitConstants& c, std::mt19937_64& rng);

/// The circuit an instance belongs to.
ConstraintSystem build_circuit(const CircuitInstance& inst, const CircuitConstants& c);

inline Witness generate_witness(const ConstraintSystem& cs, const CircuitInstance& inst) {
  return generate_witness(cs, inst.public_values, inst.private_values);
}

/// Index range of the output vector (U' or W') inside public_values.
std::span<const std::int64_t> instance_output(const CircuitInstance& inst);

}  // namespace vsl
