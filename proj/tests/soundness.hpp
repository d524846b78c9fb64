#pragma once

#include <cstdint>
#include <vector>

#include "adversary.hpp"
#include "vsl/backend.hpp"
#include "vsl/error.hpp"
#include "vsl/instance.hpp"

namespace vsl::soundness {

struct Outcome {
  bool witness_refused = false;  // generate_witness threw
  bool honest_rejected = false;  // a proof from the regular path failed to verify
  bool forged_rejected = false;  // hand-built proof with the best-fitting remainder
  bool detected() const { return (witness_refused || honest_rejected) && forged_rejected; }
};

/// U_j += delta on an n = 1 aggregation instance with the statement held
/// fixed. The forged attempt writes the remainder the main constraint would
/// need, truncated to eta bits, so it probes every admissible remainder at once.
inline Outcome perturb_aggregation(const ConstraintSystem& cs, const ProofBackend& backend,
                                   const KeyPair& keys, const CircuitInstance& inst, std::size_t j,
                                   std::int64_t delta) {
  Outcome o;
  auto priv = inst.private_values;
  priv.at(j) += delta;
  const Statement x = Statement::from_integers(inst.public_values);
  try {
    const Witness w = generate_witness(cs, inst.public_values, priv);
    try {
      const Proof p = backend.prove(keys.pk, x, w);
      o.honest_rejected = backend.verify(keys.vk, x, p) == VerifyResult::reject;
    } catch (const BackendError&) {
      o.honest_rejected = true;
    }
  } catch (const Error&) {
    o.witness_refused = true;
  }

  const auto& c = cs.constants;
  const Witness honest = generate_witness(cs, inst);
  std::vector<Fr> forged = honest.values;
  forged[cs.block("U").offset + j] = Fr::from_i64(priv[j]);
  const __int128 shift = static_cast<__int128>(1) << aggregation_shift(c);
  const __int128 k_c = inst.public_values[inst.m] - c.k.zero_point;
  const __int128 u_c = priv[j] - c.u.zero_point;
  const __int128 out_c = inst.public_values[j] - c.u_prime.zero_point;
  const __int128 needed = shift * k_c * u_c - (static_cast<__int128>(1) << c.eta) * out_c;
  adversary::overwrite_bits(forged, cs, "Ra", j, needed);
  const Proof fake = adversary::forge_mock_proof(keys.vk, x, forged);
  o.forged_rejected = make_backend(BackendId::mock)->verify(keys.vk, x, fake) == VerifyResult::reject;
  return o;
}

}  // namespace vsl::soundness
