#pragma once

// A malicious prover: builds proofs and witnesses without going through the
// honest entry points that refuse bad inputs.

#include <span>
#include <string_view>

#include "vsl/backend.hpp"
#include "vsl/circuit.hpp"

namespace vsl::adversary {

/// Mock-format proof for an arbitrary assignment. The mock transcript tag is
/// computable from public data, so the verifier's constraint re-check is the
/// only thing standing in the way.
inline Proof forge_mock_proof(const VerifyingKey& vk, const Statement& x,
                              std::span<const Fr> assignment) {
  Proof p;
  p.backend = BackendId::mock;
  p.circuit_digest = vk.circuit_digest;
  p.statement_digest = x.digest();
  ByteWriter body;
  const std::size_t first_private = 1 + x.size();
  body.u32(static_cast<std::uint32_t>(assignment.size() - first_private));
  for (std::size_t i = first_private; i < assignment.size(); ++i) body.bytes(assignment[i].to_bytes_le());
  constexpr std::string_view domain = "vsl-mock-v1";
  const ByteView d(reinterpret_cast<const std::uint8_t*>(domain.data()), domain.size());
  const Digest tag = sha256({d, vk.material, view(p.statement_digest), body.data()});
  p.payload = std::move(body).take();
  p.payload.insert(p.payload.end(), tag.begin(), tag.end());
  return p;
}

/// Writes the low eta bits of r into the bit block of output j, whatever r is.
inline void overwrite_bits(std::vector<Fr>& assignment, const ConstraintSystem& cs,
                           std::string_view block, std::size_t j, __int128 r) {
  const auto& b = cs.block(block);
  const unsigned eta = cs.constants.eta;
  for (unsigned i = 0; i < eta; ++i) {
    assignment[b.offset + j * eta + i] = Fr::from_u64(static_cast<std::uint64_t>((r >> i) & 1));
  }
}

}  // namespace vsl::adversary
