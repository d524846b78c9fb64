#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "vsl/bytes.hpp"
#include "vsl/circuit.hpp"
#include "vsl/field.hpp"
#include "vsl/sha256.hpp"

namespace vsl {

inline constexpr std::uint8_t kEncodingVersion = 1;

enum class BackendId : std::uint8_t {
  mock = 1,     // transparent constraint re-check, not zero-knowledge
  groth16 = 2,  // arkworks Groth16 over BN254
};

std::string_view to_string(BackendId id);
BackendId backend_from_string(std::string_view s);

enum class VerifyResult { accept, reject };

/// Public inputs of a proven relation, in circuit order.
struct Statement {
  std::vector<Fr> values;

  static Statement from_integers(std::span<const std::int64_t> v);
  static Statement from_witness(const Witness& w);

  std::size_t size() const { return values.size(); }
  /// version ∥ u32 count ∥ 32-byte LE elements.
  Bytes encode() const;
  static Statement decode(ByteView bytes);
  Digest digest() const { return sha256(encode()); }

  bool operator==(const Statement&) const = default;
};

/// Keys carry the decoded circuit they were made for (null when the backend
/// does not need it, e.g. a Groth16 verifying key) and backend material.
struct ProvingKey {
  BackendId backend = BackendId::mock;
  Digest circuit_digest{};
  std::shared_ptr<const ConstraintSystem> circuit;
  Bytes material;
};

struct VerifyingKey {
  BackendId backend = BackendId::mock;
  Digest circuit_digest{};
  std::shared_ptr<const ConstraintSystem> circuit;
  Bytes material;
  std::size_t num_public = 0;
};

struct KeyPair {
  ProvingKey pk;
  VerifyingKey vk;
};

struct Proof {
  BackendId backend = BackendId::mock;
  Digest circuit_digest{};
  Digest statement_digest{};
  Bytes payload;
  double prove_seconds = 0.0;  // telemetry only, not encoded

  std::size_t size_bytes() const { return payload.size(); }
};

// version ∥ backend ∥ circuit digest ∥ payload, for all three artifacts.
Bytes encode(const ProvingKey& pk);
Bytes encode(const VerifyingKey& vk);
Bytes encode(const Proof& proof);
ProvingKey decode_proving_key(ByteView bytes);
VerifyingKey decode_verifying_key(ByteView bytes);
Proof decode_proof(ByteView bytes);

class ProofBackend {
 public:
  virtual ~ProofBackend() = default;

  virtual BackendId id() const = 0;
  virtual std::size_t max_constraints() const = 0;

  /// Throws BackendError("circuit too large") beyond max_constraints().
  virtual KeyPair setup(const ConstraintSystem& cs, ByteView seed) const = 0;
  /// Refuses with BackendError("unsatisfied relation") when the witness does
  /// not satisfy the circuit on this statement.
  virtual Proof prove(const ProvingKey& pk, const Statement& x, const Witness& w) const = 0;
  /// Never throws on malformed or mismatched inputs; those are rejections.
  virtual VerifyResult verify(const VerifyingKey& vk, const Statement& x, const Proof& p) const = 0;
};

bool backend_available(BackendId id);
/// Throws BackendError("backend unavailable: ...") when not compiled in.
std::unique_ptr<ProofBackend> make_backend(BackendId id);

}  // namespace vsl
