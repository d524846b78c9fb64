#include <chrono>

#include "backend_impl.hpp"
#include "vsl/error.hpp"

namespace vsl::detail {
namespace {

constexpr std::string_view kDomain = "vsl-mock-v1";

ByteView domain() { return {reinterpret_cast<const std::uint8_t*>(kDomain.data()), kDomain.size()}; }

Digest transcript_tag(ByteView key_id, const Digest& statement, ByteView private_part) {
  return sha256({domain(), key_id, view(statement), private_part});
}

// Test-only backend: the proof is the private part of the witness plus a
// tag, and verification re-runs every constraint. Nothing is hidden.
class MockBackend final : public ProofBackend {
 public:
  BackendId id() const override { return BackendId::mock; }
  std::size_t max_constraints() const override { return std::size_t{1} << 24; }

  KeyPair setup(const ConstraintSystem& cs, ByteView seed) const override {
    if (cs.constraints.size() > max_constraints()) throw BackendError("circuit too large");
    auto shared = std::make_shared<const ConstraintSystem>(cs);
    const Digest digest = circuit_digest(cs);
    const Digest key_id = sha256({domain(), view(digest), seed});
    const Bytes material(key_id.begin(), key_id.end());
    return {ProvingKey{id(), digest, shared, material},
            VerifyingKey{id(), digest, shared, material, cs.num_public}};
  }

  Proof prove(const ProvingKey& pk, const Statement& x, const Witness& w) const override {
    const auto start = std::chrono::steady_clock::now();
    if (pk.backend != id() || !pk.circuit) throw BackendError("proving key is not a mock key");
    const auto& cs = *pk.circuit;
    if (x.size() != cs.num_public || w.values.size() != cs.num_variables() ||
        w.num_public != cs.num_public) {
      throw BackendError("unsatisfied relation");
    }
    const auto st = w.statement();
    if (!std::equal(st.begin(), st.end(), x.values.begin()) ||
        first_unsatisfied(cs, w.values) >= 0) {
      throw BackendError("unsatisfied relation");
    }

    Proof p;
    p.backend = id();
    p.circuit_digest = pk.circuit_digest;
    p.statement_digest = x.digest();
    ByteWriter priv;
    priv.u32(static_cast<std::uint32_t>(cs.num_private));
    for (std::size_t i = 1 + cs.num_public; i < w.values.size(); ++i) {
      const auto b = w.values[i].to_bytes_le();
      priv.bytes(b);
    }
    const Digest tag = transcript_tag(pk.material, p.statement_digest, priv.data());
    p.payload = std::move(priv).take();
    p.payload.insert(p.payload.end(), tag.begin(), tag.end());
    p.prove_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return p;
  }

  VerifyResult verify(const VerifyingKey& vk, const Statement& x, const Proof& p) const override {
    try {
      if (!header_matches(vk, x, p, id()) || !vk.circuit) return VerifyResult::reject;
      const auto& cs = *vk.circuit;
      if (p.payload.size() < 4 + 32) return VerifyResult::reject;
      const ByteView body(p.payload.data(), p.payload.size() - 32);
      const ByteView tag(p.payload.data() + body.size(), 32);
      const Digest expect = transcript_tag(vk.material, p.statement_digest, body);
      if (!std::equal(tag.begin(), tag.end(), expect.begin())) return VerifyResult::reject;

      ByteReader r(body);
      if (r.u32() != cs.num_private || r.remaining() != cs.num_private * Fr::kBytes) {
        return VerifyResult::reject;
      }
      std::vector<Fr> assignment;
      assignment.reserve(cs.num_variables());
      assignment.push_back(Fr::one());
      assignment.insert(assignment.end(), x.values.begin(), x.values.end());
      for (std::size_t i = 0; i < cs.num_private; ++i) {
        assignment.push_back(Fr::from_bytes_le(r.bytes(Fr::kBytes)));
      }
      return first_unsatisfied(cs, assignment) < 0 ? VerifyResult::accept : VerifyResult::reject;
    } catch (const Error&) {
      return VerifyResult::reject;
    }
  }
};

}  // namespace

std::unique_ptr<ProofBackend> make_mock_backend() { return std::make_unique<MockBackend>(); }

}  // namespace vsl::detail
