#include <chrono>
#include <random>
#include <string>

#include "backend_impl.hpp"
#include "vsl/error.hpp"

#if VSL_HAVE_GROTH16

extern "C" {
struct VslBuf {
  std::uint8_t* data;
  std::size_t len;
};
int vsl_g16_setup(const std::uint8_t* r1cs, std::size_t r1cs_len, const std::uint8_t* seed,
                  VslBuf* pk_out, VslBuf* vk_out);
int vsl_g16_prove(const std::uint8_t* pk, std::size_t pk_len, const std::uint8_t* r1cs,
                  std::size_t r1cs_len, const std::uint8_t* witness, std::size_t witness_len,
                  const std::uint8_t* seed, VslBuf* proof_out);
int vsl_g16_verify(const std::uint8_t* vk, std::size_t vk_len, const std::uint8_t* inputs,
                   std::size_t inputs_len, const std::uint8_t* proof, std::size_t proof_len);
void vsl_g16_free(VslBuf buf);
}

namespace vsl::detail {
namespace {

class RustBuffer {
 public:
  RustBuffer() = default;
  RustBuffer(const RustBuffer&) = delete;
  RustBuffer& operator=(const RustBuffer&) = delete;
  ~RustBuffer() { vsl_g16_free(buf_); }

  VslBuf* out() { return &buf_; }
  Bytes bytes() const { return Bytes(buf_.data, buf_.data + buf_.len); }

 private:
  VslBuf buf_{nullptr, 0};
};

void check(int rc, const char* what) {
  if (rc == 0) return;
  throw BackendError(std::string(what) + " failed (code " + std::to_string(rc) + ")");
}

Bytes field_bytes(std::span<const Fr> values) {
  Bytes out;
  out.reserve(values.size() * Fr::kBytes);
  for (const auto& v : values) {
    const auto b = v.to_bytes_le();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::array<std::uint8_t, 32> fresh_seed() {
  std::random_device rd;
  std::array<std::uint8_t, 32> s{};
  for (std::size_t i = 0; i < s.size(); i += 4) {
    const auto v = rd();
    for (std::size_t k = 0; k < 4; ++k) s[i + k] = static_cast<std::uint8_t>(v >> (8 * k));
  }
  return s;
}

class Groth16Backend final : public ProofBackend {
 public:
  BackendId id() const override { return BackendId::groth16; }
  std::size_t max_constraints() const override { return std::size_t{1} << 21; }

  KeyPair setup(const ConstraintSystem& cs, ByteView seed) const override {
    if (cs.constraints.size() > max_constraints()) throw BackendError("circuit too large");
    const Bytes r1cs = encode_r1cs(cs);
    const Digest setup_seed = sha256(seed);
    RustBuffer pk, vk;
    check(vsl_g16_setup(r1cs.data(), r1cs.size(), setup_seed.data(), pk.out(), vk.out()),
          "groth16 setup");
    auto shared = std::make_shared<const ConstraintSystem>(cs);
    const Digest digest = circuit_digest(cs);
    return {ProvingKey{id(), digest, shared, pk.bytes()},
            VerifyingKey{id(), digest, nullptr, vk.bytes(), cs.num_public}};
  }

  Proof prove(const ProvingKey& pk, const Statement& x, const Witness& w) const override {
    const auto start = std::chrono::steady_clock::now();
    if (pk.backend != id() || !pk.circuit) throw BackendError("proving key is not a groth16 key");
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
    const Bytes r1cs = encode_r1cs(cs);
    const Bytes witness = field_bytes(w.values);
    const auto seed = fresh_seed();
    RustBuffer out;
    check(vsl_g16_prove(pk.material.data(), pk.material.size(), r1cs.data(), r1cs.size(),
                        witness.data(), witness.size(), seed.data(), out.out()),
          "groth16 prove");
    Proof p;
    p.backend = id();
    p.circuit_digest = pk.circuit_digest;
    p.statement_digest = x.digest();
    p.payload = out.bytes();
    p.prove_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return p;
  }

  VerifyResult verify(const VerifyingKey& vk, const Statement& x, const Proof& p) const override {
    if (!header_matches(vk, x, p, id())) return VerifyResult::reject;
    const Bytes inputs = field_bytes(x.values);
    const int rc = vsl_g16_verify(vk.material.data(), vk.material.size(), inputs.data(),
                                  inputs.size(), p.payload.data(), p.payload.size());
    return rc == 0 ? VerifyResult::accept : VerifyResult::reject;
  }
};

}  // namespace

std::unique_ptr<ProofBackend> make_groth16_backend() { return std::make_unique<Groth16Backend>(); }
bool groth16_compiled() { return true; }

}  // namespace vsl::detail

#else

namespace vsl::detail {

std::unique_ptr<ProofBackend> make_groth16_backend() {
  throw BackendError("backend unavailable: groth16");
}
bool groth16_compiled() { return false; }

}  // namespace vsl::detail

#endif
