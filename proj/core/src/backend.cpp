#include "vsl/backend.hpp"

#include <algorithm>
#include <string>

#include "backend_impl.hpp"
#include "vsl/error.hpp"

namespace vsl {
namespace {

enum class KeyRole : std::uint8_t { proving = 1, verifying = 2 };

void write_header(ByteWriter& w, BackendId id, const Digest& circuit) {
  w.u8(kEncodingVersion);
  w.u8(static_cast<std::uint8_t>(id));
  w.bytes(view(circuit));
}

Digest read_digest(ByteReader& r) {
  Digest d;
  const auto b = r.bytes(d.size());
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

BackendId read_header(ByteReader& r, Digest& circuit) {
  const auto version = r.u8();
  if (version != kEncodingVersion) {
    throw DecodeError("version mismatch: expected " + std::to_string(kEncodingVersion) + ", got " +
                      std::to_string(version));
  }
  const auto id = r.u8();
  if (id != static_cast<std::uint8_t>(BackendId::mock) &&
      id != static_cast<std::uint8_t>(BackendId::groth16)) {
    throw DecodeError("unknown backend id " + std::to_string(id));
  }
  circuit = read_digest(r);
  return static_cast<BackendId>(id);
}

Bytes encode_key(BackendId id, const Digest& digest, KeyRole role, const ConstraintSystem* cs,
                 std::size_t num_public, ByteView material) {
  ByteWriter w;
  write_header(w, id, digest);
  w.u8(static_cast<std::uint8_t>(role));
  if (cs != nullptr) {
    const Bytes body = encode_circuit(*cs);
    w.u64(body.size());
    w.bytes(body);
  } else {
    w.u64(0);
  }
  w.u32(static_cast<std::uint32_t>(num_public));
  w.u64(material.size());
  w.bytes(material);
  return std::move(w).take();
}

struct DecodedKey {
  BackendId backend;
  Digest digest;
  std::shared_ptr<const ConstraintSystem> circuit;
  std::size_t num_public;
  Bytes material;
};

DecodedKey decode_key(ByteView bytes, KeyRole role) {
  ByteReader r(bytes);
  DecodedKey k;
  k.backend = read_header(r, k.digest);
  if (r.u8() != static_cast<std::uint8_t>(role)) throw DecodeError("wrong key role");
  const auto circuit_len = r.u64();
  if (circuit_len > r.remaining()) throw DecodeError("truncated input");
  if (circuit_len > 0) {
    auto cs = std::make_shared<ConstraintSystem>(decode_circuit(r.bytes(circuit_len)));
    if (circuit_digest(*cs) != k.digest) throw DecodeError("circuit digest mismatch");
    k.circuit = std::move(cs);
  }
  k.num_public = r.u32();
  const auto material_len = r.u64();
  if (material_len != r.remaining()) throw DecodeError("truncated input");
  const auto m = r.bytes(material_len);
  k.material.assign(m.begin(), m.end());
  return k;
}

}  // namespace

std::string_view to_string(BackendId id) {
  switch (id) {
    case BackendId::mock: return "mock";
    case BackendId::groth16: return "groth16";
  }
  return "unknown";
}

BackendId backend_from_string(std::string_view s) {
  if (s == "mock") return BackendId::mock;
  if (s == "groth16") return BackendId::groth16;
  throw ConfigError("unknown backend: " + std::string(s));
}

Statement Statement::from_integers(std::span<const std::int64_t> v) {
  Statement s;
  s.values.reserve(v.size());
  for (auto x : v) s.values.push_back(Fr::from_i64(x));
  return s;
}

Statement Statement::from_witness(const Witness& w) {
  const auto st = w.statement();
  return Statement{{st.begin(), st.end()}};
}

Bytes Statement::encode() const {
  ByteWriter w;
  w.u8(kEncodingVersion);
  w.u32(static_cast<std::uint32_t>(values.size()));
  for (const auto& v : values) {
    const auto b = v.to_bytes_le();
    w.bytes(b);
  }
  return std::move(w).take();
}

Statement Statement::decode(ByteView bytes) {
  ByteReader r(bytes);
  if (r.u8() != kEncodingVersion) throw DecodeError("version mismatch");
  const auto count = r.u32();
  if (static_cast<std::size_t>(count) * Fr::kBytes != r.remaining()) throw DecodeError("truncated input");
  Statement s;
  s.values.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) s.values.push_back(Fr::from_bytes_le(r.bytes(Fr::kBytes)));
  return s;
}

Bytes encode(const ProvingKey& pk) {
  return encode_key(pk.backend, pk.circuit_digest, KeyRole::proving, pk.circuit.get(),
                    pk.circuit ? pk.circuit->num_public : 0, pk.material);
}

Bytes encode(const VerifyingKey& vk) {
  return encode_key(vk.backend, vk.circuit_digest, KeyRole::verifying, vk.circuit.get(),
                    vk.num_public, vk.material);
}

Bytes encode(const Proof& proof) {
  ByteWriter w;
  write_header(w, proof.backend, proof.circuit_digest);
  w.bytes(view(proof.statement_digest));
  w.u64(proof.payload.size());
  w.bytes(proof.payload);
  return std::move(w).take();
}

ProvingKey decode_proving_key(ByteView bytes) {
  auto k = decode_key(bytes, KeyRole::proving);
  if (!k.circuit) throw DecodeError("proving key without circuit");
  return {k.backend, k.digest, std::move(k.circuit), std::move(k.material)};
}

VerifyingKey decode_verifying_key(ByteView bytes) {
  auto k = decode_key(bytes, KeyRole::verifying);
  return {k.backend, k.digest, std::move(k.circuit), std::move(k.material), k.num_public};
}

Proof decode_proof(ByteView bytes) {
  ByteReader r(bytes);
  Proof p;
  p.backend = read_header(r, p.circuit_digest);
  p.statement_digest = read_digest(r);
  if (r.u64() != r.remaining()) throw DecodeError("truncated input");
  const auto rest = r.bytes(r.remaining());
  p.payload.assign(rest.begin(), rest.end());
  return p;
}

bool backend_available(BackendId id) {
  return id == BackendId::mock || (id == BackendId::groth16 && detail::groth16_compiled());
}

std::unique_ptr<ProofBackend> make_backend(BackendId id) {
  if (!backend_available(id)) {
    throw BackendError("backend unavailable: " + std::string(to_string(id)) +
                       " (configure with -DVSL_WITH_GROTH16=ON)");
  }
  return id == BackendId::mock ? detail::make_mock_backend() : detail::make_groth16_backend();
}

namespace detail {

bool header_matches(const VerifyingKey& vk, const Statement& x, const Proof& p, BackendId id) {
  return vk.backend == id && p.backend == id && p.circuit_digest == vk.circuit_digest &&
         x.size() == vk.num_public && p.statement_digest == x.digest();
}

}  // namespace detail
}  // namespace vsl
