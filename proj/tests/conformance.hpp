#pragma once

// Shared conformance corpus: every backend must reach the same verdict on
// each case. Cases are generated from fixed seeds, so the corpus is the same
// on every run and every machine.

#include <random>
#include <string>
#include <vector>

#include "vsl/backend.hpp"
#include "vsl/error.hpp"
#include "vsl/instance.hpp"

namespace vsl::conformance {

enum class Mutation {
  none,
  statement_plus_one,    // statement[index] += 1
  statement_other,       // statement of a different honest instance
  statement_short,       // last element dropped
  proof_byte_flip,       // payload[index % size] ^= 0x01
  proof_truncate,        // payload loses its last byte
  proof_empty,           // payload cleared
  foreign_proof,         // honest proof for another circuit
  foreign_key,           // honest proof checked against another circuit's key
  wrong_circuit_digest,  // proof header names a different circuit
};

struct Case {
  std::string name;
  CircuitKind kind = CircuitKind::aggregation;
  std::size_t m = 4;
  std::uint64_t seed = 0;
  Mutation mutation = Mutation::none;
  std::size_t index = 0;
  VerifyResult expected = VerifyResult::accept;
};

inline std::vector<Case> corpus() {
  std::vector<Case> out;
  auto add = [&](std::string name, CircuitKind k, std::size_t m, std::uint64_t seed, Mutation mu,
                 std::size_t index, VerifyResult expected) {
    out.push_back({std::move(name), k, m, seed, mu, index, expected});
  };
  const auto A = VerifyResult::accept;
  const auto R = VerifyResult::reject;
  for (auto kind : {CircuitKind::aggregation, CircuitKind::update, CircuitKind::cut_update}) {
    const std::string k(to_string(kind));
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      add(k + "/honest/" + std::to_string(seed), kind, 4, seed, Mutation::none, 0, A);
    }
    add(k + "/honest/m10", kind, 10, 7, Mutation::none, 0, A);
    for (std::size_t i : {0u, 3u, 5u, 8u}) {
      add(k + "/statement+1/" + std::to_string(i), kind, 4, 11, Mutation::statement_plus_one, i, R);
    }
    add(k + "/statement-other", kind, 4, 12, Mutation::statement_other, 0, R);
    add(k + "/statement-short", kind, 4, 13, Mutation::statement_short, 0, R);
    for (std::size_t i : {0u, 1u, 31u, 64u, 100u}) {
      add(k + "/proof-flip/" + std::to_string(i), kind, 4, 14, Mutation::proof_byte_flip, i, R);
    }
    add(k + "/proof-truncate", kind, 4, 15, Mutation::proof_truncate, 0, R);
    add(k + "/proof-empty", kind, 4, 16, Mutation::proof_empty, 0, R);
    add(k + "/foreign-proof", kind, 4, 17, Mutation::foreign_proof, 0, R);
    add(k + "/foreign-key", kind, 4, 18, Mutation::foreign_key, 0, R);
    add(k + "/wrong-digest", kind, 4, 19, Mutation::wrong_circuit_digest, 0, R);
  }
  add("empty/honest", CircuitKind::empty, 0, 0, Mutation::none, 0, A);
  add("empty/statement-long", CircuitKind::empty, 0, 0, Mutation::statement_plus_one, 0, R);
  return out;
}

/// Runs one case end to end on `backend`. Setup seeds derive from the case
/// seed so reruns are reproducible.
inline VerifyResult run_case(const ProofBackend& backend, const Case& c) {
  const auto constants = cut_layer_constants();
  std::mt19937_64 rng(c.seed);
  const Bytes setup_seed = {static_cast<std::uint8_t>(c.seed), 0x5a};

  CircuitInstance inst;
  if (c.kind == CircuitKind::empty) {
    inst.kind = CircuitKind::empty;
  } else {
    inst = random_instance(c.kind, c.m, 1, constants, rng);
  }
  const auto cs = build_circuit(inst, constants);
  const auto keys = backend.setup(cs, setup_seed);
  Statement x = Statement::from_integers(inst.public_values);
  Proof proof = backend.prove(keys.pk, x, generate_witness(cs, inst));
  VerifyingKey vk = keys.vk;

  switch (c.mutation) {
    case Mutation::none: break;
    case Mutation::statement_plus_one:
      if (x.values.empty()) {
        x.values.push_back(Fr::one());
      } else {
        x.values.at(c.index % x.size()) += Fr::one();
      }
      break;
    case Mutation::statement_other: {
      const auto other = random_instance(c.kind, c.m, 1, constants, rng);
      x = Statement::from_integers(other.public_values);
      break;
    }
    case Mutation::statement_short: x.values.pop_back(); break;
    case Mutation::proof_byte_flip: proof.payload.at(c.index % proof.payload.size()) ^= 0x01; break;
    case Mutation::proof_truncate: proof.payload.pop_back(); break;
    case Mutation::proof_empty: proof.payload.clear(); break;
    case Mutation::foreign_proof:
    case Mutation::foreign_key: {
      const auto other = random_instance(c.kind, c.m + 1, 1, constants, rng);
      const auto other_cs = build_circuit(other, constants);
      const auto other_keys = backend.setup(other_cs, setup_seed);
      if (c.mutation == Mutation::foreign_key) {
        vk = other_keys.vk;
      } else {
        x = Statement::from_integers(other.public_values);
        proof = backend.prove(other_keys.pk, x, generate_witness(other_cs, other));
      }
      break;
    }
    case Mutation::wrong_circuit_digest: proof.circuit_digest[0] ^= 0xff; break;
  }
  return backend.verify(vk, x, proof);
}

}  // namespace vsl::conformance
