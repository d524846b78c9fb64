#include <future>
#include <random>

#include <gtest/gtest.h>

#include "conformance.hpp"
#include "vsl/backend.hpp"
#include "vsl/error.hpp"
#include "vsl/instance.hpp"

using namespace vsl;

namespace {

struct Fixture {
  CircuitConstants constants = cut_layer_constants();
  CircuitInstance inst;
  ConstraintSystem cs;
  KeyPair keys;
  Statement x;
  Witness w;
};

Fixture make_fixture(const ProofBackend& b, CircuitKind kind, std::size_t m, std::uint64_t seed) {
  Fixture f;
  std::mt19937_64 rng(seed);
  f.inst = random_instance(kind, m, 1, f.constants, rng);
  f.cs = build_circuit(f.inst, f.constants);
  f.keys = b.setup(f.cs, Bytes{1, 2, 3});
  f.x = Statement::from_integers(f.inst.public_values);
  f.w = generate_witness(f.cs, f.inst);
  return f;
}

std::string expect_backend_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const BackendError& e) {
    return e.what();
  }
  return "<no error>";
}

class BackendSuite : public ::testing::TestWithParam<BackendId> {
 protected:
  void SetUp() override {
    if (!backend_available(GetParam())) GTEST_SKIP() << "backend not built";
    backend = make_backend(GetParam());
  }
  std::unique_ptr<ProofBackend> backend;
};

}  // namespace

TEST_P(BackendSuite, HonestProofsAccept) {
  const int count = GetParam() == BackendId::mock ? 100 : 10;
  std::mt19937_64 rng(1);
  const auto c = cut_layer_constants();
  const auto cs = build_aggregation_circuit(10, 1, c);
  const auto keys = backend->setup(cs, Bytes{9});
  for (int i = 0; i < count; ++i) {
    const auto inst = random_instance(CircuitKind::aggregation, 10, 1, c, rng);
    const auto x = Statement::from_integers(inst.public_values);
    const auto p = backend->prove(keys.pk, x, generate_witness(cs, inst));
    ASSERT_EQ(backend->verify(keys.vk, x, p), VerifyResult::accept) << i;
    EXPECT_GT(p.size_bytes(), 0u);
  }
}

TEST_P(BackendSuite, RefusesUnsatisfyingWitness) {
  auto f = make_fixture(*backend, CircuitKind::cut_update, 5, 2);
  auto bad = f.w;
  bad.values[f.cs.block("U").offset] += Fr::one();
  EXPECT_EQ(expect_backend_error([&] { backend->prove(f.keys.pk, f.x, bad); }), "unsatisfied relation");
  Statement other = f.x;
  other.values[0] += Fr::one();
  EXPECT_EQ(expect_backend_error([&] { backend->prove(f.keys.pk, other, f.w); }), "unsatisfied relation");
}

TEST_P(BackendSuite, EveryStatementElementIsBound) {
  auto f = make_fixture(*backend, CircuitKind::cut_update, 10, 3);
  const auto p = backend->prove(f.keys.pk, f.x, f.w);
  for (std::size_t i = 0; i < f.x.size(); ++i) {
    Statement t = f.x;
    t.values[i] += Fr::one();
    ASSERT_EQ(backend->verify(f.keys.vk, t, p), VerifyResult::reject) << i;
  }
}

TEST_P(BackendSuite, ProofByteCorruptionRejects) {
  auto f = make_fixture(*backend, CircuitKind::aggregation, 10, 4);
  const auto p = backend->prove(f.keys.pk, f.x, f.w);
  std::mt19937_64 rng(5);
  // Exhaustive over the mock payload would be thousands of bytes; sample 100
  // positions plus the ends.
  std::vector<std::size_t> positions = {0, p.payload.size() - 1};
  for (int i = 0; i < 100; ++i) positions.push_back(rng() % p.payload.size());
  for (auto pos : positions) {
    Proof t = p;
    t.payload[pos] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    ASSERT_EQ(backend->verify(f.keys.vk, f.x, t), VerifyResult::reject) << pos;
  }
}

TEST_P(BackendSuite, KeysDoNotCrossCircuits) {
  auto a = make_fixture(*backend, CircuitKind::aggregation, 4, 6);
  auto b = make_fixture(*backend, CircuitKind::aggregation, 5, 7);
  const auto pb = backend->prove(b.keys.pk, b.x, b.w);
  EXPECT_EQ(backend->verify(a.keys.vk, b.x, pb), VerifyResult::reject);
  EXPECT_THROW(backend->prove(a.keys.pk, b.x, b.w), BackendError);
}

TEST_P(BackendSuite, EmptyCircuitAcceptsEmptyStatement) {
  const auto cs = build_empty_circuit();
  const auto keys = backend->setup(cs, {});
  Witness w;
  w.values = {Fr::one()};
  const Statement x;
  const auto p = backend->prove(keys.pk, x, w);
  EXPECT_EQ(backend->verify(keys.vk, x, p), VerifyResult::accept);
}

TEST_P(BackendSuite, SerializationRoundTrips) {
  auto f = make_fixture(*backend, CircuitKind::update, 6, 8);
  const auto p = backend->prove(f.keys.pk, f.x, f.w);
  const Bytes pb = encode(p), vkb = encode(f.keys.vk), pkb = encode(f.keys.pk);
  EXPECT_EQ(encode(decode_proof(pb)), pb);
  EXPECT_EQ(encode(decode_verifying_key(vkb)), vkb);
  EXPECT_EQ(encode(decode_proving_key(pkb)), pkb);
  EXPECT_EQ(Statement::decode(f.x.encode()), f.x);

  const auto vk2 = decode_verifying_key(vkb);
  const auto p2 = backend->prove(decode_proving_key(pkb), f.x, f.w);
  EXPECT_EQ(backend->verify(vk2, Statement::decode(f.x.encode()), decode_proof(encode(p2))),
            VerifyResult::accept);
}

TEST_P(BackendSuite, TruncationIsADecodeError) {
  auto f = make_fixture(*backend, CircuitKind::update, 3, 9);
  const auto p = backend->prove(f.keys.pk, f.x, f.w);
  const Bytes pb = encode(p), vkb = encode(f.keys.vk), xb = f.x.encode();
  for (std::size_t n = 0; n < pb.size(); ++n) {
    ASSERT_THROW(decode_proof(ByteView(pb).first(n)), DecodeError) << n;
  }
  for (std::size_t n = 0; n < vkb.size(); n += 1 + n / 8) {
    ASSERT_THROW(decode_verifying_key(ByteView(vkb).first(n)), DecodeError) << n;
  }
  for (std::size_t n = 0; n < xb.size(); ++n) {
    ASSERT_THROW(Statement::decode(ByteView(xb).first(n)), DecodeError) << n;
  }
}

TEST_P(BackendSuite, VersionAndRoleAreChecked) {
  auto f = make_fixture(*backend, CircuitKind::update, 3, 10);
  Bytes pb = encode(backend->prove(f.keys.pk, f.x, f.w));
  pb[0] = 9;
  try {
    decode_proof(pb);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_NE(std::string(e.what()).find("version mismatch"), std::string::npos);
  }
  EXPECT_THROW(decode_proving_key(encode(f.keys.vk)), DecodeError);
  EXPECT_THROW(decode_verifying_key(encode(f.keys.pk)), DecodeError);
}

TEST_P(BackendSuite, ConcurrentProvingAndVerifying) {
  auto f = make_fixture(*backend, CircuitKind::cut_update, 8, 11);
  std::vector<std::future<VerifyResult>> jobs;
  for (int i = 0; i < 4; ++i) {
    jobs.push_back(std::async(std::launch::async, [&] {
      return backend->verify(f.keys.vk, f.x, backend->prove(f.keys.pk, f.x, f.w));
    }));
  }
  for (auto& j : jobs) EXPECT_EQ(j.get(), VerifyResult::accept);
}

TEST_P(BackendSuite, ConformanceCorpus) {
  for (const auto& c : conformance::corpus()) {
    EXPECT_EQ(conformance::run_case(*backend, c), c.expected) << c.name;
  }
}

INSTANTIATE_TEST_SUITE_P(All, BackendSuite, ::testing::Values(BackendId::mock, BackendId::groth16),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(MockBackend, SetupIsDeterministic) {
  const auto b = make_backend(BackendId::mock);
  const auto cs = build_update_circuit(4, cut_layer_constants());
  const auto k1 = b->setup(cs, Bytes{1});
  const auto k2 = b->setup(cs, Bytes{1});
  EXPECT_EQ(encode(k1.pk), encode(k2.pk));
  EXPECT_EQ(encode(k1.vk), encode(k2.vk));
  EXPECT_NE(encode(b->setup(cs, Bytes{2}).vk), encode(k1.vk));
  EXPECT_EQ(k1.pk.circuit_digest, k1.vk.circuit_digest);
  EXPECT_EQ(b->max_constraints(), std::size_t{1} << 24);
}

TEST(Groth16Backend, ProofSizeIsConstantInWidth) {
  if (!backend_available(BackendId::groth16)) GTEST_SKIP() << "backend not built";
  const auto b = make_backend(BackendId::groth16);
  std::size_t size = 0;
  for (std::size_t m : {2u, 20u}) {
    auto f = make_fixture(*b, CircuitKind::cut_update, m, 12);
    const auto p = b->prove(f.keys.pk, f.x, f.w);
    if (size == 0) size = p.size_bytes();
    EXPECT_EQ(p.size_bytes(), size);
  }
}

TEST(Groth16Backend, UnavailableIsReported) {
  if (backend_available(BackendId::groth16)) GTEST_SKIP() << "backend is built";
  EXPECT_NE(expect_backend_error([] { make_backend(BackendId::groth16); }).find("backend unavailable"),
            std::string::npos);
}

TEST(BackendNames, RoundTrip) {
  EXPECT_EQ(backend_from_string("mock"), BackendId::mock);
  EXPECT_EQ(backend_from_string("groth16"), BackendId::groth16);
  EXPECT_THROW(backend_from_string("plonk"), ConfigError);
}
