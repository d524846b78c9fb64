#include <gtest/gtest.h>

#include "vsl/error.hpp"
#include "vsl/instance.hpp"
#include "vsl/message.hpp"

using namespace vsl;

namespace {

RoundMessage sample(bool with_proof) {
  RoundMessage m;
  m.kind = MessageKind::smashed_forward;
  m.sender = 3;
  m.round = 12;
  m.payload = Eigen::MatrixXd::Random(4, 5);
  m.loss = 0.25;
  if (with_proof) {
    const auto c = cut_layer_constants();
    std::mt19937_64 rng(1);
    const auto inst = random_instance(CircuitKind::cut_update, 5, 1, c, rng);
    const auto cs = build_circuit(inst, c);
    const auto backend = make_backend(BackendId::mock);
    const auto keys = backend->setup(cs, {});
    m.statement = Statement::from_integers(inst.public_values);
    m.proof = backend->prove(keys.pk, *m.statement, generate_witness(cs, inst));
    m.canary = sha256(Bytes{1, 2});
  }
  return m;
}

}  // namespace

TEST(Matrix, EncodingIsExact) {
  Eigen::MatrixXd m(2, 3);
  m << 1.0, -0.0, 1e-300, std::numeric_limits<double>::max(), 0.1, -7.5;
  const Bytes b = encode_matrix(m);
  EXPECT_EQ(b.size(), 16u + 6 * 8);
  const auto back = decode_matrix(b);
  EXPECT_EQ(back, m);
  EXPECT_TRUE(std::signbit(back(0, 1)));
  EXPECT_THROW(decode_matrix(ByteView(b).first(b.size() - 1)), DecodeError);
}

TEST(Wire, RoundTripWithAndWithoutProof) {
  for (bool with_proof : {false, true}) {
    const auto msg = sample(with_proof);
    const auto wire = to_wire(msg);
    const auto back = from_wire(wire);
    EXPECT_EQ(back.payload, msg.payload);
    EXPECT_EQ(back.sender, msg.sender);
    EXPECT_EQ(back.round, msg.round);
    EXPECT_EQ(back.statement.has_value(), with_proof);
    EXPECT_EQ(canonical_encoding(back), canonical_encoding(msg));
    EXPECT_GT(wire.size_bytes(), 4u * 5 * 8);
  }
}

TEST(Wire, TamperedAttachmentIsRejected) {
  auto wire = to_wire(sample(true));
  auto& bytes = wire.attachments.begin()->second;
  bytes.back() ^= 1;
  EXPECT_THROW(from_wire(wire), DecodeError);
  auto missing = to_wire(sample(true));
  missing.attachments.erase(missing.attachments.begin());
  EXPECT_THROW(from_wire(missing), DecodeError);
}

TEST(Canonical, EveryFieldIsCovered) {
  const auto base = sample(true);
  const Bytes ref = canonical_encoding(base);
  auto changed = [&](auto edit) {
    auto m = base;
    edit(m);
    return canonical_encoding(m) != ref;
  };
  EXPECT_TRUE(changed([](RoundMessage& m) { m.kind = MessageKind::gradient_backward; }));
  EXPECT_TRUE(changed([](RoundMessage& m) { m.sender += 1; }));
  EXPECT_TRUE(changed([](RoundMessage& m) { m.round += 1; }));
  EXPECT_TRUE(changed([](RoundMessage& m) { m.payload(1, 1) += 1e-12; }));
  // Forward messages carry no loss; backward ones bind it.
  EXPECT_FALSE(changed([](RoundMessage& m) { m.loss = 0.5; }));
  auto backward = base;
  backward.kind = MessageKind::gradient_backward;
  auto relossed = backward;
  relossed.loss = 0.5;
  EXPECT_NE(canonical_encoding(relossed), canonical_encoding(backward));
  EXPECT_TRUE(changed([](RoundMessage& m) { m.statement->values[0] += Fr::one(); }));
  EXPECT_TRUE(changed([](RoundMessage& m) { m.proof->payload[0] ^= 1; }));
  EXPECT_TRUE(changed([](RoundMessage& m) { m.proof.reset(); }));
  EXPECT_TRUE(changed([](RoundMessage& m) { m.canary.reset(); }));
  EXPECT_EQ(base.payload_digest(), sha256(encode_matrix(base.payload)));
}
