#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "vsl/data.hpp"
#include "vsl/error.hpp"
#include "vsl/protocol.hpp"

using namespace vsl;

namespace {

SimConfig small_config(Mode mode, std::size_t clients) {
  SimConfig c;
  c.mode = mode;
  c.num_clients = clients;
  c.cut_width = 24;
  c.batch_size = 8;
  c.batches_per_epoch = 3;
  c.samples_per_client = 24;
  c.client_hidden = {12};
  c.server_hidden = {12};
  return c;
}

std::vector<RoundReport> run(Session& s, int rounds) {
  std::vector<RoundReport> out;
  for (int i = 0; i < rounds; ++i) out.push_back(s.run_round());
  return out;
}

FaultSpec fault(std::uint32_t client, FaultKind kind, std::uint64_t first = 0,
                std::uint64_t last = std::numeric_limits<std::uint64_t>::max()) {
  return {client, kind, first, last};
}

}  // namespace

TEST(Protocol, HonestZkRunAcceptsEveryone) {
  Session s(small_config(Mode::zk_mock, 2));
  for (const auto& r : run(s, 4)) {
    ASSERT_EQ(r.contributions(), 2u);
    EXPECT_FALSE(r.stalled);
    EXPECT_FALSE(r.verification_skipped);
    EXPECT_TRUE(std::isfinite(r.loss));
    for (const auto& c : r.clients) {
      EXPECT_EQ(c.verdict, ClientVerdict::accepted);
      EXPECT_EQ(c.proof_seconds.size(), 2u);
      EXPECT_EQ(c.verify_seconds.size(), 2u);
      EXPECT_FALSE(c.forward_statement.empty());
      EXPECT_GE(c.timing.total, c.timing.prove);
    }
  }
  const auto log = s.verifier()->log();
  EXPECT_EQ(log.size(), 4u * 2 * 2);
  EXPECT_TRUE(std::all_of(log.begin(), log.end(), [](const auto& r) { return r.result == VerifyResult::accept; }));
  EXPECT_EQ(s.ledger(), nullptr);
  EXPECT_EQ(s.round(), 4u);
}

TEST(Protocol, CutVectorFollowsTheProvenStatement) {
  Session s(small_config(Mode::zk_mock, 1));
  s.run_round();
  const auto c = s.config().circuit_constants();
  for (double v : cut_vector(s.model().client)) {
    // Exactly representable on the W' grid.
    EXPECT_EQ(dequantize(quantize(v, c.w_prime), c.w_prime), v);
  }
}

TEST(Protocol, TamperedStatementIsRejectedAndExcluded) {
  auto cfg = small_config(Mode::zk_mock, 2);
  cfg.faults = {fault(1, FaultKind::tamper_statement)};
  Session s(cfg);
  for (const auto& r : run(s, 3)) {
    EXPECT_EQ(r.outcome(0).verdict, ClientVerdict::accepted);
    EXPECT_EQ(r.outcome(1).verdict, ClientVerdict::rejected_proof);
    EXPECT_EQ(r.outcome(1).stage, "forward");
  }

  auto honest_cfg = small_config(Mode::zk_mock, 1);
  Session honest(honest_cfg);
  run(honest, 3);
  EXPECT_EQ(s.model(), honest.model());
}

TEST(Protocol, DroppedAndCorruptedProofs) {
  auto cfg = small_config(Mode::zk_mock, 3);
  cfg.faults = {fault(1, FaultKind::drop_proof), fault(2, FaultKind::tamper_proof_bytes)};
  Session s(cfg);
  const auto r = s.run_round();
  EXPECT_EQ(r.outcome(0).verdict, ClientVerdict::accepted);
  EXPECT_EQ(r.outcome(1).verdict, ClientVerdict::missing_proof);
  EXPECT_EQ(r.outcome(2).verdict, ClientVerdict::rejected_proof);
  EXPECT_EQ(r.outcome(2).reason, "proof rejected");
}

TEST(Protocol, RejectedClientRejoinsNextRound) {
  auto cfg = small_config(Mode::zk_mock, 3);
  cfg.faults = {fault(2, FaultKind::tamper_statement, 0, 0)};
  Session s(cfg);
  const auto r0 = s.run_round();
  EXPECT_EQ(r0.contributions(), 2u);
  EXPECT_TRUE(s.schedule().resync[2]);
  EXPECT_EQ(s.schedule().rejections[2], 1u);
  const auto r1 = s.run_round();
  EXPECT_EQ(r1.contributions(), 3u);
  EXPECT_FALSE(s.schedule().resync[2]);
  EXPECT_TRUE(r1.suspects.empty());
}

TEST(Protocol, RepeatedRejectionsMarkASuspect) {
  auto cfg = small_config(Mode::zk_mock, 2);
  cfg.faults = {fault(0, FaultKind::drop_proof)};
  cfg.suspect_threshold = 3;
  Session s(cfg);
  const auto rs = run(s, 3);
  EXPECT_TRUE(rs[1].suspects.empty());
  EXPECT_EQ(rs[2].suspects, std::vector<std::uint32_t>{0});
  EXPECT_TRUE(s.schedule().suspect[0]);
  EXPECT_FALSE(s.schedule().suspect[1]);
}

TEST(Protocol, AllRejectedStallsWithoutChangingTheModel) {
  auto cfg = small_config(Mode::zk_mock, 2);
  cfg.faults = {fault(0, FaultKind::tamper_statement), fault(1, FaultKind::tamper_proof_bytes)};
  Session s(cfg);
  const SplitModel before = s.model();
  const auto r = s.run_round();
  EXPECT_TRUE(r.stalled);
  EXPECT_TRUE(std::isnan(r.loss));
  EXPECT_EQ(s.model(), before);
  EXPECT_TRUE(to_json(r).at("loss").is_null());
}

TEST(Protocol, OverflowingUpdateIsSkipped) {
  auto cfg = small_config(Mode::zk_mock, 1);
  cfg.update_bound = 1e-6;
  cfg.lr = 5.0;
  Session s(cfg);
  const SplitModel before = s.model();
  const auto r = s.run_round();
  EXPECT_EQ(r.outcome(0).verdict, ClientVerdict::skipped_overflow);
  EXPECT_EQ(r.outcome(0).stage, "backward");
  EXPECT_EQ(r.outcome(0).reason, "quantization overflow");
  EXPECT_EQ(s.model().client, before.client);
}

TEST(Protocol, BaselineModesSkipVerification) {
  Session none(small_config(Mode::none, 2));
  const auto r = none.run_round();
  EXPECT_TRUE(r.verification_skipped);
  EXPECT_EQ(r.contributions(), 2u);
  EXPECT_TRUE(r.outcome(0).proof_seconds.empty());
  EXPECT_EQ(none.verifier(), nullptr);
  EXPECT_EQ(none.ledger(), nullptr);

  Session chain(small_config(Mode::blockchain, 2));
  run(chain, 3);
  ASSERT_NE(chain.ledger(), nullptr);
  EXPECT_EQ(chain.ledger()->size(), 1u + 3 * 2 * 2);
  EXPECT_TRUE(verify_chain(*chain.ledger()));
  const auto& blocks = chain.ledger()->blocks();
  EXPECT_EQ(blocks[1].sender, 0u);
  EXPECT_EQ(blocks[2].sender, kServerSender);
}

TEST(Protocol, BaselineModesTrainIdentically) {
  Session none(small_config(Mode::none, 2));
  Session chain(small_config(Mode::blockchain, 2));
  run(none, 3);
  run(chain, 3);
  EXPECT_EQ(none.model(), chain.model());
}

TEST(Protocol, ParallelAndSequentialClientsAgree) {
  auto cfg = small_config(Mode::zk_mock, 3);
  cfg.parallel_clients = true;
  Session par(cfg);
  cfg.parallel_clients = false;
  Session seq(cfg);
  run(par, 3);
  run(seq, 3);
  EXPECT_EQ(par.model(), seq.model());
}

TEST(Protocol, OnlyCutLayerTrafficCrossesTheWire) {
  auto cfg = small_config(Mode::zk_mock, 2);
  Session s(cfg);
  std::vector<WireMessage> seen;
  s.set_message_tap([&](const WireMessage& w) { seen.push_back(w); });
  run(s, 2);
  ASSERT_EQ(seen.size(), 2u * 2 * 2);

  const auto shards = make_client_shards(cfg.data_spec(), cfg.num_clients);
  auto contains = [](const Bytes& hay, const Bytes& needle) {
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
  };
  for (const auto& w : seen) {
    const std::string env = w.envelope.dump();
    for (const auto& [key, bytes] : w.attachments) {
      for (const auto& shard : shards) {
        for (Eigen::Index i = 0; i < shard.x.rows(); ++i) {
          const Eigen::MatrixXd row = shard.x.row(i);
          Bytes raw(reinterpret_cast<const std::uint8_t*>(row.data()),
                    reinterpret_cast<const std::uint8_t*>(row.data()) + row.size() * 8);
          ASSERT_FALSE(contains(bytes, raw)) << "raw input row in attachment " << key;
        }
      }
    }
    EXPECT_EQ(env.find("label"), std::string::npos);
  }
  for (const auto& w : seen) {
    const auto msg = from_wire(w);
    EXPECT_EQ(static_cast<std::size_t>(msg.payload.cols()), cfg.cut_width);
  }
}

TEST(Protocol, CanaryChecksPassForHonestClients) {
  auto cfg = small_config(Mode::zk_mock, 2);
  cfg.canary = true;
  Session s(cfg);
  for (const auto& r : run(s, 2)) EXPECT_EQ(r.contributions(), 2u);
}

TEST(Protocol, MissingBackendFailsAtConstruction) {
  if (backend_available(BackendId::groth16)) GTEST_SKIP() << "groth16 is built";
  EXPECT_THROW(Session(small_config(Mode::zk_snark, 1)), BackendError);
}

TEST(Protocol, Groth16RoundWhenAvailable) {
  if (!backend_available(BackendId::groth16)) GTEST_SKIP() << "backend not built";
  auto cfg = small_config(Mode::zk_snark, 2);
  cfg.cut_width = 8;
  cfg.faults = {fault(1, FaultKind::tamper_statement)};
  Session s(cfg);
  const auto r = s.run_round();
  EXPECT_EQ(r.outcome(0).verdict, ClientVerdict::accepted);
  EXPECT_EQ(r.outcome(1).verdict, ClientVerdict::rejected_proof);
}

TEST(Protocol, UnknownParticipantIsAnError) {
  Session s(small_config(Mode::none, 2));
  const std::vector<std::uint32_t> who = {5};
  EXPECT_THROW(s.run_round(who, 0, false), ProtocolError);
}

TEST(Schedule, ExcludeAndContinue) {
  RoundReport r;
  r.clients.resize(2);
  r.clients[0].client = 0;
  r.clients[1].client = 1;
  r.clients[1].verdict = ClientVerdict::rejected_proof;
  Schedule s(2, 2);
  s = exclude_and_continue(s, r, 0);
  EXPECT_FALSE(s.resync[0]);
  s = exclude_and_continue(s, r, 1);
  EXPECT_TRUE(s.resync[1]);
  EXPECT_FALSE(s.suspect[1]);
  s = exclude_and_continue(s, r, 1);
  EXPECT_TRUE(s.suspect[1]);
  r.clients[1].verdict = ClientVerdict::skipped_overflow;
  Schedule t(2, 1);
  t = exclude_and_continue(t, r, 1);
  EXPECT_EQ(t.rejections[1], 0u);
  EXPECT_THROW(exclude_and_continue(t, r, 7), ProtocolError);
}

TEST(CutUpdate, IsMinusLrTimesMeanGradient) {
  Eigen::MatrixXd g(2, 3);
  g << 1, 2, 3, 3, 2, 1;
  const Eigen::VectorXd u = cut_update_vector(g, 0.5);
  EXPECT_DOUBLE_EQ(u(0), -1.0);
  EXPECT_DOUBLE_EQ(u(1), -1.0);
  EXPECT_DOUBLE_EQ(u(2), -1.0);
}
