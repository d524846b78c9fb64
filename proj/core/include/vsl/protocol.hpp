#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsl/backend.hpp"
#include "vsl/config.hpp"
#include "vsl/instance.hpp"
#include "vsl/ledger.hpp"
#include "vsl/message.hpp"
#include "vsl/nn.hpp"

namespace vsl {

/// Holds proving keys and produces proofs on behalf of workers. Sees witnesses.
class ProverEntity {
 public:
  explicit ProverEntity(std::shared_ptr<const ProofBackend> backend) : backend_(std::move(backend)) {}

  void register_key(const std::string& circuit, ProvingKey pk);
  /// Throws ProtocolError("no proving key registered for ...") on a registry miss.
  Proof prove(const std::string& circuit, const Statement& x, const Witness& w) const;

 private:
  std::shared_ptr<const ProofBackend> backend_;
  std::map<std::string, ProvingKey> keys_;
};

struct VerificationRecord {
  std::string circuit;
  std::uint32_t sender = 0;
  std::uint64_t round = 0;
  MessageKind kind = MessageKind::smashed_forward;
  VerifyResult result = VerifyResult::reject;
};

/// Holds verifying keys and answers accept/reject. Never handles witnesses.
class VerifierEntity {
 public:
  explicit VerifierEntity(std::shared_ptr<const ProofBackend> backend)
      : backend_(std::move(backend)) {}

  void register_key(const std::string& circuit, VerifyingKey vk);
  /// Safe to call concurrently; every call is appended to the log.
  VerifyResult verify(const std::string& circuit, const RoundMessage& msg) const;

  std::vector<VerificationRecord> log() const;

 private:
  std::shared_ptr<const ProofBackend> backend_;
  std::map<std::string, VerifyingKey> keys_;
  mutable std::mutex mu_;
  mutable std::vector<VerificationRecord> log_;
};

enum class ClientVerdict { accepted, rejected_proof, missing_proof, skipped_overflow };

std::string_view to_string(ClientVerdict v);

struct ClientTiming {
  double compute = 0.0;    // forward, server step, backward
  double prove = 0.0;      // both proofs
  double verify = 0.0;     // both verifications
  double transport = 0.0;  // wire encode and decode
  double ledger = 0.0;     // hashing and appends
  double total = 0.0;      // wall time of this client's pipeline
};

struct ClientOutcome {
  std::uint32_t client = 0;
  ClientVerdict verdict = ClientVerdict::accepted;
  std::string stage;   // "forward" or "backward" for non-accepted verdicts
  std::string reason;
  double loss = 0.0;
  ClientTiming timing;
  std::vector<double> proof_seconds;
  std::vector<double> verify_seconds;
  std::vector<std::size_t> proof_bytes;
  std::string forward_statement;  // hex digest, empty without a statement
};

struct RoundReport {
  std::uint64_t round = 0;
  Mode mode = Mode::zk_mock;
  std::vector<ClientOutcome> clients;
  double loss = 0.0;  // mean over accepted clients; NaN when none
  bool stalled = false;
  bool verification_skipped = false;
  double wall_seconds = 0.0;
  std::vector<std::uint32_t> suspects;

  std::size_t contributions() const;
  const ClientOutcome& outcome(std::uint32_t client) const;
};

nlohmann::json to_json(const RoundReport& r);

/// Per-client standing across rounds.
struct Schedule {
  std::vector<unsigned> rejections;
  std::vector<bool> suspect;
  std::vector<bool> resync;  // excluded last round; syncs the global cut vector on rejoin
  unsigned threshold = 3;

  Schedule() = default;
  Schedule(std::size_t clients, unsigned suspect_threshold)
      : rejections(clients, 0), suspect(clients, false), resync(clients, false),
        threshold(suspect_threshold) {}
};

/// Records the exclusion of a rejected client; it rejoins the next round.
Schedule exclude_and_continue(Schedule schedule, const RoundReport& report, std::uint32_t client);

/// Registry name of the cut-layer circuit keys.
inline constexpr const char* kCutCircuit = "cut-update";
/// Sender id of server-originated messages.
inline constexpr std::uint32_t kServerSender = 0xffffffffu;

/// A training run: one shared client model relayed between clients, one
/// server model, and the PE/VE pair for the active mode.
class Session {
 public:
  explicit Session(const SimConfig& config);
  Session(const SimConfig& config, SplitModel model, std::vector<Batch> shards);

  /// Every client takes part, in id order.
  RoundReport run_round();
  /// A subset of clients; each uses its batch `batch_index` of the epoch.
  RoundReport run_round(std::span<const std::uint32_t> participants, std::size_t batch_index,
                        bool parallel);

  const SplitModel& model() const { return model_; }
  const SimConfig& config() const { return config_; }
  const Schedule& schedule() const { return schedule_; }
  const Chain* ledger() const { return ledger_ ? &*ledger_ : nullptr; }
  const VerifierEntity* verifier() const { return ve_.get(); }
  const ConstraintSystem& circuit() const { return *circuit_; }
  std::uint64_t round() const { return round_; }
  double setup_seconds() const { return setup_seconds_; }

  /// Called with every message as it crosses the wire.
  void set_message_tap(std::function<void(const WireMessage&)> tap) { tap_ = std::move(tap); }

 private:
  struct ForwardWork;

  void setup_keys();
  ForwardWork client_phase(std::uint32_t client, const Params& snapshot, std::size_t batch_index) const;
  void server_phase(ForwardWork& work, const Params& snapshot, ClientOutcome& out);
  WireMessage send(const RoundMessage& msg, ClientTiming& t) const;
  RoundMessage receive(const WireMessage& wire, ClientTiming& t) const;
  void record(const RoundMessage& msg, ClientTiming& t);
  std::optional<Digest> canary_digest(const Params& w_c) const;

  SimConfig config_;
  CircuitConstants constants_;
  SplitModel model_;
  std::vector<Batch> shards_;
  Batch canary_batch_;
  std::shared_ptr<const ConstraintSystem> circuit_;
  std::shared_ptr<const ProofBackend> backend_;
  std::unique_ptr<ProverEntity> pe_;
  std::unique_ptr<VerifierEntity> ve_;
  std::optional<Chain> ledger_;
  Schedule schedule_;
  std::uint64_t round_ = 0;
  std::int64_t k_q_ = 0;
  double setup_seconds_ = 0.0;
  std::function<void(const WireMessage&)> tap_;
};

/// Real-valued cut-layer update -lr * (1/|B|) * sum_i g_z^(i).
Eigen::VectorXd cut_update_vector(const Eigen::MatrixXd& g_z, double lr);

}  // namespace vsl
