#include "vsl/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "vsl/data.hpp"
#include "vsl/error.hpp"

namespace vsl {
namespace {

using SteadyClock = std::chrono::steady_clock;

double since(SteadyClock::time_point t0) {
  return std::chrono::duration<double>(SteadyClock::now() - t0).count();
}

std::vector<std::int64_t> quantized_cut(const Params& w_c, const QuantParams& p) {
  const auto& b = cut_vector(w_c);
  return quantize(std::span<const double>(b.data(), static_cast<std::size_t>(b.size())), p).values;
}

// The W block and K of a cut-update statement must match what the receiver
// already holds; otherwise a valid proof about some other vector could pass.
bool statement_binds(const Statement& x, std::size_t m, std::span<const std::int64_t> w,
                     std::int64_t k) {
  if (x.size() != 2 * m + 1 || w.size() != m) return false;
  for (std::size_t j = 0; j < m; ++j) {
    if (x.values[m + j] != Fr::from_i64(w[j])) return false;
  }
  return x.values[2 * m] == Fr::from_i64(k);
}

void flip_byte(Bytes& b) {
  if (!b.empty()) b[b.size() / 2] ^= 0x01;
}

}  // namespace

// --- PE / VE ---------------------------------------------------------------

void ProverEntity::register_key(const std::string& circuit, ProvingKey pk) {
  keys_.insert_or_assign(circuit, std::move(pk));
}

Proof ProverEntity::prove(const std::string& circuit, const Statement& x, const Witness& w) const {
  const auto it = keys_.find(circuit);
  if (it == keys_.end()) throw ProtocolError("no proving key registered for " + circuit);
  return backend_->prove(it->second, x, w);
}

void VerifierEntity::register_key(const std::string& circuit, VerifyingKey vk) {
  keys_.insert_or_assign(circuit, std::move(vk));
}

VerifyResult VerifierEntity::verify(const std::string& circuit, const RoundMessage& msg) const {
  const auto it = keys_.find(circuit);
  if (it == keys_.end()) throw ProtocolError("no verifying key registered for " + circuit);
  VerifyResult result = VerifyResult::reject;
  if (msg.statement && msg.proof) result = backend_->verify(it->second, *msg.statement, *msg.proof);
  std::lock_guard lock(mu_);
  log_.push_back({circuit, msg.sender, msg.round, msg.kind, result});
  return result;
}

std::vector<VerificationRecord> VerifierEntity::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

// --- reports and scheduling ------------------------------------------------

std::string_view to_string(ClientVerdict v) {
  switch (v) {
    case ClientVerdict::accepted: return "Accepted";
    case ClientVerdict::rejected_proof: return "RejectedProof";
    case ClientVerdict::missing_proof: return "MissingProof";
    case ClientVerdict::skipped_overflow: return "SkippedOverflow";
  }
  return "unknown";
}

std::size_t RoundReport::contributions() const {
  std::size_t n = 0;
  for (const auto& c : clients) n += c.verdict == ClientVerdict::accepted;
  return n;
}

const ClientOutcome& RoundReport::outcome(std::uint32_t client) const {
  for (const auto& c : clients) {
    if (c.client == client) return c;
  }
  throw ProtocolError("client " + std::to_string(client) + " did not take part in round " +
                      std::to_string(round));
}

nlohmann::json to_json(const RoundReport& r) {
  auto clients = nlohmann::json::array();
  for (const auto& c : r.clients) {
    nlohmann::json j = {{"client", c.client},
                        {"verdict", std::string(to_string(c.verdict))},
                        {"loss", c.loss},
                        {"timing",
                         {{"compute", c.timing.compute},
                          {"prove", c.timing.prove},
                          {"verify", c.timing.verify},
                          {"transport", c.timing.transport},
                          {"ledger", c.timing.ledger},
                          {"total", c.timing.total}}},
                        {"proof_seconds", c.proof_seconds},
                        {"verify_seconds", c.verify_seconds},
                        {"proof_bytes", c.proof_bytes}};
    if (!c.stage.empty()) j["stage"] = c.stage;
    if (!c.reason.empty()) j["reason"] = c.reason;
    if (!c.forward_statement.empty()) j["statement_digest"] = c.forward_statement;
    clients.push_back(std::move(j));
  }
  nlohmann::json j = {{"round", r.round},
                      {"mode", std::string(to_string(r.mode))},
                      {"contributions", r.contributions()},
                      {"stalled", r.stalled},
                      {"verification_skipped", r.verification_skipped},
                      {"wall_seconds", r.wall_seconds},
                      {"suspects", r.suspects},
                      {"clients", std::move(clients)}};
  j["loss"] = std::isfinite(r.loss) ? nlohmann::json(r.loss) : nlohmann::json(nullptr);
  return j;
}

Schedule exclude_and_continue(Schedule schedule, const RoundReport& report, std::uint32_t client) {
  if (client >= schedule.rejections.size()) throw ProtocolError("unknown client");
  const auto verdict = report.outcome(client).verdict;
  if (verdict == ClientVerdict::accepted) return schedule;
  schedule.resync[client] = true;
  if (verdict == ClientVerdict::rejected_proof || verdict == ClientVerdict::missing_proof) {
    if (++schedule.rejections[client] >= schedule.threshold) schedule.suspect[client] = true;
  }
  return schedule;
}

Eigen::VectorXd cut_update_vector(const Eigen::MatrixXd& g_z, double lr) {
  const double rows = static_cast<double>(std::max<Eigen::Index>(g_z.rows(), 1));
  return (-lr / rows) * g_z.colwise().sum().transpose();
}

// --- session -----------------------------------------------------------------

struct Session::ForwardWork {
  std::uint32_t client = 0;
  Batch batch;
  WireMessage wire;
  ClientOutcome outcome;
  bool skipped = false;
  double wall = 0.0;
};

Session::Session(const SimConfig& config)
    : Session(config, make_split_model(config.model_spec(), derive_seeds(config.seed).model),
              make_client_shards(config.data_spec(), config.num_clients)) {}

Session::Session(const SimConfig& config, SplitModel model, std::vector<Batch> shards)
    : config_(config),
      constants_(config.circuit_constants()),
      model_(std::move(model)),
      shards_(std::move(shards)),
      schedule_(config.num_clients, config.suspect_threshold) {
  config_.validate();
  validate_split_model(model_);
  if (model_.cut_width != config_.cut_width) throw ConfigError("model cut width differs from config");
  if (shards_.size() != config_.num_clients) throw ConfigError("one data shard per client required");
  if (config_.canary) {
    canary_batch_ = make_reference_batch(config_.data_spec(), config_.canary_size,
                                         derive_seeds(config_.seed).canary);
  }
  k_q_ = quantize(1.0, constants_.k);
  if (config_.mode == Mode::blockchain) ledger_.emplace();
  if (is_zk(config_.mode)) setup_keys();
}

void Session::setup_keys() {
  const auto t0 = SteadyClock::now();
  circuit_ = std::make_shared<const ConstraintSystem>(
      build_cut_update_circuit(config_.cut_width, constants_));
  backend_ = make_backend(backend_for(config_.mode));
  ByteWriter seed;
  seed.u64(derive_seeds(config_.seed).setup);
  auto keys = backend_->setup(*circuit_, seed.data());
  pe_ = std::make_unique<ProverEntity>(backend_);
  ve_ = std::make_unique<VerifierEntity>(backend_);
  pe_->register_key(kCutCircuit, std::move(keys.pk));
  ve_->register_key(kCutCircuit, std::move(keys.vk));
  setup_seconds_ = since(t0);
}

std::optional<Digest> Session::canary_digest(const Params& w_c) const {
  if (!config_.canary) return std::nullopt;
  return sha256(encode_matrix(client_forward(w_c, canary_batch_).z));
}

WireMessage Session::send(const RoundMessage& msg, ClientTiming& t) const {
  const auto t0 = SteadyClock::now();
  WireMessage wire = to_wire(msg);
  t.transport += since(t0);
  if (tap_) tap_(wire);
  return wire;
}

RoundMessage Session::receive(const WireMessage& wire, ClientTiming& t) const {
  const auto t0 = SteadyClock::now();
  RoundMessage msg = from_wire(wire);
  t.transport += since(t0);
  return msg;
}

void Session::record(const RoundMessage& msg, ClientTiming& t) {
  if (!ledger_) return;
  const auto t0 = SteadyClock::now();
  ledger_->append(sha256(canonical_encoding(msg)), msg.sender);
  t.ledger += since(t0);
}

Session::ForwardWork Session::client_phase(std::uint32_t client, const Params& snapshot,
                                           std::size_t batch_index) const {
  const auto start = SteadyClock::now();
  ForwardWork work;
  work.client = client;
  work.outcome.client = client;
  auto& t = work.outcome.timing;
  work.batch = batch_slice(shards_.at(client), batch_index, config_.batch_size);

  auto t0 = SteadyClock::now();
  SmashedBatch smashed = client_forward(snapshot, work.batch);
  t.compute += since(t0);

  RoundMessage msg;
  msg.kind = MessageKind::smashed_forward;
  msg.sender = client;
  msg.round = round_;
  msg.payload = std::move(smashed.z);
  msg.canary = canary_digest(snapshot);

  if (is_zk(config_.mode)) {
    try {
      // The client proves its cut vector is the round's W plus its private
      // local update, which is zero for an honest client.
      const std::vector<std::int64_t> local(config_.cut_width, constants_.u.zero_point);
      const auto inst = honest_cut_update(constants_, quantized_cut(snapshot, constants_.w), k_q_, local);
      const Witness witness = generate_witness(*circuit_, inst);
      Statement x = Statement::from_witness(witness);
      t0 = SteadyClock::now();
      Proof proof = pe_->prove(kCutCircuit, x, witness);
      t.prove += since(t0);
      work.outcome.proof_seconds.push_back(proof.prove_seconds);
      work.outcome.proof_bytes.push_back(encode(proof).size());
      work.outcome.forward_statement = to_hex(x.digest());

      for (const auto& f : config_.faults) {
        if (!f.active(client, round_)) continue;
        switch (f.kind) {
          case FaultKind::tamper_statement: x.values[0] += Fr::one(); break;
          case FaultKind::drop_proof: break;
          case FaultKind::tamper_proof_bytes: flip_byte(proof.payload); break;
        }
      }
      const bool dropped = std::any_of(config_.faults.begin(), config_.faults.end(), [&](const auto& f) {
        return f.kind == FaultKind::drop_proof && f.active(client, round_);
      });
      msg.statement = std::move(x);
      if (!dropped) msg.proof = std::move(proof);
    } catch (const QuantizationError& e) {
      work.skipped = true;
      work.outcome.verdict = ClientVerdict::skipped_overflow;
      work.outcome.stage = "forward";
      work.outcome.reason = e.what();
    }
  }
  if (!work.skipped) work.wire = send(msg, t);
  work.wall = since(start);
  return work;
}

void Session::server_phase(ForwardWork& work, const Params& snapshot, ClientOutcome& out) {
  const auto start = SteadyClock::now();
  out = std::move(work.outcome);
  auto& t = out.timing;
  const bool zk = is_zk(config_.mode);
  auto finish = [&] { t.total = work.wall + since(start); };
  auto reject = [&](ClientVerdict v, const char* stage, std::string reason) {
    out.verdict = v;
    out.stage = stage;
    out.reason = std::move(reason);
    finish();
  };
  if (work.skipped) return finish();

  // Steps 4-5: the server has the VE check the client's proof.
  const RoundMessage fwd = receive(work.wire, t);
  record(fwd, t);
  if (zk) {
    if (!fwd.statement || !fwd.proof) return reject(ClientVerdict::missing_proof, "forward", "no proof attached");
    if (!statement_binds(*fwd.statement, config_.cut_width, quantized_cut(snapshot, constants_.w), k_q_)) {
      return reject(ClientVerdict::rejected_proof, "forward", "statement does not match the round's cut vector");
    }
    const auto t0 = SteadyClock::now();
    const auto verdict = ve_->verify(kCutCircuit, fwd);
    const double dt = since(t0);
    t.verify += dt;
    out.verify_seconds.push_back(dt);
    if (verdict != VerifyResult::accept) return reject(ClientVerdict::rejected_proof, "forward", "proof rejected");
  }
  if (config_.canary && fwd.canary != canary_digest(snapshot)) {
    return reject(ClientVerdict::rejected_proof, "forward", "canary mismatch");
  }

  auto t0 = SteadyClock::now();
  const SmashedBatch smashed{fwd.payload, round_, work.client};
  ServerStepResult step = server_step(model_.server, smashed, work.batch.y);
  t.compute += since(t0);
  out.loss = step.loss;

  // Step 6: the server's PE proves the cut-layer update it returns.
  RoundMessage bwd;
  bwd.kind = MessageKind::gradient_backward;
  bwd.sender = kServerSender;
  bwd.round = round_;
  bwd.payload = step.grad_z.g_z;
  bwd.loss = step.loss;
  std::vector<std::int64_t> w_next;
  if (zk) {
    const auto w_now = quantized_cut(model_.client, constants_.w);
    const Eigen::VectorXd u = cut_update_vector(step.grad_z.g_z, config_.lr);
    CircuitInstance inst;
    try {
      inst = honest_cut_update(constants_, w_now, k_q_,
                               quantize(std::span<const double>(u.data(), u.size()), constants_.u).values);
    } catch (const QuantizationError& e) {
      return reject(ClientVerdict::skipped_overflow, "backward", e.what());
    }
    const Witness witness = generate_witness(*circuit_, inst);
    Statement x = Statement::from_witness(witness);
    t0 = SteadyClock::now();
    Proof proof = pe_->prove(kCutCircuit, x, witness);
    t.prove += since(t0);
    out.proof_seconds.push_back(proof.prove_seconds);
    out.proof_bytes.push_back(encode(proof).size());
    bwd.statement = std::move(x);
    bwd.proof = std::move(proof);
  }
  model_.server = sgd_step(model_.server, step.grad, config_.lr, work.batch.size());

  // Step 7: the client has the VE check the server's proof, then updates.
  const RoundMessage back = receive(send(bwd, t), t);
  record(back, t);
  if (zk) {
    const auto w_now = quantized_cut(model_.client, constants_.w);
    if (!back.statement || !back.proof) return reject(ClientVerdict::missing_proof, "backward", "no proof attached");
    if (!statement_binds(*back.statement, config_.cut_width, w_now, k_q_)) {
      return reject(ClientVerdict::rejected_proof, "backward", "statement does not match the global cut vector");
    }
    t0 = SteadyClock::now();
    const auto verdict = ve_->verify(kCutCircuit, back);
    const double dt = since(t0);
    t.verify += dt;
    out.verify_seconds.push_back(dt);
    if (verdict != VerifyResult::accept) return reject(ClientVerdict::rejected_proof, "backward", "proof rejected");
    w_next.reserve(config_.cut_width);
    for (std::size_t j = 0; j < config_.cut_width; ++j) {
      w_next.push_back(static_cast<std::int64_t>(back.statement->values[j].to_i128()));
    }
  }

  t0 = SteadyClock::now();
  const Params grads = client_backward(snapshot, work.batch, back.payload);
  model_.client = sgd_step(model_.client, grads, config_.lr, work.batch.size());
  if (zk) {
    auto& cut = cut_vector(model_.client);
    for (std::size_t j = 0; j < w_next.size(); ++j) {
      cut[static_cast<Eigen::Index>(j)] = dequantize(w_next[j], constants_.w_prime);
    }
  }
  t.compute += since(t0);
  out.verdict = ClientVerdict::accepted;
  finish();
}

RoundReport Session::run_round() {
  std::vector<std::uint32_t> all(config_.num_clients);
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  return run_round(all, round_ % config_.batches_per_epoch, config_.parallel_clients);
}

RoundReport Session::run_round(std::span<const std::uint32_t> participants,
                               std::size_t batch_index, bool parallel) {
  const auto start = SteadyClock::now();
  for (auto c : participants) {
    if (c >= config_.num_clients) throw ProtocolError("unknown client " + std::to_string(c));
    schedule_.resync[c] = false;  // everyone starts from the current global model
  }
  const Params snapshot = model_.client;

  // Steps 1-3 run concurrently from the round-start snapshot.
  std::vector<ForwardWork> work(participants.size());
  if (parallel && participants.size() > 1) {
    std::vector<std::exception_ptr> errors(participants.size());
    std::vector<std::thread> threads;
    threads.reserve(participants.size());
    for (std::size_t i = 0; i < participants.size(); ++i) {
      threads.emplace_back([&, i] {
        try {
          work[i] = client_phase(participants[i], snapshot, batch_index);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t i = 0; i < participants.size(); ++i) {
      work[i] = client_phase(participants[i], snapshot, batch_index);
    }
  }

  // The server owns w_s and the global cut vector and handles clients one at a time.
  RoundReport report;
  report.round = round_;
  report.mode = config_.mode;
  report.verification_skipped = !is_zk(config_.mode);
  report.clients.resize(participants.size());
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < participants.size(); ++i) {
    server_phase(work[i], snapshot, report.clients[i]);
    if (report.clients[i].verdict == ClientVerdict::accepted) loss_sum += report.clients[i].loss;
  }
  const std::size_t n = report.contributions();
  report.loss = n > 0 ? loss_sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
  report.stalled = !participants.empty() && n == 0;

  for (const auto& c : report.clients) schedule_ = exclude_and_continue(std::move(schedule_), report, c.client);
  for (std::uint32_t c = 0; c < schedule_.suspect.size(); ++c) {
    if (schedule_.suspect[c]) report.suspects.push_back(c);
  }
  report.wall_seconds = since(start);
  ++round_;
  return report;
}

}  // namespace vsl
