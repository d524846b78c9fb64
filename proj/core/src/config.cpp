#include "vsl/config.hpp"

#include <fstream>
#include <set>

#include "vsl/error.hpp"
#include "vsl/instance.hpp"

namespace vsl {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid config: " + what);
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

nlohmann::json fault_json(const FaultSpec& f) {
  nlohmann::json j = {{"client", f.client}, {"kind", std::string(to_string(f.kind))},
                      {"first_round", f.first_round}};
  if (f.last_round != std::numeric_limits<std::uint64_t>::max()) j["last_round"] = f.last_round;
  return j;
}

FaultSpec fault_from_json(const nlohmann::json& j) {
  FaultSpec f;
  f.client = j.at("client").get<std::uint32_t>();
  f.kind = fault_from_string(j.at("kind").get<std::string>());
  read(j, "first_round", f.first_round);
  read(j, "last_round", f.last_round);
  return f;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "mode", "num_clients", "cut_width", "epochs", "batches_per_epoch", "batch_size", "seed",
      "eta", "lr", "update_bound", "weight_bound", "input_dim", "client_hidden", "server_hidden",
      "num_classes", "samples_per_client", "separation", "noise", "parallel_clients", "canary",
      "canary_size", "suspect_threshold", "faults", "bench", "out_dir"};
  return keys;
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::zk_snark: return "zk-snark";
    case Mode::zk_mock: return "zk-mock";
    case Mode::blockchain: return "blockchain";
    case Mode::none: return "none";
  }
  return "unknown";
}

Mode mode_from_string(std::string_view s) {
  if (s == "zk-snark") return Mode::zk_snark;
  if (s == "zk-mock") return Mode::zk_mock;
  if (s == "blockchain") return Mode::blockchain;
  if (s == "none") return Mode::none;
  throw ConfigError("unknown mode: " + std::string(s));
}

BackendId backend_for(Mode m) {
  if (m == Mode::zk_snark) return BackendId::groth16;
  if (m == Mode::zk_mock) return BackendId::mock;
  throw ConfigError("mode " + std::string(to_string(m)) + " uses no proof backend");
}

std::string_view to_string(FaultKind k) {
  switch (k) {
    case FaultKind::tamper_statement: return "tamper-statement";
    case FaultKind::drop_proof: return "drop-proof";
    case FaultKind::tamper_proof_bytes: return "tamper-proof-bytes";
  }
  return "unknown";
}

FaultKind fault_from_string(std::string_view s) {
  if (s == "tamper-statement") return FaultKind::tamper_statement;
  if (s == "drop-proof") return FaultKind::drop_proof;
  if (s == "tamper-proof-bytes") return FaultKind::tamper_proof_bytes;
  throw ConfigError("unknown fault kind: " + std::string(s));
}

void SimConfig::validate() const {
  require(num_clients >= 1 && num_clients <= kMaxClients, "num_clients must be in [1, 32]");
  require(cut_width >= 1, "cut_width must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(batches_per_epoch >= 1, "batches_per_epoch must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(eta >= kMinEta && eta <= kMaxEta, "eta must be in [22, 96]");
  require(lr > 0.0, "lr must be positive");
  require(update_bound > 0.0 && weight_bound > 0.0, "quantization bounds must be positive");
  require(input_dim >= 1 && num_classes >= 2, "input_dim >= 1 and num_classes >= 2");
  require(samples_per_client >= 1, "samples_per_client must be >= 1");
  require(noise >= 0.0, "noise must be non-negative");
  require(canary_size >= 1, "canary_size must be >= 1");
  require(suspect_threshold >= 1, "suspect_threshold must be >= 1");
  for (auto h : client_hidden) require(h >= 1, "hidden widths must be >= 1");
  for (auto h : server_hidden) require(h >= 1, "hidden widths must be >= 1");
  for (const auto& f : faults) {
    require(f.client < num_clients, "fault targets a client that does not exist");
    require(f.first_round <= f.last_round, "fault round range is empty");
  }
  require(!bench.modes.empty() && !bench.clients.empty() && !bench.widths.empty(),
          "bench lists must be non-empty");
  for (auto c : bench.clients) require(c >= 1 && c <= kMaxClients, "bench clients must be in [1, 32]");
  for (auto m : bench.widths) require(m >= 1, "bench widths must be >= 1");
  require(bench.reps >= 1, "bench reps must be >= 1");
  require(bench.real_epoch_batches >= 1, "bench real_epoch_batches must be >= 1");
  require(!out_dir.empty(), "out_dir must be set");
  // Fails early with the quantization error when the bounds cannot be met.
  try {
    const auto c = circuit_constants();
    aggregation_shift(c);
    update_shift_w(c);
    update_shift_u(c);
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

SplitModelSpec SimConfig::model_spec() const {
  return {input_dim, client_hidden, cut_width, server_hidden, num_classes, lr};
}

SyntheticSpec SimConfig::data_spec() const {
  SyntheticSpec s;
  s.input_dim = input_dim;
  s.num_classes = num_classes;
  s.samples_per_client = samples_per_client;
  s.max_clients = kMaxClients;
  s.separation = separation;
  s.noise = noise;
  s.seed = derive_seeds(seed).data;
  return s;
}

CircuitConstants SimConfig::circuit_constants() const {
  return cut_layer_constants(eta, update_bound, weight_bound);
}

SeedBlock derive_seeds(std::uint64_t master) {
  return {splitmix64(master ^ 0x6d6f64656cULL), splitmix64(master ^ 0x64617461ULL),
          splitmix64(master ^ 0x7365747570ULL), splitmix64(master ^ 0x63616e617279ULL)};
}

void to_json(nlohmann::json& j, const SimConfig& c) {
  auto modes = nlohmann::json::array();
  for (auto m : c.bench.modes) modes.push_back(std::string(to_string(m)));
  auto faults = nlohmann::json::array();
  for (const auto& f : c.faults) faults.push_back(fault_json(f));
  j = {{"mode", std::string(to_string(c.mode))},
       {"num_clients", c.num_clients},
       {"cut_width", c.cut_width},
       {"epochs", c.epochs},
       {"batches_per_epoch", c.batches_per_epoch},
       {"batch_size", c.batch_size},
       {"seed", c.seed},
       {"eta", c.eta},
       {"lr", c.lr},
       {"update_bound", c.update_bound},
       {"weight_bound", c.weight_bound},
       {"input_dim", c.input_dim},
       {"client_hidden", c.client_hidden},
       {"server_hidden", c.server_hidden},
       {"num_classes", c.num_classes},
       {"samples_per_client", c.samples_per_client},
       {"separation", c.separation},
       {"noise", c.noise},
       {"parallel_clients", c.parallel_clients},
       {"canary", c.canary},
       {"canary_size", c.canary_size},
       {"suspect_threshold", c.suspect_threshold},
       {"faults", faults},
       {"bench",
        {{"modes", modes},
         {"clients", c.bench.clients},
         {"widths", c.bench.widths},
         {"reps", c.bench.reps},
         {"warmup", c.bench.warmup},
         {"real_epoch_batches", c.bench.real_epoch_batches}}},
       {"out_dir", c.out_dir}};
}

void from_json(const nlohmann::json& j, SimConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key: " + key);
  }
  try {
    SimConfig d;
    if (j.contains("mode")) d.mode = mode_from_string(j.at("mode").get<std::string>());
    read(j, "num_clients", d.num_clients);
    read(j, "cut_width", d.cut_width);
    read(j, "epochs", d.epochs);
    read(j, "batches_per_epoch", d.batches_per_epoch);
    read(j, "batch_size", d.batch_size);
    read(j, "seed", d.seed);
    read(j, "eta", d.eta);
    read(j, "lr", d.lr);
    read(j, "update_bound", d.update_bound);
    read(j, "weight_bound", d.weight_bound);
    read(j, "input_dim", d.input_dim);
    read(j, "client_hidden", d.client_hidden);
    read(j, "server_hidden", d.server_hidden);
    read(j, "num_classes", d.num_classes);
    read(j, "samples_per_client", d.samples_per_client);
    read(j, "separation", d.separation);
    read(j, "noise", d.noise);
    read(j, "parallel_clients", d.parallel_clients);
    read(j, "canary", d.canary);
    read(j, "canary_size", d.canary_size);
    read(j, "suspect_threshold", d.suspect_threshold);
    read(j, "out_dir", d.out_dir);
    if (j.contains("faults")) {
      d.faults.clear();
      for (const auto& f : j.at("faults")) d.faults.push_back(fault_from_json(f));
    }
    if (j.contains("bench")) {
      const auto& b = j.at("bench");
      if (b.contains("modes")) {
        d.bench.modes.clear();
        for (const auto& m : b.at("modes")) d.bench.modes.push_back(mode_from_string(m.get<std::string>()));
      }
      read(b, "clients", d.bench.clients);
      read(b, "widths", d.bench.widths);
      read(b, "reps", d.bench.reps);
      read(b, "warmup", d.bench.warmup);
      read(b, "real_epoch_batches", d.bench.real_epoch_batches);
    }
    c = std::move(d);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"version", m.version},
          {"config", m.config},
          {"seeds",
           {{"master", m.config.seed},
            {"model", m.seeds.model},
            {"data", m.seeds.data},
            {"setup", m.seeds.setup},
            {"canary", m.seeds.canary}}},
          {"backend", m.backend},
          {"artifacts", m.artifacts}};
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  SimConfig c;
  from_json(j.is_object() && j.contains("config") ? j.at("config") : j, c);
  return c;
}

}  // namespace vsl
