#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vsl/backend.hpp"
#include "vsl/circuit.hpp"
#include "vsl/data.hpp"
#include "vsl/nn.hpp"

namespace vsl {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::size_t kMaxClients = 32;

enum class Mode { zk_snark, zk_mock, blockchain, none };

std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);
inline bool is_zk(Mode m) { return m == Mode::zk_snark || m == Mode::zk_mock; }
/// Backend behind a zk mode. Throws ConfigError for the baseline modes.
BackendId backend_for(Mode m);

enum class FaultKind { tamper_statement, drop_proof, tamper_proof_bytes };

std::string_view to_string(FaultKind k);
FaultKind fault_from_string(std::string_view s);

/// Misbehaviour of one client in its forward message over a range of rounds.
struct FaultSpec {
  std::uint32_t client = 0;
  FaultKind kind = FaultKind::tamper_statement;
  std::uint64_t first_round = 0;
  std::uint64_t last_round = std::numeric_limits<std::uint64_t>::max();

  bool active(std::uint32_t c, std::uint64_t round) const {
    return c == client && round >= first_round && round <= last_round;
  }
};

struct BenchSettings {
  std::vector<Mode> modes = {Mode::zk_mock, Mode::blockchain, Mode::none};
  std::vector<std::size_t> clients = {1, 2, 4, 8, 16};
  std::vector<std::size_t> widths = {500, 700, 1000};
  std::size_t reps = 5;
  std::size_t warmup = 1;
  /// Batches processed per real_epoch measurement, split across the clients.
  std::size_t real_epoch_batches = 16;
};

/// Every tunable of a run. Defaults live here and nowhere else; the table in
/// the README mirrors this struct.
struct SimConfig {
  Mode mode = Mode::zk_mock;
  std::size_t num_clients = 2;
  std::size_t cut_width = 500;
  std::size_t epochs = 1;
  std::size_t batches_per_epoch = 4;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;

  unsigned eta = kDefaultEta;
  double lr = 0.1;
  double update_bound = 0.25;
  double weight_bound = 2.0;

  std::size_t input_dim = 16;
  std::vector<std::size_t> client_hidden = {32};
  std::vector<std::size_t> server_hidden = {32};
  std::size_t num_classes = 2;
  std::size_t samples_per_client = 128;
  double separation = 3.0;
  double noise = 1.0;

  bool parallel_clients = true;
  bool canary = false;
  std::size_t canary_size = 8;
  unsigned suspect_threshold = 3;
  std::vector<FaultSpec> faults;

  BenchSettings bench;
  std::string out_dir = "out";

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  SplitModelSpec model_spec() const;
  SyntheticSpec data_spec() const;
  CircuitConstants circuit_constants() const;
};

/// Independent streams derived from the master seed.
struct SeedBlock {
  std::uint64_t model = 0;
  std::uint64_t data = 0;
  std::uint64_t setup = 0;
  std::uint64_t canary = 0;
};

SeedBlock derive_seeds(std::uint64_t master);

void to_json(nlohmann::json& j, const SimConfig& c);
/// Starts from the defaults and overrides the keys present; unknown keys are errors.
void from_json(const nlohmann::json& j, SimConfig& c);

/// Fully resolved description of a run, echoed next to its outputs.
struct RunManifest {
  std::string command;
  SimConfig config;
  SeedBlock seeds;
  std::string backend;  // empty in the baseline modes
  std::string version = std::string(kVersion);
  nlohmann::json artifacts = nlohmann::json::object();
};

nlohmann::json to_json(const RunManifest& m);
/// Accepts either a bare config object or a manifest with a "config" member.
SimConfig load_config(const std::string& path);

}  // namespace vsl
