#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vsl/config.hpp"

namespace vsl {

/// Metric names and their fixed units.
namespace metric {
inline constexpr std::string_view batch_time = "batch_time";          // s
inline constexpr std::string_view epoch_estimate = "epoch_estimate";  // s
inline constexpr std::string_view real_epoch = "real_epoch";          // s
inline constexpr std::string_view proof_time = "proof_time";          // s
inline constexpr std::string_view verify_time = "verify_time";        // s
inline constexpr std::string_view proof_size = "proof_size";          // bytes
}  // namespace metric

std::string_view unit_for(std::string_view metric_name);

struct BenchRecord {
  std::string metric;
  std::string mode;
  std::size_t clients = 0;
  std::size_t m = 0;
  std::size_t rep = 0;
  double value = 0.0;
  std::string unit;

  bool operator==(const BenchRecord&) const = default;
};

struct BenchHooks {
  /// Checked between measurements; when set, the run stops and returns what it has.
  const std::atomic<bool>* stop = nullptr;
  std::function<void(const std::string&)> progress;
  /// Called with every record as soon as it exists.
  std::function<void(const BenchRecord&)> on_record;
};

/// Times every (mode, width, clients) cell of config.bench.
///
/// batch_time: wall time of one client's full pipeline (forward, proofs,
/// verification, ledger, backward), clients run one after another so the
/// figure is uncontended; mean over clients. epoch_estimate: batch_time times
/// bench.real_epoch_batches. real_epoch: wall time of bench.real_epoch_batches
/// batches split over the clients, with client work in parallel threads.
/// proof_time / verify_time / proof_size: backend telemetry per proof.
///
/// Every cell is set up and warmed up first; each repetition then visits
/// every cell once.
///
/// Throws BackendError before any timing if a mode's backend is missing.
std::vector<BenchRecord> run_benchmark(const SimConfig& config, const BenchHooks& hooks = {});

struct CellStats {
  std::string metric;
  std::string mode;
  std::size_t clients = 0;
  std::size_t m = 0;
  std::string unit;
  std::size_t count = 0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
};

/// Linear-interpolation quantile of unsorted values; q in [0, 1].
double quantile(std::vector<double> values, double q);

/// One row per populated cell, in record sort order. Cells without records
/// do not appear.
std::vector<CellStats> summarize(const std::vector<BenchRecord>& records);
std::optional<CellStats> find_cell(const std::vector<CellStats>& stats, std::string_view metric_name,
                                   std::string_view mode, std::size_t clients, std::size_t m);

/// Sorted by metric, mode, clients, m, rep.
void sort_records(std::vector<BenchRecord>& records);

/// CSV with header "metric,mode,clients,m,rep,value,unit".
void emit_csv(const std::string& path, std::vector<BenchRecord> records);
std::vector<BenchRecord> read_csv(const std::string& path);
/// {"records": [...], "summary": [...]}
void emit_json(const std::string& path, std::vector<BenchRecord> records);
nlohmann::json to_json(const CellStats& s);

}  // namespace vsl
