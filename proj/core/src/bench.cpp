#include "vsl/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <tuple>

#include "vsl/error.hpp"
#include "vsl/protocol.hpp"

namespace vsl {
namespace {

using SteadyClock = std::chrono::steady_clock;

auto sort_key(const BenchRecord& r) { return std::tie(r.metric, r.mode, r.clients, r.m, r.rep); }

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Cell {
 public:
  Cell(const BenchHooks& hooks, std::vector<BenchRecord>& out, Mode mode, std::size_t clients,
       std::size_t m)
      : hooks_(hooks), out_(out), mode_(to_string(mode)), clients_(clients), m_(m) {}

  void add(std::string_view name, std::size_t rep, double value) {
    BenchRecord r{std::string(name), mode_, clients_, m_, rep, std::max(0.0, value),
                  std::string(unit_for(name))};
    if (hooks_.on_record) hooks_.on_record(r);
    out_.push_back(std::move(r));
  }

 private:
  const BenchHooks& hooks_;
  std::vector<BenchRecord>& out_;
  std::string mode_;
  std::size_t clients_;
  std::size_t m_;
};

bool stopped(const BenchHooks& hooks) { return hooks.stop != nullptr && hooks.stop->load(); }

}  // namespace

std::string_view unit_for(std::string_view name) {
  if (name == metric::proof_size) return "bytes";
  if (name == metric::batch_time || name == metric::epoch_estimate || name == metric::real_epoch ||
      name == metric::proof_time || name == metric::verify_time) {
    return "s";
  }
  throw Error("unknown metric: " + std::string(name));
}

std::vector<BenchRecord> run_benchmark(const SimConfig& config, const BenchHooks& hooks) {
  config.validate();
  for (auto mode : config.bench.modes) {
    if (is_zk(mode)) make_backend(backend_for(mode));
  }

  std::vector<BenchRecord> records;
  const auto& b = config.bench;

  struct Live {
    Cell cell;
    std::unique_ptr<Session> session;
    std::vector<std::uint32_t> all;
    std::size_t batch = 0;
  };
  std::vector<Live> cells;
  for (auto mode : b.modes) {
    for (auto m : b.widths) {
      for (auto k : b.clients) {
        if (stopped(hooks)) return records;
        if (hooks.progress) {
          hooks.progress("setup " + std::string(to_string(mode)) + " m=" + std::to_string(m) +
                         " clients=" + std::to_string(k));
        }
        SimConfig cfg = config;
        cfg.mode = mode;
        cfg.cut_width = m;
        cfg.num_clients = k;
        cfg.faults.clear();
        Live live{Cell(hooks, records, mode, k, m), std::make_unique<Session>(cfg), {}, 0};
        live.all.resize(k);
        std::iota(live.all.begin(), live.all.end(), 0u);
        for (std::size_t w = 0; w < b.warmup; ++w) live.session->run_round(live.all, live.batch++, false);
        cells.push_back(std::move(live));
      }
    }
  }

  // Repetitions sweep every cell in turn, so a burst of outside load lands on
  // one rep of many cells instead of every rep of one cell.
  for (std::size_t rep = 0; rep < b.reps; ++rep) {
    if (hooks.progress) hooks.progress("rep " + std::to_string(rep + 1) + "/" + std::to_string(b.reps));
    for (auto& live : cells) {
      if (stopped(hooks)) return records;
      const std::size_t k = live.all.size();
      const auto report = live.session->run_round(live.all, live.batch++, false);
      std::vector<double> totals, proofs, verifies, sizes;
      for (const auto& c : report.clients) {
        totals.push_back(c.timing.total);
        proofs.insert(proofs.end(), c.proof_seconds.begin(), c.proof_seconds.end());
        verifies.insert(verifies.end(), c.verify_seconds.begin(), c.verify_seconds.end());
        for (auto s : c.proof_bytes) sizes.push_back(static_cast<double>(s));
      }
      const double batch_time = mean(totals);
      live.cell.add(metric::batch_time, rep, batch_time);
      live.cell.add(metric::epoch_estimate, rep, batch_time * static_cast<double>(b.real_epoch_batches));
      if (!proofs.empty()) live.cell.add(metric::proof_time, rep, mean(proofs));
      if (!verifies.empty()) live.cell.add(metric::verify_time, rep, mean(verifies));
      if (!sizes.empty()) live.cell.add(metric::proof_size, rep, mean(sizes));

      // Fixed total work: real_epoch_batches batches split over k clients.
      const std::size_t rounds = (b.real_epoch_batches + k - 1) / k;
      const auto t0 = SteadyClock::now();
      for (std::size_t r = 0; r < rounds; ++r) {
        const std::size_t take = std::min(k, b.real_epoch_batches - r * k);
        live.session->run_round(std::span(live.all).first(take), live.batch++, true);
      }
      live.cell.add(metric::real_epoch, rep, std::chrono::duration<double>(SteadyClock::now() - t0).count());
    }
  }
  return records;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("quantile of an empty cell");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<CellStats> summarize(const std::vector<BenchRecord>& records) {
  std::map<std::tuple<std::string, std::string, std::size_t, std::size_t>, std::vector<const BenchRecord*>>
      cells;
  for (const auto& r : records) cells[{r.metric, r.mode, r.clients, r.m}].push_back(&r);
  std::vector<CellStats> out;
  out.reserve(cells.size());
  for (const auto& [key, rs] : cells) {
    std::vector<double> v;
    v.reserve(rs.size());
    for (const auto* r : rs) v.push_back(r->value);
    CellStats s;
    std::tie(s.metric, s.mode, s.clients, s.m) = key;
    s.unit = rs.front()->unit;
    s.count = v.size();
    s.median = quantile(v, 0.5);
    s.p10 = quantile(v, 0.1);
    s.p90 = quantile(v, 0.9);
    out.push_back(std::move(s));
  }
  return out;
}

std::optional<CellStats> find_cell(const std::vector<CellStats>& stats, std::string_view name,
                                   std::string_view mode, std::size_t clients, std::size_t m) {
  for (const auto& s : stats) {
    if (s.metric == name && s.mode == mode && s.clients == clients && s.m == m) return s;
  }
  return std::nullopt;
}

void sort_records(std::vector<BenchRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const BenchRecord& a, const BenchRecord& b) { return sort_key(a) < sort_key(b); });
}

void emit_csv(const std::string& path, std::vector<BenchRecord> records) {
  sort_records(records);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << "metric,mode,clients,m,rep,value,unit\n";
  for (const auto& r : records) {
    out << r.metric << ',' << r.mode << ',' << r.clients << ',' << r.m << ',' << r.rep << ','
        << format_value(r.value) << ',' << r.unit << '\n';
  }
  if (!out) throw Error("cannot write " + path);
}

std::vector<BenchRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "metric,mode,clients,m,rep,value,unit") {
    throw DecodeError(path + ": unexpected CSV header");
  }
  std::vector<BenchRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> f;
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw DecodeError(path + ": malformed row: " + line);
    try {
      records.push_back({f[0], f[1], std::stoul(f[2]), std::stoul(f[3]), std::stoul(f[4]),
                         std::stod(f[5]), f[6]});
    } catch (const std::exception&) {
      throw DecodeError(path + ": malformed row: " + line);
    }
  }
  return records;
}

nlohmann::json to_json(const CellStats& s) {
  return {{"metric", s.metric}, {"mode", s.mode},     {"clients", s.clients},
          {"m", s.m},           {"unit", s.unit},     {"count", s.count},
          {"median", s.median}, {"p10", s.p10},       {"p90", s.p90}};
}

void emit_json(const std::string& path, std::vector<BenchRecord> records) {
  sort_records(records);
  nlohmann::json j;
  auto& rows = j["records"] = nlohmann::json::array();
  for (const auto& r : records) {
    rows.push_back({{"metric", r.metric}, {"mode", r.mode}, {"clients", r.clients}, {"m", r.m},
                    {"rep", r.rep}, {"value", r.value}, {"unit", r.unit}});
  }
  auto& summary = j["summary"] = nlohmann::json::array();
  for (const auto& s : summarize(records)) summary.push_back(to_json(s));
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path);
}

}  // namespace vsl
