#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "vsl/bench.hpp"
#include "vsl/error.hpp"

using namespace vsl;

namespace {

SimConfig tiny_bench() {
  SimConfig c;
  c.batch_size = 4;
  c.samples_per_client = 8;
  c.client_hidden = {6};
  c.server_hidden = {6};
  c.bench.modes = {Mode::zk_mock, Mode::blockchain, Mode::none};
  c.bench.clients = {1, 2};
  c.bench.widths = {16};
  c.bench.reps = 2;
  c.bench.warmup = 0;
  c.bench.real_epoch_batches = 3;
  return c;
}

// Linear interpolation between closest ranks, computed by hand.
double reference_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1) * q;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

}  // namespace

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v = {4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.1), 1.3);
  EXPECT_DOUBLE_EQ(quantile(v, 0.9), 3.7);
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({7.0}, 0.3), 7.0);
  EXPECT_THROW(quantile({}, 0.5), Error);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> xs(1 + rng() % 20);
    for (auto& x : xs) x = static_cast<double>(rng() % 1000) / 7.0;
    const double q = static_cast<double>(rng() % 101) / 100.0;
    EXPECT_NEAR(quantile(xs, q), reference_quantile(xs, q), 1e-9);
  }
}

TEST(Summarize, OneRowPerCell) {
  std::vector<BenchRecord> rs;
  for (std::size_t rep = 0; rep < 5; ++rep) {
    rs.push_back({"batch_time", "none", 1, 500, rep, 1.0 + static_cast<double>(rep), "s"});
    rs.push_back({"batch_time", "none", 2, 500, rep, 10.0, "s"});
  }
  const auto s = summarize(rs);
  ASSERT_EQ(s.size(), 2u);
  const auto a = find_cell(s, "batch_time", "none", 1, 500);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->count, 5u);
  EXPECT_DOUBLE_EQ(a->median, 3.0);
  EXPECT_DOUBLE_EQ(a->p10, 1.4);
  EXPECT_DOUBLE_EQ(a->p90, 4.6);
  EXPECT_FALSE(find_cell(s, "batch_time", "none", 4, 500));
}

TEST(Csv, RoundTripIsExact) {
  std::vector<BenchRecord> rs = {{"proof_time", "zk-mock", 2, 700, 1, 0.1 + 0.2, "s"},
                                 {"batch_time", "none", 1, 500, 0, 1.0 / 3.0, "s"},
                                 {"proof_size", "zk-mock", 2, 700, 1, 123456.0, "bytes"}};
  const auto path = ::testing::TempDir() + "/bench_roundtrip.csv";
  emit_csv(path, rs);
  auto back = read_csv(path);
  sort_records(rs);
  EXPECT_EQ(back, rs);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "metric,mode,clients,m,rep,value,unit");
}

TEST(Csv, MalformedInputIsRejected) {
  const auto path = ::testing::TempDir() + "/bench_bad.csv";
  std::ofstream(path) << "metric,mode,clients,m,rep,value,unit\nbatch_time,none,x,1,0,1,s\n";
  EXPECT_THROW(read_csv(path), DecodeError);
  std::ofstream(path) << "wrong header\n";
  EXPECT_THROW(read_csv(path), DecodeError);
}

TEST(Units, FixedPerMetric) {
  EXPECT_EQ(unit_for(metric::proof_size), "bytes");
  EXPECT_EQ(unit_for(metric::real_epoch), "s");
  EXPECT_THROW(unit_for("throughput"), Error);
}

TEST(RunBenchmark, EmitsEveryMetricForEveryCell) {
  const auto cfg = tiny_bench();
  std::size_t streamed = 0;
  BenchHooks hooks;
  hooks.on_record = [&](const BenchRecord&) { ++streamed; };
  const auto records = run_benchmark(cfg, hooks);
  EXPECT_EQ(streamed, records.size());
  // zk cells: six metrics; baseline cells: three.
  EXPECT_EQ(records.size(), 2u * 2 * 6 + 2u * 2 * 2 * 3);
  for (const auto& r : records) {
    EXPECT_GE(r.value, 0.0);
    EXPECT_TRUE(std::isfinite(r.value));
    EXPECT_EQ(r.unit, unit_for(r.metric));
  }
  const auto stats = summarize(records);
  for (const char* mode : {"zk-mock", "blockchain", "none"}) {
    for (std::size_t k : {1u, 2u}) {
      const auto bt = find_cell(stats, metric::batch_time, mode, k, 16);
      const auto ee = find_cell(stats, metric::epoch_estimate, mode, k, 16);
      ASSERT_TRUE(bt && ee);
      EXPECT_NEAR(ee->median, bt->median * 3.0, 1e-12 * ee->median);
    }
  }
  const auto size = find_cell(stats, metric::proof_size, "zk-mock", 1, 16);
  ASSERT_TRUE(size);
  EXPECT_GT(size->median, 0.0);
  EXPECT_FALSE(find_cell(stats, metric::proof_time, "none", 1, 16));
}

TEST(RunBenchmark, StopFlagKeepsPartialRecords) {
  const auto cfg = tiny_bench();
  std::atomic<bool> stop{false};
  BenchHooks hooks;
  hooks.stop = &stop;
  hooks.on_record = [&](const BenchRecord&) { stop = true; };
  const auto records = run_benchmark(cfg, hooks);
  EXPECT_FALSE(records.empty());
  EXPECT_LT(records.size(), 10u);
}

TEST(RunBenchmark, MissingBackendFailsBeforeTiming) {
  if (backend_available(BackendId::groth16)) GTEST_SKIP() << "groth16 is built";
  auto cfg = tiny_bench();
  cfg.bench.modes = {Mode::none, Mode::zk_snark};
  bool any = false;
  BenchHooks hooks;
  hooks.on_record = [&](const BenchRecord&) { any = true; };
  EXPECT_THROW(run_benchmark(cfg, hooks), BackendError);
  EXPECT_FALSE(any);
}
