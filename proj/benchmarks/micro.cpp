#include <random>

#include <benchmark/benchmark.h>

#include "vsl/backend.hpp"
#include "vsl/field.hpp"
#include "vsl/instance.hpp"
#include "vsl/ledger.hpp"
#include "vsl/quant.hpp"

using namespace vsl;

namespace {

void BM_FieldMul(benchmark::State& state) {
  Fr a = Fr::from_i64(123456789), b = Fr::from_i64(-987654321);
  for (auto _ : state) {
    a = a * b;
    benchmark::DoNotOptimize(a);
  }
}
BENCHMARK(BM_FieldMul);

void BM_Quantize(benchmark::State& state) {
  const auto p = calibrate(-0.25, 0.25);
  double x = -0.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantize(x, p));
    x = x > 0.2 ? -0.2 : x + 1e-4;
  }
}
BENCHMARK(BM_Quantize);

void BM_WitnessGeneration(benchmark::State& state) {
  const auto c = cut_layer_constants();
  std::mt19937_64 rng(1);
  const auto inst = random_instance(CircuitKind::cut_update, static_cast<std::size_t>(state.range(0)), 1, c, rng);
  const auto cs = build_circuit(inst, c);
  for (auto _ : state) benchmark::DoNotOptimize(generate_witness(cs, inst));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WitnessGeneration)->Arg(500)->Arg(700)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_MockProveVerify(benchmark::State& state) {
  const auto c = cut_layer_constants();
  std::mt19937_64 rng(2);
  const auto inst = random_instance(CircuitKind::cut_update, static_cast<std::size_t>(state.range(0)), 1, c, rng);
  const auto cs = build_circuit(inst, c);
  const auto backend = make_backend(BackendId::mock);
  const auto keys = backend->setup(cs, {});
  const auto w = generate_witness(cs, inst);
  const auto x = Statement::from_integers(inst.public_values);
  for (auto _ : state) {
    const auto p = backend->prove(keys.pk, x, w);
    benchmark::DoNotOptimize(backend->verify(keys.vk, x, p));
  }
}
BENCHMARK(BM_MockProveVerify)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_LedgerAppend(benchmark::State& state) {
  std::uint64_t tick = 0;
  Chain chain([&] { return tick++; });
  Digest d{};
  for (auto _ : state) {
    d[0] = static_cast<std::uint8_t>(tick);
    benchmark::DoNotOptimize(chain.append(d, 0));
  }
}
BENCHMARK(BM_LedgerAppend);

}  // namespace

BENCHMARK_MAIN();
