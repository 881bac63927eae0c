#include <benchmark/benchmark.h>

#include <random>

#include "ieg/kernels.hpp"
#include "ieg/model.hpp"
#include "ieg/pattern.hpp"
#include "ieg/synth.hpp"
#include "ieg/tracker.hpp"

namespace {

ieg::IegModel bench_model() {
  ieg::Normalization n;
  n.scale = {32.0, 32.0, 0.005, 500.0, 500.0, 5.0};
  n.offset = {0.0, 0.0, 0.005, 0.0, 0.0, 0.0};
  return ieg::IegModel::create({}, n, 3);
}

std::vector<ieg::Input6> random_inputs(std::size_t n) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ieg::Input6> inputs(n);
  for (auto& x : inputs) {
    x = {32 * u(rng), 32 * u(rng), 0.005 + 0.005 * u(rng), 500 * u(rng), 500 * u(rng), 5 * u(rng)};
  }
  return inputs;
}

// Multiply-adds per sample for one forward pass.
double macs(const ieg::IegModel& m) {
  double total = 0.0;
  for (int l = 0; l < m.layer_count(); ++l) total += double(m.dims()[l]) * m.dims()[l + 1];
  return total;
}

void BM_ReferenceForward(benchmark::State& state) {
  const auto model = bench_model();
  const auto inputs = random_inputs(1024);
  for (auto _ : state) {
    double acc = 0.0;
    for (const auto& x : inputs) acc += ieg::kernels::reference::forward(model, x);
    benchmark::DoNotOptimize(acc);
  }
  state.counters["GFLOPs"] = benchmark::Counter(2.0 * macs(model) * inputs.size(),
                                                benchmark::Counter::kIsIterationInvariantRate,
                                                benchmark::Counter::kIs1000);
}
BENCHMARK(BM_ReferenceForward)->Unit(benchmark::kMillisecond);

void BM_ForwardBatch(benchmark::State& state) {
  const auto model = bench_model();
  const auto inputs = random_inputs(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(inputs.size());
  for (auto _ : state) {
    ieg::kernels::forward_batch(model, inputs, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["GFLOPs"] = benchmark::Counter(2.0 * macs(model) * inputs.size(),
                                                benchmark::Counter::kIsIterationInvariantRate,
                                                benchmark::Counter::kIs1000);
}
BENCHMARK(BM_ForwardBatch)->Arg(1024)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_ForwardInputGradBatch(benchmark::State& state) {
  const auto model = bench_model();
  const auto inputs = random_inputs(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(inputs.size());
  std::vector<ieg::Input6> grad(inputs.size());
  for (auto _ : state) {
    ieg::kernels::forward_input_grad_batch(model, inputs, out, grad);
    benchmark::DoNotOptimize(grad.data());
  }
  state.counters["GFLOPs"] = benchmark::Counter(4.0 * macs(model) * inputs.size(),
                                                benchmark::Counter::kIsIterationInvariantRate,
                                                benchmark::Counter::kIs1000);
}
BENCHMARK(BM_ForwardInputGradBatch)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_MseGradBatch(benchmark::State& state) {
  const auto model = bench_model();
  const auto inputs = random_inputs(static_cast<std::size_t>(state.range(0)));
  std::vector<double> targets(inputs.size(), 0.25);
  std::vector<double> grad(model.param_count());
  for (auto _ : state) {
    benchmark::DoNotOptimize(ieg::kernels::mse_grad_batch(model, inputs, targets, grad));
  }
  state.counters["GFLOPs"] = benchmark::Counter(6.0 * macs(model) * inputs.size(),
                                                benchmark::Counter::kIsIterationInvariantRate,
                                                benchmark::Counter::kIs1000);
}
BENCHMARK(BM_MseGradBatch)->Arg(64)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_WindowLossGrad(benchmark::State& state) {
  const auto model = bench_model();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ieg::Event> events(20000);
  for (std::size_t i = 0; i < events.size(); ++i) {
    events[i] = {0.005 * double(i) / events.size(), 90.0 + 60.0 * u(rng), 60.0 + 60.0 * u(rng),
                 u(rng) < 0.5 ? 1 : -1};
  }
  ieg::TrackerConfig cfg;
  for (auto _ : state) {
    auto lg = ieg::window_loss_grad(model, events, {120.0, 90.0, 0.1}, {100.0, 50.0, 1.0}, cfg);
    benchmark::DoNotOptimize(lg);
  }
}
BENCHMARK(BM_WindowLossGrad)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
