// google-benchmark view of the benchmark workloads: every function on every
// backend at a fixed batch size. The CSV sweep lives in clifford_bench.

#include <benchmark/benchmark.h>

#include <string>

#include "clifford/bench.hpp"

namespace bench = clifford::bench;

namespace {

std::size_t batch_for(std::string_view function) {
  // the reference 3D convolution takes about a second per sample at batch 1
  return function == "clifford_3d_forward" ? 1 : 16;
}

void register_all() {
  for (std::string_view f : bench::function_names()) {
    for (bench::Backend b : bench::kAllBackends) {
      const std::string name = std::string(f) + "/" + std::string(bench::backend_name(b));
      benchmark::RegisterBenchmark(name.c_str(), [f, b](benchmark::State& state) {
        const bench::Workload w = bench::make_bench_workload(f, batch_for(f), 0);
        const auto cfg = bench::default_config(f, b);
        for (auto _ : state) benchmark::DoNotOptimize(w.run(b, cfg));
        const auto& cost = w.cost(b);
        state.counters["flops"] = benchmark::Counter(static_cast<double>(cost.flops) * state.iterations(),
                                                     benchmark::Counter::kIsRate);
        state.counters["op_intensity"] = cost.op_intensity;
      })->Unit(benchmark::kMicrosecond);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  register_all();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 2;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
