#include <benchmark/benchmark.h>

#include <gfid/networks.hpp>
#include <gfid/perf_model.hpp>

using namespace gfid;

namespace {

void BM_NetworkReport(benchmark::State& state) {
  const auto net = builtin_network("resnet50");
  const ModelProfile profile = ModelProfile::published();
  for (auto _ : state) {
    PerfReport r = network_report(net, profile);
    benchmark::DoNotOptimize(r.total.latency_s);
  }
}
BENCHMARK(BM_NetworkReport);

void BM_ConvCycles(benchmark::State& state) {
  const ConvLayerConfig cfg{226, 226, 64, 3, 3, 1, 64};
  for (auto _ : state) benchmark::DoNotOptimize(conv_cycles(cfg));
}
BENCHMARK(BM_ConvCycles);

}  // namespace
