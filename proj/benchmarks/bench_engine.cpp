#include <benchmark/benchmark.h>

#include <gfid/engine.hpp>
#include <gfid/networks.hpp>

using namespace gfid;

namespace {

// Functional run of a mid-sized 3x3 layer; items are MACs.
void BM_ConvFunctional(benchmark::State& state) {
  const ConvLayerConfig cfg{30, 30, 16, 3, 3, 1, static_cast<std::uint32_t>(state.range(0))};
  const auto st = std::get<ConvStimulus>(random_stimulus(cfg, 7));
  for (auto _ : state) {
    SimResult r = run_conv_layer(cfg, st.x, st.w);
    benchmark::DoNotOptimize(r.cycles);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * mac_count(cfg)));
}
BENCHMARK(BM_ConvFunctional)->Arg(64)->Arg(192);

void BM_ConvTiming(benchmark::State& state) {
  const auto net = builtin_network("vgg16");
  const auto& cfg = std::get<ConvLayerConfig>(net.layers[static_cast<std::size_t>(state.range(0))]);
  for (auto _ : state) {
    SimResult r = run_conv_timing(cfg);
    benchmark::DoNotOptimize(r.cycles);
  }
}
BENCHMARK(BM_ConvTiming)->Arg(0)->Arg(12);

void BM_NetworkTiming(benchmark::State& state) {
  const auto net = builtin_network("alexnet");
  EngineConfig e;
  e.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    NetworkSimResult r = run_network(net, e);
    benchmark::DoNotOptimize(r.totals.latency_s);
  }
}
BENCHMARK(BM_NetworkTiming)->Arg(1)->Arg(4)->UseRealTime();

void BM_FcFunctional(benchmark::State& state) {
  const FcLayerConfig cfg{1024, 1000};
  const auto st = std::get<FcStimulus>(random_stimulus(cfg, 3));
  for (auto _ : state) {
    SimResult r = run_fc_layer(cfg, st.x, st.params);
    benchmark::DoNotOptimize(r.cycles);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * mac_count(cfg)));
}
BENCHMARK(BM_FcFunctional);

}  // namespace
