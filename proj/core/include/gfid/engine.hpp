#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gfid/fixed_point.hpp"
#include "gfid/model.hpp"
#include "gfid/schedule.hpp"
#include "gfid/tile.hpp"

namespace gfid {

struct EngineConfig {
  ArrayGeometry array{};
  double conv_clock_hz = 200e6;
  double fc_clock_hz = 40e6;
  // Output write-back port. When overlapped, writes hide behind compute and
  // only max(0, write - compute) cycles are added; otherwise they follow it.
  double writeback_words_per_cycle = 1.0;
  bool writeback_overlapped = true;
  // Worker threads for tile fan-out; 0 picks the hardware concurrency.
  unsigned workers = 1;

  /// Write-back behaviour that reproduces the published per-layer latencies:
  /// 4 words per cycle, not overlapped with compute.
  static EngineConfig published_calibration();
};

/// Idle cycles added by the write-back port for a conv layer.
std::uint64_t writeback_stall(std::uint64_t compute_cycles, std::uint64_t output_words, const EngineConfig& engine);

enum class LayerKind { kConv, kFc };

struct SimResult {
  LayerKind kind = LayerKind::kConv;
  FixedTensor conv_output;             // empty in timing-only runs and for FC layers
  std::vector<Activation> fc_output;   // empty in timing-only runs and for conv layers
  std::uint64_t compute_cycles = 0;    // clocks spent streaming inputs, including weight-passing stalls
  std::uint64_t passing_stall_cycles = 0;
  std::uint64_t writeback_cycles = 0;  // added by the write-back port
  std::uint64_t cycles = 0;            // compute + write-back
  std::uint64_t ma_inputs = 0;
  std::uint64_t ma_weights = 0;
  std::uint64_t ma_outputs = 0;
  std::uint64_t busy_pe_cycles = 0;
  std::uint64_t saturations = 0;
  std::uint64_t segments = 0;
  std::uint32_t total_pes = 192;
  double clock_hz = 200e6;

  double busy_ratio() const noexcept;
  double latency_s() const noexcept { return static_cast<double>(cycles) / clock_hz; }
  std::uint64_t ma_total() const noexcept { return ma_inputs + ma_weights + ma_outputs; }
};

/// A run of at most n_eff consecutive outputs (row-major over the output
/// map) that fits one logical tile's partial-sum memory, cut into pieces at
/// output-row boundaries.
struct SegmentPiece {
  std::uint32_t row;          // output row z
  std::uint32_t col;          // first output column t
  std::uint32_t count;        // outputs in this piece
  std::uint32_t local_first;  // index of the first output inside the segment
  std::uint32_t stall;        // idle weight-passing cycles before the piece
};

struct Segment {
  std::uint32_t first;  // flattened index of the first output
  std::uint32_t count;
  std::vector<SegmentPiece> pieces;
  std::uint64_t row_pass_cycles;  // clocks for one (k, j) pass over the segment
};

std::vector<Segment> plan_segments(OutputDims dims, const TileModeConfig& mode);

/// Cycle-accurate functional simulation of one conv layer.
SimResult run_conv_layer(const ConvLayerConfig& cfg, const FixedTensor& x, const FixedFilterBank& w,
                         const EngineConfig& engine = {});

/// Same counters as run_conv_layer without evaluating any arithmetic.
SimResult run_conv_timing(const ConvLayerConfig& cfg, const EngineConfig& engine = {});

SimResult run_fc_layer(const FcLayerConfig& cfg, std::span<const Activation> x, const FixedFcParams& params,
                       const EngineConfig& engine = {});
SimResult run_fc_timing(const FcLayerConfig& cfg, const EngineConfig& engine = {});

struct ConvStimulus {
  FixedTensor x;
  FixedFilterBank w;
};
struct FcStimulus {
  std::vector<Activation> x;
  FixedFcParams params;
};
using LayerStimulus = std::variant<ConvStimulus, FcStimulus>;

struct NetworkTotals {
  std::uint64_t conv_cycles = 0;
  std::uint64_t fc_cycles = 0;
  double conv_latency_s = 0;
  double fc_latency_s = 0;
  double latency_s = 0;
  double fps = 0;
  std::uint64_t conv_ma_words = 0;
  std::uint64_t fc_ma_words = 0;
  double conv_mb = 0;
  double fc_mb = 0;
  double mb = 0;
  std::uint64_t saturations = 0;
};

struct NetworkSimResult {
  std::vector<SimResult> layers;
  NetworkTotals totals;
};

/// Simulates every layer. With no stimuli the run is timing-only; otherwise
/// one stimulus per layer is required. Layers run on up to engine.workers
/// threads; results are ordered by layer index.
NetworkSimResult run_network(const NetworkDescriptor& net, const EngineConfig& engine = {},
                             std::span<const LayerStimulus> stimuli = {});

NetworkTotals aggregate(std::span<const SimResult> layers);

struct PipelinePlan {
  std::uint32_t stages = 1;
  std::uint32_t stage_bound = 1;   // floor((s*n_eff + w_f - s) / w_f)
  double unpipelined_words = 0;    // 16-bit words per cycle: 1 + 6p
  double pipelined_words = 0;      // 1 + 6p / stages
  double unpipelined_bits() const noexcept { return unpipelined_words * 16; }
  double pipelined_bits() const noexcept { return pipelined_words * 16; }
};

/// Input bandwidth with weight loads staggered over `stages` groups of tiles.
/// stages == 0 requests the bound; larger requests are clamped to it.
PipelinePlan plan_pipeline(const ConvLayerConfig& cfg, const EngineConfig& engine = {}, std::uint32_t stages = 0);

/// JSON record: layer, kind, cycles, ma_inputs, ma_weights, ma_outputs,
/// busy_ratio, saturations.
std::string sim_result_json(const SimResult& r, std::size_t layer_index);
void write_sim_results_json(std::ostream& out, std::span<const SimResult> results);

/// Deterministic random operands for a layer, drawn from a seeded engine.
/// Magnitudes keep every partial sum far from the accumulator limits.
LayerStimulus random_stimulus(const LayerConfig& layer, std::uint64_t seed);

}  // namespace gfid
