#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gfid/engine.hpp"
#include "gfid/model.hpp"
#include "gfid/schedule.hpp"

namespace gfid {

/// Non-negative exact fraction, kept reduced.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  std::uint64_t ceil() const noexcept { return num / den + (num % den != 0 ? 1 : 0); }
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

struct ModelOptions {
  // Adds (w_f - 1)(h_out - 1) cycles per (k, j, pass) for row crossings.
  bool charge_weight_passing = true;
};

/// Engine settings plus model options under one name.
struct ModelProfile {
  std::string name;
  EngineConfig engine;
  ModelOptions options;

  /// Closed form as written, with the overlapped 1 word/cycle write-back.
  static ModelProfile literal();
  /// Calibration that reproduces the published per-layer series: no
  /// weight-passing term, serialized write-back at 4 words/cycle.
  static ModelProfile published();
  /// "literal" or "published"; throws LookupError otherwise.
  static ModelProfile by_name(std::string_view name);
};

/// (hw/n)(s*n + w_f - s) h_f c_in ceil(c_out/p) + (w_f-1)(h_out-1) h_f c_in ceil(c_out/p),
/// summed over channel groups.
Rational conv_cycles(const ConvLayerConfig& cfg, const TileModeConfig& mode, const ModelOptions& options = {});
Rational conv_cycles(const ConvLayerConfig& cfg, const EngineConfig& engine = {}, const ModelOptions& options = {});

struct ConvMemAccesses {
  std::uint64_t ma_inputs = 0;
  std::uint64_t ma_filters = 0;
  std::uint64_t ma_outputs = 0;
  std::uint64_t total() const noexcept { return ma_inputs + ma_filters + ma_outputs; }
};

/// ma_inputs = ceil(conv_cycles); ma_filters = h_f w_f c_in ceil(hw/n) c_out
/// (c_in per group); ma_outputs = hw * c_out.
ConvMemAccesses conv_mem_accesses(const ConvLayerConfig& cfg, const TileModeConfig& mode,
                                  const ModelOptions& options = {});

/// ceil(m/p) * n.
std::uint64_t fc_cycles(const FcLayerConfig& cfg, std::uint32_t p = 192);

struct FcMemAccesses {
  std::uint64_t ma_inputs = 0;
  std::uint64_t ma_weights = 0;
  std::uint64_t ma_outputs = 0;
  std::uint64_t total() const noexcept { return ma_inputs + ma_weights + ma_outputs; }
};
FcMemAccesses fc_mem_accesses(const FcLayerConfig& cfg, std::uint32_t p = 192);

/// 2 ops per PE per clock.
double peak_performance_gops(const EngineConfig& engine, LayerKind kind);

/// ops / (2 * pes * cycles). Throws PreconditionError when cycles is 0.
double efficiency(std::uint64_t ops, std::uint64_t cycles, std::uint32_t pes = 192);

/// 16-bit words to decimal megabytes.
constexpr double words_to_mb(std::uint64_t words) noexcept { return 2.0 * static_cast<double>(words) / 1e6; }

struct LayerReport {
  std::size_t index = 0;  // one-based
  LayerKind kind = LayerKind::kConv;
  std::uint64_t compute_cycles = 0;
  std::uint64_t writeback_cycles = 0;
  std::uint64_t cycles = 0;
  double latency_s = 0;
  std::uint64_t ma_inputs = 0;
  std::uint64_t ma_weights = 0;
  std::uint64_t ma_outputs = 0;
  std::uint64_t ops = 0;
  double performance_gops = 0;
  double peak_gops = 0;
  double efficiency = 0;

  std::uint64_t ma_total() const noexcept { return ma_inputs + ma_weights + ma_outputs; }
  double ma_mb() const noexcept { return words_to_mb(ma_total()); }
};

struct AggregateReport {
  std::uint64_t cycles = 0;
  double latency_s = 0;
  std::uint64_t ma_inputs = 0;
  std::uint64_t ma_weights = 0;
  std::uint64_t ma_outputs = 0;
  std::uint64_t ops = 0;
  double performance_gops = 0;
  double peak_gops = 0;  // 0 for the mixed-clock total
  double efficiency = 0;

  std::uint64_t ma_total() const noexcept { return ma_inputs + ma_weights + ma_outputs; }
  double ma_mb() const noexcept { return words_to_mb(ma_total()); }
  double fps() const noexcept { return latency_s > 0 ? 1.0 / latency_s : 0.0; }
};

struct PerfReport {
  std::string network;
  std::string profile;
  std::vector<LayerReport> layers;
  AggregateReport conv;
  AggregateReport fc;
  AggregateReport total;
};

LayerReport layer_report(const LayerConfig& layer, std::size_t index, const ModelProfile& profile);
PerfReport network_report(const NetworkDescriptor& net, const ModelProfile& profile = ModelProfile::literal());

/// Header "layer,cycles,latency_ms,ma_mb,efficiency_pct".
void write_report_csv(std::ostream& out, const PerfReport& report);
std::string report_json(const PerfReport& report);

}  // namespace gfid
