#include "gfid/perf_model.hpp"

#include <iomanip>
#include <limits>
#include <json.hpp>
#include <ostream>

#include "gfid/error.hpp"

namespace gfid {

ModelProfile ModelProfile::literal() { return ModelProfile{"literal", EngineConfig{}, ModelOptions{}}; }

ModelProfile ModelProfile::published() {
  return ModelProfile{"published", EngineConfig::published_calibration(), ModelOptions{false}};
}

ModelProfile ModelProfile::by_name(std::string_view name) {
  if (name == "literal") return literal();
  if (name == "published") return published();
  throw LookupError("unknown profile '" + std::string(name) + "' (expected literal or published)");
}

namespace {

__extension__ typedef unsigned __int128 u128;

std::uint64_t narrow(u128 v) {
  if (v > std::numeric_limits<std::uint64_t>::max()) throw PreconditionError("cycle count overflows 64 bits");
  return static_cast<std::uint64_t>(v);
}

u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    const u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

Rational conv_cycles(const ConvLayerConfig& cfg, const TileModeConfig& mode, const ModelOptions& options) {
  validate(cfg);
  if (mode.w_f != cfg.w_f || mode.s != cfg.s || mode.n_eff == 0 || mode.p_eff == 0) {
    throw ModeError("tile mode does not match the layer's filter");
  }
  const OutputDims d = output_dims(cfg);
  const std::uint64_t c_out_g = cfg.c_out / cfg.groups;
  const u128 rep = static_cast<u128>(cfg.h_f) * (cfg.c_in / cfg.groups) * ((c_out_g + mode.p_eff - 1) / mode.p_eff) *
                   cfg.groups;
  const u128 hw = static_cast<u128>(d.h_out) * d.w_out;
  const u128 n = mode.n_eff;
  u128 num = hw * (static_cast<u128>(cfg.s) * n + cfg.w_f - cfg.s) * rep;
  if (options.charge_weight_passing) num += static_cast<u128>(cfg.w_f - 1) * (d.h_out - 1) * rep * n;
  const u128 g = gcd128(num, n);
  return Rational{narrow(num / g), narrow(n / g)};
}

Rational conv_cycles(const ConvLayerConfig& cfg, const EngineConfig& engine, const ModelOptions& options) {
  return conv_cycles(cfg, tile_mode(cfg.w_f, cfg.s, engine.array), options);
}

ConvMemAccesses conv_mem_accesses(const ConvLayerConfig& cfg, const TileModeConfig& mode,
                                  const ModelOptions& options) {
  const Rational cc = conv_cycles(cfg, mode, options);
  const OutputDims d = output_dims(cfg);
  const std::uint64_t hw = static_cast<std::uint64_t>(d.h_out) * d.w_out;
  ConvMemAccesses ma;
  ma.ma_inputs = cc.ceil();
  ma.ma_filters = narrow(static_cast<u128>(cfg.h_f) * cfg.w_f * (cfg.c_in / cfg.groups) *
                         ((hw + mode.n_eff - 1) / mode.n_eff) * cfg.c_out);
  ma.ma_outputs = hw * cfg.c_out;
  return ma;
}

std::uint64_t fc_cycles(const FcLayerConfig& cfg, std::uint32_t p) {
  validate(cfg);
  if (p == 0) throw PreconditionError("PE count must be positive");
  return static_cast<std::uint64_t>((cfg.m + p - 1) / p) * cfg.n;
}

FcMemAccesses fc_mem_accesses(const FcLayerConfig& cfg, std::uint32_t p) {
  FcMemAccesses ma;
  ma.ma_inputs = fc_cycles(cfg, p);
  ma.ma_weights = static_cast<std::uint64_t>(cfg.m) * cfg.n;
  ma.ma_outputs = cfg.m;
  return ma;
}

double peak_performance_gops(const EngineConfig& engine, LayerKind kind) {
  const double clock = kind == LayerKind::kConv ? engine.conv_clock_hz : engine.fc_clock_hz;
  return 2.0 * engine.array.total_pes() * clock / 1e9;
}

double efficiency(std::uint64_t ops, std::uint64_t cycles, std::uint32_t pes) {
  if (cycles == 0 || pes == 0) throw PreconditionError("efficiency needs a positive cycle count");
  return static_cast<double>(ops) / (2.0 * pes * static_cast<double>(cycles));
}

LayerReport layer_report(const LayerConfig& layer, std::size_t index, const ModelProfile& profile) {
  const EngineConfig& engine = profile.engine;
  LayerReport r;
  r.index = index;
  r.ops = 2 * mac_count(layer);
  double clock = 0;
  if (const auto* conv = std::get_if<ConvLayerConfig>(&layer)) {
    const TileModeConfig mode = tile_mode(conv->w_f, conv->s, engine.array);
    const ConvMemAccesses ma = conv_mem_accesses(*conv, mode, profile.options);
    r.kind = LayerKind::kConv;
    r.compute_cycles = ma.ma_inputs;
    r.writeback_cycles = writeback_stall(r.compute_cycles, ma.ma_outputs, engine);
    r.ma_inputs = ma.ma_inputs;
    r.ma_weights = ma.ma_filters;
    r.ma_outputs = ma.ma_outputs;
    clock = engine.conv_clock_hz;
  } else {
    const auto& fc = std::get<FcLayerConfig>(layer);
    const FcMemAccesses ma = fc_mem_accesses(fc, engine.array.total_pes());
    r.kind = LayerKind::kFc;
    r.compute_cycles = ma.ma_inputs;
    r.ma_inputs = ma.ma_inputs;
    r.ma_weights = ma.ma_weights;
    r.ma_outputs = ma.ma_outputs;
    clock = engine.fc_clock_hz;
  }
  r.cycles = r.compute_cycles + r.writeback_cycles;
  r.latency_s = static_cast<double>(r.cycles) / clock;
  r.peak_gops = peak_performance_gops(engine, r.kind);
  r.performance_gops = static_cast<double>(r.ops) / r.latency_s / 1e9;
  r.efficiency = efficiency(r.ops, r.cycles, engine.array.total_pes());
  return r;
}

namespace {

void accumulate(AggregateReport& a, const LayerReport& l) {
  a.cycles += l.cycles;
  a.latency_s += l.latency_s;
  a.ma_inputs += l.ma_inputs;
  a.ma_weights += l.ma_weights;
  a.ma_outputs += l.ma_outputs;
  a.ops += l.ops;
}

void finish(AggregateReport& a, double peak, std::uint32_t pes) {
  a.peak_gops = peak;
  if (a.cycles == 0) return;
  a.performance_gops = static_cast<double>(a.ops) / a.latency_s / 1e9;
  a.efficiency = efficiency(a.ops, a.cycles, pes);
}

}  // namespace

PerfReport network_report(const NetworkDescriptor& net, const ModelProfile& profile) {
  validate(net);
  PerfReport rep;
  rep.network = net.name;
  rep.profile = profile.name;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    rep.layers.push_back(layer_report(net.layers[i], i + 1, profile));
    const LayerReport& l = rep.layers.back();
    accumulate(l.kind == LayerKind::kConv ? rep.conv : rep.fc, l);
    accumulate(rep.total, l);
  }
  const std::uint32_t pes = profile.engine.array.total_pes();
  finish(rep.conv, peak_performance_gops(profile.engine, LayerKind::kConv), pes);
  finish(rep.fc, peak_performance_gops(profile.engine, LayerKind::kFc), pes);
  finish(rep.total, 0.0, pes);
  return rep;
}

void write_report_csv(std::ostream& out, const PerfReport& report) {
  out << "layer,cycles,latency_ms,ma_mb,efficiency_pct\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::fixed;
  for (const auto& l : report.layers) {
    out << l.index << ',' << l.cycles << ',' << std::setprecision(4) << l.latency_s * 1e3 << ','
        << std::setprecision(4) << l.ma_mb() << ',' << std::setprecision(2) << l.efficiency * 100 << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

namespace {

nlohmann::json aggregate_json(const AggregateReport& a) {
  return {{"cycles", a.cycles},         {"latency_ms", a.latency_s * 1e3}, {"ma_inputs", a.ma_inputs},
          {"ma_weights", a.ma_weights}, {"ma_outputs", a.ma_outputs},      {"ma_mb", a.ma_mb()},
          {"ops", a.ops},               {"performance_gops", a.performance_gops},
          {"peak_gops", a.peak_gops},   {"efficiency_pct", a.efficiency * 100}, {"fps", a.fps()}};
}

}  // namespace

std::string report_json(const PerfReport& report) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : report.layers) {
    layers.push_back({{"layer", l.index},
                      {"kind", l.kind == LayerKind::kConv ? "conv" : "fc"},
                      {"cycles", l.cycles},
                      {"compute_cycles", l.compute_cycles},
                      {"writeback_cycles", l.writeback_cycles},
                      {"latency_ms", l.latency_s * 1e3},
                      {"ma_inputs", l.ma_inputs},
                      {"ma_weights", l.ma_weights},
                      {"ma_outputs", l.ma_outputs},
                      {"ma_mb", l.ma_mb()},
                      {"ops", l.ops},
                      {"performance_gops", l.performance_gops},
                      {"efficiency_pct", l.efficiency * 100}});
  }
  nlohmann::json doc{{"network", report.network},
                     {"profile", report.profile},
                     {"layers", std::move(layers)},
                     {"conv", aggregate_json(report.conv)},
                     {"fc", aggregate_json(report.fc)},
                     {"total", aggregate_json(report.total)}};
  return doc.dump(2);
}

}  // namespace gfid
