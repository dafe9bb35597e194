#include "gfid/engine.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <ostream>
#include <random>
#include <string>
#include <thread>

#include "gfid/error.hpp"

namespace gfid {

EngineConfig EngineConfig::published_calibration() {
  EngineConfig e;
  e.writeback_words_per_cycle = 4.0;
  e.writeback_overlapped = false;
  return e;
}

std::uint64_t writeback_stall(std::uint64_t compute_cycles, std::uint64_t output_words, const EngineConfig& engine) {
  if (!(engine.writeback_words_per_cycle > 0)) throw PreconditionError("write-back bandwidth must be positive");
  const auto write = static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(output_words) / engine.writeback_words_per_cycle));
  if (!engine.writeback_overlapped) return write;
  return write > compute_cycles ? write - compute_cycles : 0;
}

double SimResult::busy_ratio() const noexcept {
  if (cycles == 0 || total_pes == 0) return 0.0;
  return static_cast<double>(busy_pe_cycles) / (static_cast<double>(total_pes) * static_cast<double>(cycles));
}

std::vector<Segment> plan_segments(OutputDims dims, const TileModeConfig& mode) {
  const std::uint64_t total = static_cast<std::uint64_t>(dims.h_out) * dims.w_out;
  std::vector<Segment> segments;
  for (std::uint64_t first = 0; first < total; first += mode.n_eff) {
    Segment seg{};
    seg.first = static_cast<std::uint32_t>(first);
    seg.count = static_cast<std::uint32_t>(std::min<std::uint64_t>(mode.n_eff, total - first));
    std::uint32_t local = 0;
    while (local < seg.count) {
      const std::uint64_t flat = first + local;
      SegmentPiece piece{};
      piece.row = static_cast<std::uint32_t>(flat / dims.w_out);
      piece.col = static_cast<std::uint32_t>(flat % dims.w_out);
      piece.count = std::min(seg.count - local, dims.w_out - piece.col);
      piece.local_first = local;
      if (local > 0) {
        piece.stall = mode.s - 1;
      } else if (piece.row > 0 && piece.col == 0) {
        piece.stall = mode.w_f - 1;
      }
      seg.row_pass_cycles += piece.stall + static_cast<std::uint64_t>(mode.s) * piece.count + mode.w_f - mode.s;
      seg.pieces.push_back(piece);
      local += piece.count;
    }
    segments.push_back(std::move(seg));
  }
  return segments;
}

namespace {

unsigned worker_count(const EngineConfig& engine, std::size_t jobs) {
  unsigned w = engine.workers;
  if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(jobs, 1)));
}

// Runs job(i) for i in [0, jobs) on up to `workers` threads. Each job owns
// its slot of any output vector, so no synchronisation is needed.
template <typename Job>
void fan_out(std::size_t jobs, unsigned workers, Job&& job) {
  if (workers <= 1 || jobs <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned t = 0; t < workers; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < jobs; i += workers) job(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_conv_operands(const ConvLayerConfig& cfg, const FixedTensor& x, const FixedFilterBank& w) {
  if (x.height() != cfg.h_in || x.width() != cfg.w_in || x.channels() != cfg.c_in) {
    throw ShapeError("input tensor does not match the layer geometry");
  }
  if (!w.matches(cfg)) throw ShapeError("filter bank does not match the layer geometry");
}

struct ConvPlan {
  TileModeConfig mode;
  OutputDims dims;
  std::uint32_t c_in_g;
  std::uint32_t c_out_g;
  std::uint32_t passes;
  std::vector<Segment> segments;
};

ConvPlan make_plan(const ConvLayerConfig& cfg, const EngineConfig& engine) {
  validate(cfg);
  ConvPlan plan;
  plan.mode = tile_mode(cfg.w_f, cfg.s, engine.array);
  plan.dims = output_dims(cfg);
  plan.c_in_g = cfg.c_in / cfg.groups;
  plan.c_out_g = cfg.c_out / cfg.groups;
  plan.passes = (plan.c_out_g + plan.mode.p_eff - 1) / plan.mode.p_eff;
  plan.segments = plan_segments(plan.dims, plan.mode);
  return plan;
}

void finish_conv(SimResult& r, const ConvLayerConfig& cfg, const ConvPlan& plan, const EngineConfig& engine) {
  r.kind = LayerKind::kConv;
  r.total_pes = engine.array.total_pes();
  r.clock_hz = engine.conv_clock_hz;
  r.ma_inputs = r.compute_cycles;
  r.ma_outputs = static_cast<std::uint64_t>(plan.dims.h_out) * plan.dims.w_out * cfg.c_out;
  r.writeback_cycles = writeback_stall(r.compute_cycles, r.ma_outputs, engine);
  r.cycles = r.compute_cycles + r.writeback_cycles;
}

}  // namespace

SimResult run_conv_timing(const ConvLayerConfig& cfg, const EngineConfig& engine) {
  const ConvPlan plan = make_plan(cfg, engine);
  SimResult r;
  const std::uint64_t rep = static_cast<std::uint64_t>(plan.c_in_g) * cfg.h_f;
  std::uint64_t per_pass = 0;
  std::uint64_t stalls = 0;
  for (const auto& seg : plan.segments) {
    per_pass += rep * seg.row_pass_cycles;
    for (const auto& piece : seg.pieces) stalls += rep * piece.stall;
  }
  const std::uint64_t group_passes = static_cast<std::uint64_t>(plan.passes) * cfg.groups;
  r.compute_cycles = per_pass * group_passes;
  r.passing_stall_cycles = stalls * group_passes;
  r.segments = plan.segments.size() * group_passes;
  r.busy_pe_cycles = mac_count(cfg);
  r.ma_weights = static_cast<std::uint64_t>(cfg.h_f) * cfg.w_f * plan.c_in_g * plan.segments.size() * cfg.c_out;
  finish_conv(r, cfg, plan, engine);
  return r;
}

SimResult run_conv_layer(const ConvLayerConfig& cfg, const FixedTensor& x, const FixedFilterBank& w,
                         const EngineConfig& engine) {
  const ConvPlan plan = make_plan(cfg, engine);
  check_conv_operands(cfg, x, w);
  const TileModeConfig& mode = plan.mode;
  const std::uint32_t lpp = mode.logical_tiles_per_physical;
  const std::uint32_t s = cfg.s;

  SimResult r;
  r.conv_output = FixedTensor(plan.dims.h_out, plan.dims.w_out, cfg.c_out);

  for (std::uint32_t g = 0; g < cfg.groups; ++g) {
    const std::uint32_t k0 = g * plan.c_in_g;
    for (std::uint32_t pass = 0; pass < plan.passes; ++pass) {
      const std::uint32_t q_base = g * plan.c_out_g + pass * mode.p_eff;
      const std::uint32_t active = std::min(mode.p_eff, plan.c_out_g - pass * mode.p_eff);
      const std::uint32_t physical = (active + lpp - 1) / lpp;

      std::vector<TileTrace> traces(physical);
      std::vector<SaturationCounter> sats(physical);
      fan_out(physical, worker_count(engine, physical), [&](std::size_t pt) {
        Tile tile(mode, engine.array.acc_depth);
        TileTrace& trace = traces[pt];
        SaturationCounter& sat = sats[pt];
        std::vector<std::uint32_t> channels;  // output channel per loaded sub-tile
        for (std::uint32_t sub = 0; sub < lpp; ++sub) {
          const std::uint32_t lt = static_cast<std::uint32_t>(pt) * lpp + sub;
          if (lt < active) channels.push_back(q_base + lt);
        }
        std::vector<Activation> pixels;
        for (const auto& seg : plan.segments) {
          for (std::uint32_t sub = 0; sub < channels.size(); ++sub) {
            tile.preload(sub, 0, seg.count, acc_from_bias(w.bias(channels[sub])));
          }
          for (std::uint32_t k = 0; k < plan.c_in_g; ++k) {
            for (std::uint32_t j = 0; j < cfg.h_f; ++j) {
              for (std::size_t pi = 0; pi < seg.pieces.size(); ++pi) {
                const SegmentPiece& piece = seg.pieces[pi];
                if (pi == 0) {
                  if (piece.stall > 0) tile.weight_passing_stall(RowCrossing::kSegmentStart, 0, trace);
                  for (std::uint32_t sub = 0; sub < channels.size(); ++sub) {
                    const Weight* row = &w.weight(j, 0, k, channels[sub]);
                    tile.load_weights(sub, std::span<const Weight>(row, cfg.w_f), piece.local_first, trace);
                  }
                } else {
                  tile.weight_passing_stall(RowCrossing::kWithinSegment, piece.local_first, trace);
                }
                const std::uint32_t y = piece.row * s + j;
                const std::uint32_t x0 = piece.col * s;
                const std::uint32_t len = s * piece.count + cfg.w_f - s;
                pixels.resize(len);
                for (std::uint32_t c = 0; c < len; ++c) pixels[c] = x.at(y, x0 + c, k0 + k);
                tile.run_row_pass(pixels, piece.count, piece.local_first, true, trace, &sat);
              }
            }
          }
          for (std::uint32_t sub = 0; sub < channels.size(); ++sub) {
            for (std::uint32_t l = 0; l < seg.count; ++l) {
              const std::uint32_t flat = seg.first + l;
              r.conv_output.at(flat / plan.dims.w_out, flat % plan.dims.w_out, channels[sub]) =
                  relu_requantize(tile.partial_sum(sub, l), &sat);
            }
          }
        }
      });

      // Tiles share the pixel stream, so every trace spans the same clocks.
      for (const auto& t : traces) {
        if (t.total_cycles != traces.front().total_cycles) throw Error("tiles fell out of lockstep");
        r.busy_pe_cycles += t.total_busy();
        r.ma_weights += t.weight_loads;
      }
      for (const auto& sc : sats) r.saturations += sc.count;
      r.compute_cycles += traces.front().total_cycles;
      r.passing_stall_cycles += traces.front().stall_cycles;
      r.segments += plan.segments.size();
    }
  }
  finish_conv(r, cfg, plan, engine);
  return r;
}

namespace {

SimResult fc_counts(const FcLayerConfig& cfg, const EngineConfig& engine) {
  validate(cfg);
  const std::uint32_t p = engine.array.total_pes();
  SimResult r;
  r.kind = LayerKind::kFc;
  r.total_pes = p;
  r.clock_hz = engine.fc_clock_hz;
  r.compute_cycles = static_cast<std::uint64_t>((cfg.m + p - 1) / p) * cfg.n;
  r.cycles = r.compute_cycles;
  r.ma_inputs = r.compute_cycles;
  r.ma_weights = static_cast<std::uint64_t>(cfg.m) * cfg.n;
  r.ma_outputs = cfg.m;
  r.busy_pe_cycles = mac_count(cfg);
  return r;
}

}  // namespace

SimResult run_fc_timing(const FcLayerConfig& cfg, const EngineConfig& engine) { return fc_counts(cfg, engine); }

SimResult run_fc_layer(const FcLayerConfig& cfg, std::span<const Activation> x, const FixedFcParams& params,
                       const EngineConfig& engine) {
  validate(cfg);
  if (x.size() != cfg.n) throw ShapeError("input length does not match n");
  if (params.n != cfg.n || params.m != cfg.m || params.weights.size() != static_cast<std::size_t>(cfg.n) * cfg.m ||
      params.biases.size() != cfg.m) {
    throw ShapeError("fully-connected parameters do not match the layer");
  }
  const std::uint32_t pes = engine.array.pes_per_tile;
  const std::uint32_t p = engine.array.total_pes();
  const std::uint32_t passes = (cfg.m + p - 1) / p;
  SimResult r;
  r.fc_output.assign(cfg.m, Activation{});
  std::uint64_t cycles = 0;
  std::uint64_t busy = 0;
  std::uint64_t loads = 0;
  for (std::uint32_t pass = 0; pass < passes; ++pass) {
    const std::uint32_t base = pass * p;
    const std::uint32_t physical = (std::min(p, cfg.m - base) + pes - 1) / pes;
    std::vector<TileTrace> traces(physical);
    std::vector<SaturationCounter> sats(physical);
    fan_out(physical, worker_count(engine, physical), [&](std::size_t pt) {
      Tile tile = Tile::fully_connected(engine.array.acc_depth);
      std::vector<std::span<const Weight>> rows(pes);
      for (std::uint32_t pe = 0; pe < pes; ++pe) {
        const std::uint64_t q = base + pt * pes + pe;
        if (q >= cfg.m) continue;
        rows[pe] = std::span<const Weight>(&params.weights[q * cfg.n], cfg.n);
        tile.preload(pe, 0, 1, acc_from_bias(params.biases[q]));
      }
      tile.run_fc_pass(x, rows, true, traces[pt], &sats[pt]);
      for (std::uint32_t pe = 0; pe < pes; ++pe) {
        const std::uint64_t q = base + pt * pes + pe;
        if (q < cfg.m) r.fc_output[q] = relu_requantize(tile.partial_sum(pe, 0), &sats[pt]);
      }
    });
    for (const auto& t : traces) {
      busy += t.total_busy();
      loads += t.weight_loads;
    }
    for (const auto& sc : sats) r.saturations += sc.count;
    cycles += traces.front().total_cycles;
  }
  SimResult counts = fc_counts(cfg, engine);
  if (counts.compute_cycles != cycles || counts.busy_pe_cycles != busy || counts.ma_weights != loads) {
    throw Error("fully-connected counters disagree with the pass structure");
  }
  counts.fc_output = std::move(r.fc_output);
  counts.saturations = r.saturations;
  return counts;
}

NetworkTotals aggregate(std::span<const SimResult> layers) {
  NetworkTotals t;
  for (const auto& r : layers) {
    if (r.kind == LayerKind::kConv) {
      t.conv_cycles += r.cycles;
      t.conv_latency_s += r.latency_s();
      t.conv_ma_words += r.ma_total();
    } else {
      t.fc_cycles += r.cycles;
      t.fc_latency_s += r.latency_s();
      t.fc_ma_words += r.ma_total();
    }
    t.saturations += r.saturations;
  }
  t.latency_s = t.conv_latency_s + t.fc_latency_s;
  t.fps = t.latency_s > 0 ? 1.0 / t.latency_s : 0.0;
  t.conv_mb = 2.0 * static_cast<double>(t.conv_ma_words) / 1e6;
  t.fc_mb = 2.0 * static_cast<double>(t.fc_ma_words) / 1e6;
  t.mb = t.conv_mb + t.fc_mb;
  return t;
}

NetworkSimResult run_network(const NetworkDescriptor& net, const EngineConfig& engine,
                             std::span<const LayerStimulus> stimuli) {
  validate(net);
  if (!stimuli.empty() && stimuli.size() != net.layers.size()) {
    throw ShapeError("need one stimulus per layer, got " + std::to_string(stimuli.size()));
  }
  NetworkSimResult out;
  out.layers.resize(net.layers.size());
  EngineConfig inner = engine;
  inner.workers = 1;
  fan_out(net.layers.size(), worker_count(engine, net.layers.size()), [&](std::size_t i) {
    const LayerConfig& layer = net.layers[i];
    if (const auto* conv = std::get_if<ConvLayerConfig>(&layer)) {
      if (stimuli.empty()) {
        out.layers[i] = run_conv_timing(*conv, inner);
      } else {
        const auto* st = std::get_if<ConvStimulus>(&stimuli[i]);
        if (!st) throw ShapeError("layer " + std::to_string(i) + " needs a conv stimulus");
        out.layers[i] = run_conv_layer(*conv, st->x, st->w, inner);
      }
    } else {
      const auto& fc = std::get<FcLayerConfig>(layer);
      if (stimuli.empty()) {
        out.layers[i] = run_fc_timing(fc, inner);
      } else {
        const auto* st = std::get_if<FcStimulus>(&stimuli[i]);
        if (!st) throw ShapeError("layer " + std::to_string(i) + " needs a fully-connected stimulus");
        out.layers[i] = run_fc_layer(fc, st->x, st->params, inner);
      }
    }
  });
  out.totals = aggregate(out.layers);
  return out;
}

PipelinePlan plan_pipeline(const ConvLayerConfig& cfg, const EngineConfig& engine, std::uint32_t stages) {
  const TileModeConfig mode = tile_mode(cfg.w_f, cfg.s, engine.array);
  PipelinePlan plan;
  plan.stage_bound = std::max<std::uint32_t>(1, (mode.s * mode.n_eff + mode.w_f - mode.s) / mode.w_f);
  plan.stages = stages == 0 ? plan.stage_bound : std::min(stages, plan.stage_bound);
  const double weights = static_cast<double>(engine.array.pes_per_tile) * engine.array.physical_tiles;
  plan.unpipelined_words = 1.0 + weights;
  plan.pipelined_words = 1.0 + weights / plan.stages;
  return plan;
}

namespace {

nlohmann::json to_json(const SimResult& r, std::size_t layer_index) {
  return nlohmann::json{{"layer", layer_index},
                        {"kind", r.kind == LayerKind::kConv ? "conv" : "fc"},
                        {"cycles", r.cycles},
                        {"ma_inputs", r.ma_inputs},
                        {"ma_weights", r.ma_weights},
                        {"ma_outputs", r.ma_outputs},
                        {"busy_ratio", r.busy_ratio()},
                        {"saturations", r.saturations}};
}

}  // namespace

std::string sim_result_json(const SimResult& r, std::size_t layer_index) { return to_json(r, layer_index).dump(); }

void write_sim_results_json(std::ostream& out, std::span<const SimResult> results) {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < results.size(); ++i) arr.push_back(to_json(results[i], i + 1));
  out << arr.dump(2) << '\n';
}

LayerStimulus random_stimulus(const LayerConfig& layer, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> act(-512, 511);
  std::uniform_int_distribution<int> bias(-1024, 1023);
  auto weight_dist = [](std::uint64_t fan_in) {
    const auto r = static_cast<int>(std::min<std::uint64_t>(32767, 1'900'000 / std::max<std::uint64_t>(fan_in, 1)));
    return std::uniform_int_distribution<int>(-r, r);
  };
  auto raw16 = [](int v) { return static_cast<std::int16_t>(v); };
  if (const auto* conv = std::get_if<ConvLayerConfig>(&layer)) {
    validate(*conv);
    ConvStimulus st{FixedTensor(conv->h_in, conv->w_in, conv->c_in), FixedFilterBank(*conv)};
    for (auto& v : st.x.data()) v = Activation::from_raw(raw16(act(rng)));
    auto wd = weight_dist(static_cast<std::uint64_t>(conv->h_f) * conv->w_f * (conv->c_in / conv->groups));
    for (auto& v : st.w.filters()) v = Weight::from_raw(raw16(wd(rng)));
    for (auto& v : st.w.biases()) v = Activation::from_raw(raw16(bias(rng)));
    return st;
  }
  const auto& fc = std::get<FcLayerConfig>(layer);
  validate(fc);
  FcStimulus st{std::vector<Activation>(fc.n), FixedFcParams(fc)};
  for (auto& v : st.x) v = Activation::from_raw(raw16(act(rng)));
  auto wd = weight_dist(fc.n);
  for (auto& v : st.params.weights) v = Weight::from_raw(raw16(wd(rng)));
  for (auto& v : st.params.biases) v = Activation::from_raw(raw16(bias(rng)));
  return st;
}

}  // namespace gfid
