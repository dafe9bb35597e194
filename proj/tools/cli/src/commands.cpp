#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <gfid/engine.hpp>
#include <gfid/error.hpp>
#include <gfid/io.hpp>
#include <gfid/oracle.hpp>
#include <gfid/perf_model.hpp>
#include <gfid/schedule.hpp>
#include <gfid_cli/cli.hpp>
#include <json.hpp>

namespace gfid::cli {

namespace {

class Sink {
 public:
  Sink(const RunSpec& spec, std::ostream& fallback) : os_(&fallback) {
    if (spec.out_path) {
      file_.open(*spec.out_path);
      if (!file_) throw Error("cannot write '" + *spec.out_path + "'");
      os_ = &file_;
    }
  }
  std::ostream& get() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Selection {
  NetworkDescriptor net;              // selected layers only
  std::vector<std::size_t> original;  // one-based index in the full network
};

Selection select_layers(const RunSpec& spec) {
  NetworkDescriptor full = resolve_network(spec.network);
  Selection sel;
  sel.net.name = full.name;
  sel.original = parse_layer_range(spec.layers, full.layers.size());
  for (std::size_t i : sel.original) sel.net.layers.push_back(full.layers[i - 1]);
  return sel;
}

const char* kind_name(LayerKind k) { return k == LayerKind::kConv ? "conv" : "fc"; }

std::string opt_cell(std::optional<double> v, const char* f) { return v ? fmt(f, *v) : std::string(); }

struct LayerRef {
  std::optional<double> efficiency_pct;
  std::optional<double> latency_ms;
  std::optional<double> memory_mb;
};

LayerRef layer_ref(const NetworkReference* ref, std::size_t layer) {
  if (!ref) return {};
  return {layer_value(ref->layers.efficiency_pct, layer), layer_value(ref->layers.latency_ms, layer),
          layer_value(ref->layers.memory_mb, layer)};
}

std::optional<double> minus(std::optional<double> a, std::optional<double> b) {
  if (a && b) return *a - *b;
  return std::nullopt;
}

}  // namespace

int cmd_report(const RunSpec& spec, std::ostream& out) {
  const Selection sel = select_layers(spec);
  const ModelProfile profile = ModelProfile::by_name(spec.profile);
  PerfReport rep = network_report(sel.net, profile);
  for (std::size_t i = 0; i < rep.layers.size(); ++i) rep.layers[i].index = sel.original[i];
  const NetworkReference* ref = spec.compare ? embedded_reference().find(rep.network) : nullptr;

  Sink sink(spec, out);
  std::ostream& os = sink.get();

  if (spec.format == Format::kCsv) {
    if (!spec.compare) {
      write_report_csv(os, rep);
      return kExitOk;
    }
    os << "layer,cycles,latency_ms,ma_mb,efficiency_pct,ref_efficiency_pct,delta_efficiency_pct,ref_latency_ms,"
          "delta_latency_ms,ref_ma_mb,delta_ma_mb\n";
    for (const auto& l : rep.layers) {
      const LayerRef r = layer_ref(ref, l.index);
      const double eff = l.efficiency * 100;
      const double ms = l.latency_s * 1e3;
      const double mb = l.ma_mb();
      os << l.index << ',' << l.cycles << ',' << fmt("%.4f", ms) << ',' << fmt("%.4f", mb) << ','
         << fmt("%.2f", eff) << ',' << opt_cell(r.efficiency_pct, "%.1f") << ','
         << opt_cell(minus(eff, r.efficiency_pct), "%.2f") << ',' << opt_cell(r.latency_ms, "%.1f") << ','
         << opt_cell(minus(ms, r.latency_ms), "%.4f") << ',' << opt_cell(r.memory_mb, "%.1f") << ','
         << opt_cell(minus(mb, r.memory_mb), "%.4f") << '\n';
    }
    return kExitOk;
  }

  if (spec.format == Format::kJson) {
    auto doc = nlohmann::json::parse(report_json(rep));
    if (ref) {
      for (auto& l : doc["layers"]) {
        const LayerRef r = layer_ref(ref, l["layer"].get<std::size_t>());
        nlohmann::json j = nlohmann::json::object();
        if (r.efficiency_pct) j["efficiency_pct"] = *r.efficiency_pct;
        if (r.latency_ms) j["latency_ms"] = *r.latency_ms;
        if (r.memory_mb) j["ma_mb"] = *r.memory_mb;
        l["reference"] = j;
      }
      const auto& t = ref->totals;
      doc["reference"] = {{"conv", {{"latency_ms", t.conv_latency_ms},
                                    {"ma_mb", t.conv_mb},
                                    {"performance_gops", t.conv_gops},
                                    {"efficiency_pct", t.conv_efficiency_pct}}},
                          {"fc", {{"latency_ms", t.fc_latency_ms},
                                  {"ma_mb", t.fc_mb},
                                  {"performance_gops", t.fc_gops},
                                  {"efficiency_pct", t.fc_efficiency_pct}}}};
    }
    os << doc.dump(2) << '\n';
    return kExitOk;
  }

  os << "network " << rep.network << ", profile " << rep.profile << '\n';
  os << "layer kind       cycles  latency_ms     ma_mb  eff_pct";
  if (ref) os << "  ref_eff    d_eff   ref_ms     d_ms   ref_mb     d_mb";
  os << '\n';
  for (const auto& l : rep.layers) {
    const double eff = l.efficiency * 100;
    const double ms = l.latency_s * 1e3;
    os << fmt("%5zu %-4s %12" PRIu64 " %11.3f %9.3f %8.2f", l.index, kind_name(l.kind), l.cycles, ms, l.ma_mb(), eff);
    if (ref) {
      const LayerRef r = layer_ref(ref, l.index);
      auto cell = [&](std::optional<double> v, const char* f) { return v ? fmt(f, *v) : fmt("%9s", "-"); };
      os << cell(r.efficiency_pct, " %8.1f") << cell(minus(eff, r.efficiency_pct), " %+8.1f")
         << cell(r.latency_ms, " %8.1f") << cell(minus(ms, r.latency_ms), " %+8.2f") << cell(r.memory_mb, " %8.1f")
         << cell(minus(l.ma_mb(), r.memory_mb), " %+8.2f");
    }
    os << '\n';
  }
  auto total_line = [&](const char* name, const AggregateReport& a) {
    if (a.cycles == 0) return;
    os << fmt("%s: %" PRIu64 " cycles, %.3f ms, %.1f fps, %.3f MB, %.2f Gops of %.2f peak, efficiency %.1f%%\n", name,
              a.cycles, a.latency_s * 1e3, a.fps(), a.ma_mb(), a.performance_gops, a.peak_gops, a.efficiency * 100);
  };
  total_line("conv", rep.conv);
  total_line("fc", rep.fc);
  if (ref) {
    const auto& t = ref->totals;
    auto rel = [](double model, double pub) { return 100.0 * (model - pub) / pub; };
    if (rep.conv.cycles) {
      os << fmt("published conv: %.1f ms (%+.1f%%), %.1f MB (%+.1f%%), efficiency %.0f%% (%+.1f points)\n",
                t.conv_latency_ms, rel(rep.conv.latency_s * 1e3, t.conv_latency_ms), t.conv_mb,
                rel(rep.conv.ma_mb(), t.conv_mb), t.conv_efficiency_pct,
                rep.conv.efficiency * 100 - t.conv_efficiency_pct);
    }
    if (rep.fc.cycles) {
      os << fmt("published fc: %.1f ms (%+.1f%%), %.1f MB (%+.1f%%), efficiency %.0f%% (%+.1f points)\n",
                t.fc_latency_ms, rel(rep.fc.latency_s * 1e3, t.fc_latency_ms), t.fc_mb, rel(rep.fc.ma_mb(), t.fc_mb),
                t.fc_efficiency_pct, rep.fc.efficiency * 100 - t.fc_efficiency_pct);
    }
  } else if (spec.compare) {
    os << "no published reference for network '" << rep.network << "'\n";
  }
  return kExitOk;
}

int cmd_simulate(const RunSpec& spec, std::ostream& out) {
  Selection sel = select_layers(spec);
  for (auto& l : sel.net.layers) l = scale_layer(l, spec.scale);
  EngineConfig engine = ModelProfile::by_name(spec.profile).engine;
  engine.workers = spec.threads;
  std::vector<LayerStimulus> stimuli;
  if (!spec.timing_only) {
    for (std::size_t i = 0; i < sel.net.layers.size(); ++i) {
      stimuli.push_back(random_stimulus(sel.net.layers[i], spec.seed + sel.original[i]));
    }
  }
  const NetworkSimResult res = run_network(sel.net, engine, stimuli);

  Sink sink(spec, out);
  std::ostream& os = sink.get();
  if (spec.format == Format::kJson) {
    os << "[\n";
    for (std::size_t i = 0; i < res.layers.size(); ++i) {
      os << "  " << sim_result_json(res.layers[i], sel.original[i]) << (i + 1 < res.layers.size() ? ",\n" : "\n");
    }
    os << "]\n";
    return kExitOk;
  }
  if (spec.format == Format::kCsv) {
    os << "layer,kind,cycles,ma_inputs,ma_weights,ma_outputs,busy_ratio,saturations\n";
    for (std::size_t i = 0; i < res.layers.size(); ++i) {
      const SimResult& r = res.layers[i];
      os << sel.original[i] << ',' << kind_name(r.kind) << ',' << r.cycles << ',' << r.ma_inputs << ','
         << r.ma_weights << ',' << r.ma_outputs << ',' << fmt("%.6f", r.busy_ratio()) << ',' << r.saturations << '\n';
    }
    return kExitOk;
  }
  os << "network " << sel.net.name << ", scale " << spec.scale << (spec.timing_only ? ", timing only" : "") << '\n';
  os << "layer kind       cycles    ma_inputs   ma_weights   ma_outputs   busy  saturations\n";
  for (std::size_t i = 0; i < res.layers.size(); ++i) {
    const SimResult& r = res.layers[i];
    os << fmt("%5zu %-4s %12" PRIu64 " %12" PRIu64 " %12" PRIu64 " %12" PRIu64 " %6.3f %12" PRIu64 "\n",
              sel.original[i], kind_name(r.kind), r.cycles, r.ma_inputs, r.ma_weights, r.ma_outputs, r.busy_ratio(),
              r.saturations);
  }
  const NetworkTotals& t = res.totals;
  os << fmt("latency %.3f ms (conv %.3f, fc %.3f), %.2f fps, memory %.3f MB\n", t.latency_s * 1e3,
            t.conv_latency_s * 1e3, t.fc_latency_s * 1e3, t.fps, t.mb);
  return kExitOk;
}

namespace {

struct Check {
  std::size_t layer;
  LayerKind kind;
  std::string shape;
  bool bit_exact = false;
  std::uint64_t saturations = 0;
  bool counters_agree = false;
  std::uint64_t cycles = 0;
  double model_cycles = 0;
  std::uint64_t bound = 0;
  bool cycles_ok = false;
  bool pass() const { return bit_exact && saturations == 0 && counters_agree && cycles_ok; }
};

Check check_conv(const ConvLayerConfig& cfg, std::uint64_t seed, const EngineConfig& engine) {
  Check c{};
  c.kind = LayerKind::kConv;
  c.shape = fmt("%ux%u/s%u c_in %u c_out %u", cfg.h_f, cfg.w_f, cfg.s, cfg.c_in, cfg.c_out);
  const auto st = std::get<ConvStimulus>(random_stimulus(cfg, seed));
  SaturationCounter sat;
  const FixedTensor expect = oracle::conv_forward(st.x, st.w, cfg, &sat);
  const SimResult got = run_conv_layer(cfg, st.x, st.w, engine);
  const SimResult timing = run_conv_timing(cfg, engine);
  c.bit_exact = expect == got.conv_output;
  c.saturations = sat.count + got.saturations;
  c.counters_agree = timing.cycles == got.cycles && timing.busy_pe_cycles == got.busy_pe_cycles &&
                     timing.ma_weights == got.ma_weights && timing.ma_inputs == got.ma_inputs &&
                     timing.ma_outputs == got.ma_outputs;
  const TileModeConfig mode = tile_mode(cfg.w_f, cfg.s, engine.array);
  const Rational model = conv_cycles(cfg, mode);
  const OutputDims d = output_dims(cfg);
  const std::uint64_t hw = static_cast<std::uint64_t>(d.h_out) * d.w_out;
  const std::uint32_t c_out_g = cfg.c_out / cfg.groups;
  const std::uint64_t rep = static_cast<std::uint64_t>(cfg.h_f) * (cfg.c_in / cfg.groups) *
                            ((c_out_g + mode.p_eff - 1) / mode.p_eff) * cfg.groups;
  c.cycles = got.compute_cycles;
  c.model_cycles = model.value();
  if (hw % mode.n_eff == 0) {
    c.bound = 0;
    c.cycles_ok = model.den == 1 && model.num == got.compute_cycles;
  } else {
    c.bound = rep * (static_cast<std::uint64_t>(cfg.s) * mode.n_eff + cfg.w_f - cfg.s);
    c.cycles_ok = std::fabs(static_cast<double>(got.compute_cycles) - c.model_cycles) <= static_cast<double>(c.bound);
  }
  return c;
}

Check check_fc(const FcLayerConfig& cfg, std::uint64_t seed, const EngineConfig& engine) {
  Check c{};
  c.kind = LayerKind::kFc;
  c.shape = fmt("n %u m %u", cfg.n, cfg.m);
  const auto st = std::get<FcStimulus>(random_stimulus(cfg, seed));
  SaturationCounter sat;
  const auto expect = oracle::fc_forward(st.x, st.params, &sat);
  const SimResult got = run_fc_layer(cfg, st.x, st.params, engine);
  const SimResult timing = run_fc_timing(cfg, engine);
  c.bit_exact = expect == got.fc_output;
  c.saturations = sat.count + got.saturations;
  c.counters_agree = timing.cycles == got.cycles && timing.ma_weights == got.ma_weights;
  c.cycles = got.cycles;
  c.model_cycles = static_cast<double>(fc_cycles(cfg, engine.array.total_pes()));
  c.cycles_ok = got.cycles == fc_cycles(cfg, engine.array.total_pes());
  return c;
}

}  // namespace

int cmd_validate(const RunSpec& spec, std::ostream& out) {
  const Selection sel = select_layers(spec);
  EngineConfig engine;
  engine.workers = spec.threads;
  std::vector<Check> checks;
  for (std::size_t i = 0; i < sel.net.layers.size(); ++i) {
    const LayerConfig layer = scale_layer(sel.net.layers[i], spec.scale);
    const std::uint64_t seed = spec.seed + sel.original[i];
    Check c = std::holds_alternative<ConvLayerConfig>(layer)
                  ? check_conv(std::get<ConvLayerConfig>(layer), seed, engine)
                  : check_fc(std::get<FcLayerConfig>(layer), seed, engine);
    c.layer = sel.original[i];
    checks.push_back(std::move(c));
  }
  std::size_t failed = 0;
  for (const auto& c : checks) failed += c.pass() ? 0 : 1;

  Sink sink(spec, out);
  std::ostream& os = sink.get();
  if (spec.format == Format::kJson) {
    auto arr = nlohmann::json::array();
    for (const auto& c : checks) {
      arr.push_back({{"layer", c.layer},
                     {"kind", kind_name(c.kind)},
                     {"shape", c.shape},
                     {"bit_exact", c.bit_exact},
                     {"saturations", c.saturations},
                     {"counters_agree", c.counters_agree},
                     {"cycles", c.cycles},
                     {"model_cycles", c.model_cycles},
                     {"cycle_bound", c.bound},
                     {"pass", c.pass()}});
    }
    os << arr.dump(2) << '\n';
  } else if (spec.format == Format::kCsv) {
    os << "layer,kind,bit_exact,saturations,cycles,model_cycles,cycle_bound,pass\n";
    for (const auto& c : checks) {
      os << c.layer << ',' << kind_name(c.kind) << ',' << (c.bit_exact ? 1 : 0) << ',' << c.saturations << ','
         << c.cycles << ',' << fmt("%.3f", c.model_cycles) << ',' << c.bound << ',' << (c.pass() ? 1 : 0) << '\n';
    }
  } else {
    os << "validating " << sel.net.name << " at scale " << spec.scale << '\n';
    for (const auto& c : checks) {
      os << fmt("layer %2zu %-4s %-32s bit-exact %-3s saturations %" PRIu64 " cycles %" PRIu64
                " model %.2f (bound %" PRIu64 ") %s\n",
                c.layer, kind_name(c.kind), c.shape.c_str(), c.bit_exact ? "yes" : "no", c.saturations, c.cycles,
                c.model_cycles, c.bound, c.pass() ? "PASS" : "FAIL");
      if (!c.counters_agree) os << "  timing-only counters disagree with the functional run\n";
    }
    os << checks.size() - failed << " of " << checks.size() << " layers passed\n";
  }
  return failed == 0 ? kExitOk : kExitValidationFailed;
}

int cmd_schedule(const RunSpec& spec, std::ostream& out) {
  constexpr std::uint64_t kMaxRows = 10000;
  const std::uint64_t rows = static_cast<std::uint64_t>(spec.s) * spec.n + spec.w_f - spec.s;
  if (rows > kMaxRows || spec.n > kMaxRows) {
    throw PreconditionError("schedule grid of " + std::to_string(rows) + " rows is too large to print");
  }
  const GfidSchedule sched = build_schedule(spec.w_f, spec.s, spec.n);
  Sink sink(spec, out);
  sink.get() << render_schedule(sched);
  return kExitOk;
}

}  // namespace gfid::cli
