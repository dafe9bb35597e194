#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <ostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <gfid/error.hpp>
#include <gfid_cli/cli.hpp>

namespace gfid::cli {

namespace detail {
std::string_view reference_json();
}

namespace {

std::size_t parse_index(std::string_view text, std::string_view expr) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw Error("bad layer range '" + std::string(expr) + "'");
  }
  return v;
}

}  // namespace

std::vector<std::size_t> parse_layer_range(std::string_view expr, std::size_t layer_count) {
  std::set<std::size_t> picked;
  if (expr.empty() || expr == "all") {
    for (std::size_t i = 1; i <= layer_count; ++i) picked.insert(i);
    return {picked.begin(), picked.end()};
  }
  std::size_t pos = 0;
  while (pos <= expr.size()) {
    const std::size_t comma = std::min(expr.find(',', pos), expr.size());
    const std::string_view item = expr.substr(pos, comma - pos);
    const std::size_t dash = item.find('-');
    std::size_t lo = 0;
    std::size_t hi = 0;
    if (dash == std::string_view::npos) {
      lo = hi = parse_index(item, expr);
    } else {
      lo = parse_index(item.substr(0, dash), expr);
      hi = parse_index(item.substr(dash + 1), expr);
    }
    if (lo == 0 || hi < lo || hi > layer_count) {
      throw Error("layer range '" + std::string(expr) + "' is outside 1-" + std::to_string(layer_count));
    }
    for (std::size_t i = lo; i <= hi; ++i) picked.insert(i);
    pos = comma + 1;
  }
  return {picked.begin(), picked.end()};
}

LayerConfig scale_layer(const LayerConfig& layer, std::uint32_t scale) {
  if (scale == 0) throw PreconditionError("scale must be at least 1");
  auto down = [scale](std::uint32_t v, std::uint32_t multiple) {
    std::uint32_t r = (v + scale - 1) / scale;
    r = (r + multiple - 1) / multiple * multiple;
    return std::max(r, multiple);
  };
  if (const auto* conv = std::get_if<ConvLayerConfig>(&layer)) {
    ConvLayerConfig c = *conv;
    c.c_in = down(c.c_in, c.groups);
    c.c_out = down(c.c_out, c.groups);
    return c;
  }
  FcLayerConfig f = std::get<FcLayerConfig>(layer);
  f.n = down(f.n, 1);
  f.m = down(f.m, 1);
  return f;
}

unsigned threads_from_env() {
  if (const char* v = std::getenv("GFID_SIM_THREADS")) {
    unsigned n = 0;
    const std::string_view s(v);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc{} && ptr == s.data() + s.size() && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

const ReferenceData& embedded_reference() {
  static const ReferenceData ref = parse_reference_json(detail::reference_json());
  return ref;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cycle-accurate and analytical model of a 192-PE GFID convolution engine", "gfid-sim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gfid-sim 0.1.0");

  RunSpec spec;
  std::string format = "text";

  auto add_common = [&](CLI::App* sub, bool needs_network) {
    auto* net = sub->add_option("--network", spec.network, "built-in name (alexnet, vgg16, resnet50) or JSON path");
    if (needs_network) net->required();
    sub->add_option("--layers", spec.layers, "one-based layers, e.g. 1-5,8");
    sub->add_option("--format", format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
    sub->add_option("--out", spec.out_path, "write output to this file");
  };

  auto* report = app.add_subcommand("report", "closed-form cycles, latency, memory and efficiency");
  add_common(report, true);
  report->add_flag("--compare", spec.compare, "add deltas against the published reference series");
  report->add_option("--profile", spec.profile, "published (default) or literal")
      ->check(CLI::IsMember({"published", "literal"}));

  auto* simulate = app.add_subcommand("simulate", "run the cycle-accurate engine on random operands");
  add_common(simulate, true);
  simulate->add_option("--scale", spec.scale, "channel divisor")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", spec.seed, "operand seed");
  simulate->add_flag("--timing-only", spec.timing_only, "count cycles and accesses without arithmetic");
  simulate->add_option("--profile", spec.profile, "write-back profile: published (default) or literal")
      ->check(CLI::IsMember({"published", "literal"}));

  auto* validate = app.add_subcommand("validate", "engine vs reference convolution at reduced channel counts");
  add_common(validate, true);
  validate->add_option("--scale", spec.scale, "channel divisor")->check(CLI::PositiveNumber);
  validate->add_option("--seed", spec.seed, "operand seed");

  auto* schedule = app.add_subcommand("schedule", "print the GFID schedule matrix");
  schedule->add_option("w_f", spec.w_f, "filter width")->required()->check(CLI::PositiveNumber);
  schedule->add_option("s", spec.s, "stride")->required()->check(CLI::PositiveNumber);
  schedule->add_option("n", spec.n, "outputs")->required()->check(CLI::PositiveNumber);
  schedule->add_option("--out", spec.out_path, "write output to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  spec.format = format == "csv" ? Format::kCsv : format == "json" ? Format::kJson : Format::kText;
  spec.threads = threads_from_env();
  try {
    if (report->parsed()) {
      spec.command = Command::kReport;
      return cmd_report(spec, out);
    }
    if (simulate->parsed()) {
      spec.command = Command::kSimulate;
      return cmd_simulate(spec, out);
    }
    if (validate->parsed()) {
      spec.command = Command::kValidate;
      return cmd_validate(spec, out);
    }
    spec.command = Command::kSchedule;
    return cmd_schedule(spec, out);
  } catch (const Error& e) {
    err << "gfid-sim: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace gfid::cli
