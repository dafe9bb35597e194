#include "gfid/reference.hpp"

#include <json.hpp>

#include "gfid/error.hpp"

namespace gfid {

const NetworkReference* ReferenceData::find(std::string_view network) const {
  const auto it = networks.find(std::string(network));
  return it == networks.end() ? nullptr : &it->second;
}

std::optional<double> layer_value(const std::vector<double>& series, std::size_t layer) {
  if (layer == 0 || layer > series.size()) return std::nullopt;
  return series[layer - 1];
}

ReferenceData parse_reference_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    ReferenceData ref;
    ref.format_version = doc.at("format_version").get<int>();
    if (ref.format_version != 1) {
      throw FormatError("unsupported reference format version " + std::to_string(ref.format_version));
    }
    ref.provenance = doc.value("provenance", "");
    ref.peak_conv_gops = doc.at("peak_gops").at("conv").get<double>();
    ref.peak_fc_gops = doc.at("peak_gops").at("fc").get<double>();
    for (const auto& [name, net] : doc.at("networks").items()) {
      NetworkReference nr;
      const auto& t = net.at("totals");
      nr.totals.conv_latency_ms = t.at("conv_latency_ms").get<double>();
      nr.totals.fc_latency_ms = t.at("fc_latency_ms").get<double>();
      nr.totals.conv_fps = t.at("conv_fps").get<double>();
      nr.totals.fc_fps = t.at("fc_fps").get<double>();
      nr.totals.conv_gops = t.at("conv_gops").get<double>();
      nr.totals.fc_gops = t.at("fc_gops").get<double>();
      nr.totals.conv_efficiency_pct = t.at("conv_efficiency_pct").get<double>();
      nr.totals.fc_efficiency_pct = t.at("fc_efficiency_pct").get<double>();
      nr.totals.conv_mb = t.at("conv_mb").get<double>();
      nr.totals.fc_mb = t.at("fc_mb").get<double>();
      const auto& l = net.at("layers");
      nr.layers.efficiency_pct = l.at("efficiency_pct").get<std::vector<double>>();
      nr.layers.memory_mb = l.at("memory_mb").get<std::vector<double>>();
      nr.layers.latency_ms = l.at("latency_ms").get<std::vector<double>>();
      ref.networks.emplace(name, std::move(nr));
    }
    return ref;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("reference data: ") + e.what());
  }
}

}  // namespace gfid
