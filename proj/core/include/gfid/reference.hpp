#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gfid {

/// Published totals for one network, split into conv and FC parts.
struct ReferenceTotals {
  double conv_latency_ms = 0;
  double fc_latency_ms = 0;
  double conv_fps = 0;
  double fc_fps = 0;
  double conv_gops = 0;
  double fc_gops = 0;
  double conv_efficiency_pct = 0;
  double fc_efficiency_pct = 0;
  double conv_mb = 0;
  double fc_mb = 0;
};

/// Per-layer series indexed from layer 1 (element 0).
struct ReferenceLayers {
  std::vector<double> efficiency_pct;
  std::vector<double> memory_mb;
  std::vector<double> latency_ms;
};

struct NetworkReference {
  ReferenceTotals totals;
  ReferenceLayers layers;
};

struct ReferenceData {
  int format_version = 0;
  std::string provenance;
  double peak_conv_gops = 0;
  double peak_fc_gops = 0;
  std::map<std::string, NetworkReference> networks;

  const NetworkReference* find(std::string_view network) const;
};

/// Throws FormatError on malformed documents.
ReferenceData parse_reference_json(std::string_view text);

/// Series value for a one-based layer, if the reference has one.
std::optional<double> layer_value(const std::vector<double>& series, std::size_t layer);

}  // namespace gfid
