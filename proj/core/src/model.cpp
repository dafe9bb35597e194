#include "gfid/model.hpp"

namespace gfid {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace

void validate(const ConvLayerConfig& cfg) {
  require(cfg.h_in >= 1 && cfg.w_in >= 1 && cfg.c_in >= 1 && cfg.h_f >= 1 && cfg.w_f >= 1 && cfg.s >= 1 &&
              cfg.c_out >= 1 && cfg.groups >= 1,
          "conv layer fields must all be >= 1");
  require(cfg.h_in >= cfg.h_f, "filter height exceeds input height");
  require(cfg.w_in >= cfg.w_f, "filter width exceeds input width");
  require((cfg.h_in - cfg.h_f) % cfg.s == 0,
          "(h_in - h_f) = " + std::to_string(cfg.h_in - cfg.h_f) + " is not divisible by stride " +
              std::to_string(cfg.s));
  require((cfg.w_in - cfg.w_f) % cfg.s == 0,
          "(w_in - w_f) = " + std::to_string(cfg.w_in - cfg.w_f) + " is not divisible by stride " +
              std::to_string(cfg.s));
  require(cfg.c_in % cfg.groups == 0 && cfg.c_out % cfg.groups == 0, "groups must divide c_in and c_out");
}

void validate(const FcLayerConfig& cfg) { require(cfg.n >= 1 && cfg.m >= 1, "fc layer needs n >= 1 and m >= 1"); }

OutputDims output_dims(const ConvLayerConfig& cfg) {
  validate(cfg);
  return {(cfg.h_in - cfg.h_f + cfg.s) / cfg.s, (cfg.w_in - cfg.w_f + cfg.s) / cfg.s};
}

std::uint64_t weight_count(const ConvLayerConfig& cfg) {
  return std::uint64_t{cfg.h_f} * cfg.w_f * (cfg.c_in / cfg.groups) * cfg.c_out;
}
std::uint64_t weight_count(const FcLayerConfig& cfg) { return std::uint64_t{cfg.n} * cfg.m; }
std::uint64_t weight_count(const LayerConfig& layer) {
  return std::visit([](const auto& l) { return weight_count(l); }, layer);
}

std::uint64_t mac_count(const ConvLayerConfig& cfg) {
  const auto d = output_dims(cfg);
  return std::uint64_t{d.h_out} * d.w_out * weight_count(cfg);
}
std::uint64_t mac_count(const FcLayerConfig& cfg) { return weight_count(cfg); }
std::uint64_t mac_count(const LayerConfig& layer) {
  return std::visit([](const auto& l) { return mac_count(l); }, layer);
}

std::uint64_t output_count(const LayerConfig& layer) {
  if (const auto* c = std::get_if<ConvLayerConfig>(&layer)) {
    const auto d = output_dims(*c);
    return std::uint64_t{d.h_out} * d.w_out * c->c_out;
  }
  return std::get<FcLayerConfig>(layer).m;
}

bool is_conv(const LayerConfig& layer) noexcept { return std::holds_alternative<ConvLayerConfig>(layer); }

NetworkDescriptor::Totals NetworkDescriptor::totals() const {
  Totals t;
  for (const auto& layer : layers) {
    if (is_conv(layer)) {
      t.conv_macs += mac_count(layer);
      t.conv_weights += weight_count(layer);
      ++t.conv_layers;
    } else {
      t.fc_macs += mac_count(layer);
      t.fc_weights += weight_count(layer);
      ++t.fc_layers;
    }
  }
  return t;
}

void validate(const NetworkDescriptor& net) {
  if (net.layers.empty()) throw DimensionError("network '" + net.name + "' has no layers");
  for (const auto& layer : net.layers) std::visit([](const auto& l) { validate(l); }, layer);
}

}  // namespace gfid
