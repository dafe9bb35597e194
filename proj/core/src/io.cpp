#include "gfid/io.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "gfid/networks.hpp"

namespace gfid {

namespace {

using nlohmann::json;

std::uint32_t field(const json& obj, const char* key, std::uint32_t fallback, bool required) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw FormatError(std::string("layer is missing field '") + key + "'");
    return fallback;
  }
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0 ||
      it->get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return it->get<std::uint32_t>();
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), b.size());
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) throw FormatError("truncated tensor header");
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
         (std::uint32_t{b[3]} << 24);
}

}  // namespace

NetworkDescriptor parse_network_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("network descriptor is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("network descriptor must be a JSON object");
  NetworkDescriptor net;
  net.name = doc.value("name", std::string("custom"));
  const auto layers = doc.find("layers");
  if (layers == doc.end() || !layers->is_array()) throw FormatError("network descriptor needs a 'layers' array");
  for (const auto& l : *layers) {
    if (!l.is_object()) throw FormatError("each layer must be an object");
    const auto kind = l.value("kind", std::string());
    if (kind == "conv") {
      ConvLayerConfig c;
      c.h_in = field(l, "h_in", 0, true);
      c.w_in = field(l, "w_in", 0, true);
      c.c_in = field(l, "c_in", 0, true);
      c.h_f = field(l, "h_f", 0, true);
      c.w_f = field(l, "w_f", 0, true);
      c.s = field(l, "s", 0, true);
      c.c_out = field(l, "c_out", 0, true);
      c.groups = field(l, "groups", 1, false);
      net.layers.emplace_back(c);
    } else if (kind == "fc") {
      net.layers.emplace_back(FcLayerConfig{field(l, "n", 0, true), field(l, "m", 0, true)});
    } else {
      throw FormatError("unknown layer kind '" + kind + "'");
    }
  }
  validate(net);
  return net;
}

NetworkDescriptor load_network_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LookupError("cannot open network descriptor '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_network_json(buf.str());
}

std::string network_to_json(const NetworkDescriptor& net, int indent) {
  json doc;
  doc["name"] = net.name;
  doc["layers"] = json::array();
  for (const auto& layer : net.layers) {
    if (const auto* c = std::get_if<ConvLayerConfig>(&layer)) {
      json l{{"kind", "conv"}, {"h_in", c->h_in}, {"w_in", c->w_in}, {"c_in", c->c_in}, {"h_f", c->h_f},
             {"w_f", c->w_f},  {"s", c->s},       {"c_out", c->c_out}};
      if (c->groups != 1) l["groups"] = c->groups;
      doc["layers"].push_back(std::move(l));
    } else {
      const auto& f = std::get<FcLayerConfig>(layer);
      doc["layers"].push_back(json{{"kind", "fc"}, {"n", f.n}, {"m", f.m}});
    }
  }
  return doc.dump(indent);
}

NetworkDescriptor resolve_network(std::string_view name_or_path) {
  for (const auto& name : builtin_network_names()) {
    if (name == name_or_path) return builtin_network(name);
  }
  const std::filesystem::path path{std::string(name_or_path)};
  if (std::filesystem::exists(path)) return load_network_json(path);
  throw LookupError("'" + std::string(name_or_path) + "' is neither a built-in network nor a readable file");
}

void write_tensor(std::ostream& out, const FixedTensor& t) {
  put_u32(out, kTensorMagic);
  put_u32(out, t.height());
  put_u32(out, t.width());
  put_u32(out, t.channels());
  for (const auto v : t.data()) {
    const auto u = static_cast<std::uint16_t>(v.raw);
    const std::array<char, 2> b{static_cast<char>(u & 0xff), static_cast<char>(u >> 8)};
    out.write(b.data(), b.size());
  }
}

FixedTensor read_tensor(std::istream& in) {
  if (get_u32(in) != kTensorMagic) throw FormatError("bad tensor magic");
  const auto h = get_u32(in);
  const auto w = get_u32(in);
  const auto c = get_u32(in);
  FixedTensor t(h, w, c);
  for (auto& v : t.data()) {
    std::array<unsigned char, 2> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) throw FormatError("truncated tensor data");
    v = Activation::from_raw(static_cast<std::int16_t>(std::uint16_t{b[0]} | (std::uint16_t{b[1]} << 8)));
  }
  return t;
}

void save_tensor(const std::filesystem::path& path, const FixedTensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LookupError("cannot write tensor file '" + path.string() + "'");
  write_tensor(out, t);
}

FixedTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open tensor file '" + path.string() + "'");
  return read_tensor(in);
}

}  // namespace gfid
