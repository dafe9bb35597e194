#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "gfid/model.hpp"

namespace gfid {

/// Network descriptor JSON:
///   {"name": "...", "layers": [
///      {"kind": "conv", "h_in":..,"w_in":..,"c_in":..,"h_f":..,"w_f":..,"s":..,"c_out":.., "groups": 1},
///      {"kind": "fc", "n":.., "m":..}]}
/// "groups" is optional. Throws FormatError on malformed documents and
/// DimensionError on invalid geometry.
NetworkDescriptor parse_network_json(std::string_view text);
NetworkDescriptor load_network_json(const std::filesystem::path& path);
std::string network_to_json(const NetworkDescriptor& net, int indent = 2);

/// Resolves a built-in network name or a path to a descriptor file.
NetworkDescriptor resolve_network(std::string_view name_or_path);

/// Tensor file: 16-byte little-endian header {magic, height, width, channels}
/// (all uint32) followed by height*width*channels int16 samples in
/// channel-major order.
inline constexpr std::uint32_t kTensorMagic = 0x31544647;  // "GFT1"

void write_tensor(std::ostream& out, const FixedTensor& t);
FixedTensor read_tensor(std::istream& in);
void save_tensor(const std::filesystem::path& path, const FixedTensor& t);
FixedTensor load_tensor(const std::filesystem::path& path);

}  // namespace gfid
