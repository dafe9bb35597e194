#include "gfid/networks.hpp"

namespace gfid {

namespace {

ConvLayerConfig conv(std::uint32_t h, std::uint32_t c_in, std::uint32_t f, std::uint32_t s, std::uint32_t c_out,
                     std::uint32_t groups = 1) {
  return ConvLayerConfig{h, h, c_in, f, f, s, c_out, groups};
}

NetworkDescriptor alexnet() {
  return {"alexnet",
          {
              conv(227, 3, 11, 4, 96),
              conv(31, 96, 5, 1, 256, 2),
              conv(15, 256, 3, 1, 384),
              conv(15, 384, 3, 1, 384, 2),
              conv(15, 384, 3, 1, 256, 2),
              FcLayerConfig{9216, 4096},
              FcLayerConfig{4096, 4096},
              FcLayerConfig{4096, 1000},
          }};
}

NetworkDescriptor vgg16() {
  NetworkDescriptor net{"vgg16", {}};
  struct Row {
    std::uint32_t out, c_in, c_out;
  };
  constexpr Row rows[] = {
      {224, 3, 64},   {224, 64, 64},  {112, 64, 128}, {112, 128, 128}, {56, 128, 256},
      {56, 256, 256}, {56, 256, 256}, {28, 256, 512}, {28, 512, 512},  {28, 512, 512},
      {14, 512, 512}, {14, 512, 512}, {14, 512, 512},
  };
  for (const auto& r : rows) net.layers.emplace_back(conv(r.out + 2, r.c_in, 3, 1, r.c_out));
  net.layers.emplace_back(FcLayerConfig{25088, 4096});
  net.layers.emplace_back(FcLayerConfig{4096, 4096});
  net.layers.emplace_back(FcLayerConfig{4096, 1000});
  return net;
}

NetworkDescriptor resnet50() {
  // 224 + 3 + 2: the last padded row/column of the usual 230 is never read
  // by a stride-2 7x7 window, and dropping it keeps the stride exact.
  NetworkDescriptor net{"resnet50", {conv(229, 3, 7, 2, 64)}};
  struct Stage {
    std::uint32_t blocks, width, map;
  };
  constexpr Stage stages[] = {{3, 64, 56}, {4, 128, 28}, {6, 256, 14}, {3, 512, 7}};
  std::uint32_t channels = 64;
  for (const auto& st : stages) {
    for (std::uint32_t b = 0; b < st.blocks; ++b) {
      net.layers.emplace_back(conv(st.map, channels, 1, 1, st.width));
      net.layers.emplace_back(conv(st.map + 2, st.width, 3, 1, st.width));
      net.layers.emplace_back(conv(st.map, st.width, 1, 1, 4 * st.width));
      channels = 4 * st.width;
    }
  }
  net.layers.emplace_back(FcLayerConfig{2048, 1000});
  return net;
}

}  // namespace

NetworkDescriptor builtin_network(std::string_view name) {
  if (name == "alexnet") return alexnet();
  if (name == "vgg16") return vgg16();
  if (name == "resnet50") return resnet50();
  throw LookupError("unknown network '" + std::string(name) + "' (expected alexnet, vgg16 or resnet50)");
}

std::vector<std::string> builtin_network_names() { return {"alexnet", "vgg16", "resnet50"}; }

}  // namespace gfid
