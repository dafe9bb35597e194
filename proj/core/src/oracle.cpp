#include "gfid/oracle.hpp"

#include <algorithm>

namespace gfid::oracle {

namespace {

template <typename X, typename W>
void check_conv_shapes(const Tensor3<X>& x, const W& w, const ConvLayerConfig& cfg) {
  validate(cfg);
  if (x.height() != cfg.h_in || x.width() != cfg.w_in || x.channels() != cfg.c_in) {
    throw ShapeError("input tensor extents do not match the layer");
  }
  if (!w.matches(cfg)) throw ShapeError("filter bank extents do not match the layer");
}

template <typename P>
void check_fc_shapes(std::size_t x_len, const P& p) {
  if (p.n == 0 || p.m == 0 || x_len != p.n || p.weights.size() != std::size_t{p.n} * p.m ||
      p.biases.size() != p.m) {
    throw ShapeError("fully-connected operand extents disagree");
  }
}

RealTensor conv_real(const RealTensor& x, const RealFilterBank& w, const ConvLayerConfig& cfg, bool relu) {
  check_conv_shapes(x, w, cfg);
  const auto d = output_dims(cfg);
  const std::uint32_t c_in_g = cfg.c_in / cfg.groups;
  const std::uint32_t c_out_g = cfg.c_out / cfg.groups;
  RealTensor y(d.h_out, d.w_out, cfg.c_out);
  for (std::uint32_t q = 0; q < cfg.c_out; ++q) {
    const std::uint32_t k0 = (q / c_out_g) * c_in_g;
    for (std::uint32_t z = 0; z < d.h_out; ++z) {
      for (std::uint32_t t = 0; t < d.w_out; ++t) {
        double acc = w.bias(q);
        for (std::uint32_t k = 0; k < c_in_g; ++k)
          for (std::uint32_t j = 0; j < cfg.h_f; ++j)
            for (std::uint32_t i = 0; i < cfg.w_f; ++i)
              acc += x.at(z * cfg.s + j, t * cfg.s + i, k0 + k) * w.weight(j, i, k, q);
        y.at(z, t, q) = relu ? std::max(0.0, acc) : acc;
      }
    }
  }
  return y;
}

}  // namespace

RealTensor conv_forward(const RealTensor& x, const RealFilterBank& w, const ConvLayerConfig& cfg) {
  return conv_real(x, w, cfg, true);
}

RealTensor conv_forward_linear(const RealTensor& x, const RealFilterBank& w, const ConvLayerConfig& cfg) {
  return conv_real(x, w, cfg, false);
}

FixedTensor conv_forward(const FixedTensor& x, const FixedFilterBank& w, const ConvLayerConfig& cfg,
                         SaturationCounter* sat) {
  check_conv_shapes(x, w, cfg);
  const auto d = output_dims(cfg);
  const std::uint32_t c_in_g = cfg.c_in / cfg.groups;
  const std::uint32_t c_out_g = cfg.c_out / cfg.groups;
  FixedTensor y(d.h_out, d.w_out, cfg.c_out);
  for (std::uint32_t q = 0; q < cfg.c_out; ++q) {
    const std::uint32_t k0 = (q / c_out_g) * c_in_g;
    for (std::uint32_t z = 0; z < d.h_out; ++z) {
      for (std::uint32_t t = 0; t < d.w_out; ++t) {
        Acc24 acc = acc_from_bias(w.bias(q));
        for (std::uint32_t k = 0; k < c_in_g; ++k)
          for (std::uint32_t j = 0; j < cfg.h_f; ++j)
            for (std::uint32_t i = 0; i < cfg.w_f; ++i)
              acc = mac(acc, x.at(z * cfg.s + j, t * cfg.s + i, k0 + k), w.weight(j, i, k, q), sat);
        y.at(z, t, q) = relu_requantize(acc, sat);
      }
    }
  }
  return y;
}

std::vector<double> fc_forward(std::span<const double> x, const RealFcParams& p) {
  check_fc_shapes(x.size(), p);
  std::vector<double> y(p.m);
  for (std::uint32_t q = 0; q < p.m; ++q) {
    double acc = p.biases[q];
    for (std::uint32_t j = 0; j < p.n; ++j) acc += p.weight(q, j) * x[j];
    y[q] = std::max(0.0, acc);
  }
  return y;
}

std::vector<Activation> fc_forward(std::span<const Activation> x, const FixedFcParams& p, SaturationCounter* sat) {
  check_fc_shapes(x.size(), p);
  std::vector<Activation> y(p.m);
  for (std::uint32_t q = 0; q < p.m; ++q) {
    Acc24 acc = acc_from_bias(p.biases[q]);
    for (std::uint32_t j = 0; j < p.n; ++j) acc = mac(acc, x[j], p.weight(q, j), sat);
    y[q] = relu_requantize(acc, sat);
  }
  return y;
}

}  // namespace gfid::oracle
