#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gfid/error.hpp"
#include "gfid/fixed_point.hpp"

namespace gfid {

/// One convolutional layer. `h_in`/`w_in` already include any padding; the
/// padded border is expected to be explicit zeros in the input tensor.
struct ConvLayerConfig {
  std::uint32_t h_in = 1;
  std::uint32_t w_in = 1;
  std::uint32_t c_in = 1;
  std::uint32_t h_f = 1;
  std::uint32_t w_f = 1;
  std::uint32_t s = 1;
  std::uint32_t c_out = 1;
  // Channel groups (AlexNet layers 2, 4 and 5 use two). Each group sees
  // c_in / groups inputs and produces c_out / groups outputs.
  std::uint32_t groups = 1;

  friend bool operator==(const ConvLayerConfig&, const ConvLayerConfig&) = default;
};

struct FcLayerConfig {
  std::uint32_t n = 1;  // inputs
  std::uint32_t m = 1;  // outputs

  friend bool operator==(const FcLayerConfig&, const FcLayerConfig&) = default;
};

using LayerConfig = std::variant<ConvLayerConfig, FcLayerConfig>;

struct OutputDims {
  std::uint32_t h_out = 0;
  std::uint32_t w_out = 0;
  friend bool operator==(OutputDims, OutputDims) = default;
};

/// Throws DimensionError when a field is zero, the filter is larger than the
/// input, the stride does not tile the input exactly, or groups do not divide
/// the channel counts.
void validate(const ConvLayerConfig& cfg);
void validate(const FcLayerConfig& cfg);

/// ((h_in - h_f + s) / s, (w_in - w_f + s) / s).
OutputDims output_dims(const ConvLayerConfig& cfg);

/// Multiply-accumulates performed by the layer (bias additions excluded).
std::uint64_t mac_count(const ConvLayerConfig& cfg);
std::uint64_t mac_count(const FcLayerConfig& cfg);
std::uint64_t mac_count(const LayerConfig& layer);

std::uint64_t weight_count(const ConvLayerConfig& cfg);
std::uint64_t weight_count(const FcLayerConfig& cfg);
std::uint64_t weight_count(const LayerConfig& layer);

/// Output words produced by the layer (h_out * w_out * c_out, or m).
std::uint64_t output_count(const LayerConfig& layer);

bool is_conv(const LayerConfig& layer) noexcept;

struct NetworkDescriptor {
  std::string name;
  std::vector<LayerConfig> layers;

  struct Totals {
    std::uint64_t conv_macs = 0;
    std::uint64_t conv_weights = 0;
    std::uint64_t fc_macs = 0;
    std::uint64_t fc_weights = 0;
    std::size_t conv_layers = 0;
    std::size_t fc_layers = 0;
  };
  Totals totals() const;
};

/// Validates every layer and rejects empty networks.
void validate(const NetworkDescriptor& net);

/// Dense height x width x channels tensor stored channel-major:
/// index = (c * height + y) * width + x.
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::uint32_t height, std::uint32_t width, std::uint32_t channels, T fill = T{})
      : height_(height), width_(width), channels_(channels),
        data_(static_cast<std::size_t>(height) * width * channels, fill) {}

  std::uint32_t height() const noexcept { return height_; }
  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t index(std::uint32_t y, std::uint32_t x, std::uint32_t c) const noexcept {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }
  T& at(std::uint32_t y, std::uint32_t x, std::uint32_t c) noexcept { return data_[index(y, x, c)]; }
  const T& at(std::uint32_t y, std::uint32_t x, std::uint32_t c) const noexcept {
    return data_[index(y, x, c)];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::uint32_t height_ = 0;
  std::uint32_t width_ = 0;
  std::uint32_t channels_ = 0;
  std::vector<T> data_;
};

/// Filters W(j, i, k, q) (filter row, filter column, input channel within the
/// group, output channel) plus one bias per output channel.
template <typename W, typename B = W>
class FilterBank {
 public:
  FilterBank() = default;
  explicit FilterBank(const ConvLayerConfig& cfg)
      : h_f_(cfg.h_f), w_f_(cfg.w_f), c_in_(cfg.c_in / cfg.groups), c_out_(cfg.c_out),
        filters_(static_cast<std::size_t>(h_f_) * w_f_ * c_in_ * c_out_), biases_(c_out_) {}

  std::uint32_t h_f() const noexcept { return h_f_; }
  std::uint32_t w_f() const noexcept { return w_f_; }
  /// Input channels seen by one filter (c_in / groups).
  std::uint32_t c_in() const noexcept { return c_in_; }
  std::uint32_t c_out() const noexcept { return c_out_; }

  std::size_t index(std::uint32_t j, std::uint32_t i, std::uint32_t k, std::uint32_t q) const noexcept {
    return ((static_cast<std::size_t>(q) * c_in_ + k) * h_f_ + j) * w_f_ + i;
  }
  W& weight(std::uint32_t j, std::uint32_t i, std::uint32_t k, std::uint32_t q) noexcept {
    return filters_[index(j, i, k, q)];
  }
  const W& weight(std::uint32_t j, std::uint32_t i, std::uint32_t k, std::uint32_t q) const noexcept {
    return filters_[index(j, i, k, q)];
  }
  B& bias(std::uint32_t q) noexcept { return biases_[q]; }
  const B& bias(std::uint32_t q) const noexcept { return biases_[q]; }

  std::span<W> filters() noexcept { return filters_; }
  std::span<const W> filters() const noexcept { return filters_; }
  std::span<B> biases() noexcept { return biases_; }
  std::span<const B> biases() const noexcept { return biases_; }

  /// True when the extents agree with `cfg`.
  bool matches(const ConvLayerConfig& cfg) const noexcept {
    return h_f_ == cfg.h_f && w_f_ == cfg.w_f && cfg.groups != 0 && c_in_ == cfg.c_in / cfg.groups &&
           c_out_ == cfg.c_out && biases_.size() == cfg.c_out;
  }

 private:
  std::uint32_t h_f_ = 0;
  std::uint32_t w_f_ = 0;
  std::uint32_t c_in_ = 0;
  std::uint32_t c_out_ = 0;
  std::vector<W> filters_;
  std::vector<B> biases_;
};

/// Row-major m x n weight matrix with a bias per output.
template <typename W, typename B = W>
struct FcParams {
  std::uint32_t n = 0;
  std::uint32_t m = 0;
  std::vector<W> weights;  // weights[q * n + j]
  std::vector<B> biases;

  FcParams() = default;
  explicit FcParams(const FcLayerConfig& cfg)
      : n(cfg.n), m(cfg.m), weights(static_cast<std::size_t>(cfg.n) * cfg.m), biases(cfg.m) {}

  W& weight(std::uint32_t q, std::uint32_t j) noexcept { return weights[static_cast<std::size_t>(q) * n + j]; }
  const W& weight(std::uint32_t q, std::uint32_t j) const noexcept {
    return weights[static_cast<std::size_t>(q) * n + j];
  }
};

using RealTensor = Tensor3<double>;
using FixedTensor = Tensor3<Activation>;
using RealFilterBank = FilterBank<double>;
using FixedFilterBank = FilterBank<Weight, Activation>;
using RealFcParams = FcParams<double>;
using FixedFcParams = FcParams<Weight, Activation>;

}  // namespace gfid
