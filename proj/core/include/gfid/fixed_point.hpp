#pragma once

#include <cstdint>
#include <limits>

namespace gfid {

/// Counts silent clamps. Each run owns its counter; nothing is global.
struct SaturationCounter {
  std::uint64_t count = 0;
  void bump() noexcept { ++count; }
};

/// 16-bit two's-complement fixed point value with `FracBits` fractional bits.
template <int FracBits>
struct Fixed16 {
  static_assert(FracBits >= 0 && FracBits < 16);
  static constexpr int kFracBits = FracBits;
  static constexpr double kScale = static_cast<double>(1 << FracBits);
  static constexpr double kLsb = 1.0 / kScale;
  static constexpr double kMax = std::numeric_limits<std::int16_t>::max() / kScale;
  static constexpr double kMin = std::numeric_limits<std::int16_t>::min() / kScale;

  std::int16_t raw = 0;

  static constexpr Fixed16 from_raw(std::int16_t r) noexcept { return Fixed16{r}; }
  constexpr double value() const noexcept { return raw / kScale; }

  friend constexpr bool operator==(Fixed16, Fixed16) = default;
};

/// Activations: Q13.2.
using Activation = Fixed16<2>;
/// Weights: Q0.15.
using Weight = Fixed16<15>;

/// 24-bit saturating accumulator. The value carries the activation scale.
struct Acc24 {
  static constexpr std::int32_t kMax = (1 << 23) - 1;
  static constexpr std::int32_t kMin = -(1 << 23);

  std::int32_t raw = 0;

  friend constexpr bool operator==(Acc24, Acc24) = default;
};

/// Round-to-nearest-even, clamping (and counting) out-of-range inputs.
template <typename F>
F quantize(double x, SaturationCounter* sat = nullptr);

template <typename F>
constexpr double dequantize(F f) noexcept {
  return f.value();
}

/// Clamps a wide value into the 24-bit accumulator range.
Acc24 saturate24(std::int64_t wide, SaturationCounter* sat = nullptr) noexcept;

/// acc + asr(x * w, 15), saturated to 24 bits. The shift floors, dropping
/// weight precision below the activation LSB.
inline Acc24 mac(Acc24 acc, Activation x, Weight w, SaturationCounter* sat = nullptr) noexcept {
  const std::int32_t product = static_cast<std::int32_t>(x.raw) * static_cast<std::int32_t>(w.raw);
  const std::int64_t wide = static_cast<std::int64_t>(acc.raw) + (product >> Weight::kFracBits);
  if (wide > Acc24::kMax || wide < Acc24::kMin) return saturate24(wide, sat);
  return Acc24{static_cast<std::int32_t>(wide)};
}

/// Loads a bias into an empty accumulator.
inline Acc24 acc_from_bias(Activation bias) noexcept { return Acc24{bias.raw}; }

/// ReLU, then narrows the accumulator back to an activation (saturating).
Activation relu_requantize(Acc24 acc, SaturationCounter* sat = nullptr) noexcept;

extern template Activation quantize<Activation>(double, SaturationCounter*);
extern template Weight quantize<Weight>(double, SaturationCounter*);

}  // namespace gfid
