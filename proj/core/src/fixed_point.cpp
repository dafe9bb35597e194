#include "gfid/fixed_point.hpp"

#include <cmath>

namespace gfid {

template <typename F>
F quantize(double x, SaturationCounter* sat) {
  constexpr auto lo = std::numeric_limits<std::int16_t>::min();
  constexpr auto hi = std::numeric_limits<std::int16_t>::max();
  if (std::isnan(x)) {
    if (sat) sat->bump();
    return F{};
  }
  // nearbyint honours the default FE_TONEAREST mode: ties go to even.
  const double scaled = std::nearbyint(x * F::kScale);
  if (scaled > hi) {
    if (sat) sat->bump();
    return F::from_raw(hi);
  }
  if (scaled < lo) {
    if (sat) sat->bump();
    return F::from_raw(lo);
  }
  return F::from_raw(static_cast<std::int16_t>(scaled));
}

template Activation quantize<Activation>(double, SaturationCounter*);
template Weight quantize<Weight>(double, SaturationCounter*);

Acc24 saturate24(std::int64_t wide, SaturationCounter* sat) noexcept {
  if (wide > Acc24::kMax) {
    if (sat) sat->bump();
    return Acc24{Acc24::kMax};
  }
  if (wide < Acc24::kMin) {
    if (sat) sat->bump();
    return Acc24{Acc24::kMin};
  }
  return Acc24{static_cast<std::int32_t>(wide)};
}

Activation relu_requantize(Acc24 acc, SaturationCounter* sat) noexcept {
  constexpr std::int32_t hi = std::numeric_limits<std::int16_t>::max();
  const std::int32_t v = acc.raw < 0 ? 0 : acc.raw;
  if (v > hi) {
    if (sat) sat->bump();
    return Activation::from_raw(static_cast<std::int16_t>(hi));
  }
  return Activation::from_raw(static_cast<std::int16_t>(v));
}

}  // namespace gfid
