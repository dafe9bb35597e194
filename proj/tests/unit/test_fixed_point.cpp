#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <gfid/fixed_point.hpp>

using namespace gfid;

TEST_SUITE("fixed_point") {
  TEST_CASE("activation quantization rounds to nearest even") {
    SaturationCounter sat;
    CHECK(quantize<Activation>(1.25, &sat).raw == 5);
    CHECK(quantize<Activation>(-1.25, &sat).raw == -5);
    CHECK(quantize<Activation>(0.125, &sat).raw == 0);
    CHECK(quantize<Activation>(0.375, &sat).raw == 2);
    CHECK(quantize<Activation>(0.2, &sat).raw == 1);
    CHECK(sat.count == 0);
  }

  TEST_CASE("out of range inputs clamp and are counted") {
    SaturationCounter sat;
    CHECK(quantize<Activation>(1e6, &sat).raw == 32767);
    CHECK(quantize<Activation>(-1e6, &sat).raw == -32768);
    CHECK(quantize<Weight>(1.0, &sat).raw == 32767);
    CHECK(sat.count == 3);
    CHECK(quantize<Weight>(-1.0, &sat).raw == -32768);
    CHECK(sat.count == 3);
    CHECK(quantize<Activation>(std::numeric_limits<double>::quiet_NaN(), &sat).raw == 0);
    CHECK(sat.count == 4);
  }

  TEST_CASE("quantize without a counter still clamps") {
    CHECK(quantize<Weight>(2.0).raw == 32767);
    CHECK(quantize<Weight>(0.5).raw == 16384);
  }

  TEST_CASE("dequantize inverts quantize on the grid") {
    for (int raw = -40; raw <= 40; ++raw) {
      const auto a = Activation::from_raw(static_cast<std::int16_t>(raw));
      CHECK(quantize<Activation>(dequantize(a)) == a);
    }
    CHECK(dequantize(Activation::from_raw(6)) == doctest::Approx(1.5));
    CHECK(dequantize(Weight::from_raw(-16384)) == doctest::Approx(-0.5));
  }

  TEST_CASE("mac shifts the product arithmetically") {
    CHECK(mac(Acc24{}, Activation::from_raw(4), Weight::from_raw(16384)).raw == 2);
    CHECK(mac(Acc24{}, Activation::from_raw(1), Weight::from_raw(-1)).raw == -1);
    CHECK(mac(Acc24{10}, Activation::from_raw(1), Weight::from_raw(1)).raw == 10);
  }

  TEST_CASE("mac matches a floor-division model") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> d16(-32768, 32767);
    std::uniform_int_distribution<int> dacc(-(1 << 22), (1 << 22));
    for (int it = 0; it < 20000; ++it) {
      const int x = d16(rng);
      const int w = d16(rng);
      const int a = dacc(rng);
      const auto expect = static_cast<std::int64_t>(
          a + std::floor(static_cast<double>(x) * static_cast<double>(w) / 32768.0));
      const std::int64_t clamped = std::clamp<std::int64_t>(expect, Acc24::kMin, Acc24::kMax);
      SaturationCounter sat;
      const Acc24 got = mac(Acc24{a}, Activation::from_raw(static_cast<std::int16_t>(x)),
                            Weight::from_raw(static_cast<std::int16_t>(w)), &sat);
      REQUIRE(got.raw == clamped);
      CHECK(sat.count == (clamped != expect ? 1u : 0u));
    }
  }

  TEST_CASE("accumulator saturates at 24 bits") {
    SaturationCounter sat;
    CHECK(saturate24(1 << 23, &sat).raw == Acc24::kMax);
    CHECK(saturate24(-(1 << 23) - 1, &sat).raw == Acc24::kMin);
    CHECK(saturate24(12345, &sat).raw == 12345);
    CHECK(sat.count == 2);
    const Acc24 top = mac(Acc24{Acc24::kMax}, Activation::from_raw(32767), Weight::from_raw(32767), &sat);
    CHECK(top.raw == Acc24::kMax);
    CHECK(sat.count == 3);
  }

  TEST_CASE("bias preload and ReLU narrowing") {
    CHECK(acc_from_bias(Activation::from_raw(-7)).raw == -7);
    SaturationCounter sat;
    CHECK(relu_requantize(Acc24{-100}, &sat).raw == 0);
    CHECK(relu_requantize(Acc24{1234}, &sat).raw == 1234);
    CHECK(sat.count == 0);
    CHECK(relu_requantize(Acc24{40000}, &sat).raw == 32767);
    CHECK(sat.count == 1);
  }
}
