#include <doctest.h>

#include <cmath>
#include <random>

#include <gfid/engine.hpp>
#include <gfid/oracle.hpp>

#include "test_util.hpp"

using namespace gfid;

TEST_SUITE("oracle") {
  TEST_CASE("hand-computed real convolution") {
    // 3x4 input, one channel, 2x2 filter, stride 1.
    const ConvLayerConfig cfg{3, 4, 1, 2, 2, 1, 1};
    RealTensor x(3, 4, 1);
    for (std::uint32_t y = 0; y < 3; ++y)
      for (std::uint32_t c = 0; c < 4; ++c) x.at(y, c, 0) = y * 4 + c + 1;  // 1..12
    RealFilterBank w(cfg);
    w.weight(0, 0, 0, 0) = 1;
    w.weight(0, 1, 0, 0) = 0;
    w.weight(1, 0, 0, 0) = 0;
    w.weight(1, 1, 0, 0) = -1;
    w.bias(0) = 10;
    const RealTensor lin = oracle::conv_forward_linear(x, w, cfg);
    REQUIRE(lin.height() == 2);
    REQUIRE(lin.width() == 3);
    // x(z,t) - x(z+1,t+1) = -5 everywhere, plus bias.
    for (double v : lin.data()) CHECK(v == doctest::Approx(5.0));
    w.bias(0) = 2;
    const RealTensor relu = oracle::conv_forward(x, w, cfg);
    for (double v : relu.data()) CHECK(v == doctest::Approx(0.0));
  }

  TEST_CASE("strided windows") {
    const ConvLayerConfig cfg{1, 7, 1, 1, 3, 2, 1};
    RealTensor x(1, 7, 1);
    for (std::uint32_t c = 0; c < 7; ++c) x.at(0, c, 0) = c;
    RealFilterBank w(cfg);
    w.weight(0, 0, 0, 0) = 1;
    w.weight(0, 1, 0, 0) = 10;
    w.weight(0, 2, 0, 0) = 100;
    const RealTensor y = oracle::conv_forward(x, w, cfg);
    REQUIRE(y.width() == 3);
    CHECK(y.at(0, 0, 0) == doctest::Approx(0 + 10 + 200));
    CHECK(y.at(0, 1, 0) == doctest::Approx(2 + 30 + 400));
    CHECK(y.at(0, 2, 0) == doctest::Approx(4 + 50 + 600));
  }

  TEST_CASE("linearity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    const ConvLayerConfig cfg{7, 7, 3, 3, 3, 1, 2};
    RealTensor a(7, 7, 3), b(7, 7, 3), sum(7, 7, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a.data()[i] = u(rng);
      b.data()[i] = u(rng);
      sum.data()[i] = 2 * a.data()[i] + b.data()[i];
    }
    RealFilterBank w(cfg);
    for (auto& v : w.filters()) v = u(rng);
    const auto ya = oracle::conv_forward_linear(a, w, cfg);
    const auto yb = oracle::conv_forward_linear(b, w, cfg);
    const auto ys = oracle::conv_forward_linear(sum, w, cfg);
    for (std::size_t i = 0; i < ys.size(); ++i) CHECK(ys.data()[i] == doctest::Approx(2 * ya.data()[i] + yb.data()[i]));
  }

  TEST_CASE("grouped convolution equals independent halves") {
    std::mt19937_64 rng(4);
    const ConvLayerConfig cfg{6, 6, 4, 3, 3, 1, 6, 2};
    const auto st = std::get<ConvStimulus>(random_stimulus(cfg, 99));
    const FixedTensor y = oracle::conv_forward(st.x, st.w, cfg);
    const ConvLayerConfig half{6, 6, 2, 3, 3, 1, 3};
    for (std::uint32_t g = 0; g < 2; ++g) {
      FixedTensor xg(6, 6, 2);
      for (std::uint32_t k = 0; k < 2; ++k)
        for (std::uint32_t r = 0; r < 6; ++r)
          for (std::uint32_t c = 0; c < 6; ++c) xg.at(r, c, k) = st.x.at(r, c, g * 2 + k);
      FixedFilterBank wg(half);
      for (std::uint32_t q = 0; q < 3; ++q) {
        wg.bias(q) = st.w.bias(g * 3 + q);
        for (std::uint32_t k = 0; k < 2; ++k)
          for (std::uint32_t j = 0; j < 3; ++j)
            for (std::uint32_t i = 0; i < 3; ++i) wg.weight(j, i, k, q) = st.w.weight(j, i, k, g * 3 + q);
      }
      const FixedTensor yg = oracle::conv_forward(xg, wg, half);
      for (std::uint32_t q = 0; q < 3; ++q)
        for (std::uint32_t r = 0; r < 4; ++r)
          for (std::uint32_t c = 0; c < 4; ++c) CHECK(yg.at(r, c, q) == y.at(r, c, g * 3 + q));
    }
  }

  TEST_CASE("fixed point tracks real arithmetic") {
    std::mt19937_64 rng(5);
    for (int it = 0; it < 20; ++it) {
      const ConvLayerConfig cfg = test::random_conv(rng, 3, 1);
      const auto st = std::get<ConvStimulus>(random_stimulus(cfg, it));
      RealTensor xr(cfg.h_in, cfg.w_in, cfg.c_in);
      for (std::size_t i = 0; i < xr.size(); ++i) xr.data()[i] = dequantize(st.x.data()[i]);
      RealFilterBank wr(cfg);
      for (std::size_t i = 0; i < wr.filters().size(); ++i) wr.filters()[i] = dequantize(st.w.filters()[i]);
      for (std::size_t i = 0; i < wr.biases().size(); ++i) wr.biases()[i] = dequantize(st.w.biases()[i]);
      SaturationCounter sat;
      const FixedTensor yf = oracle::conv_forward(st.x, st.w, cfg, &sat);
      const RealTensor yr = oracle::conv_forward(xr, wr, cfg);
      CHECK(sat.count == 0);
      // Each MAC floors to the activation LSB; the sum can drift by one LSB per term.
      const double terms = static_cast<double>(cfg.h_f) * cfg.w_f * (cfg.c_in / cfg.groups);
      for (std::size_t i = 0; i < yr.size(); ++i) {
        CHECK(std::fabs(dequantize(yf.data()[i]) - yr.data()[i]) <= terms * Activation::kLsb + 1e-9);
      }
    }
  }

  TEST_CASE("fully connected") {
    RealFcParams p(FcLayerConfig{3, 2});
    p.weights = {1, 2, 3, -1, -1, -1};
    p.biases = {0.5, 0};
    const std::vector<double> x{1, 1, 1};
    const auto y = oracle::fc_forward(x, p);
    CHECK(y[0] == doctest::Approx(6.5));
    CHECK(y[1] == doctest::Approx(0.0));

    FixedFcParams fp(FcLayerConfig{2, 1});
    fp.weights = {Weight::from_raw(16384), Weight::from_raw(-8192)};
    fp.biases = {Activation::from_raw(3)};
    const std::vector<Activation> fx{Activation::from_raw(8), Activation::from_raw(8)};
    // 3 + (8*16384 >> 15) + (8*-8192 >> 15) = 3 + 4 - 2
    CHECK(oracle::fc_forward(fx, fp)[0].raw == 5);
  }

  TEST_CASE("shape errors") {
    const ConvLayerConfig cfg{6, 6, 2, 3, 3, 1, 4};
    FixedFilterBank w(cfg);
    CHECK_THROWS_AS(oracle::conv_forward(FixedTensor(5, 6, 2), w, cfg), ShapeError);
    CHECK_THROWS_AS(oracle::conv_forward(FixedTensor(6, 6, 2), FixedFilterBank(ConvLayerConfig{6, 6, 2, 3, 3, 1, 3}), cfg),
                    ShapeError);
    FixedFcParams p(FcLayerConfig{4, 2});
    const std::vector<Activation> x(3);
    CHECK_THROWS_AS(oracle::fc_forward(x, p), ShapeError);
  }
}
