#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gfid/schedule.hpp>
#include <gfid/tile.hpp>

#include "test_util.hpp"

using namespace gfid;

namespace {

constexpr std::pair<std::uint32_t, std::uint32_t> kModes[] = {{1, 1}, {3, 1}, {5, 1}, {7, 2}, {11, 4}};

std::vector<Weight> weights_of(std::initializer_list<int> raws) {
  std::vector<Weight> w;
  for (int r : raws) w.push_back(Weight::from_raw(static_cast<std::int16_t>(r)));
  return w;
}

std::vector<Activation> ramp(std::size_t n, int start = 1) {
  std::vector<Activation> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(Activation::from_raw(static_cast<std::int16_t>(start + i)));
  return v;
}

// Direct 1-D strided correlation in the same accumulation order.
std::vector<Acc24> conv1d(const std::vector<Activation>& px, const std::vector<Weight>& w, std::uint32_t s,
                          std::uint32_t n, Acc24 init) {
  std::vector<Acc24> out(n, init);
  for (std::uint32_t t = 0; t < n; ++t)
    for (std::uint32_t i = 0; i < w.size(); ++i) out[t] = mac(out[t], px[t * s + i], w[i]);
  return out;
}

}  // namespace

TEST_SUITE("tile") {
  TEST_CASE("configuration partitions the six PEs") {
    CHECK(Tile(tile_mode(3, 1)).sub_tiles() == 2);
    CHECK(Tile(tile_mode(3, 1)).t_group() == 3);
    CHECK(Tile(tile_mode(1, 1)).sub_tiles() == 6);
    CHECK(Tile(tile_mode(5, 1)).sub_tiles() == 1);
    CHECK(Tile(tile_mode(7, 2)).sub_tiles() == 1);
    CHECK(Tile(tile_mode(11, 4)).sub_tiles() == 2);
    CHECK(Tile(tile_mode(3, 1)).capacity() == 192);
    const Tile fc = Tile::fully_connected();
    CHECK(fc.is_fully_connected());
    CHECK(fc.sub_tiles() == 6);
    CHECK_THROWS_AS(tile_mode(9, 3), ModeError);
    CHECK_THROWS_AS(Tile(tile_mode(3, 1), 0), PreconditionError);
  }

  TEST_CASE("one filter row over six outputs") {
    Tile tile(tile_mode(3, 1));
    tile.set_tracing(true);
    TileTrace trace;
    const auto w = weights_of({100, 200, 300});
    tile.load_weights(0, w, 0, trace);
    const auto px = ramp(8);
    tile.preload(0, 0, 6, Acc24{});
    CHECK(tile.run_row_pass(px, 6, 0, true, trace) == 8);
    CHECK(trace.total_cycles == 8);
    CHECK(trace.pixel_reads == 8);
    CHECK(trace.weight_loads == 3);
    CHECK(trace.total_busy() == 18);

    // The third pixel drives all three PEs with W3, W2, W1.
    std::vector<TraceRecord> third;
    for (const auto& r : trace.records)
      if (r.cycle == 2) third.push_back(r);
    REQUIRE(third.size() == 6);
    CHECK(third[0].busy);
    CHECK(third[0].weight_index == 2);
    CHECK(third[1].weight_index == 1);
    CHECK(third[2].weight_index == 0);
    CHECK_FALSE(third[3].busy);

    const auto expect = conv1d(px, w, 1, 6, Acc24{});
    for (std::uint32_t t = 0; t < 6; ++t) CHECK(tile.partial_sum(0, t) == expect[t]);

    std::ostringstream csv;
    write_trace_csv(csv, trace);
    const std::string text = csv.str();
    CHECK(text.rfind("cycle,pe,busy,weight_index,acc_slot\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 8 * 6);
    CHECK(text.find("\n2,0,1,2,0\n") != std::string::npos);
  }

  TEST_CASE("two output rows share one segment") {
    // 8-pixel rows, 12 outputs: the second row starts with a W_f shift of the
    // weights and no idle clocks, 16 clocks in all.
    Tile tile(tile_mode(3, 1));
    tile.set_tracing(true);
    TileTrace trace;
    const auto w = weights_of({1000, -2000, 3000});
    const auto row0 = ramp(8, 1);
    const auto row1 = ramp(8, 9);
    tile.preload(0, 0, 12, Acc24{});
    tile.load_weights(0, w, 0, trace);
    tile.run_row_pass(row0, 6, 0, true, trace);
    CHECK(tile.weight_passing_stall(RowCrossing::kWithinSegment, 6, trace) == 0);
    tile.run_row_pass(row1, 6, 6, true, trace);
    CHECK(trace.total_cycles == 16);
    CHECK(trace.total_busy() == 36);
    // Output 7 is PE 0's third slot and sees W1 on the first clock of row 2.
    const auto& first = trace.records[8 * 6];
    CHECK(first.cycle == 8);
    CHECK(first.pe == 0);
    CHECK(first.weight_index == 0);
    CHECK(first.acc_slot == 2);
    const auto e0 = conv1d(row0, w, 1, 6, Acc24{});
    const auto e1 = conv1d(row1, w, 1, 6, Acc24{});
    for (std::uint32_t t = 0; t < 6; ++t) {
      CHECK(tile.partial_sum(0, t) == e0[t]);
      CHECK(tile.partial_sum(0, 6 + t) == e1[t]);
    }
  }

  TEST_CASE("row crossing at a segment start costs w_f - 1 idle clocks") {
    // Two output rows of 4 with a 6-output partial-sum memory per tile:
    // 6 + 2 + 6 = 14 clocks.
    Tile tile(tile_mode(3, 1), 2);
    TileTrace trace;
    const auto w = weights_of({5, 6, 7});
    tile.load_weights(0, w, 0, trace);
    tile.run_row_pass(ramp(6), 4, 0, false, trace);
    CHECK(tile.weight_passing_stall(RowCrossing::kSegmentStart, 0, trace) == 2);
    tile.load_weights(0, w, 0, trace);
    tile.run_row_pass(ramp(6, 7), 4, 0, false, trace);
    CHECK(trace.total_cycles == 14);
    CHECK(trace.stall_cycles == 2);

    Tile one(tile_mode(1, 1));
    TileTrace t1;
    CHECK(one.weight_passing_stall(RowCrossing::kSegmentStart, 0, t1) == 0);
    CHECK(one.weight_passing_stall(RowCrossing::kWithinSegment, 0, t1) == 0);
    Tile seven(tile_mode(7, 2));
    TileTrace t7;
    CHECK(seven.weight_passing_stall(RowCrossing::kWithinSegment, 0, t7) == 1);
    CHECK(seven.weight_passing_stall(RowCrossing::kSegmentStart, 0, t7) == 6);
  }

  TEST_CASE("1x1 filters keep every PE busy") {
    Tile tile(tile_mode(1, 1));
    TileTrace trace;
    for (std::uint32_t g = 0; g < 6; ++g) tile.load_weights(g, weights_of({1234}), 0, trace);
    tile.run_row_pass(ramp(64), 64, 0, false, trace);
    for (auto b : trace.busy_cycles) CHECK(b == trace.total_cycles);
  }

  TEST_CASE("row pass cycle law") {
    for (auto [w_f, s] : kModes) {
      const TileModeConfig mode = tile_mode(w_f, s);
      for (std::uint32_t n : {mode.t_group, 64 * mode.t_group}) {
        CAPTURE(w_f);
        CAPTURE(n);
        Tile tile(mode);
        TileTrace trace;
        std::vector<Weight> w(w_f, Weight::from_raw(77));
        for (std::uint32_t g = 0; g < tile.sub_tiles(); ++g) tile.load_weights(g, w, 0, trace);
        const std::uint64_t cycles = tile.run_row_pass(ramp(s * n + w_f - s), n, 0, false, trace);
        CHECK(cycles == std::uint64_t{s} * n + w_f - s);
        CHECK(trace.total_cycles == cycles);
      }
    }
  }

  TEST_CASE("busy ratio follows the mode utilization") {
    std::mt19937_64 rng(21);
    for (auto [w_f, s] : kModes) {
      const TileModeConfig mode = tile_mode(w_f, s);
      for (int it = 0; it < 10; ++it) {
        const std::uint32_t n = test::pick(rng, 1, mode.t_group * 64);
        Tile tile(mode);
        TileTrace trace;
        tile.load_weights(0, std::vector<Weight>(w_f, Weight::from_raw(5)), 0, trace);
        tile.run_row_pass(ramp(s * n + w_f - s), n, 0, false, trace);
        std::uint64_t busy = 0;
        for (std::uint32_t p = 0; p < mode.t_group; ++p) {
          CHECK(trace.busy_cycles[p] <= trace.total_cycles);
          busy += trace.busy_cycles[p];
        }
        const double ratio = static_cast<double>(busy) / (mode.t_group * static_cast<double>(trace.total_cycles));
        CHECK(std::fabs(ratio - mode_utilization(w_f, s, n)) <= 1.0 / trace.total_cycles);
      }
    }
  }

  TEST_CASE("rotation paths hold the filter row and zeros") {
    const std::pair<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> expect_zero[] = {
        {{1, 1}, 0}, {{3, 1}, 0}, {{5, 1}, 1}, {{7, 2}, 5}, {{11, 4}, 1}};
    for (auto [mode_key, zeros] : expect_zero) {
      const auto [w_f, s] = mode_key;
      const TileModeConfig mode = tile_mode(w_f, s);
      Tile tile(mode);
      tile.set_tracing(true);
      TileTrace trace;
      std::vector<Weight> w;
      for (std::uint32_t i = 0; i < w_f; ++i) w.push_back(Weight::from_raw(static_cast<std::int16_t>(100 + i)));
      tile.load_weights(0, w, 0, trace);
      const WeightGenerator& wg = tile.weight_generator();
      CHECK(wg.zero_slots(0) == zeros);
      CHECK(wg.path_length() == mode.t_group * s);
      const auto path = wg.rotation_path(0);
      std::vector<std::int32_t> slots;
      for (const auto& r : path) slots.push_back(r.slot);
      std::sort(slots.begin(), slots.end());
      for (std::uint32_t i = 0; i < zeros; ++i) CHECK(slots[i] == -1);
      for (std::uint32_t i = 0; i < w_f; ++i) CHECK(slots[zeros + i] == static_cast<std::int32_t>(i));
      for (std::uint32_t e = 0; e < wg.path_length(); ++e) {
        const auto [set, reg] = wg.path_register(0, e);
        CHECK(set < mode.t_group);
        CHECK(reg < s);
      }
      const std::uint32_t n = 64 * mode.t_group;
      tile.run_row_pass(ramp(s * n + w_f - s), n, 0, false, trace);
      for (const auto& r : trace.records) {
        if (r.busy) {
          CHECK(r.weight_index >= 0);
          CHECK(r.weight_index < static_cast<std::int32_t>(w_f));
        }
      }
    }
  }

  TEST_CASE("row passes reproduce a direct 1-D convolution") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> d16(-2000, 2000);
    for (auto [w_f, s] : kModes) {
      const TileModeConfig mode = tile_mode(w_f, s);
      for (int it = 0; it < 25; ++it) {
        const std::uint32_t n = test::pick(rng, 1, mode.t_group * 64);
        const std::uint32_t first = test::pick(rng, 0, mode.t_group * 64 - n);
        std::vector<Activation> px(s * n + w_f - s);
        for (auto& v : px) v = Activation::from_raw(static_cast<std::int16_t>(d16(rng)));
        Tile tile(mode);
        TileTrace trace;
        std::vector<std::vector<Weight>> rows(tile.sub_tiles());
        for (std::uint32_t g = 0; g < tile.sub_tiles(); ++g) {
          for (std::uint32_t i = 0; i < w_f; ++i) rows[g].push_back(Weight::from_raw(static_cast<std::int16_t>(d16(rng) * 8)));
          tile.load_weights(g, rows[g], first, trace);
          tile.preload(g, first, n, Acc24{static_cast<std::int32_t>(g) * 7});
        }
        SaturationCounter sat;
        tile.run_row_pass(px, n, first, true, trace, &sat);
        CHECK(sat.count == 0);
        for (std::uint32_t g = 0; g < tile.sub_tiles(); ++g) {
          const auto expect = conv1d(px, rows[g], s, n, Acc24{static_cast<std::int32_t>(g) * 7});
          for (std::uint32_t t = 0; t < n; ++t) REQUIRE(tile.partial_sum(g, first + t) == expect[t]);
        }
        CHECK(trace.total_busy() == std::uint64_t{n} * w_f * tile.sub_tiles());
      }
    }
  }

  TEST_CASE("accumulate adds onto existing partial sums") {
    Tile tile(tile_mode(3, 1));
    TileTrace trace;
    const auto w = weights_of({4096, 4096, 4096});
    tile.load_weights(0, w, 0, trace);
    const auto px = ramp(6, 40);
    tile.run_row_pass(px, 4, 0, false, trace);
    const Acc24 once = tile.partial_sum(0, 1);
    tile.load_weights(0, w, 0, trace);
    tile.run_row_pass(px, 4, 0, true, trace);
    CHECK(tile.partial_sum(0, 1).raw == 2 * once.raw);
    tile.load_weights(0, w, 0, trace);
    tile.run_row_pass(px, 4, 0, false, trace);
    CHECK(tile.partial_sum(0, 1) == once);
  }

  TEST_CASE("precondition violations") {
    Tile tile(tile_mode(3, 1));
    TileTrace trace;
    tile.load_weights(0, weights_of({1, 2, 3}), 0, trace);
    CHECK_THROWS_AS(tile.run_row_pass(ramp(195), 193, 0, false, trace), CapacityError);
    CHECK_THROWS_AS(tile.run_row_pass(ramp(12), 10, 190, false, trace), CapacityError);
    CHECK_THROWS_AS(tile.run_row_pass(ramp(7), 6, 0, false, trace), ShapeError);
    CHECK_THROWS_AS(tile.load_weights(0, weights_of({1, 2}), 0, trace), ShapeError);
    CHECK_THROWS_AS(tile.load_weights(2, weights_of({1, 2, 3}), 0, trace), PreconditionError);
    CHECK_THROWS_AS(tile.run_row_pass(ramp(8), 6, 1, false, trace), PreconditionError);
    CHECK_THROWS_AS(tile.preload(0, 190, 3, Acc24{}), CapacityError);
    CHECK_THROWS_AS(Tile::fully_connected().run_row_pass(ramp(3), 1, 0, false, trace), PreconditionError);
  }

  TEST_CASE("fully-connected pass") {
    Tile tile = Tile::fully_connected();
    TileTrace trace;
    const auto x = ramp(10, -3);
    std::vector<std::vector<Weight>> w(6);
    for (std::uint32_t q = 0; q < 5; ++q)
      for (int j = 0; j < 10; ++j) w[q].push_back(Weight::from_raw(static_cast<std::int16_t>((q + 1) * 1000 - j * 300)));
    std::vector<std::span<const Weight>> rows;
    for (const auto& r : w) rows.emplace_back(r);
    for (std::uint32_t q = 0; q < 5; ++q) tile.preload(q, 0, 1, Acc24{static_cast<std::int32_t>(q)});
    CHECK(tile.run_fc_pass(x, rows, true, trace) == 10);
    CHECK(trace.busy_cycles[5] == 0);
    CHECK(trace.total_busy() == 50);
    CHECK(trace.weight_loads == 50);
    for (std::uint32_t q = 0; q < 5; ++q) {
      Acc24 acc{static_cast<std::int32_t>(q)};
      for (int j = 0; j < 10; ++j) acc = mac(acc, x[j], w[q][j]);
      CHECK(tile.partial_sum(q, 0) == acc);
    }
    std::vector<Weight> shortrow(9);
    std::vector<std::span<const Weight>> bad{std::span<const Weight>(shortrow)};
    CHECK_THROWS_AS(tile.run_fc_pass(x, bad, true, trace), ShapeError);
  }
}
