#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gfid/fixed_point.hpp"
#include "gfid/schedule.hpp"

namespace gfid {

/// Weight generator of one reconfigurable tile: 6 register sets of 11
/// registers. In a conv mode each logical tile owns t_group sets and its
/// rotation path runs through the first `s` registers of each of them, so
/// the path holds t_group * s slots: the filter row W_1..W_wf followed by
/// zeros. The path rotates one position per clock and each PE taps the first
/// register of its own set. In fully-connected mode the path is bypassed and
/// weights reach the PEs directly through the multiplexers.
class WeightGenerator {
 public:
  static constexpr std::uint32_t kSets = 6;
  static constexpr std::uint32_t kRegistersPerSet = 11;

  /// A register's content. `slot` is the zero-based filter column of the
  /// weight it holds, or -1 for a zero register.
  struct Register {
    Weight value{};
    std::int32_t slot = -1;
  };

  WeightGenerator() = default;
  explicit WeightGenerator(const TileModeConfig& mode);

  std::uint32_t path_length() const noexcept { return path_length_; }
  std::uint32_t sub_tiles() const noexcept { return sub_tiles_; }

  /// Places `row` (w_f weights) on a sub-tile's path, phased so that lane
  /// `lead_lane` sees W_1 on the next clock.
  void load(std::uint32_t sub_tile, std::span<const Weight> row, std::uint32_t lead_lane);
  /// Re-phases the weights already on the path (weight passing).
  void pass(std::uint32_t sub_tile, std::uint32_t lead_lane);
  void clear(std::uint32_t sub_tile);

  /// Advances every path by one register.
  void step() noexcept { ++phase_; }

  /// What PE `pe` (0..5) sees this clock.
  Register tap(std::uint32_t pe) const noexcept;

  /// Contents of a sub-tile's rotation path in path order at the current phase.
  std::vector<Register> rotation_path(std::uint32_t sub_tile) const;

  /// Zero registers on a loaded path: t_group * s - w_f.
  std::uint32_t zero_slots(std::uint32_t sub_tile) const;

  /// Register (set, index) backing path element `e` of a sub-tile.
  std::pair<std::uint32_t, std::uint32_t> path_register(std::uint32_t sub_tile, std::uint32_t e) const noexcept;

 private:
  std::uint32_t t_group_ = 1;
  std::uint32_t stride_ = 1;
  std::uint32_t w_f_ = 1;
  std::uint32_t path_length_ = 1;
  std::uint32_t sub_tiles_ = kSets;
  std::uint64_t phase_ = 0;
  std::array<std::vector<Weight>, kSets> rows_{};
  std::array<std::vector<Register>, kSets> rings_{};  // path contents at origin_
  std::array<std::uint64_t, kSets> origin_{};
};

struct PeState {
  std::vector<Acc24> acc_memory;  // L partial sums
  bool busy = false;              // MAC issued on the most recent clock
  std::uint32_t current_slot = 0;
};

/// One row of the optional per-clock trace.
struct TraceRecord {
  std::uint64_t cycle;
  std::uint32_t pe;
  bool busy;
  std::int32_t weight_index;  // zero-based, -1 when idle
  std::int32_t acc_slot;      // -1 when idle
};

struct TileTrace {
  std::uint64_t total_cycles = 0;
  std::array<std::uint64_t, WeightGenerator::kSets> busy_cycles{};
  std::uint64_t weight_loads = 0;
  std::uint64_t pixel_reads = 0;
  std::uint64_t stall_cycles = 0;
  std::vector<TraceRecord> records;  // filled only when tracing is on

  std::uint64_t total_busy() const noexcept;
  void merge(const TileTrace& other);
};

/// CSV with header "cycle,pe,busy,weight_index,acc_slot".
void write_trace_csv(std::ostream& out, const TileTrace& trace);

/// Where a weight-passing event happens relative to the partial-sum segment.
enum class RowCrossing {
  kWithinSegment,  // the next output row continues the current segment
  kSegmentStart,   // a new segment begins on a new output row
};

/// Cycle-level model of one reconfigurable tile: 6 PEs, the weight generator
/// and a 24-bit partial-sum memory of `acc_depth` entries per PE.
class Tile {
 public:
  /// Conv configuration: 6 / t_group logical tiles of t_group PEs.
  explicit Tile(const TileModeConfig& mode, std::uint32_t acc_depth = 64);
  /// Fully-connected configuration: six independent PEs fed directly.
  static Tile fully_connected(std::uint32_t acc_depth = 64);

  bool is_fully_connected() const noexcept { return fc_; }
  std::uint32_t t_group() const noexcept { return t_group_; }
  std::uint32_t sub_tiles() const noexcept { return sub_tiles_; }
  std::uint32_t acc_depth() const noexcept { return acc_depth_; }
  /// Outputs one logical tile can hold: t_group * acc_depth.
  std::uint32_t capacity() const noexcept { return t_group_ * acc_depth_; }
  const TileModeConfig& mode() const noexcept { return mode_; }

  void set_tracing(bool on) noexcept { tracing_ = on; }

  /// Sets the partial sums of outputs [first, first + count) of a logical tile.
  void preload(std::uint32_t sub_tile, std::uint32_t first, std::uint32_t count, Acc24 value);
  Acc24 partial_sum(std::uint32_t sub_tile, std::uint32_t local_output) const;
  const PeState& pe(std::uint32_t index) const { return pes_.at(index); }

  /// Reads a filter row into a sub-tile's weight path (counts w_f weight loads).
  void load_weights(std::uint32_t sub_tile, std::span<const Weight> row, std::uint32_t first_output,
                    TileTrace& trace);
  void idle_sub_tile(std::uint32_t sub_tile);

  /// Streams s*n + w_f - s pixels for `n` outputs of one output row, the
  /// first of which is local output `first_output` of the segment. Every
  /// loaded sub-tile accumulates its outputs; idle ones do nothing. Without
  /// `accumulate` the affected partial sums are cleared first. Returns the
  /// clocks consumed.
  std::uint64_t run_row_pass(std::span<const Activation> pixels, std::uint32_t n, std::uint32_t first_output,
                             bool accumulate, TileTrace& trace, SaturationCounter* sat = nullptr);

  /// Weight passing to the next output row: re-phases every loaded path for
  /// the row's first output and inserts the idle clocks of the pass. A
  /// crossing costs w_f - 1 clocks beyond the no-boundary schedule; inside a
  /// segment w_f - s of them are the new row's leading pixels (charged by
  /// run_row_pass), so only s - 1 are idle here. At a segment start the full
  /// w_f - 1 are idle. Returns the idle clocks inserted.
  std::uint64_t weight_passing_stall(RowCrossing where, std::uint32_t first_output, TileTrace& trace);

  /// Fully-connected pass: one input per clock, PE q multiplies it by
  /// weights[q][j]. PEs given an empty row stay idle. Accumulates into slot 0.
  std::uint64_t run_fc_pass(std::span<const Activation> inputs, std::span<const std::span<const Weight>> weights,
                            bool accumulate, TileTrace& trace, SaturationCounter* sat = nullptr);

  const WeightGenerator& weight_generator() const noexcept { return wg_; }

 private:
  Tile() = default;
  void check_sub_tile(std::uint32_t sub_tile) const;

  TileModeConfig mode_{};
  bool fc_ = false;
  std::uint32_t t_group_ = 1;
  std::uint32_t sub_tiles_ = WeightGenerator::kSets;
  std::uint32_t acc_depth_ = 64;
  bool tracing_ = false;
  WeightGenerator wg_;
  std::array<bool, WeightGenerator::kSets> loaded_{};
  std::array<std::uint32_t, WeightGenerator::kSets> lead_{};
  std::vector<PeState> pes_;
};

}  // namespace gfid
