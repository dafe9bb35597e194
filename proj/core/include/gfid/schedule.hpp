#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gfid/error.hpp"

namespace gfid {

/// Sparse schedule matrix for one filter row over `n` outputs of an output
/// row. Row r is a clock cycle (one input pixel), column c an output pixel;
/// entry (r, c) is the zero-based filter column applied to that pixel for
/// that output, present iff 0 <= r - s*c <= w_f - 1.
class GfidSchedule {
 public:
  struct Entry {
    std::uint32_t row;
    std::uint32_t col;
    std::uint32_t weight;  // zero-based
  };

  GfidSchedule(std::uint32_t w_f, std::uint32_t s, std::uint32_t n);

  std::uint32_t w_f() const noexcept { return w_f_; }
  std::uint32_t s() const noexcept { return s_; }
  std::uint32_t n() const noexcept { return n_; }
  /// s*n + w_f - s clock cycles.
  std::uint32_t rows() const noexcept { return rows_; }
  std::uint32_t cols() const noexcept { return n_; }

  std::optional<std::uint32_t> weight_at(std::uint32_t row, std::uint32_t col) const noexcept;

  /// Entries in row-major order.
  std::span<const Entry> entries() const noexcept { return entries_; }
  std::uint32_t entries_in_row(std::uint32_t row) const noexcept;
  std::uint32_t entries_in_col(std::uint32_t col) const noexcept;
  std::uint32_t max_entries_per_row() const noexcept;

 private:
  std::uint32_t w_f_;
  std::uint32_t s_;
  std::uint32_t n_;
  std::uint32_t rows_;
  std::vector<Entry> entries_;
  std::vector<std::uint32_t> row_start_;  // CSR offsets into entries_
};

/// Builds the schedule. Requires w_f, s, n >= 1.
GfidSchedule build_schedule(std::uint32_t w_f, std::uint32_t s, std::uint32_t n);

/// Text grid with one-based weight names ("W3") and "0" for empty cells,
/// columns padded to a common width, each row ending in a newline.
std::string render_schedule(const GfidSchedule& sched);

/// Minimum number of simultaneously active PEs: ceil(w_f / s).
std::uint32_t active_pe_count(std::uint32_t w_f, std::uint32_t s);

/// Per-PE utilisation (n/t * w_f) / (s*n + w_f - s) as a fraction. Throws
/// PreconditionError unless n is a multiple of t and t >= ceil(w_f / s).
double utilization(std::uint32_t w_f, std::uint32_t s, std::uint32_t t, std::uint64_t n);

/// Limit of utilization() for n -> infinity: w_f / (t * s).
double utilization_max(std::uint32_t w_f, std::uint32_t s, std::uint32_t t);

/// Closed-form utilisation of the 6-PE reconfigurable tile in each supported
/// mode, where t_group PEs (possibly more than t) are provisioned.
double mode_utilization(std::uint32_t w_f, std::uint32_t s, std::uint64_t n);

/// Physical array parameters that tile grouping depends on.
struct ArrayGeometry {
  std::uint32_t physical_tiles = 32;
  std::uint32_t pes_per_tile = 6;
  std::uint32_t acc_depth = 64;  // L, partial sums per PE

  std::uint32_t total_pes() const noexcept { return physical_tiles * pes_per_tile; }
  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

/// How the PEs of one reconfigurable tile group for a (w_f, s) mode.
struct TileModeConfig {
  std::uint32_t w_f = 0;
  std::uint32_t s = 0;
  std::uint32_t t = 0;        // ceil(w_f / s)
  std::uint32_t t_group = 0;  // PEs per logical tile
  std::uint32_t logical_tiles_per_physical = 0;
  std::uint32_t n_eff = 0;  // acc_depth * t_group
  std::uint32_t p_eff = 0;  // logical tiles across the array

  friend bool operator==(const TileModeConfig&, const TileModeConfig&) = default;
};

/// True for the five modes the weight generator supports:
/// (1,1), (3,1), (5,1), (7,2), (11,4).
bool is_supported_mode(std::uint32_t w_f, std::uint32_t s) noexcept;

/// Throws ModeError for unsupported modes or a geometry whose PEs per tile is
/// not 6.
TileModeConfig tile_mode(std::uint32_t w_f, std::uint32_t s, const ArrayGeometry& geom = {});

/// Least common multiple of the given PE counts. Throws PreconditionError on
/// an empty set or a zero entry.
std::uint64_t lcm_pe_count(std::span<const std::uint32_t> t_values);

}  // namespace gfid
