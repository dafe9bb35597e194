#include "gfid/schedule.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace gfid {

GfidSchedule::GfidSchedule(std::uint32_t w_f, std::uint32_t s, std::uint32_t n)
    : w_f_(w_f), s_(s), n_(n), rows_(0) {
  if (w_f == 0 || s == 0 || n == 0) throw PreconditionError("schedule needs w_f, s, n >= 1");
  // Computed in 64 bits: s*n + w_f - s may be large for long rows.
  const std::uint64_t rows = std::uint64_t{s} * n + w_f - s;
  if (rows > std::numeric_limits<std::uint32_t>::max()) throw PreconditionError("schedule too large");
  rows_ = static_cast<std::uint32_t>(rows);

  entries_.reserve(std::size_t{n} * w_f);
  row_start_.assign(rows_ + 1, 0);
  for (std::uint32_t r = 0; r < rows_; ++r) {
    row_start_[r] = static_cast<std::uint32_t>(entries_.size());
    // Columns with 0 <= r - s*c <= w_f - 1.
    const std::uint32_t c_hi = std::min<std::uint32_t>(r / s, n - 1);
    const std::uint32_t c_lo = r >= w_f ? (r - w_f) / s + 1 : 0;
    for (std::uint32_t c = c_lo; c <= c_hi && c_lo <= c_hi; ++c) {
      entries_.push_back({r, c, r - s * c});
    }
  }
  row_start_[rows_] = static_cast<std::uint32_t>(entries_.size());
}

std::optional<std::uint32_t> GfidSchedule::weight_at(std::uint32_t row, std::uint32_t col) const noexcept {
  if (row >= rows_ || col >= n_) return std::nullopt;
  const std::uint64_t base = std::uint64_t{s_} * col;
  if (row < base || row - base >= w_f_) return std::nullopt;
  return static_cast<std::uint32_t>(row - base);
}

std::uint32_t GfidSchedule::entries_in_row(std::uint32_t row) const noexcept {
  return row < rows_ ? row_start_[row + 1] - row_start_[row] : 0;
}

std::uint32_t GfidSchedule::entries_in_col(std::uint32_t col) const noexcept {
  return static_cast<std::uint32_t>(
      std::count_if(entries_.begin(), entries_.end(), [col](const Entry& e) { return e.col == col; }));
}

std::uint32_t GfidSchedule::max_entries_per_row() const noexcept {
  std::uint32_t best = 0;
  for (std::uint32_t r = 0; r < rows_; ++r) best = std::max(best, entries_in_row(r));
  return best;
}

GfidSchedule build_schedule(std::uint32_t w_f, std::uint32_t s, std::uint32_t n) { return GfidSchedule(w_f, s, n); }

std::string render_schedule(const GfidSchedule& sched) {
  const std::size_t width = ("W" + std::to_string(sched.w_f())).size();
  std::ostringstream out;
  for (std::uint32_t r = 0; r < sched.rows(); ++r) {
    std::string line;
    for (std::uint32_t c = 0; c < sched.cols(); ++c) {
      const auto k = sched.weight_at(r, c);
      std::string cell = k ? "W" + std::to_string(*k + 1) : "0";
      if (c + 1 < sched.cols()) cell.resize(width, ' ');
      if (c > 0) line += ' ';
      line += cell;
    }
    out << line << '\n';
  }
  return out.str();
}

std::uint32_t active_pe_count(std::uint32_t w_f, std::uint32_t s) {
  if (w_f == 0 || s == 0) throw PreconditionError("active_pe_count needs w_f, s >= 1");
  return (w_f + s - 1) / s;
}

double utilization(std::uint32_t w_f, std::uint32_t s, std::uint32_t t, std::uint64_t n) {
  if (t == 0 || n == 0) throw PreconditionError("utilization needs t, n >= 1");
  if (t < active_pe_count(w_f, s)) throw PreconditionError("t is below the active PE count for this mode");
  if (n % t != 0) throw PreconditionError("n must be a multiple of t");
  const double per_pe_busy = static_cast<double>(n / t) * w_f;
  const double cycles = static_cast<double>(s) * static_cast<double>(n) + w_f - s;
  return per_pe_busy / cycles;
}

double utilization_max(std::uint32_t w_f, std::uint32_t s, std::uint32_t t) {
  if (t == 0 || s == 0) throw PreconditionError("utilization_max needs t, s >= 1");
  return static_cast<double>(w_f) / (static_cast<double>(t) * s);
}

double mode_utilization(std::uint32_t w_f, std::uint32_t s, std::uint64_t n) {
  const double N = static_cast<double>(n);
  if (w_f == 3 && s == 1) return N / (N + 2);
  if (w_f == 5 && s == 1) return 5 * N / (6 * N + 24);
  if (w_f == 1 && s == 1) return 1.0;
  if (w_f == 7 && s == 2) return 7 * N / (12 * N + 30);
  if (w_f == 11 && s == 4) return 11 * N / (12 * N + 21);
  throw ModeError("no tile mode for w_f=" + std::to_string(w_f) + ", s=" + std::to_string(s));
}

bool is_supported_mode(std::uint32_t w_f, std::uint32_t s) noexcept {
  return (w_f == 1 && s == 1) || (w_f == 3 && s == 1) || (w_f == 5 && s == 1) || (w_f == 7 && s == 2) ||
         (w_f == 11 && s == 4);
}

TileModeConfig tile_mode(std::uint32_t w_f, std::uint32_t s, const ArrayGeometry& geom) {
  if (!is_supported_mode(w_f, s)) {
    throw ModeError("no tile mode for w_f=" + std::to_string(w_f) + ", s=" + std::to_string(s));
  }
  if (geom.pes_per_tile != 6) throw ModeError("the reconfigurable tile has exactly 6 PEs");
  if (geom.physical_tiles == 0 || geom.acc_depth == 0) throw ModeError("array needs tiles and memory depth");
  TileModeConfig m;
  m.w_f = w_f;
  m.s = s;
  m.t = active_pe_count(w_f, s);
  // 6 PEs split evenly into groups of 1 or 3; 4 and 5 round up to the whole tile.
  m.t_group = m.t == 1 ? 1 : (m.t <= 3 ? 3 : 6);
  m.logical_tiles_per_physical = geom.pes_per_tile / m.t_group;
  m.n_eff = geom.acc_depth * m.t_group;
  m.p_eff = geom.physical_tiles * m.logical_tiles_per_physical;
  return m;
}

std::uint64_t lcm_pe_count(std::span<const std::uint32_t> t_values) {
  if (t_values.empty()) throw PreconditionError("lcm of an empty set");
  std::uint64_t acc = 1;
  for (const auto t : t_values) {
    if (t == 0) throw PreconditionError("PE counts must be positive");
    acc = std::lcm(acc, std::uint64_t{t});
  }
  return acc;
}

}  // namespace gfid
