#include "gfid/tile.hpp"

#include <ostream>
#include <string>

#include "gfid/error.hpp"

namespace gfid {

WeightGenerator::WeightGenerator(const TileModeConfig& mode)
    : t_group_(mode.t_group), stride_(mode.s), w_f_(mode.w_f), path_length_(mode.t_group * mode.s) {
  if (mode.t_group == 0 || kSets % mode.t_group != 0) {
    throw ModeError("t_group must divide " + std::to_string(kSets));
  }
  if (mode.s == 0 || mode.s > kRegistersPerSet || mode.w_f > path_length_) {
    throw ModeError("weight path cannot hold a filter row of " + std::to_string(mode.w_f));
  }
  sub_tiles_ = kSets / t_group_;
}

std::pair<std::uint32_t, std::uint32_t> WeightGenerator::path_register(std::uint32_t sub_tile,
                                                                       std::uint32_t e) const noexcept {
  return {sub_tile * t_group_ + e / stride_, e % stride_};
}

void WeightGenerator::load(std::uint32_t sub_tile, std::span<const Weight> row, std::uint32_t lead_lane) {
  if (sub_tile >= sub_tiles_) throw PreconditionError("sub-tile out of range");
  if (row.size() != w_f_) {
    throw ShapeError("filter row has " + std::to_string(row.size()) + " weights, mode expects " +
                     std::to_string(w_f_));
  }
  rows_[sub_tile].assign(row.begin(), row.end());
  pass(sub_tile, lead_lane);
}

void WeightGenerator::pass(std::uint32_t sub_tile, std::uint32_t lead_lane) {
  if (sub_tile >= sub_tiles_) throw PreconditionError("sub-tile out of range");
  const auto& row = rows_[sub_tile];
  if (row.empty()) throw PreconditionError("no weights on this path");
  auto& ring = rings_[sub_tile];
  ring.assign(path_length_, Register{});
  const std::uint32_t lead = (lead_lane % t_group_) * stride_;
  for (std::uint32_t e = 0; e < path_length_; ++e) {
    const std::uint32_t slot = (lead + path_length_ - e) % path_length_;
    if (slot < w_f_) ring[e] = Register{row[slot], static_cast<std::int32_t>(slot)};
  }
  origin_[sub_tile] = phase_;
}

void WeightGenerator::clear(std::uint32_t sub_tile) {
  if (sub_tile >= sub_tiles_) throw PreconditionError("sub-tile out of range");
  rows_[sub_tile].clear();
  rings_[sub_tile].clear();
}

WeightGenerator::Register WeightGenerator::tap(std::uint32_t pe) const noexcept {
  const std::uint32_t g = pe / t_group_;
  if (g >= sub_tiles_ || rings_[g].empty()) return {};
  const std::uint32_t e = (pe % t_group_) * stride_;
  const auto d = static_cast<std::uint32_t>((phase_ - origin_[g]) % path_length_);
  return rings_[g][(e + path_length_ - d) % path_length_];
}

std::vector<WeightGenerator::Register> WeightGenerator::rotation_path(std::uint32_t sub_tile) const {
  if (sub_tile >= sub_tiles_) throw PreconditionError("sub-tile out of range");
  const auto& ring = rings_[sub_tile];
  std::vector<Register> out(path_length_);
  if (ring.empty()) return out;
  const auto d = static_cast<std::uint32_t>((phase_ - origin_[sub_tile]) % path_length_);
  for (std::uint32_t e = 0; e < path_length_; ++e) out[e] = ring[(e + path_length_ - d) % path_length_];
  return out;
}

std::uint32_t WeightGenerator::zero_slots(std::uint32_t sub_tile) const {
  if (sub_tile >= sub_tiles_) throw PreconditionError("sub-tile out of range");
  return path_length_ - w_f_;
}

std::uint64_t TileTrace::total_busy() const noexcept {
  std::uint64_t sum = 0;
  for (auto b : busy_cycles) sum += b;
  return sum;
}

void TileTrace::merge(const TileTrace& other) {
  total_cycles += other.total_cycles;
  for (std::size_t i = 0; i < busy_cycles.size(); ++i) busy_cycles[i] += other.busy_cycles[i];
  weight_loads += other.weight_loads;
  pixel_reads += other.pixel_reads;
  stall_cycles += other.stall_cycles;
  records.insert(records.end(), other.records.begin(), other.records.end());
}

void write_trace_csv(std::ostream& out, const TileTrace& trace) {
  out << "cycle,pe,busy,weight_index,acc_slot\n";
  for (const auto& r : trace.records) {
    out << r.cycle << ',' << r.pe << ',' << (r.busy ? 1 : 0) << ',' << r.weight_index << ',' << r.acc_slot << '\n';
  }
}

Tile::Tile(const TileModeConfig& mode, std::uint32_t acc_depth)
    : mode_(mode), t_group_(mode.t_group), acc_depth_(acc_depth), wg_(mode) {
  if (acc_depth == 0) throw PreconditionError("accumulator depth must be positive");
  sub_tiles_ = wg_.sub_tiles();
  pes_.assign(WeightGenerator::kSets, PeState{std::vector<Acc24>(acc_depth), false, 0});
}

Tile Tile::fully_connected(std::uint32_t acc_depth) {
  if (acc_depth == 0) throw PreconditionError("accumulator depth must be positive");
  Tile tile;
  tile.fc_ = true;
  tile.acc_depth_ = acc_depth;
  tile.pes_.assign(WeightGenerator::kSets, PeState{std::vector<Acc24>(acc_depth), false, 0});
  return tile;
}

void Tile::check_sub_tile(std::uint32_t sub_tile) const {
  if (sub_tile >= sub_tiles_) {
    throw PreconditionError("sub-tile " + std::to_string(sub_tile) + " out of range");
  }
}

void Tile::preload(std::uint32_t sub_tile, std::uint32_t first, std::uint32_t count, Acc24 value) {
  check_sub_tile(sub_tile);
  if (static_cast<std::uint64_t>(first) + count > capacity()) {
    throw CapacityError("partial-sum memory holds " + std::to_string(capacity()) + " outputs");
  }
  for (std::uint32_t l = first; l < first + count; ++l) {
    pes_[sub_tile * t_group_ + l % t_group_].acc_memory[l / t_group_] = value;
  }
}

Acc24 Tile::partial_sum(std::uint32_t sub_tile, std::uint32_t local_output) const {
  check_sub_tile(sub_tile);
  if (local_output >= capacity()) throw CapacityError("output outside partial-sum memory");
  return pes_[sub_tile * t_group_ + local_output % t_group_].acc_memory[local_output / t_group_];
}

void Tile::load_weights(std::uint32_t sub_tile, std::span<const Weight> row, std::uint32_t first_output,
                        TileTrace& trace) {
  if (fc_) throw PreconditionError("weight path is bypassed in fully-connected mode");
  check_sub_tile(sub_tile);
  wg_.load(sub_tile, row, first_output % t_group_);
  loaded_[sub_tile] = true;
  lead_[sub_tile] = first_output % t_group_;
  trace.weight_loads += row.size();
}

void Tile::idle_sub_tile(std::uint32_t sub_tile) {
  check_sub_tile(sub_tile);
  if (!fc_) wg_.clear(sub_tile);
  loaded_[sub_tile] = false;
}

std::uint64_t Tile::run_row_pass(std::span<const Activation> pixels, std::uint32_t n, std::uint32_t first_output,
                                 bool accumulate, TileTrace& trace, SaturationCounter* sat) {
  if (fc_) throw PreconditionError("row passes need a conv configuration");
  if (n == 0) throw PreconditionError("row pass needs at least one output");
  const std::uint32_t s = mode_.s;
  const std::uint64_t cycles = static_cast<std::uint64_t>(s) * n + mode_.w_f - s;
  if (pixels.size() != cycles) {
    throw ShapeError("row pass for " + std::to_string(n) + " outputs needs " + std::to_string(cycles) +
                     " pixels, got " + std::to_string(pixels.size()));
  }
  if (static_cast<std::uint64_t>(first_output) + n > capacity()) {
    throw CapacityError("partial-sum memory holds " + std::to_string(capacity()) + " outputs");
  }
  for (std::uint32_t g = 0; g < sub_tiles_; ++g) {
    if (!loaded_[g]) continue;
    if (lead_[g] != first_output % t_group_) {
      throw PreconditionError("weight path phased for a different first output");
    }
    if (!accumulate) preload(g, first_output, n, Acc24{});
  }

  for (std::uint64_t c = 0; c < cycles; ++c) {
    const Activation x = pixels[c];
    for (std::uint32_t p = 0; p < WeightGenerator::kSets; ++p) {
      PeState& pe = pes_[p];
      pe.busy = false;
      std::int32_t slot = -1;
      std::int32_t acc_slot = -1;
      const std::uint32_t g = p / t_group_;
      if (g < sub_tiles_ && loaded_[g]) {
        const auto reg = wg_.tap(p);
        if (reg.slot >= 0 && c >= static_cast<std::uint64_t>(reg.slot)) {
          const std::uint64_t span = c - static_cast<std::uint64_t>(reg.slot);
          const std::uint64_t t_rel = span / s;
          if (span % s == 0 && t_rel < n) {
            const std::uint64_t local = first_output + t_rel;
            pe.current_slot = static_cast<std::uint32_t>(local / t_group_);
            Acc24& acc = pe.acc_memory[pe.current_slot];
            acc = mac(acc, x, reg.value, sat);
            pe.busy = true;
            ++trace.busy_cycles[p];
            slot = reg.slot;
            acc_slot = static_cast<std::int32_t>(pe.current_slot);
          }
        }
      }
      if (tracing_) trace.records.push_back({trace.total_cycles + c, p, pe.busy, slot, acc_slot});
    }
    wg_.step();
  }
  trace.total_cycles += cycles;
  trace.pixel_reads += cycles;
  return cycles;
}

std::uint64_t Tile::weight_passing_stall(RowCrossing where, std::uint32_t first_output, TileTrace& trace) {
  if (fc_) throw PreconditionError("no weight passing in fully-connected mode");
  const std::uint64_t idle = where == RowCrossing::kWithinSegment ? mode_.s - 1 : mode_.w_f - 1;
  for (std::uint64_t c = 0; c < idle; ++c) {
    if (tracing_) {
      for (std::uint32_t p = 0; p < WeightGenerator::kSets; ++p) {
        trace.records.push_back({trace.total_cycles + c, p, false, -1, -1});
      }
    }
    wg_.step();
  }
  for (auto& pe : pes_) pe.busy = false;
  for (std::uint32_t g = 0; g < sub_tiles_; ++g) {
    if (!loaded_[g]) continue;
    wg_.pass(g, first_output % t_group_);
    lead_[g] = first_output % t_group_;
  }
  trace.total_cycles += idle;
  trace.stall_cycles += idle;
  return idle;
}

std::uint64_t Tile::run_fc_pass(std::span<const Activation> inputs, std::span<const std::span<const Weight>> weights,
                                bool accumulate, TileTrace& trace, SaturationCounter* sat) {
  if (!fc_) throw PreconditionError("fully-connected pass needs the fully-connected configuration");
  if (weights.size() > WeightGenerator::kSets) throw CapacityError("a tile has 6 PEs");
  std::uint64_t active = 0;
  for (std::size_t q = 0; q < weights.size(); ++q) {
    if (weights[q].empty()) continue;
    if (weights[q].size() != inputs.size()) {
      throw ShapeError("weight row length " + std::to_string(weights[q].size()) + " != input length " +
                       std::to_string(inputs.size()));
    }
    if (!accumulate) pes_[q].acc_memory[0] = Acc24{};
    ++active;
  }
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    for (std::uint32_t q = 0; q < WeightGenerator::kSets; ++q) {
      PeState& pe = pes_[q];
      pe.busy = q < weights.size() && !weights[q].empty();
      if (pe.busy) {
        pe.current_slot = 0;
        pe.acc_memory[0] = mac(pe.acc_memory[0], inputs[j], weights[q][j], sat);
        ++trace.busy_cycles[q];
      }
      if (tracing_) {
        trace.records.push_back({trace.total_cycles + j, q, pe.busy, pe.busy ? 0 : -1, pe.busy ? 0 : -1});
      }
    }
  }
  trace.total_cycles += inputs.size();
  trace.pixel_reads += inputs.size();
  trace.weight_loads += active * inputs.size();
  return inputs.size();
}

}  // namespace gfid
