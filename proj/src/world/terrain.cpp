// SPDX-License-Identifier: Apache-2.0
#include "meterstick/world/terrain.hpp"

#include <algorithm>

#include "meterstick/common/error.hpp"

namespace meterstick::world {

TerrainReport& TerrainReport::operator+=(const TerrainReport& o) {
  rules_fired += o.rules_fired;
  blocks_changed += o.blocks_changed;
  fuses_started += o.fuses_started;
  evaluated += o.evaluated;
  yielded = yielded || o.yielded;
  return *this;
}

namespace {

Block water(int level) { return {BlockKind::water, static_cast<std::uint8_t>(level)}; }

bool can_grow(const WorldState& w, BlockPos p, Block b) {
  return b.kind == BlockKind::kelp && b.aux < w.params().kelp_max_stage && w.in_bounds(p.above()) &&
         w.block(p.above()).kind == BlockKind::water;
}

bool support_rule(WorldState& w, BlockWriter& out, BlockPos p) {
  if (w.block(p.below()).kind != BlockKind::air) return false;
  out.set(p, kAir);
  Entity e;
  e.kind = EntityKind::item;
  e.pos = center_of(p);
  e.payload = static_cast<std::int32_t>(BlockKind::support_sensitive);
  out.spawn(std::move(e));
  return true;
}

bool gravity_rule(WorldState& w, BlockWriter& out, BlockPos p) {
  if (p.y == 0) return false;
  const auto below = w.block(p.below()).kind;
  if (below != BlockKind::air && below != BlockKind::water) return false;
  out.set(p.below(), {BlockKind::sand, 0});
  out.set(p, kAir);
  return true;
}

bool water_rule(WorldState& w, BlockWriter& out, BlockPos p, Block b) {
  int level = -1;
  const Block above = w.block(p.above());
  if (above.kind == BlockKind::water) level = above.aux;
  for (const auto& off : kHorizontalOffsets) {
    const BlockPos n = p + off;
    const Block nb = w.block(n);
    if (nb.kind != BlockKind::water || nb.aux == 0) continue;
    // Water only spreads sideways from cells that cannot fall.
    if (n.y == 0 || w.block(n.below()).kind == BlockKind::air) continue;
    level = std::max(level, nb.aux - 1);
  }
  if (level < 0) return false;
  level = std::min(level, w.params().water_max_level);
  if (b.kind == BlockKind::air || (b.kind == BlockKind::water && level > b.aux)) {
    out.set(p, water(level));
    return true;
  }
  return false;
}

bool growth_rule(WorldState& w, BlockPos p, Block b) {
  if (w.is_scheduled(p) || !can_grow(w, p, b)) return false;
  w.schedule(p, w.tick_counter() + static_cast<std::uint64_t>(w.params().growth_interval));
  return true;
}

bool signal_rule(WorldState& w, BlockWriter& out, BlockPos p, Block b) {
  const int s = signal_from_neighbors(w, p);
  if (s == b.aux) return false;
  out.set(p, {BlockKind::signal_wire, static_cast<std::uint8_t>(s)});
  return true;
}

bool ignition_rule(WorldState& w, BlockWriter& out, BlockPos p, TerrainReport& r) {
  bool powered = false;
  for (const auto& off : kFaceOffsets) {
    const Block n = w.block(p + off);
    if ((n.kind == BlockKind::signal_wire || n.kind == BlockKind::signal_source) && n.aux > 0) {
      powered = true;
      break;
    }
  }
  if (!powered) return false;
  out.set(p, kAir);
  Entity e;
  e.kind = EntityKind::tnt_primed;
  e.pos = feet_of(p);
  e.payload = w.params().ignition_fuse;
  out.spawn(std::move(e));
  ++r.fuses_started;
  return true;
}

bool evaluate(WorldState& w, BlockWriter& out, BlockPos p, TerrainReport& r) {
  const Block b = w.block(p);
  switch (b.kind) {
    case BlockKind::support_sensitive:
      return support_rule(w, out, p);
    case BlockKind::sand:
      return gravity_rule(w, out, p);
    case BlockKind::air:
    case BlockKind::water:
      return water_rule(w, out, p, b);
    case BlockKind::kelp:
      return growth_rule(w, p, b);
    case BlockKind::signal_wire:
      return signal_rule(w, out, p, b);
    case BlockKind::tnt_block:
      return ignition_rule(w, out, p, r);
    default:
      return false;
  }
}

bool touches_reserved(const WorldState& w, BlockPos p, const std::vector<std::uint8_t>& reserved) {
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dx = -1; dx <= 1; ++dx) {
      const BlockPos q{p.x + dx, 0, p.z + dz};
      if (!w.in_bounds(q)) continue;
      if (reserved[w.chunk_index(q)]) return true;
    }
  }
  return false;
}

}  // namespace

int signal_from_neighbors(const WorldState& w, BlockPos p) {
  int s = 0;
  for (const auto& off : kFaceOffsets) {
    const Block n = w.block(p + off);
    if (n.kind == BlockKind::signal_source) {
      s = std::max<int>(s, n.aux);
    } else if (n.kind == BlockKind::signal_wire) {
      s = std::max(s, n.aux - 1);
    }
  }
  return std::min(s, w.params().signal_max);
}

TerrainReport run_scheduled(WorldState& w, BlockWriter& out) {
  TerrainReport r;
  for (const auto& p : w.take_due(w.tick_counter())) {
    const Block b = w.block(p);
    if (!can_grow(w, p, b)) continue;
    const BlockPos tip = p.above();
    r.blocks_changed += out.set(tip, {BlockKind::kelp, static_cast<std::uint8_t>(b.aux + 1)}) > 0;
    ++r.rules_fired;
    const Block grown = w.block(tip);
    if (can_grow(w, tip, grown)) {
      w.schedule(tip, w.tick_counter() + static_cast<std::uint64_t>(w.params().growth_interval));
    }
  }
  return r;
}

TerrainReport run_rules(WorldState& w, std::uint64_t budget, BlockWriter& out,
                        const std::vector<std::uint8_t>* reserved) {
  TerrainReport r;
  auto& queue = w.update_queue();
  const auto changes_before = out.sink().changes.size();
  while (r.evaluated < budget) {
    const auto p = queue.pop();
    if (!p) break;
    if (reserved && touches_reserved(w, *p, *reserved)) {
      queue.push_front(*p);
      r.yielded = true;
      break;
    }
    ++r.evaluated;
    if (evaluate(w, out, *p, r)) ++r.rules_fired;
  }
  out.sink().work.rule_evals += r.evaluated;
  r.blocks_changed += out.sink().changes.size() - changes_before;
  return r;
}

TerrainReport step_terrain(WorldState& w, std::uint64_t budget) {
  if (budget == 0) throw Error("rule budget must be positive");
  PhaseSink sink;
  BlockWriter out(w, sink, EnqueueMode::direct);
  TerrainReport r = run_scheduled(w, out);
  r += run_rules(w, budget, out);
  sink.stats.rules_fired += r.rules_fired;
  sink.stats.fuses_started += r.fuses_started;
  w.commit(sink);
  return r;
}

}  // namespace meterstick::world
