// SPDX-License-Identifier: Apache-2.0
#include "meterstick/world/spawn.hpp"

#include <algorithm>
#include <unordered_set>

#include "meterstick/common/rng.hpp"

namespace meterstick::world {

bool spawn_predicate(const WorldState& w, BlockPos p) {
  if (!w.in_bounds(p) || p.y == 0) return false;
  return w.solid(p.below()) && w.block(p).kind == BlockKind::air && w.block(p.above()).kind == BlockKind::air;
}

std::vector<BlockPos> compute_spawn_points(const WorldState& w, std::span<const BlockPos> players, std::size_t cap,
                                           std::uint64_t* columns_scanned) {
  std::vector<BlockPos> out;
  if (players.empty() || cap == 0) return out;
  const auto& params = w.params();
  const int far = params.spawn_max_distance;
  const double lo = params.spawn_min_distance;
  const double hi = params.spawn_max_distance;
  Rng rng(mix64(w.seed(), w.tick_counter(), 0x5350415753ULL));
  std::unordered_set<std::uint64_t> seen;
  std::uint64_t scanned = 0;
  for (int i = 0; i < params.spawn_column_budget && out.size() < cap; ++i) {
    const BlockPos& anchor = players[static_cast<std::size_t>(i) % players.size()];
    const int x = anchor.x + static_cast<int>(uniform_int(rng, -far, far));
    const int z = anchor.z + static_cast<int>(uniform_int(rng, -far, far));
    ++scanned;
    if (x < 0 || z < 0 || x >= w.dims().size_x() || z >= w.dims().size_z()) continue;
    for (int y = w.dims().height - 1; y >= 1; --y) {
      const BlockPos p{x, y, z};
      if (!spawn_predicate(w, p)) continue;
      const Vec3 feet = feet_of(p);
      const bool in_ring = std::any_of(players.begin(), players.end(), [&](const BlockPos& pl) {
        const double d = (feet - feet_of(pl)).length();
        return d >= lo && d <= hi;
      });
      if (in_ring && seen.insert(pack(p)).second) out.push_back(p);
      break;
    }
  }
  if (columns_scanned) *columns_scanned += scanned;
  return out;
}

std::size_t run_spawning(WorldState& w) {
  if (w.players().empty()) return 0;
  const auto roaming = static_cast<std::size_t>(std::count_if(w.entities().begin(), w.entities().end(), [](const Entity& e) {
    return e.kind == EntityKind::npc && e.owner < 0;
  }));
  const auto cap = static_cast<std::size_t>(std::max(0, w.params().mob_cap));
  if (roaming >= cap) return 0;
  std::vector<BlockPos> anchors;
  for (const auto& [id, p] : w.players()) anchors.push_back(p.pos);
  std::uint64_t scanned = 0;
  const auto points = compute_spawn_points(w, anchors, cap - roaming, &scanned);
  w.work().spawn_columns += scanned;
  for (const auto& p : points) {
    Entity e;
    e.kind = EntityKind::npc;
    e.pos = feet_of(p);
    w.spawn_entity(std::move(e));
  }
  return points.size();
}

}  // namespace meterstick::world
