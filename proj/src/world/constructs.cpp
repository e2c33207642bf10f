// SPDX-License-Identifier: Apache-2.0
#include "meterstick/world/constructs.hpp"

#include <algorithm>

#include "meterstick/common/rng.hpp"
#include "meterstick/world/spawn.hpp"

namespace meterstick::world {

namespace {

constexpr Block kStone{BlockKind::stone, 0};
constexpr Block kHopper{BlockKind::hopper, 0};

/// Solid pad at `ground` under the footprint, cleared air above it.
void flatten(WorldState& w, BlockPos origin, int ground, int size_x, int size_z) {
  for (int z = origin.z; z < origin.z + size_z; ++z) {
    for (int x = origin.x; x < origin.x + size_x; ++x) {
      for (int y = 0; y < w.dims().height; ++y) {
        const BlockPos p{x, y, z};
        if (!w.in_bounds(p)) continue;
        if (y == ground || (y < ground && w.block(p).kind == BlockKind::air)) {
          w.set_block_raw(p, kStone);
        } else if (y > ground) {
          w.set_block_raw(p, kAir);
        }
      }
    }
  }
}

void drop_item(WorldState& w, const Vec3& pos, BlockKind kind) {
  Entity e;
  e.kind = EntityKind::item;
  e.pos = pos;
  e.payload = static_cast<std::int32_t>(kind);
  w.spawn_entity(std::move(e));
}

std::uint8_t count(const WorldState& w, BlockPos p) { return w.block(p).aux; }

void set_hopper(WorldState& w, BlockPos p, int n) {
  w.apply_block_update(p, {BlockKind::hopper, static_cast<std::uint8_t>(n)});
}

bool due(const WorldState& w, const Construct& c, int interval) {
  return interval > 0 && (w.tick_counter() + c.phase) % static_cast<std::uint64_t>(interval) == 0;
}

void run_entity_farm(WorldState& w, std::size_t idx, ConstructReport& r) {
  auto& ents = w.entities();
  std::vector<Vec3> drops;
  std::erase_if(ents, [&](const Entity& e) {
    if (e.kind != EntityKind::npc || e.owner != static_cast<std::int32_t>(idx)) return false;
    drops.push_back(e.pos);
    return true;
  });
  w.stats().entities_despawned += drops.size();
  for (const auto& pos : drops) drop_item(w, pos, BlockKind::soil);

  auto& c = w.constructs()[idx];
  if (c.state % 2 == 0) {
    w.apply_block_update(c.cells_b[0], {BlockKind::water, static_cast<std::uint8_t>(w.params().water_max_level)});
  } else {
    for (const auto& p : c.cells_a) {
      if (w.block(p).kind == BlockKind::water) w.apply_block_update(p, kAir);
    }
  }
  ++c.state;

  const auto n = c.cells_a.size();
  const auto start = static_cast<std::size_t>(mix64(w.seed(), w.tick_counter(), idx) % n);
  int spawned = 0;
  for (std::size_t k = 0; k < n && spawned < w.params().farm_spawn_count; ++k) {
    const BlockPos p = c.cells_a[(start + k * 7) % n];
    if (!spawn_predicate(w, p)) continue;
    Entity e;
    e.kind = EntityKind::npc;
    e.pos = feet_of(p);
    e.owner = static_cast<std::int32_t>(idx);
    w.spawn_entity(std::move(e));
    ++spawned;
  }
  w.constructs()[idx].produced += static_cast<std::uint64_t>(spawned);
  r.spawned += static_cast<std::uint64_t>(spawned);
}

void run_stone_farm(WorldState& w, Construct& c, ConstructReport& r) {
  if (c.state != 0 && w.tick_counter() >= c.state) {
    for (const auto& p : c.cells_a) {
      if (w.block(p).kind == BlockKind::air) w.apply_block_update(p, kStone);
    }
    c.state = 0;
  }
  if (!due(w, c, w.params().farm_interval)) return;
  for (const auto& p : c.cells_a) {
    if (w.block(p).kind != BlockKind::stone) continue;
    w.apply_block_update(p, kAir);
    drop_item(w, center_of(p), BlockKind::stone);
    ++r.harvested;
    ++c.produced;
  }
  c.state = w.tick_counter() + static_cast<std::uint64_t>(w.params().regrow_delay);
}

void run_kelp_farm(WorldState& w, Construct& c, ConstructReport& r) {
  const Block water{BlockKind::water, static_cast<std::uint8_t>(w.params().water_max_level)};
  for (const auto& base : c.cells_a) {
    for (BlockPos p = base.above(); w.in_bounds(p) && w.block(p).kind == BlockKind::kelp; p = p.above()) {
      w.apply_block_update(p, water);
      drop_item(w, center_of(p), BlockKind::kelp);
      ++r.harvested;
      ++c.produced;
    }
  }
}

void run_sorter(WorldState& w, std::size_t idx, ConstructReport& r) {
  if (!due(w, w.constructs()[idx], w.params().transfer_interval)) return;
  const int cap = w.params().hopper_capacity;
  const auto chain = w.constructs()[idx].cells_a;
  const int tile = w.constructs()[idx].tile;
  if (chain.empty()) return;
  if (count(w, chain.back()) > 0) {
    set_hopper(w, chain.back(), count(w, chain.back()) - 1);
    ++r.sorted;
    ++w.constructs()[idx].produced;
  }
  for (std::size_t i = chain.size() - 1; i-- > 0;) {
    if (count(w, chain[i]) > 0 && count(w, chain[i + 1]) < cap) {
      set_hopper(w, chain[i + 1], count(w, chain[i + 1]) + 1);
      set_hopper(w, chain[i], count(w, chain[i]) - 1);
    }
  }
  const BlockPos input = chain.front();
  for (const auto& c : w.constructs()) {
    if (c.tile != tile || c.kind == ConstructKind::item_sorter) continue;
    const auto& hoppers = c.kind == ConstructKind::entity_farm ? std::vector<BlockPos>{c.cells_b[1]} : c.cells_b;
    for (const auto& h : hoppers) {
      if (count(w, input) >= cap) return;
      if (w.block(h).kind != BlockKind::hopper || count(w, h) == 0) continue;
      set_hopper(w, h, count(w, h) - 1);
      set_hopper(w, input, count(w, input) + 1);
      ++r.transferred;
    }
  }
}

std::size_t add(WorldState& w, Construct c) {
  w.constructs().push_back(std::move(c));
  return w.constructs().size() - 1;
}

}  // namespace

std::uint64_t step_devices(WorldState& w) {
  std::uint64_t fired = 0;
  for (auto& t : w.timers()) {
    if (t.fired || !t.fire_at || w.tick_counter() < *t.fire_at) continue;
    w.apply_block_update(t.pos, {BlockKind::signal_source, static_cast<std::uint8_t>(w.params().signal_max)});
    t.fired = true;
    ++fired;
  }
  for (auto& c : w.clocks()) {
    if (c.half_period == 0 || (w.tick_counter() + c.phase) % c.half_period != 0) continue;
    const Block b = w.block(c.pos);
    const auto on = static_cast<std::uint8_t>(w.params().signal_max);
    w.apply_block_update(c.pos, {BlockKind::signal_source, static_cast<std::uint8_t>(b.aux > 0 ? 0 : on)});
    ++fired;
  }
  return fired;
}

ConstructReport step_constructs(WorldState& w) {
  ConstructReport r;
  for (std::size_t i = 0; i < w.constructs().size(); ++i) {
    switch (w.constructs()[i].kind) {
      case ConstructKind::entity_farm:
        if (due(w, w.constructs()[i], w.params().farm_interval)) run_entity_farm(w, i, r);
        break;
      case ConstructKind::stone_farm:
        run_stone_farm(w, w.constructs()[i], r);
        break;
      case ConstructKind::kelp_farm:
        run_kelp_farm(w, w.constructs()[i], r);
        break;
      case ConstructKind::item_sorter:
        run_sorter(w, i, r);
        break;
    }
  }
  return r;
}

std::size_t build_entity_farm(WorldState& w, BlockPos o, int g, int tile, std::uint32_t phase) {
  constexpr int n = kEntityFarmSize;
  flatten(w, o, g, n, n);
  Construct c;
  c.kind = ConstructKind::entity_farm;
  c.tile = tile;
  c.phase = phase;
  for (int z = 0; z < n; ++z) {
    for (int x = 0; x < n; ++x) {
      const BlockPos p{o.x + x, g + 1, o.z + z};
      if (x == 0 || z == 0 || x == n - 1 || z == n - 1) {
        w.set_block_raw(p, kStone);
      } else {
        c.cells_a.push_back(p);
      }
    }
  }
  const BlockPos hopper{o.x + n / 2, g, o.z + n / 2};
  w.set_block_raw(hopper, kHopper);
  c.cells_b = {BlockPos{o.x + 1, g + 1, o.z + 1}, hopper};
  return add(w, std::move(c));
}

std::size_t build_stone_farm(WorldState& w, BlockPos o, int g, int tile, std::uint32_t phase) {
  constexpr int n = kStoneFarmSize;
  flatten(w, o, g, n, 3);
  Construct c;
  c.kind = ConstructKind::stone_farm;
  c.tile = tile;
  c.phase = phase;
  for (int x = 1; x < n - 1; ++x) {
    const BlockPos h{o.x + x, g + 1, o.z + 1};
    w.set_block_raw(h, kHopper);
    w.set_block_raw(h.above(), kStone);
    c.cells_b.push_back(h);
    c.cells_a.push_back(h.above());
  }
  return add(w, std::move(c));
}

std::size_t build_kelp_farm(WorldState& w, BlockPos o, int g, int tile, std::uint32_t phase) {
  constexpr int n = kKelpFarmSize;
  constexpr int depth = 4;
  flatten(w, o, g, n, n);
  Construct c;
  c.kind = ConstructKind::kelp_farm;
  c.tile = tile;
  c.phase = phase;
  const Block water{BlockKind::water, static_cast<std::uint8_t>(w.params().water_max_level)};
  for (int z = 0; z < n; ++z) {
    for (int x = 0; x < n; ++x) {
      const bool wall = x == 0 || z == 0 || x == n - 1 || z == n - 1;
      for (int y = g + 1; y <= g + 1 + depth; ++y) {
        const BlockPos p{o.x + x, y, o.z + z};
        if (wall) {
          w.set_block_raw(p, kStone);
        } else if (y == g + 1) {
          w.set_block_raw(p, kHopper);
          c.cells_b.push_back(p);
        } else {
          w.set_block_raw(p, water);
        }
      }
    }
  }
  for (int z = 2; z < n - 1; z += 3) {
    for (int x = 2; x < n - 1; x += 3) {
      const BlockPos base{o.x + x, g + 2, o.z + z};
      w.set_block_raw(base, {BlockKind::kelp, 0});
      c.cells_a.push_back(base);
      w.schedule(base, phase + static_cast<std::uint64_t>(w.params().growth_interval));
    }
  }
  return add(w, std::move(c));
}

std::size_t build_item_sorter(WorldState& w, BlockPos o, int g, int tile) {
  flatten(w, o, g, kSorterLength, 1);
  Construct c;
  c.kind = ConstructKind::item_sorter;
  c.tile = tile;
  for (int x = 0; x < kSorterLength; ++x) {
    const BlockPos h{o.x + x, g + 1, o.z};
    w.set_block_raw(h, kHopper);
    c.cells_a.push_back(h);
  }
  return add(w, std::move(c));
}

}  // namespace meterstick::world
