// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "meterstick/common/error.hpp"
#include "meterstick/common/rng.hpp"
#include "meterstick/world/constructs.hpp"
#include "meterstick/world/entities.hpp"
#include "meterstick/world/explosion.hpp"
#include "meterstick/world/pathfind.hpp"
#include "meterstick/world/snapshot.hpp"
#include "meterstick/world/spawn.hpp"
#include "meterstick/world/terrain.hpp"

using namespace meterstick::world;

namespace {

constexpr Block kStone{BlockKind::stone, 0};

/// Stone floor at y = 0.
WorldState flat_world(int chunks = 2, int height = 16, std::uint64_t seed = 1) {
  WorldState w({chunks, chunks, height}, seed);
  for (int z = 0; z < w.dims().size_z(); ++z) {
    for (int x = 0; x < w.dims().size_x(); ++x) w.set_block_raw({x, 0, z}, kStone);
  }
  return w;
}

TerrainReport settle(WorldState& w, int max_steps = 1000) {
  TerrainReport total;
  for (int i = 0; i < max_steps && !w.update_queue().empty(); ++i) total += step_terrain(w, 1 << 20);
  return total;
}

Entity item_at(Vec3 pos) {
  Entity e;
  e.kind = EntityKind::item;
  e.pos = pos;
  e.payload = static_cast<int>(BlockKind::soil);
  return e;
}

// Breadth-first search over the same walkability and move set, counting moves.
std::optional<int> bfs_length(const WorldState& w, BlockPos from, BlockPos to) {
  if (from == to) return 0;
  std::map<BlockPos, int> dist{{from, 0}};
  std::queue<BlockPos> q;
  q.push(from);
  while (!q.empty()) {
    const BlockPos p = q.front();
    q.pop();
    for (const auto& off : kHorizontalOffsets) {
      for (int dy = -1; dy <= 1; ++dy) {
        const BlockPos n{p.x + off.x, p.y + dy, p.z + off.z};
        const bool ok = w.in_bounds(n) && n.y > 0 && w.block(n).kind == BlockKind::air &&
                        is_solid(w.block(n.below()).kind);
        if (!ok || dist.count(n)) continue;
        dist[n] = dist[p] + 1;
        if (n == to) return dist[n];
        q.push(n);
      }
    }
  }
  return std::nullopt;
}

}  // namespace

TEST(ApplyBlockUpdate, NeighborCounts) {
  WorldState w({1, 1, 16});
  EXPECT_EQ(w.apply_block_update({5, 5, 5}, kStone), 6);
  EXPECT_EQ(w.apply_block_update({0, 0, 0}, kStone), 3);
  EXPECT_EQ(w.apply_block_update({15, 15, 15}, kStone), 3);
  EXPECT_EQ(w.apply_block_update({0, 5, 5}, kStone), 5);
  EXPECT_THROW(w.apply_block_update({16, 0, 0}, kStone), meterstick::Error);
  EXPECT_THROW(w.apply_block_update({0, -1, 0}, kStone), meterstick::Error);
  EXPECT_EQ(w.block({5, 5, 5}), kStone);
}

TEST(ApplyBlockUpdate, QueueDeduplicates) {
  WorldState w({1, 1, 16});
  w.apply_block_update({5, 5, 5}, kStone);
  w.apply_block_update({5, 5, 5}, kAir);
  // The cell itself plus its six neighbors, each once.
  EXPECT_EQ(w.update_queue().size(), 7u);
}

TEST(StepTerrain, EmptyQueueReportsZeros) {
  auto w = flat_world();
  EXPECT_EQ(step_terrain(w, 100), TerrainReport{});
  EXPECT_THROW(step_terrain(w, 0), meterstick::Error);
}

TEST(StepTerrain, SupportCascadeCollapsesStack) {
  auto w = flat_world(1);
  const BlockPos pillar{5, 1, 5};
  w.set_block_raw(pillar, kStone);
  for (int y = 2; y <= 6; ++y) w.set_block_raw({5, y, 5}, {BlockKind::support_sensitive, 0});
  w.apply_block_update(pillar, kAir);
  const auto r = settle(w);
  EXPECT_EQ(r.rules_fired, 5u);
  EXPECT_EQ(w.entities().size(), 5u);
  for (int y = 1; y < 16; ++y) {
    for (int z = 0; z < 16; ++z) {
      for (int x = 0; x < 16; ++x) {
        if (w.block({x, y, z}).kind == BlockKind::support_sensitive) {
          EXPECT_NE(w.block({x, y - 1, z}).kind, BlockKind::air);
        }
      }
    }
  }
}

TEST(StepTerrain, WaterSpreadsToDiamond) {
  auto w = flat_world(2);
  const BlockPos src{16, 1, 16};
  w.apply_block_update(src, {BlockKind::water, 7});
  settle(w);

  // Oracle: breadth-first decay over open floor cells, one level per step.
  std::map<BlockPos, int> expected{{src, 7}};
  std::queue<BlockPos> q;
  q.push(src);
  while (!q.empty()) {
    const auto p = q.front();
    q.pop();
    if (expected[p] == 0) continue;
    for (const auto& off : kHorizontalOffsets) {
      const auto n = p + off;
      if (!w.in_bounds(n) || expected.count(n)) continue;
      expected[n] = expected[p] - 1;
      q.push(n);
    }
  }
  std::map<BlockPos, int> actual;
  for (int y = 0; y < 16; ++y) {
    for (int z = 0; z < 32; ++z) {
      for (int x = 0; x < 32; ++x) {
        const auto b = w.block({x, y, z});
        if (b.kind == BlockKind::water) actual[{x, y, z}] = b.aux;
      }
    }
  }
  EXPECT_EQ(actual.size(), 113u);
  EXPECT_EQ(actual, expected);
}

TEST(StepTerrain, SignalLineDecays) {
  auto w = flat_world(2);
  for (int i = 0; i < 20; ++i) w.set_block_raw({3 + i, 1, 5}, {BlockKind::signal_wire, 0});
  w.apply_block_update({2, 1, 5}, {BlockKind::signal_source, 15});
  settle(w);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(w.block({3 + i, 1, 5}).aux, std::max(0, 15 - i)) << i;
  EXPECT_EQ(step_terrain(w, 1000).blocks_changed, 0u);
  for (int i = 0; i < 20; ++i) {
    const BlockPos p{3 + i, 1, 5};
    EXPECT_EQ(w.block(p).aux, signal_from_neighbors(w, p));
  }
}

TEST(StepTerrain, SignalTurnsOff) {
  auto w = flat_world(2);
  for (int i = 0; i < 10; ++i) w.set_block_raw({3 + i, 1, 5}, {BlockKind::signal_wire, 0});
  w.apply_block_update({2, 1, 5}, {BlockKind::signal_source, 15});
  settle(w);
  w.apply_block_update({2, 1, 5}, {BlockKind::signal_source, 0});
  settle(w);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(w.block({3 + i, 1, 5}).aux, 0);
}

TEST(StepTerrain, SandFalls) {
  auto w = flat_world(1);
  w.apply_block_update({4, 6, 4}, {BlockKind::sand, 0});
  settle(w);
  EXPECT_EQ(w.block({4, 1, 4}).kind, BlockKind::sand);
  EXPECT_EQ(w.block({4, 6, 4}).kind, BlockKind::air);
}

TEST(StepTerrain, KelpGrowsEveryInterval) {
  auto w = flat_world(1);
  for (int y = 1; y < 6; ++y) w.set_block_raw({3, y, 3}, {BlockKind::water, 7});
  w.apply_block_update({3, 1, 3}, {BlockKind::kelp, 0});
  const int k = w.params().growth_interval;
  for (int t = 0; t <= 2 * k; ++t) {
    step_terrain(w, 1000);
    w.advance_tick();
  }
  EXPECT_EQ(w.block({3, 2, 3}), (Block{BlockKind::kelp, 1}));
  EXPECT_EQ(w.block({3, 3, 3}), (Block{BlockKind::kelp, 2}));
  EXPECT_EQ(w.block({3, 4, 3}).kind, BlockKind::water);
}

TEST(StepTerrain, PoweredTntPrimes) {
  auto w = flat_world(1);
  w.set_block_raw({5, 1, 5}, {BlockKind::tnt_block, 0});
  w.set_block_raw({6, 1, 5}, {BlockKind::signal_wire, 0});
  w.apply_block_update({7, 1, 5}, {BlockKind::signal_source, 15});
  const auto r = settle(w);
  EXPECT_EQ(r.fuses_started, 1u);
  ASSERT_EQ(w.entities().size(), 1u);
  EXPECT_EQ(w.entities()[0].kind, EntityKind::tnt_primed);
  EXPECT_EQ(w.entities()[0].payload, w.params().ignition_fuse);
  EXPECT_EQ(w.block({5, 1, 5}).kind, BlockKind::air);
}

TEST(StepEntities, ItemAtRestDoesNotMove) {
  auto w = flat_world(1);
  w.spawn_entity(item_at({4.5, 1.0, 4.5}));
  const auto r = step_entities(w);
  EXPECT_EQ(r.moved, 0u);
  EXPECT_EQ(w.entities()[0].pos, (Vec3{4.5, 1.0, 4.5}));
}

TEST(StepEntities, FallingItemLandsOnKinematicTick) {
  auto w = flat_world(1);
  w.spawn_entity(item_at({4.5, 4.0, 4.5}));
  // Oracle: first tick n whose accumulated drop reaches 3 cells.
  const double g = w.params().gravity;
  const double cap = w.params().max_fall_speed;
  int expected = 0;
  double drop = 0.0;
  for (int n = 1; drop < 3.0; ++n) {
    drop += std::min(g * n, cap);
    expected = n;
  }
  int landed = -1;
  for (int t = 1; t <= 50 && landed < 0; ++t) {
    step_entities(w);
    if (w.entities()[0].pos.y == 1.0) landed = t;
  }
  EXPECT_EQ(landed, expected);
  EXPECT_EQ(expected, 9);
}

TEST(StepEntities, PathReplannedOncePerInvalidation) {
  auto w = flat_world(2);
  w.add_player(1, "p", {20, 1, 5});
  Entity npc;
  npc.kind = EntityKind::npc;
  npc.pos = feet_of({5, 1, 5});
  w.spawn_entity(npc);
  EXPECT_EQ(step_entities(w).pathfinds, 1u);
  EXPECT_EQ(step_entities(w).pathfinds, 0u);
  w.apply_block_update({8, 1, 6}, kStone);
  EXPECT_EQ(step_entities(w).pathfinds, 1u);
  EXPECT_EQ(step_entities(w).pathfinds, 0u);
  // Changes far away do not invalidate.
  w.apply_block_update({30, 1, 30}, kStone);
  EXPECT_EQ(step_entities(w).pathfinds, 0u);
}

TEST(StepEntities, NpcWalksToPlayer) {
  auto w = flat_world(2);
  w.add_player(1, "p", {12, 1, 5});
  Entity npc;
  npc.kind = EntityKind::npc;
  npc.pos = feet_of({5, 1, 5});
  w.spawn_entity(npc);
  for (int t = 0; t < 200; ++t) step_entities(w);
  EXPECT_EQ(cell_of(w.entities()[0].pos), (BlockPos{12, 1, 5}));
}

TEST(StepEntities, HopperAbsorbsItems) {
  auto w = flat_world(1);
  w.set_block_raw({4, 1, 4}, {BlockKind::hopper, 0});
  w.spawn_entity(item_at({4.5, 3.0, 4.5}));
  EntityReport total;
  for (int t = 0; t < 20; ++t) total += step_entities(w);
  EXPECT_EQ(total.absorbed, 1u);
  EXPECT_TRUE(w.entities().empty());
  EXPECT_EQ(w.block({4, 1, 4}).aux, 1);
}

TEST(StepEntities, NoOpTickChangesNothing) {
  auto w = flat_world(1);
  const auto before = w.digest();
  step_terrain(w, 100);
  step_entities(w);
  EXPECT_EQ(w.digest(), before);
}

TEST(SpawnPoints, FlatPlane) {
  auto w = flat_world(4);
  const std::vector<BlockPos> players = {{32, 1, 32}};
  const auto pts = compute_spawn_points(w, players, 5);
  ASSERT_EQ(pts.size(), 5u);
  for (const auto& p : pts) {
    EXPECT_TRUE(spawn_predicate(w, p));
    const double d = (feet_of(p) - feet_of(players[0])).length();
    EXPECT_GE(d, 8.0);
    EXPECT_LE(d, 32.0);
  }
}

TEST(SpawnPoints, SealedWorldIsEmpty) {
  WorldState w({1, 1, 16});
  for (int y = 0; y < 16; ++y)
    for (int z = 0; z < 16; ++z)
      for (int x = 0; x < 16; ++x) w.set_block_raw({x, y, z}, kStone);
  const std::vector<BlockPos> players = {{8, 8, 8}};
  EXPECT_TRUE(compute_spawn_points(w, players, 10).empty());
  EXPECT_TRUE(compute_spawn_points(flat_world(), players, 0).empty());
}

TEST(SpawnPoints, SubsetOfExhaustiveScan) {
  meterstick::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    WorldState w({4, 4, 16}, static_cast<std::uint64_t>(trial));
    for (int z = 0; z < 64; ++z) {
      for (int x = 0; x < 64; ++x) {
        const int h = 1 + static_cast<int>(meterstick::uniform_below(rng, 4));
        for (int y = 0; y < h; ++y) w.set_block_raw({x, y, z}, kStone);
        if (meterstick::uniform_below(rng, 6) == 0) w.set_block_raw({x, h + 1, z}, kStone);
      }
    }
    const std::vector<BlockPos> players = {{32, 5, 32}, {10, 5, 50}};
    std::set<BlockPos> valid;
    for (int y = 1; y < 16; ++y) {
      for (int z = 0; z < 64; ++z) {
        for (int x = 0; x < 64; ++x) {
          const BlockPos p{x, y, z};
          const bool col = is_solid(w.block(p.below()).kind) && w.block(p).kind == BlockKind::air &&
                           w.block(p.above()).kind == BlockKind::air;
          if (!col) continue;
          for (const auto& pl : players) {
            const double d = std::hypot(p.x - pl.x, p.y - pl.y, p.z - pl.z);
            if (d >= 8 && d <= 32) valid.insert(p);
          }
        }
      }
    }
    const auto pts = compute_spawn_points(w, players, 20);
    EXPECT_FALSE(pts.empty());
    for (const auto& p : pts) EXPECT_TRUE(valid.count(p)) << p.x << "," << p.y << "," << p.z;
    EXPECT_EQ(std::set<BlockPos>(pts.begin(), pts.end()).size(), pts.size());
  }
}

TEST(Pathfind, SameCellIsEmptyPath) {
  auto w = flat_world();
  const auto p = pathfind(w, {3, 1, 3}, {3, 1, 3}, 100);
  ASSERT_TRUE(p);
  EXPECT_TRUE(p->empty());
}

TEST(Pathfind, Corridor) {
  WorldState w({2, 2, 8});
  for (int x = 0; x < 32; ++x)
    for (int z = 0; z < 32; ++z)
      for (int y = 0; y < 3; ++y) w.set_block_raw({x, y, z}, kStone);
  for (int x = 2; x <= 12; ++x) {
    w.set_block_raw({x, 1, 4}, kAir);
    w.set_block_raw({x, 2, 4}, kAir);
  }
  const auto p = pathfind(w, {2, 1, 4}, {12, 1, 4}, 1000);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->size(), 10u);
  EXPECT_FALSE(pathfind(w, {2, 1, 4}, {20, 1, 20}, 1000));
}

TEST(Pathfind, MatchesBfsOnRandomGrids) {
  meterstick::Rng rng(4242);
  int reachable = 0;
  for (int trial = 0; trial < 100; ++trial) {
    WorldState w({1, 1, 16}, static_cast<std::uint64_t>(trial));
    for (int y = 0; y < 16; ++y)
      for (int z = 0; z < 16; ++z)
        for (int x = 0; x < 16; ++x)
          if (y == 0 || meterstick::uniform_below(rng, 100) < 30) w.set_block_raw({x, y, z}, kStone);
    std::vector<BlockPos> walk;
    for (int y = 1; y < 16; ++y)
      for (int z = 0; z < 16; ++z)
        for (int x = 0; x < 16; ++x)
          if (walkable(w, {x, y, z})) walk.push_back({x, y, z});
    ASSERT_FALSE(walk.empty());
    for (int k = 0; k < 5; ++k) {
      const auto a = walk[meterstick::uniform_below(rng, walk.size())];
      const auto b = walk[meterstick::uniform_below(rng, walk.size())];
      const auto got = pathfind(w, a, b, 1 << 20);
      const auto want = bfs_length(w, a, b);
      ASSERT_EQ(got.has_value(), want.has_value());
      if (!got) continue;
      ++reachable;
      ASSERT_EQ(static_cast<int>(got->size()), *want);
      BlockPos prev = a;
      for (const auto& c : *got) {
        EXPECT_EQ(std::abs(c.x - prev.x) + std::abs(c.z - prev.z), 1);
        EXPECT_LE(std::abs(c.y - prev.y), 1);
        EXPECT_TRUE(walkable(w, c));
        prev = c;
      }
    }
  }
  EXPECT_GT(reachable, 50);
}

TEST(Pathfind, ExpansionLimit) {
  auto w = flat_world(2);
  EXPECT_FALSE(pathfind(w, {1, 1, 1}, {30, 1, 30}, 10));
  EXPECT_TRUE(pathfind(w, {1, 1, 1}, {30, 1, 30}, 100000));
}

TEST(Detonate, LoneTnt) {
  WorldState w({2, 2, 16});
  w.set_block_raw({16, 8, 16}, {BlockKind::tnt_block, 0});
  const auto r = detonate(w, {16, 8, 16});
  EXPECT_EQ(r.blocks_destroyed, 1u);
  EXPECT_EQ(r.tnt_chained, 0u);
  EXPECT_EQ(w.stats().detonations, 1u);
  EXPECT_THROW(detonate(w, {16, 8, 16}), meterstick::Error);
}

TEST(Detonate, TwoAdjacentChain) {
  auto w = flat_world(2);
  w.set_block_raw({16, 1, 16}, {BlockKind::tnt_block, 0});
  w.set_block_raw({17, 1, 16}, {BlockKind::tnt_block, 0});
  const auto r = detonate(w, {16, 1, 16});
  EXPECT_EQ(r.tnt_chained, 1u);
  ASSERT_EQ(w.entities().size(), 1u);
  const int fuse = w.entities()[0].payload;
  EXPECT_GE(fuse, 10);
  EXPECT_LE(fuse, 30);
  for (int t = 0; t < fuse; ++t) step_entities(w);
  EXPECT_EQ(w.stats().detonations, 2u);
  EXPECT_TRUE(w.entities().empty());
}

TEST(Detonate, StoneResists) {
  auto w = flat_world(2);
  w.set_block_raw({16, 1, 16}, {BlockKind::tnt_block, 0});
  w.set_block_raw({17, 1, 16}, {BlockKind::soil, 0});
  w.set_block_raw({15, 1, 16}, {BlockKind::sand, 0});
  detonate(w, {16, 1, 16});
  for (int z = 0; z < 32; ++z)
    for (int x = 0; x < 32; ++x) EXPECT_EQ(w.block({x, 0, z}), kStone);
  EXPECT_EQ(w.block({17, 1, 16}).kind, BlockKind::air);
  EXPECT_EQ(w.entities().size(), 2u);
}

TEST(Detonate, CuboidChainsCompletely) {
  auto w = flat_world(4, 32, 77);
  for (int y = 1; y <= 14; ++y)
    for (int z = 24; z < 40; ++z)
      for (int x = 24; x < 40; ++x) w.set_block_raw({x, y, z}, {BlockKind::tnt_block, 0});
  detonate(w, {24, 1, 24});
  for (int t = 0; t < 2000 && !w.entities().empty(); ++t) {
    step_entities(w);
    w.advance_tick();
  }
  std::uint64_t tnt_left = 0;
  for (int y = 0; y < 32; ++y)
    for (int z = 0; z < 64; ++z)
      for (int x = 0; x < 64; ++x) tnt_left += w.block({x, y, z}).kind == BlockKind::tnt_block;
  EXPECT_EQ(tnt_left, 0u);
  EXPECT_EQ(w.stats().detonations, 3584u);
}

TEST(Determinism, SameSeedSameDigest) {
  auto run = [] {
    auto w = flat_world(2, 16, 9);
    for (int i = 0; i < 6; ++i) w.set_block_raw({10 + i, 1, 10}, {BlockKind::tnt_block, 0});
    w.add_player(1, "a", {5, 1, 5});
    Entity npc;
    npc.kind = EntityKind::npc;
    npc.pos = feet_of({20, 1, 20});
    w.spawn_entity(npc);
    detonate(w, {10, 1, 10});
    std::vector<std::uint64_t> digests;
    for (int t = 0; t < 100; ++t) {
      step_terrain(w, 10000);
      step_entities(w);
      run_spawning(w);
      w.advance_tick();
      digests.push_back(w.digest());
    }
    return digests;
  };
  EXPECT_EQ(run(), run());
}

TEST(Snapshot, RoundTripPreservesDigest) {
  auto w = flat_world(2, 16, 5);
  w.set_block_raw({3, 1, 3}, {BlockKind::water, 7});
  w.apply_block_update({4, 1, 4}, {BlockKind::signal_source, 15});
  w.spawn_entity(item_at({7.5, 3, 7.5}));
  build_stone_farm(w, {10, 0, 10}, 0, 0, 3);
  w.timers().push_back({{1, 1, 1}, 40, std::nullopt, false});
  w.schedule({3, 1, 3}, 90);
  std::stringstream buf;
  write_snapshot(buf, w);
  const auto back = read_snapshot(buf);
  EXPECT_EQ(back.digest(), w.digest());
  EXPECT_EQ(back.constructs().size(), 1u);
}

TEST(Snapshot, TruncatedReportsOffset) {
  auto w = flat_world(1);
  std::stringstream buf;
  write_snapshot(buf, w);
  auto bytes = buf.str();
  bytes.resize(bytes.size() / 2);
  std::stringstream cut(bytes);
  EXPECT_THROW(read_snapshot(cut), meterstick::FormatError);
  std::stringstream junk("not a snapshot at all");
  EXPECT_THROW(read_snapshot(junk), meterstick::FormatError);
}

TEST(Devices, TimerArmsOnFirstJoin) {
  auto w = flat_world(1);
  w.timers().push_back({{2, 1, 2}, 10, std::nullopt, false});
  for (int t = 0; t < 30; ++t) {
    step_devices(w);
    w.advance_tick();
  }
  EXPECT_EQ(w.block({2, 1, 2}).kind, BlockKind::air);
  w.add_player(1, "a", {5, 1, 5});
  for (int t = 0; t < 10; ++t) {
    step_devices(w);
    w.advance_tick();
  }
  EXPECT_EQ(w.block({2, 1, 2}).kind, BlockKind::air);
  step_devices(w);
  EXPECT_EQ(w.block({2, 1, 2}), (Block{BlockKind::signal_source, 15}));
}

TEST(Constructs, StoneFarmFeedsSorter) {
  auto w = flat_world(2, 16, 3);
  build_stone_farm(w, {2, 0, 2}, 0, 0, 0);
  build_item_sorter(w, {2, 0, 20}, 0, 0);
  ConstructReport total;
  for (int t = 0; t < 400; ++t) {
    const auto r = step_constructs(w);
    total.harvested += r.harvested;
    total.transferred += r.transferred;
    total.sorted += r.sorted;
    step_terrain(w, 100000);
    step_entities(w);
    w.advance_tick();
  }
  EXPECT_GT(total.harvested, 0u);
  EXPECT_GT(total.transferred, 0u);
  EXPECT_GT(total.sorted, 0u);
}
