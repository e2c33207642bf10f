// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <array>
#include <map>

#include "meterstick/common/error.hpp"
#include "meterstick/server/offline.hpp"
#include "meterstick/workloads/bot.hpp"
#include "meterstick/workloads/worldgen.hpp"

using namespace meterstick;
using namespace meterstick::workloads;
using world::BlockKind;

namespace {

WorkloadSpec spec_of(WorkloadKind kind, int scale = 1, std::uint64_t seed = 7) {
  WorkloadSpec s;
  s.kind = kind;
  s.scale = scale;
  s.seed = seed;
  return s;
}

/// Cells of every kind that only constructs use (terrain is stone and soil).
std::map<BlockKind, std::uint64_t> construct_blocks(const world::WorldState& w) {
  std::map<BlockKind, std::uint64_t> n;
  for (std::size_t c = 0; c < w.chunk_count(); ++c) {
    for (const auto& b : w.chunk(c).cells()) {
      if (b.kind != BlockKind::air && b.kind != BlockKind::stone && b.kind != BlockKind::soil) ++n[b.kind];
    }
  }
  return n;
}

std::map<world::ConstructKind, int> construct_counts(const world::WorldState& w) {
  std::map<world::ConstructKind, int> n;
  for (const auto& c : w.constructs()) ++n[c.kind];
  return n;
}

}  // namespace

TEST(WorldGen, SameSpecSameDigest) {
  for (auto kind : {WorkloadKind::control, WorkloadKind::tnt, WorkloadKind::farm, WorkloadKind::lag}) {
    EXPECT_EQ(build_world(spec_of(kind)).digest(), build_world(spec_of(kind)).digest()) << workload_name(kind);
  }
  EXPECT_NE(build_world(spec_of(WorkloadKind::control, 1, 1)).digest(),
            build_world(spec_of(WorkloadKind::control, 1, 2)).digest());
}

TEST(WorldGen, ControlIsEightByEightChunksWithoutConstructs) {
  const auto w = build_world(spec_of(WorkloadKind::control));
  EXPECT_EQ(w.dims().chunks_x, 8);
  EXPECT_EQ(w.dims().chunks_z, 8);
  EXPECT_TRUE(w.constructs().empty());
  EXPECT_TRUE(w.timers().empty());
  EXPECT_TRUE(w.clocks().empty());
  EXPECT_TRUE(construct_blocks(w).empty());
}

TEST(WorldGen, TntCuboidHas3584Blocks) {
  const auto w = build_world(spec_of(WorkloadKind::tnt));
  EXPECT_EQ(construct_blocks(w)[BlockKind::tnt_block], 16u * 16u * 14u);
  ASSERT_EQ(w.timers().size(), 1u);
  EXPECT_EQ(w.timers()[0].delay, 400u);
}

TEST(WorldGen, FarmCountsAtScaleTwo) {
  auto n = construct_counts(build_world(spec_of(WorkloadKind::farm, 2)));
  EXPECT_EQ(n[world::ConstructKind::entity_farm], 24);
  EXPECT_EQ(n[world::ConstructKind::stone_farm], 8);
  EXPECT_EQ(n[world::ConstructKind::kelp_farm], 8);
  EXPECT_EQ(n[world::ConstructKind::item_sorter], 2);
}

TEST(WorldGen, TilingMultipliesEveryConstructFamily) {
  for (auto kind : {WorkloadKind::tnt, WorkloadKind::farm, WorkloadKind::lag}) {
    const auto w1 = build_world(spec_of(kind, 1));
    const auto b1 = construct_blocks(w1);
    const auto c1 = construct_counts(w1);
    ASSERT_FALSE(b1.empty());
    for (int k : {2, 4}) {
      const auto wk = build_world(spec_of(kind, k));
      EXPECT_EQ(wk.dims(), dims_for_scale(k));
      for (const auto& [block, count] : construct_blocks(wk)) {
        EXPECT_EQ(count, k * b1.at(block)) << workload_name(kind) << " x" << k << " " << world::block_name(block);
      }
      for (const auto& [ck, count] : construct_counts(wk)) EXPECT_EQ(count, k * c1.at(ck));
      EXPECT_EQ(wk.timers().size(), k * w1.timers().size());
      EXPECT_EQ(wk.clocks().size(), k * w1.clocks().size());
    }
  }
}

TEST(WorldGen, InvalidScaleRejected) {
  auto s = spec_of(WorkloadKind::tnt, 3);
  EXPECT_THROW(validate(s), ConfigError);
  EXPECT_THROW(build_world(s), ConfigError);
}

TEST(WorldGen, WorldRefRoundTrip) {
  const auto s = parse_world_ref("lag:4:99");
  EXPECT_EQ(s.kind, WorkloadKind::lag);
  EXPECT_EQ(s.scale, 4);
  EXPECT_EQ(s.seed, 99u);
  EXPECT_EQ(parse_world_ref(world_ref(s)).seed, 99u);
  EXPECT_EQ(parse_world_ref("farm").scale, 1);
  EXPECT_THROW(parse_world_ref("volcano:1:1"), ConfigError);
  EXPECT_THROW(parse_world_ref("tnt:x"), ConfigError);
}

TEST(WorldGen, ControlRunsNoRulesOverTenSeconds) {
  server::LoopConfig cfg;
  cfg.exec = kernels::Exec::serial;
  std::uint64_t rules = 0;
  const auto run = server::run_virtual(build_world(spec_of(WorkloadKind::control)), cfg, 10 * kNsPerSec,
                                       metrics::kDefaultTickPeriodNs, 0,
                                       [&](const metrics::TickRecord&, const world::WorldState& w) {
                                         rules = w.stats().rules_fired;
                                       });
  EXPECT_EQ(run.trace.ticks.size(), 200u);
  EXPECT_EQ(rules, 0u);
}

// Bots.

namespace {

Bot centred_bot() {
  Bot b;
  b.center_x = b.x = 100;
  b.center_z = b.z = 100;
  return b;
}

}  // namespace

TEST(Bot, StaysInsideArea) {
  Bot b = centred_bot();
  b.probe_every = 0;
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    bot_behavior_step(b, rng);
    ASSERT_TRUE(b.inside(b.x, b.z)) << "step " << i;
  }
}

TEST(Bot, EdgeMoveIsReflected) {
  Bot b = centred_bot();
  b.probe_every = 0;
  b.x = b.center_x + b.half_extent - 1;  // east edge
  // Find a seed whose first draw points east.
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    Bot t = b;
    Rng rng(seed);
    Rng peek(seed);
    if (uniform_below(peek, 4) != 0) continue;
    const auto a = bot_behavior_step(t, rng);
    EXPECT_EQ(a.dx, -1);
    EXPECT_TRUE(t.inside(t.x, t.z));
    return;
  }
  FAIL() << "no eastward draw found";
}

TEST(Bot, ProbeEveryFortyActions) {
  Bot b = centred_bot();
  Rng rng(1);
  int chats = 0;
  for (int i = 1; i <= 400; ++i) {
    const auto a = bot_behavior_step(b, rng);
    if (a.kind == server::ActionKind::chat) {
      ++chats;
      EXPECT_EQ(i % 40, 0);
    }
  }
  EXPECT_EQ(chats, 10);
}

// Directions away from the edges must be uniform. Pearson chi-square with 3
// degrees of freedom against the 99% critical value.
TEST(Bot, DirectionsUniformChiSquare) {
  Bot b = centred_bot();
  b.probe_every = 0;
  b.half_extent = 1 << 20;  // never reflects
  Rng rng(2024);
  std::array<double, 4> counts{};
  constexpr int kN = 40000;
  for (int i = 0; i < kN; ++i) {
    const auto a = bot_behavior_step(b, rng);
    const int d = a.dx == 1 ? 0 : a.dx == -1 ? 1 : a.dz == 1 ? 2 : 3;
    ++counts[static_cast<std::size_t>(d)];
  }
  double chi2 = 0;
  for (double c : counts) chi2 += (c - kN / 4.0) * (c - kN / 4.0) / (kN / 4.0);
  EXPECT_LT(chi2, 11.345);
}
