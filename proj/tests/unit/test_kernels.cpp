// SPDX-License-Identifier: Apache-2.0
// The serial implementations are the reference; the parallel ones must agree
// bit for bit.
#include <gtest/gtest.h>

#include <bit>

#include "meterstick/common/rng.hpp"
#include "meterstick/kernels/explosion.hpp"
#include "meterstick/kernels/motion.hpp"
#include "meterstick/kernels/pathing.hpp"
#include "meterstick/kernels/push.hpp"

using namespace meterstick::world;
namespace k = meterstick::kernels;

namespace {

WorldState rubble_world(std::uint64_t seed) {
  WorldState w({4, 4, 32}, seed);
  meterstick::Rng rng(seed);
  for (int z = 0; z < 64; ++z) {
    for (int x = 0; x < 64; ++x) {
      const int h = 1 + static_cast<int>(meterstick::uniform_below(rng, 3));
      for (int y = 0; y < h; ++y) w.set_block_raw({x, y, z}, {BlockKind::stone, 0});
      if (meterstick::uniform_below(rng, 10) == 0) w.set_block_raw({x, h, z}, {BlockKind::water, 3});
      if (meterstick::uniform_below(rng, 40) == 0) w.set_block_raw({x, h, z}, {BlockKind::hopper, 0});
    }
  }
  return w;
}

std::vector<Entity> crowd(std::uint64_t seed, std::size_t n) {
  meterstick::Rng rng(seed);
  std::vector<Entity> out;
  for (std::size_t i = 0; i < n; ++i) {
    Entity e;
    e.id = i + 1;
    e.kind = static_cast<EntityKind>(meterstick::uniform_below(rng, 3));
    // Dense clusters so push contacts occur.
    e.pos = {20 + 8 * meterstick::uniform_unit(rng), 3 + 6 * meterstick::uniform_unit(rng),
             20 + 8 * meterstick::uniform_unit(rng)};
    e.vel = {meterstick::uniform_unit(rng) - 0.5, meterstick::uniform_unit(rng) - 0.5, meterstick::uniform_unit(rng) - 0.5};
    e.payload = e.kind == EntityKind::tnt_primed ? 1 + static_cast<int>(meterstick::uniform_below(rng, 30)) : 2;
    out.push_back(e);
  }
  return out;
}

void expect_same(const std::vector<Entity>& a, const std::vector<Entity>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i].pos.x), std::bit_cast<std::uint64_t>(b[i].pos.x));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i].pos.y), std::bit_cast<std::uint64_t>(b[i].pos.y));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i].pos.z), std::bit_cast<std::uint64_t>(b[i].pos.z));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i].vel.x), std::bit_cast<std::uint64_t>(b[i].vel.x));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i].vel.y), std::bit_cast<std::uint64_t>(b[i].vel.y));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i].vel.z), std::bit_cast<std::uint64_t>(b[i].vel.z));
    EXPECT_EQ(a[i].payload, b[i].payload);
  }
}

}  // namespace

TEST(Kernels, MotionParallelMatchesSerial) {
  const auto w = rubble_world(1);
  auto a = crowd(2, 3000);
  auto b = a;
  std::vector<k::MotionOutcome> oa(a.size()), ob(b.size());
  for (int t = 0; t < 20; ++t) {
    const auto ta = k::integrate_motion(a, w, oa, k::Exec::serial);
    const auto tb = k::integrate_motion(b, w, ob, k::Exec::parallel);
    EXPECT_EQ(ta.collision_checks, tb.collision_checks);
    EXPECT_EQ(ta.moved, tb.moved);
    for (std::size_t i = 0; i < oa.size(); ++i) {
      EXPECT_EQ(oa[i].detonate, ob[i].detonate);
      EXPECT_EQ(oa[i].absorb, ob[i].absorb);
      EXPECT_EQ(oa[i].despawn, ob[i].despawn);
    }
  }
  expect_same(a, b);
}

TEST(Kernels, MotionStaysInsideWorld) {
  const auto w = rubble_world(3);
  auto a = crowd(4, 2000);
  for (auto& e : a) e.vel = {e.vel.x * 50, e.vel.y * 50, e.vel.z * 50};
  std::vector<k::MotionOutcome> out(a.size());
  for (int t = 0; t < 50; ++t) {
    k::integrate_motion(a, w, out, k::Exec::parallel);
    for (std::size_t i = 0; i < a.size(); ++i) {
      ASSERT_FALSE(out[i].despawn && a[i].kind != EntityKind::item);
      ASSERT_GE(a[i].pos.x, 0.0);
      ASSERT_LT(a[i].pos.x, 64.0);
      ASSERT_GE(a[i].pos.y, 0.0);
      ASSERT_FALSE(w.solid(cell_of(a[i].pos)));
    }
  }
}

TEST(Kernels, PushParallelMatchesSerial) {
  WorldParams p;
  auto a = crowd(5, 1500);
  auto b = a;
  const auto ta = k::apply_push(a, p, k::Exec::serial);
  const auto tb = k::apply_push(b, p, k::Exec::parallel);
  EXPECT_GT(ta.contacts, 0u);
  EXPECT_EQ(ta.contacts, tb.contacts);
  EXPECT_LT(tb.pairs_checked, ta.pairs_checked);
  expect_same(a, b);
}

TEST(Kernels, PushIsSymmetric) {
  WorldParams p;
  std::vector<Entity> two(2);
  two[0].id = 1;
  two[0].pos = {5.0, 1.0, 5.0};
  two[1].id = 2;
  two[1].pos = {5.3, 1.0, 5.0};
  k::apply_push(two, p, k::Exec::parallel);
  EXPECT_LT(two[0].vel.x, 0.0);
  EXPECT_DOUBLE_EQ(two[0].vel.x, -two[1].vel.x);
}

TEST(Kernels, BlastParallelMatchesSerial) {
  const auto w = rubble_world(6);
  auto a = crowd(7, 2000);
  auto b = a;
  const Vec3 center{24, 5, 24};
  const auto ta = k::apply_blast(a, w, center, k::Exec::serial);
  const auto tb = k::apply_blast(b, w, center, k::Exec::parallel);
  EXPECT_GT(ta.affected, 0u);
  EXPECT_EQ(ta.affected, tb.affected);
  EXPECT_EQ(ta.ray_steps, tb.ray_steps);
  expect_same(a, b);
}

TEST(Kernels, ExposureBlockedByWall) {
  WorldState w({1, 1, 16});
  std::uint64_t steps = 0;
  EXPECT_EQ(k::exposure(w, {8, 5, 8}, {11, 5, 8}, steps), 1.0);
  for (int y = 0; y < 16; ++y)
    for (int z = 0; z < 16; ++z) w.set_block_raw({9, y, z}, {BlockKind::stone, 0});
  EXPECT_EQ(k::exposure(w, {8, 5, 8}, {11, 5, 8}, steps), 0.0);
  EXPECT_GT(steps, 0u);
}

TEST(Kernels, PathsParallelMatchesSerial) {
  const auto w = rubble_world(8);
  meterstick::Rng rng(9);
  std::vector<k::PathRequest> req;
  for (int i = 0; i < 64; ++i) {
    auto pick = [&] {
      const int x = static_cast<int>(meterstick::uniform_below(rng, 64));
      const int z = static_cast<int>(meterstick::uniform_below(rng, 64));
      return BlockPos{x, w.column_top(x, z) + 1, z};
    };
    req.push_back({pick(), pick()});
  }
  std::vector<PathResult> ra(req.size()), rb(req.size());
  std::vector<std::uint8_t> ca(w.chunk_count()), cb(w.chunk_count());
  const auto ea = k::find_paths(w, req, ra, 4096, k::Exec::serial, &ca);
  const auto eb = k::find_paths(w, req, rb, 4096, k::Exec::parallel, &cb);
  EXPECT_EQ(ea, eb);
  EXPECT_EQ(ca, cb);
  for (std::size_t i = 0; i < req.size(); ++i) EXPECT_EQ(ra[i].path, rb[i].path);
}
