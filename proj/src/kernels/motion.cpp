// SPDX-License-Identifier: Apache-2.0
#include "meterstick/kernels/motion.hpp"

#include <algorithm>
#include <cmath>

namespace meterstick::kernels {

using world::BlockKind;
using world::BlockPos;
using world::Entity;
using world::EntityKind;
using world::Vec3;
using world::WorldState;

namespace {

constexpr double kEdge = 1e-7;
constexpr double kMaxSubstep = 0.5;
constexpr double kRestSpeed = 1e-4;

double& axis(Vec3& v, int a) { return a == 0 ? v.x : (a == 1 ? v.y : v.z); }

/// The world border and the space below y = 0 act as solid walls.
bool blocked(const WorldState& w, BlockPos c) {
  if (c.y < 0 || c.x < 0 || c.z < 0 || c.x >= w.dims().size_x() || c.z >= w.dims().size_z()) return true;
  return w.solid(c);
}

/// Moves the point along one axis, stopping at the face of a solid cell.
bool move_axis(const WorldState& w, Vec3& pos, Vec3& vel, int a, double d, std::uint64_t& checks) {
  if (d == 0.0) return false;
  Vec3 next = pos;
  axis(next, a) += d;
  ++checks;
  if (!blocked(w, world::cell_of(next))) {
    pos = next;
    return false;
  }
  const double c = std::floor(axis(next, a));
  axis(pos, a) = d < 0 ? c + 1.0 : c - kEdge;
  axis(vel, a) = 0.0;
  return true;
}

/// Unit-ish push along falling water levels.
Vec3 water_flow(const WorldState& w, BlockPos cell, world::Block here) {
  if (here.kind != BlockKind::water) return {};
  Vec3 flow;
  for (const auto& off : world::kHorizontalOffsets) {
    const auto n = w.block(cell + off);
    if (n.kind == BlockKind::water && n.aux < here.aux) {
      flow.x += off.x;
      flow.z += off.z;
    }
  }
  const double len = std::hypot(flow.x, flow.z);
  return len > 0 ? Vec3{flow.x / len, 0, flow.z / len} : Vec3{};
}

void steer(Entity& e, bool on_ground, double speed, double jump) {
  if (!e.path || e.path_next >= e.path->size()) {
    e.vel.x = 0;
    e.vel.z = 0;
    return;
  }
  const BlockPos wp = (*e.path)[e.path_next];
  const double dx = wp.x + 0.5 - e.pos.x;
  const double dz = wp.z + 0.5 - e.pos.z;
  const double dist = std::hypot(dx, dz);
  if (dist < 0.15 && static_cast<int>(std::floor(e.pos.y)) == wp.y) {
    ++e.path_next;
    e.vel.x = 0;
    e.vel.z = 0;
    return;
  }
  if (dist > 1e-9) {
    const double s = std::min(speed, dist);
    e.vel.x = dx / dist * s;
    e.vel.z = dz / dist * s;
  }
  if (on_ground && wp.y > static_cast<int>(std::floor(e.pos.y))) e.vel.y = jump;
}

}  // namespace

bool grounded(const WorldState& w, const Vec3& pos) {
  const double fy = std::floor(pos.y);
  if (pos.y - fy > 1e-9) return false;
  return w.solid({static_cast<int>(std::floor(pos.x)), static_cast<int>(fy) - 1, static_cast<int>(std::floor(pos.z))});
}

void step_motion(Entity& e, const WorldState& w, MotionOutcome& out, std::uint64_t& checks) {
  const auto& p = w.params();
  out = MotionOutcome{};
  ++e.age;
  if (e.kind == EntityKind::item && e.age > static_cast<std::uint32_t>(p.item_lifetime)) {
    out.despawn = true;
    return;
  }
  const Vec3 start = e.pos;
  const BlockPos cell = world::cell_of(e.pos);
  const auto here = w.block(cell);

  // Pushed out of a cell that became solid under it.
  if (world::is_solid(here.kind)) {
    e.pos.y = std::floor(e.pos.y) + 1.0;
    e.vel.y = 0;
  }
  const bool on_ground = grounded(w, e.pos);
  if (e.kind == EntityKind::npc) steer(e, on_ground, p.npc_speed, p.jump_speed);

  if (world::is_liquid(here.kind)) {
    e.vel.y -= p.water_gravity;
    e.vel = e.vel * p.water_drag + water_flow(w, cell, here) * p.water_current;
  } else if (!on_ground) {
    e.vel.y = std::max(e.vel.y - p.gravity, -p.max_fall_speed);
  } else {
    if (e.vel.y < 0) e.vel.y = 0;
    if (e.kind != EntityKind::npc) {
      e.vel.x *= p.ground_friction;
      e.vel.z *= p.ground_friction;
      if (std::abs(e.vel.x) < kRestSpeed) e.vel.x = 0;
      if (std::abs(e.vel.z) < kRestSpeed) e.vel.z = 0;
    }
  }
  e.vel.x = std::clamp(e.vel.x, -p.max_speed, p.max_speed);
  e.vel.y = std::clamp(e.vel.y, -p.max_speed, p.max_speed);
  e.vel.z = std::clamp(e.vel.z, -p.max_speed, p.max_speed);

  const double largest = std::max({std::abs(e.vel.x), std::abs(e.vel.y), std::abs(e.vel.z)});
  const int steps = std::max(1, static_cast<int>(std::ceil(largest / kMaxSubstep)));
  const Vec3 d = e.vel * (1.0 / steps);
  for (int s = 0; s < steps; ++s) {
    // Vertical first so a falling entity lands before sliding.
    out.collided |= move_axis(w, e.pos, e.vel, 1, d.y, checks);
    out.collided |= move_axis(w, e.pos, e.vel, 0, d.x, checks);
    out.collided |= move_axis(w, e.pos, e.vel, 2, d.z, checks);
  }

  const auto& dims = w.dims();
  if (e.pos.y < 0) {
    out.despawn = true;
    return;
  }
  if (e.pos.y >= dims.height) {
    e.pos.y = dims.height - kEdge;
    e.vel.y = 0;
  }
  if (e.pos.x < 0 || e.pos.x >= dims.size_x()) {
    e.pos.x = std::clamp(e.pos.x, 0.0, dims.size_x() - kEdge);
    e.vel.x = 0;
    out.collided = true;
  }
  if (e.pos.z < 0 || e.pos.z >= dims.size_z()) {
    e.pos.z = std::clamp(e.pos.z, 0.0, dims.size_z() - kEdge);
    e.vel.z = 0;
    out.collided = true;
  }

  if (e.kind == EntityKind::tnt_primed) {
    if (e.payload > 0) --e.payload;
    out.detonate = e.payload <= 0;
  } else if (e.kind == EntityKind::item && grounded(w, e.pos)) {
    const BlockPos below = world::cell_of(e.pos).below();
    if (w.block(below).kind == BlockKind::hopper) {
      out.absorb = true;
      out.hopper = below;
    }
  }
  out.moved = !(e.pos == start);
}

MotionTotals integrate_motion(std::span<Entity> entities, const WorldState& w, std::span<MotionOutcome> out,
                              Exec exec) {
  MotionTotals t;
  const auto n = static_cast<std::int64_t>(entities.size());
  std::uint64_t checks = 0;
  std::uint64_t moved = 0;
  std::uint64_t collided = 0;
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) {
      step_motion(entities[i], w, out[i], checks);
      moved += out[i].moved;
      collided += out[i].collided;
    }
  } else {
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : checks, moved, collided)
    for (std::int64_t i = 0; i < n; ++i) {
      step_motion(entities[i], w, out[i], checks);
      moved += out[i].moved;
      collided += out[i].collided;
    }
  }
  t.updates = static_cast<std::uint64_t>(n);
  t.collision_checks = checks;
  t.moved = moved;
  t.collided = collided;
  return t;
}

}  // namespace meterstick::kernels
