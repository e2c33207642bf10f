// SPDX-License-Identifier: Apache-2.0
// Per-entity integration: gravity, water, steering, collision against solid
// cells, fuses, hopper contact. Each entity reads the world and writes only
// itself, so entities can be stepped in any order or in parallel.
#pragma once

#include <cstdint>
#include <span>

#include "meterstick/kernels/exec.hpp"
#include "meterstick/world/world_state.hpp"

namespace meterstick::kernels {

struct MotionOutcome {
  bool moved = false;
  bool collided = false;
  bool despawn = false;
  bool detonate = false;
  bool absorb = false;
  world::BlockPos hopper;
};

struct MotionTotals {
  std::uint64_t updates = 0;
  std::uint64_t collision_checks = 0;
  std::uint64_t moved = 0;
  std::uint64_t collided = 0;
};

/// True when the entity stands exactly on top of a solid cell.
bool grounded(const world::WorldState& w, const world::Vec3& pos);

/// Advances one entity by one tick.
void step_motion(world::Entity& e, const world::WorldState& w, MotionOutcome& out,
                 std::uint64_t& collision_checks);

/// Steps every entity; `out` must have one slot per entity.
MotionTotals integrate_motion(std::span<world::Entity> entities, const world::WorldState& w,
                              std::span<MotionOutcome> out, Exec exec);

}  // namespace meterstick::kernels
