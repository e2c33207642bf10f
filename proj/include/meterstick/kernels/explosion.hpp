// SPDX-License-Identifier: Apache-2.0
// Blast impulse on entities: exposure is the fraction of sample points on the
// entity with an unobstructed ray to the blast center.
#pragma once

#include <cstdint>
#include <span>

#include "meterstick/kernels/exec.hpp"
#include "meterstick/world/world_state.hpp"

namespace meterstick::kernels {

struct BlastTotals {
  std::uint64_t affected = 0;
  std::uint64_t ray_steps = 0;
};

/// Fraction in [0, 1] of the entity's sample points that see `center`.
double exposure(const world::WorldState& w, const world::Vec3& center, const world::Vec3& pos,
                std::uint64_t& ray_steps);

/// Adds knockback to every entity within twice the blast radius.
BlastTotals apply_blast(std::span<world::Entity> entities, const world::WorldState& w, const world::Vec3& center,
                        Exec exec);

}  // namespace meterstick::kernels
