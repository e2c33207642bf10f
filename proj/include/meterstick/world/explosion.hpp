// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "meterstick/kernels/exec.hpp"
#include "meterstick/world/world_state.hpp"

namespace meterstick::world {

struct DetonationReport {
  std::uint64_t blocks_destroyed = 0;
  std::uint64_t tnt_chained = 0;
  std::uint64_t entities_affected = 0;
};

/// Fuse of a TNT block primed by a blast: uniform in [chain_fuse_min,
/// chain_fuse_max], derived from (seed, position, tick).
int chain_fuse(const WorldState& world, BlockPos p);

/// Blast at `center`: clears non-resistant blocks within the blast radius,
/// primes TNT blocks, throws debris items outward and knocks back entities.
DetonationReport blast(WorldState& world, BlockWriter& out, const Vec3& center, std::span<Entity> entities,
                       kernels::Exec exec);

/// Detonates the TNT block or primed TNT entity at `pos` and commits.
/// Throws meterstick::Error if there is no TNT there.
DetonationReport detonate(WorldState& world, BlockPos pos, kernels::Exec exec = kernels::Exec::parallel);

}  // namespace meterstick::world
