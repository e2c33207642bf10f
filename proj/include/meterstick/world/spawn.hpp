// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "meterstick/world/world_state.hpp"

namespace meterstick::world {

/// Solid below, air at, air above.
bool spawn_predicate(const WorldState& world, BlockPos p);

/// Samples up to `spawn_column_budget` columns around the players, seeded by
/// (world seed, tick), and returns at most `cap` distinct cells satisfying the
/// predicate within [spawn_min_distance, spawn_max_distance] of a player.
std::vector<BlockPos> compute_spawn_points(const WorldState& world, std::span<const BlockPos> players,
                                           std::size_t cap, std::uint64_t* columns_scanned = nullptr);

/// Tops up free-roaming npcs to the mob cap near the joined players.
std::size_t run_spawning(WorldState& world);

}  // namespace meterstick::world
