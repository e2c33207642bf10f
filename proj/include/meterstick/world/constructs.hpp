// SPDX-License-Identifier: Apache-2.0
// Scripted devices standing in for player-built machines. Each keeps its
// layout in two cell lists:
//
//   entity_farm  cells_a: spawn platform cells, cells_b[0]: flush source, cells_b[1]: collection hopper
//   stone_farm   cells_a: harvested stone row,  cells_b: hoppers under the row
//   kelp_farm    cells_a: plant bases,          cells_b: floor hoppers
//   item_sorter  cells_a: hopper chain, input first
//
// Farms act every farm_interval ticks (offset by their phase); kelp farms
// and sorters react to items and growth as they appear.
#pragma once

#include <cstdint>

#include "meterstick/world/world_state.hpp"

namespace meterstick::world {

struct ConstructReport {
  std::uint64_t spawned = 0;
  std::uint64_t harvested = 0;
  std::uint64_t transferred = 0;
  std::uint64_t sorted = 0;
};

/// Fires due timers and toggles clocks.
std::uint64_t step_devices(WorldState& world);

ConstructReport step_constructs(WorldState& world);

/// Layout builders. `ground` is the y of the solid surface the device sits on;
/// each flattens its own footprint. Return the construct index.
std::size_t build_entity_farm(WorldState& world, BlockPos origin, int ground, int tile, std::uint32_t phase);
std::size_t build_stone_farm(WorldState& world, BlockPos origin, int ground, int tile, std::uint32_t phase);
std::size_t build_kelp_farm(WorldState& world, BlockPos origin, int ground, int tile, std::uint32_t phase);
std::size_t build_item_sorter(WorldState& world, BlockPos origin, int ground, int tile);

/// Footprints (x by z) of the builders above.
inline constexpr int kEntityFarmSize = 9;
inline constexpr int kStoneFarmSize = 10;
inline constexpr int kKelpFarmSize = 8;
inline constexpr int kSorterLength = 8;

}  // namespace meterstick::world
