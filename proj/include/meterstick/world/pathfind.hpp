// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "meterstick/world/world_state.hpp"

namespace meterstick::world {

/// Air with a solid block below.
bool walkable(const WorldState& world, BlockPos p);

struct PathResult {
  /// Cells after `from` up to and including `to`; its size is the path length.
  std::optional<std::vector<BlockPos>> path;
  std::uint64_t expansions = 0;
};

/// A* over walkable cells: four horizontal moves, each level, one up or one
/// down. Optionally marks (by chunk index) every chunk whose cells were read.
PathResult find_path(const WorldState& world, BlockPos from, BlockPos to, int max_expansions,
                     std::vector<std::uint8_t>* read_chunks = nullptr);

inline std::optional<std::vector<BlockPos>> pathfind(const WorldState& world, BlockPos from, BlockPos to,
                                                     int max_expansions) {
  return find_path(world, from, to, max_expansions).path;
}

}  // namespace meterstick::world
