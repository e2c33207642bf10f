// SPDX-License-Identifier: Apache-2.0
// Pull-based terrain rules. A dequeued position is evaluated against, in
// order: support, sand gravity, water spread, kelp growth, signal, TNT
// ignition. Any cell a rule changes re-enqueues its face neighbors.
#pragma once

#include <cstdint>
#include <vector>

#include "meterstick/world/world_state.hpp"

namespace meterstick::world {

struct TerrainReport {
  std::uint64_t rules_fired = 0;
  std::uint64_t blocks_changed = 0;
  std::uint64_t fuses_started = 0;
  std::uint64_t evaluated = 0;
  /// Stopped early because the next position touches a reserved chunk.
  bool yielded = false;

  TerrainReport& operator+=(const TerrainReport& o);
  friend bool operator==(const TerrainReport&, const TerrainReport&) = default;
};

/// Runs due growth events, then evaluates up to `rule_budget` queued
/// positions, and commits. Throws meterstick::Error if the budget is zero.
TerrainReport step_terrain(WorldState& world, std::uint64_t rule_budget);

/// Growth events due at the current tick.
TerrainReport run_scheduled(WorldState& world, BlockWriter& out);

/// Rule loop without committing. With `reserved` set, stops before any
/// position whose 3x3x3 neighborhood overlaps a reserved chunk and puts it
/// back at the queue front.
TerrainReport run_rules(WorldState& world, std::uint64_t rule_budget, BlockWriter& out,
                        const std::vector<std::uint8_t>* reserved = nullptr);

/// Strength a wire would settle to from its neighbors.
int signal_from_neighbors(const WorldState& world, BlockPos p);

}  // namespace meterstick::world
