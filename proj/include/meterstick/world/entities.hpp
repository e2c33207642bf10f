// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "meterstick/kernels/exec.hpp"
#include "meterstick/world/pathfind.hpp"
#include "meterstick/world/world_state.hpp"

namespace meterstick::world {

struct EntityReport {
  std::uint64_t moved = 0;
  std::uint64_t collided = 0;
  std::uint64_t despawned = 0;
  std::uint64_t pathfinds = 0;
  std::uint64_t detonations = 0;
  std::uint64_t absorbed = 0;

  EntityReport& operator+=(const EntityReport& o);
  friend bool operator==(const EntityReport&, const EntityReport&) = default;
};

/// Path searches for npcs whose path is absent or stale. Computed against a
/// read-only world so it can run before the phases split.
struct PathPlan {
  std::vector<std::size_t> entity_index;
  std::vector<PathResult> results;
  std::vector<std::uint8_t> read_chunks;
  std::uint64_t expansions = 0;
};

/// A path is stale when any block within `path_vicinity` (Chebyshev) of the
/// npc changed since the previous entity step.
PathPlan plan_paths(const WorldState& world, kernels::Exec exec, bool track_chunks = false);

/// Installs planned paths and advances the change cursor.
void apply_paths(WorldState& world, PathPlan& plan, EntityReport& report, WorkCounters& work);

/// Motion, separation, absorption and detonations, in entity id order for
/// everything that touches shared state. Does not commit.
EntityReport run_entity_phase(WorldState& world, BlockWriter& out, kernels::Exec exec);

/// Chunks the entity phase may read or write this tick: every chunk holding
/// an entity plus a one-chunk margin, and the chunks path searches read.
std::vector<std::uint8_t> entity_region(const WorldState& world, const PathPlan& plan);

/// Full entity step: plan, apply, run, commit.
EntityReport step_entities(WorldState& world, kernels::Exec exec = kernels::Exec::parallel);

}  // namespace meterstick::world
