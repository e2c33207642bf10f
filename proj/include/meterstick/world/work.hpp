// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace meterstick::world {

/// Units of simulation work performed. The virtual-clock server turns these
/// into deterministic busy time; the wall-clock server only reports them.
struct WorkCounters {
  std::uint64_t actions = 0;
  std::uint64_t rule_evals = 0;
  std::uint64_t block_changes = 0;
  std::uint64_t light_updates = 0;
  std::uint64_t entity_updates = 0;
  std::uint64_t collision_checks = 0;
  std::uint64_t ray_steps = 0;
  std::uint64_t path_expansions = 0;
  std::uint64_t spawn_columns = 0;
  std::uint64_t updates_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t chunks_saved = 0;

  WorkCounters& operator+=(const WorkCounters& o) {
    actions += o.actions;
    rule_evals += o.rule_evals;
    block_changes += o.block_changes;
    light_updates += o.light_updates;
    entity_updates += o.entity_updates;
    collision_checks += o.collision_checks;
    ray_steps += o.ray_steps;
    path_expansions += o.path_expansions;
    spawn_columns += o.spawn_columns;
    updates_sent += o.updates_sent;
    bytes_sent += o.bytes_sent;
    chunks_saved += o.chunks_saved;
    return *this;
  }
  friend bool operator==(const WorkCounters&, const WorkCounters&) = default;
};

}  // namespace meterstick::world
