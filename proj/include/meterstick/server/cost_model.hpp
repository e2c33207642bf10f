// SPDX-License-Identifier: Apache-2.0
// Per-operation costs of a managed-runtime game server. The simulator's own
// kernels are far cheaper than the servers it stands in for, so every phase
// is charged at least the modeled cost of the work it performed: the wall
// clock server pads the phase to that cost, the virtual clock server uses it
// as the phase duration outright.
//
// Chat and ping traffic is deliberately free: probes must not change the
// modeled load of the system they measure.
#pragma once

#include <cstdint>
#include <string>

#include "meterstick/world/work.hpp"

namespace meterstick::server {

struct CostModel {
  bool enabled = true;
  std::int64_t tick_overhead_ns = 300'000;
  std::int64_t action_ns = 20'000;
  std::int64_t rule_eval_ns = 2'000;
  std::int64_t block_change_ns = 4'000;
  std::int64_t light_update_ns = 2'000;
  std::int64_t entity_update_ns = 6'000;
  std::int64_t collision_check_ns = 150;
  std::int64_t ray_step_ns = 40;
  std::int64_t path_expansion_ns = 1'000;
  std::int64_t spawn_column_ns = 3'000;
  std::int64_t update_sent_ns = 1'500;
  std::int64_t chunk_saved_ns = 200'000;

  /// Modeled duration of the work; 0 when disabled.
  std::int64_t cost_ns(const world::WorkCounters& w) const;

  /// "off", "default", or a comma list of field=value overrides on top of the defaults.
  static CostModel parse(const std::string& text);
};

}  // namespace meterstick::server
