// SPDX-License-Identifier: Apache-2.0
// Headless virtual-clock runs: the game loop without sockets or pacing. The
// trace is identical to what a virtual-clock SimServer records when one idle
// probe player joins before the first tick.
#pragma once

#include <cstdint>
#include <functional>

#include "meterstick/metrics/tick.hpp"
#include "meterstick/server/game_loop.hpp"

namespace meterstick::server {

struct OfflineRun {
  metrics::TickTrace trace;
  std::uint64_t detonations = 0;
  /// Index of the first tick with a detonation, or -1.
  std::int64_t first_detonation_tick = -1;
  std::uint64_t final_digest = 0;
};

/// Runs until the virtual clock reaches `window_ns` (or `max_ticks`, if
/// nonzero). `on_tick` sees every record as it is produced. `until`, if set,
/// is asked after every tick and ends the run early when it returns true.
OfflineRun run_virtual(world::WorldState world, const LoopConfig& config, std::int64_t window_ns,
                       std::int64_t tick_ns = metrics::kDefaultTickPeriodNs, std::uint64_t max_ticks = 0,
                       const std::function<void(const metrics::TickRecord&, const world::WorldState&)>& on_tick = {},
                       const std::function<bool(const world::WorldState&)>& until = {});

}  // namespace meterstick::server
