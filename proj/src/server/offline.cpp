// SPDX-License-Identifier: Apache-2.0
#include "meterstick/server/offline.hpp"

#include <algorithm>

#include "meterstick/common/error.hpp"

namespace meterstick::server {

OfflineRun run_virtual(world::WorldState world, const LoopConfig& config, std::int64_t window_ns,
                       std::int64_t tick_ns, std::uint64_t max_ticks,
                       const std::function<void(const metrics::TickRecord&, const world::WorldState&)>& on_tick,
                       const std::function<bool(const world::WorldState&)>& until) {
  if (tick_ns <= 0 || window_ns < tick_ns) throw ConfigError("window must span at least one tick");
  GameLoop loop(std::move(world), config);
  PlayerAction join;
  join.kind = ActionKind::join;
  join.name = "probe";
  std::vector<Inbound> inbound{{Inbound::Type::open, 1, {}}, {Inbound::Type::line, 1, encode_action(join)}};

  OfflineRun run;
  run.trace.tick_period_ns = tick_ns;
  std::int64_t now = 0;
  for (std::uint64_t i = 0; now < window_ns && (max_ticks == 0 || i < max_ticks); ++i) {
    const TickResult r = loop.step(std::move(inbound));
    inbound.clear();
    const Composed c = compose_tick(r, config.cost, true, 0);
    const metrics::TickRecord rec{i, now, c.busy_ns, c.shares};
    run.trace.ticks.push_back(rec);
    if (run.first_detonation_tick < 0 && loop.world().stats().detonations > 0) {
      run.first_detonation_tick = static_cast<std::int64_t>(i);
    }
    if (on_tick) on_tick(rec, loop.world());
    now += std::max(tick_ns, c.busy_ns);
    if (until && until(loop.world())) break;
  }
  // The window ends at `window_ns` even if the last tick ran past it.
  run.trace.wall_duration_ns = std::min(now, window_ns);
  run.detonations = loop.world().stats().detonations;
  run.final_digest = loop.world().digest();
  return run;
}

}  // namespace meterstick::server
