// SPDX-License-Identifier: Apache-2.0
// The game loop without networking or scheduling: one call runs every phase
// of a tick (drain, player handling, terrain, entities, spawning,
// persistence, update dissemination) and reports what each phase cost.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "meterstick/kernels/exec.hpp"
#include "meterstick/metrics/tick.hpp"
#include "meterstick/server/cost_model.hpp"
#include "meterstick/server/protocol.hpp"
#include "meterstick/world/entities.hpp"
#include "meterstick/world/terrain.hpp"
#include "meterstick/world/world_state.hpp"

namespace meterstick::server {

using SessionId = std::uint64_t;

enum class Reject : std::uint8_t {
  none,
  malformed,
  not_joined,
  already_joined,
  obstructed,
  occupied,
  nothing_to_break,
  out_of_bounds,
};
inline constexpr std::size_t kRejectCount = 8;

std::string_view reject_name(Reject r);

struct ActionResult {
  bool applied = false;
  Reject reason = Reject::none;
  /// Neighbor positions queued by an accepted terraform.
  int enqueued = 0;
};

struct Inbound {
  enum class Type : std::uint8_t { open, line, close };
  Type type = Type::line;
  SessionId session = 0;
  std::string line;
};

struct Outbound {
  SessionId session = 0;
  std::string line;  // newline terminated
};

struct LoopConfig {
  std::uint64_t rule_budget = 262144;
  bool concurrent_phases = false;
  kernels::Exec exec = kernels::Exec::parallel;
  int persistence_interval = 100;
  double interest_radius = 64.0;
  /// entity_update lines per session per tick.
  std::size_t entity_update_cap = 256;
  CostModel cost;
};

using ComponentNs = std::array<std::int64_t, metrics::kComponentCount>;

struct TickResult {
  std::vector<Outbound> outbound;
  /// Measured and modeled duration of each component. Networking covers
  /// building the outbound lines; the transport flush is timed by the caller.
  ComponentNs real_ns{};
  ComponentNs modeled_ns{};
  /// Concurrent mode: the part where terrain and entities ran side by side is
  /// kept apart from the serial parts above. Index 0 is terrain, 1 entities.
  bool concurrent = false;
  std::int64_t section_real_ns = 0;
  std::array<std::int64_t, 2> section_part_real_ns{};
  std::array<std::int64_t, 2> section_part_modeled_ns{};
  world::TerrainReport terrain;
  world::EntityReport entities;
};

struct LoopStats {
  std::uint64_t actions_applied = 0;
  std::array<std::uint64_t, kRejectCount> rejected{};
  std::uint64_t chat_events = 0;
  std::uint64_t block_updates = 0;
  std::uint64_t entity_updates = 0;
  std::uint64_t bytes_out = 0;
};

struct Session {
  std::string name;
  bool joined = false;
};

class GameLoop {
 public:
  GameLoop(world::WorldState world, LoopConfig config);

  world::WorldState& world() { return world_; }
  const world::WorldState& world() const { return world_; }
  const LoopConfig& config() const { return config_; }
  const LoopStats& stats() const { return stats_; }
  const std::map<SessionId, Session>& sessions() const { return sessions_; }
  world::BlockPos spawn() const { return spawn_; }

  /// One tick. `inbound` is the drained network queue, in arrival order.
  TickResult step(std::vector<Inbound> inbound);

  /// Validates and applies one action; replies go to `out`.
  ActionResult handle_player_action(SessionId session, const PlayerAction& action, std::vector<Outbound>& out);

 private:
  void handle_inbound(Inbound& in, std::vector<Outbound>& out);
  void run_serial_phases(TickResult& r);
  void run_concurrent_phases(TickResult& r);
  void persist();
  void disseminate(std::vector<Outbound>& out);
  void emit(std::vector<Outbound>& out, SessionId to, const StateUpdate& u, bool charged);

  world::WorldState world_;
  LoopConfig config_;
  world::BlockPos spawn_;
  std::map<SessionId, Session> sessions_;
  std::size_t change_cursor_ = 0;
  std::vector<std::pair<world::EntityId, world::Vec3>> last_pos_;
  LoopStats stats_;
  std::vector<std::uint8_t> save_buffer_;
};

/// Tick duration and shares from a TickResult.
///
/// Wall clock: each component takes max(measured, modeled); `measured_busy_ns`
/// is the real duration (including padding) and any excess over the
/// component sum is attributed to `other`. Virtual clock: the modeled
/// durations are the tick. `extra_other_ns` (e.g. an injected stall) is added
/// to `other` in both cases.
struct Composed {
  std::int64_t busy_ns = 0;
  ComponentNs component_ns{};
  metrics::ComponentShares shares{};
};
Composed compose_tick(const TickResult& r, const CostModel& cost, bool virtual_clock, std::int64_t extra_other_ns,
                      std::int64_t measured_busy_ns = 0);

}  // namespace meterstick::server
