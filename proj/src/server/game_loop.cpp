// SPDX-License-Identifier: Apache-2.0
#include "meterstick/server/game_loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <thread>
#include <unordered_set>

#include "meterstick/common/digest.hpp"
#include "meterstick/common/error.hpp"
#include "meterstick/common/time.hpp"
#include "meterstick/world/constructs.hpp"
#include "meterstick/world/spawn.hpp"
#include "meterstick/workloads/worldgen.hpp"

namespace meterstick::server {

using metrics::ComponentKind;
using world::Block;
using world::BlockKind;
using world::BlockPos;

namespace {

constexpr std::array<std::string_view, kRejectCount> kRejectNames = {
    "none", "malformed", "not_joined", "already_joined", "obstructed", "occupied", "nothing_to_break", "out_of_bounds",
};

constexpr std::size_t idx(ComponentKind k) { return static_cast<std::size_t>(k); }

BlockPos default_spawn(const world::WorldState& w) {
  if (w.dims().size_x() >= workloads::kTileSize / 2 && w.dims().size_z() >= workloads::kTileSize / 2) {
    return workloads::world_spawn(w);
  }
  const int x = w.dims().size_x() / 2;
  const int z = w.dims().size_z() / 2;
  return {x, w.column_top(x, z) + 1, z};
}

double distance(const world::Vec3& a, const world::Vec3& b) { return (a - b).length(); }

/// Work done between two readings of the world's cumulative counters.
world::WorkCounters delta(const world::WorkCounters& after, const world::WorkCounters& before) {
  world::WorkCounters d;
  d.actions = after.actions - before.actions;
  d.rule_evals = after.rule_evals - before.rule_evals;
  d.block_changes = after.block_changes - before.block_changes;
  d.light_updates = after.light_updates - before.light_updates;
  d.entity_updates = after.entity_updates - before.entity_updates;
  d.collision_checks = after.collision_checks - before.collision_checks;
  d.ray_steps = after.ray_steps - before.ray_steps;
  d.path_expansions = after.path_expansions - before.path_expansions;
  d.spawn_columns = after.spawn_columns - before.spawn_columns;
  d.updates_sent = after.updates_sent - before.updates_sent;
  d.bytes_sent = after.bytes_sent - before.bytes_sent;
  d.chunks_saved = after.chunks_saved - before.chunks_saved;
  return d;
}

/// Times a phase and charges the work it did to one component.
class PhaseMeter {
 public:
  PhaseMeter(world::WorldState& w, const CostModel& cost, TickResult& r, ComponentKind k)
      : w_(w), cost_(cost), r_(r), k_(k), work_(w.work()), start_(monotonic_ns()) {}
  ~PhaseMeter() {
    r_.real_ns[idx(k_)] += monotonic_ns() - start_;
    r_.modeled_ns[idx(k_)] += cost_.cost_ns(delta(w_.work(), work_));
  }

 private:
  world::WorldState& w_;
  const CostModel& cost_;
  TickResult& r_;
  ComponentKind k_;
  world::WorkCounters work_;
  std::int64_t start_;
};

}  // namespace

std::string_view reject_name(Reject r) { return kRejectNames[static_cast<std::size_t>(r)]; }

GameLoop::GameLoop(world::WorldState world, LoopConfig config)
    : world_(std::move(world)), config_(config), spawn_(default_spawn(world_)) {
  if (config_.rule_budget == 0) throw ConfigError("rule budget must be positive");
  change_cursor_ = world_.change_log().size();
}

TickResult GameLoop::step(std::vector<Inbound> inbound) {
  TickResult r;
  {
    PhaseMeter m(world_, config_.cost, r, ComponentKind::player_handling);
    for (auto& in : inbound) handle_inbound(in, r.outbound);
  }
  if (config_.concurrent_phases) {
    run_concurrent_phases(r);
  } else {
    run_serial_phases(r);
  }
  {
    PhaseMeter m(world_, config_.cost, r, ComponentKind::entities);
    const auto interval = static_cast<std::uint64_t>(std::max(1, world_.params().spawn_interval));
    if (world_.tick_counter() % interval == 0) world::run_spawning(world_);
  }
  if (config_.persistence_interval > 0 &&
      world_.tick_counter() % static_cast<std::uint64_t>(config_.persistence_interval) == 0) {
    PhaseMeter m(world_, config_.cost, r, ComponentKind::persistence);
    persist();
  }
  {
    PhaseMeter m(world_, config_.cost, r, ComponentKind::networking);
    disseminate(r.outbound);
  }
  r.modeled_ns[idx(ComponentKind::other)] += config_.cost.enabled ? config_.cost.tick_overhead_ns : 0;
  world_.advance_tick();
  return r;
}

void GameLoop::run_serial_phases(TickResult& r) {
  {
    PhaseMeter m(world_, config_.cost, r, ComponentKind::terrain_rules);
    world::step_devices(world_);
    world::step_constructs(world_);
    r.terrain = world::step_terrain(world_, config_.rule_budget);
  }
  {
    PhaseMeter m(world_, config_.cost, r, ComponentKind::entities);
    r.entities = world::step_entities(world_, config_.exec);
  }
}

void GameLoop::run_concurrent_phases(TickResult& r) {
  using world::BlockWriter;
  using world::EnqueueMode;
  using world::PhaseSink;
  const auto exec = config_.exec;
  world::PathPlan plan;
  PhaseSink esink;
  {
    PhaseMeter m(world_, config_.cost, r, ComponentKind::terrain_rules);
    world::step_devices(world_);
    world::step_constructs(world_);
    PhaseSink sink;
    BlockWriter out(world_, sink, EnqueueMode::direct);
    r.terrain = world::run_scheduled(world_, out);
    world_.commit(sink);
  }
  {
    PhaseMeter m(world_, config_.cost, r, ComponentKind::entities);
    plan = world::plan_paths(world_, exec, true);
    world::apply_paths(world_, plan, r.entities, esink.work);
  }
  const auto reserved = world::entity_region(world_, plan);

  // Terrain on its own thread over unreserved chunks; entities here. Neither
  // touches the other's chunks, and both only write through their sinks.
  PhaseSink tsink;
  world::TerrainReport tr;
  std::int64_t terrain_ns = 0;
  const std::int64_t section_start = monotonic_ns();
  std::thread terrain([&] {
    const std::int64_t t0 = monotonic_ns();
    BlockWriter out(world_, tsink, EnqueueMode::direct);
    tr = world::run_rules(world_, config_.rule_budget, out, &reserved);
    terrain_ns = monotonic_ns() - t0;
  });
  std::int64_t entity_ns = 0;
  world::EntityReport er;
  try {
    const std::int64_t t0 = monotonic_ns();
    BlockWriter out(world_, esink, EnqueueMode::deferred);
    er = world::run_entity_phase(world_, out, exec);
    entity_ns = monotonic_ns() - t0;
  } catch (...) {
    terrain.join();
    throw;
  }
  terrain.join();
  r.concurrent = true;
  r.section_real_ns = monotonic_ns() - section_start;
  r.section_part_real_ns = {terrain_ns, entity_ns};

  // Commit in the order the serial loop would: terrain (including the part
  // that yielded to the entity region), then entities.
  tsink.stats.rules_fired += tr.rules_fired;
  tsink.stats.fuses_started += tr.fuses_started;
  r.section_part_modeled_ns[0] = config_.cost.cost_ns(tsink.work);
  world_.commit(tsink);
  if (tr.yielded && tr.evaluated < config_.rule_budget) {
    PhaseMeter m(world_, config_.cost, r, ComponentKind::terrain_rules);
    PhaseSink rest;
    BlockWriter out(world_, rest, EnqueueMode::direct);
    const auto more = world::run_rules(world_, config_.rule_budget - tr.evaluated, out);
    rest.stats.rules_fired += more.rules_fired;
    rest.stats.fuses_started += more.fuses_started;
    tr += more;
    world_.commit(rest);
  }
  r.terrain += tr;
  r.section_part_modeled_ns[1] = config_.cost.cost_ns(esink.work);
  world_.commit(esink);
  r.entities += er;
}

void GameLoop::persist() {
  // Autosave stand-in: serialize every dirty chunk into a scratch buffer.
  auto& dirty = world_.dirty_chunks();
  for (std::size_t i = 0; i < dirty.size(); ++i) {
    if (!dirty[i]) continue;
    const auto cells = world_.chunk(i).cells();
    save_buffer_.resize(cells.size() * 2);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      save_buffer_[2 * c] = static_cast<std::uint8_t>(cells[c].kind);
      save_buffer_[2 * c + 1] = cells[c].aux;
    }
    dirty[i] = 0;
    ++world_.work().chunks_saved;
  }
}

void GameLoop::emit(std::vector<Outbound>& out, SessionId to, const StateUpdate& u, bool charged) {
  std::string line = encode_update(u);
  line.push_back('\n');
  stats_.bytes_out += line.size();
  world_.work().bytes_sent += line.size();
  if (charged) ++world_.work().updates_sent;
  out.push_back({to, std::move(line)});
}

void GameLoop::disseminate(std::vector<Outbound>& out) {
  const auto tick = world_.tick_counter();
  std::vector<std::pair<SessionId, world::Vec3>> viewers;
  for (const auto& [id, s] : sessions_) {
    if (!s.joined) continue;
    const auto it = world_.players().find(id);
    if (it != world_.players().end()) viewers.emplace_back(id, world::center_of(it->second.pos));
  }

  // Block changes since the previous tick, once per cell, in first-change order.
  const auto& log = world_.change_log();
  std::vector<BlockPos> changed;
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = change_cursor_; i < log.size(); ++i) {
    if (seen.insert(world::pack(log[i])).second) changed.push_back(log[i]);
  }
  change_cursor_ = log.size();
  const double radius = config_.interest_radius;
  for (const auto& p : changed) {
    const auto c = world::center_of(p);
    for (const auto& [id, eye] : viewers) {
      if (distance(c, eye) > radius) continue;
      StateUpdate u;
      u.kind = UpdateKind::block_update;
      u.tick = tick;
      u.pos = p;
      u.block = world_.block(p);
      emit(out, id, u, true);
      ++stats_.block_updates;
    }
  }

  // Entities that moved or appeared, capped per viewer, rotating the start
  // so every entity is eventually sent under the cap.
  const auto& ents = world_.entities();
  std::vector<std::size_t> moved;
  std::size_t j = 0;
  for (std::size_t i = 0; i < ents.size(); ++i) {
    while (j < last_pos_.size() && last_pos_[j].first < ents[i].id) ++j;
    const bool known = j < last_pos_.size() && last_pos_[j].first == ents[i].id;
    if (!known || !(last_pos_[j].second == ents[i].pos)) moved.push_back(i);
  }
  last_pos_.clear();
  last_pos_.reserve(ents.size());
  for (const auto& e : ents) last_pos_.emplace_back(e.id, e.pos);
  if (moved.empty() || config_.entity_update_cap == 0) return;
  for (const auto& [id, eye] : viewers) {
    std::size_t sent = 0;
    const std::size_t start = static_cast<std::size_t>(tick * 7919) % moved.size();
    for (std::size_t k = 0; k < moved.size() && sent < config_.entity_update_cap; ++k) {
      const auto& e = ents[moved[(start + k) % moved.size()]];
      if (distance(e.pos, eye) > radius) continue;
      StateUpdate u;
      u.kind = UpdateKind::entity_update;
      u.tick = tick;
      u.entity = e.id;
      u.epos = e.pos;
      u.evel = e.vel;
      emit(out, id, u, true);
      ++stats_.entity_updates;
      ++sent;
    }
  }
}

void GameLoop::handle_inbound(Inbound& in, std::vector<Outbound>& out) {
  switch (in.type) {
    case Inbound::Type::open:
      sessions_[in.session] = Session{};
      return;
    case Inbound::Type::close:
      sessions_.erase(in.session);
      world_.remove_player(in.session);
      return;
    case Inbound::Type::line:
      break;
  }
  PlayerAction action;
  try {
    action = decode_action(in.line);
  } catch (const ProtocolError&) {
    ++stats_.rejected[static_cast<std::size_t>(Reject::malformed)];
    return;
  }
  handle_player_action(in.session, action, out);
}

ActionResult GameLoop::handle_player_action(SessionId session, const PlayerAction& a, std::vector<Outbound>& out) {
  auto reject = [&](Reject why) {
    ++stats_.rejected[static_cast<std::size_t>(why)];
    return ActionResult{false, why, 0};
  };
  auto accept = [&](int enqueued = 0) {
    ++stats_.actions_applied;
    return ActionResult{true, Reject::none, enqueued};
  };
  auto sit = sessions_.find(session);
  if (sit == sessions_.end()) sit = sessions_.emplace(session, Session{}).first;
  Session& s = sit->second;
  const auto tick = world_.tick_counter();

  if (a.kind == ActionKind::join) {
    if (s.joined) return reject(Reject::already_joined);
    s.joined = true;
    s.name = a.name;
    world_.add_player(session, a.name, spawn_);
    ++world_.work().actions;
    StateUpdate u;
    u.kind = UpdateKind::join_ack;
    u.tick = tick;
    u.session = session;
    u.pos = spawn_;
    emit(out, session, u, false);
    return accept();
  }
  if (!s.joined) return reject(Reject::not_joined);
  auto& player = world_.players().at(session);

  switch (a.kind) {
    case ActionKind::join:
      break;
    case ActionKind::move: {
      BlockPos to{player.pos.x + a.dx, player.pos.y, player.pos.z + a.dz};
      if (!world_.in_bounds(to)) return reject(Reject::out_of_bounds);
      if (world_.solid(to) || world_.solid(to.above())) {
        // One-cell step up if there is headroom.
        const BlockPos up = to.above();
        if (world_.solid(up) || world_.solid(up.above()) || world_.solid(player.pos.above().above())) {
          return reject(Reject::obstructed);
        }
        to = up;
      } else {
        while (to.y > 1 && !world_.solid(to.below())) to = to.below();
      }
      player.pos = to;
      ++world_.work().actions;
      return accept();
    }
    case ActionKind::place_block: {
      if (!world_.in_bounds(a.pos)) return reject(Reject::out_of_bounds);
      if (world_.block(a.pos).kind != BlockKind::air) return reject(Reject::occupied);
      if (a.block.kind == BlockKind::air) return reject(Reject::malformed);
      ++world_.work().actions;
      return accept(world_.apply_block_update(a.pos, a.block));
    }
    case ActionKind::break_block: {
      if (!world_.in_bounds(a.pos)) return reject(Reject::out_of_bounds);
      if (world_.block(a.pos).kind == BlockKind::air) return reject(Reject::nothing_to_break);
      ++world_.work().actions;
      return accept(world_.apply_block_update(a.pos, world::kAir));
    }
    case ActionKind::chat: {
      StateUpdate u;
      u.kind = UpdateKind::chat_event;
      u.tick = tick;
      u.from = s.name;
      u.nonce = a.nonce;
      u.text = a.text;
      for (const auto& [id, other] : sessions_) {
        if (!other.joined) continue;
        emit(out, id, u, false);
        ++stats_.chat_events;
      }
      return accept();
    }
    case ActionKind::ping: {
      StateUpdate u;
      u.kind = UpdateKind::pong;
      u.tick = tick;
      u.nonce = a.nonce;
      emit(out, session, u, false);
      return accept();
    }
  }
  return reject(Reject::malformed);
}

Composed compose_tick(const TickResult& r, const CostModel& cost, bool virtual_clock, std::int64_t extra_other_ns,
                      std::int64_t measured_busy_ns) {
  Composed c;
  for (std::size_t k = 0; k < metrics::kComponentCount; ++k) {
    c.component_ns[k] = virtual_clock ? r.modeled_ns[k]
                                      : (cost.enabled ? std::max(r.real_ns[k], r.modeled_ns[k]) : r.real_ns[k]);
  }
  if (r.concurrent) {
    // The section lasts as long as its slower side; split it by each side's own share.
    const auto& real = r.section_part_real_ns;
    const auto& mod = r.section_part_modeled_ns;
    const std::int64_t modeled = std::max(mod[0], mod[1]);
    const std::int64_t section =
        virtual_clock ? modeled : std::max(r.section_real_ns, cost.enabled ? modeled : std::int64_t{0});
    auto weight = [&](std::size_t i) {
      return virtual_clock ? mod[i] : (cost.enabled ? std::max(real[i], mod[i]) : real[i]);
    };
    const std::int64_t wt = weight(0);
    const std::int64_t we = weight(1);
    if (wt + we > 0) {
      const auto st = static_cast<std::int64_t>(std::llround(static_cast<double>(section) * wt / (wt + we)));
      c.component_ns[idx(ComponentKind::terrain_rules)] += st;
      c.component_ns[idx(ComponentKind::entities)] += section - st;
    }
  }
  c.component_ns[idx(ComponentKind::other)] += extra_other_ns;
  std::int64_t sum = 0;
  for (auto v : c.component_ns) sum += v;
  if (!virtual_clock && measured_busy_ns > sum) {
    c.component_ns[idx(ComponentKind::other)] += measured_busy_ns - sum;
    sum = measured_busy_ns;
  }
  c.busy_ns = sum;
  if (sum > 0) {
    for (std::size_t k = 0; k < metrics::kComponentCount; ++k) {
      c.shares[k] = static_cast<double>(c.component_ns[k]) / static_cast<double>(sum);
    }
  }
  return c;
}

}  // namespace meterstick::server
