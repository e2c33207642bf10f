// SPDX-License-Identifier: Apache-2.0
#include "meterstick/world/entities.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "meterstick/kernels/motion.hpp"
#include "meterstick/kernels/pathing.hpp"
#include "meterstick/kernels/push.hpp"
#include "meterstick/world/explosion.hpp"

namespace meterstick::world {

EntityReport& EntityReport::operator+=(const EntityReport& o) {
  moved += o.moved;
  collided += o.collided;
  despawned += o.despawned;
  pathfinds += o.pathfinds;
  detonations += o.detonations;
  absorbed += o.absorbed;
  return *this;
}

namespace {

int chebyshev(BlockPos a, BlockPos b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

BlockPos nearest_player(const WorldState& w, const Vec3& pos) {
  BlockPos best{};
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, p] : w.players()) {
    const double d = (feet_of(p.pos) - pos).length();
    if (d < best_d) {
      best_d = d;
      best = p.pos;
    }
  }
  return best;
}

}  // namespace

PathPlan plan_paths(const WorldState& w, kernels::Exec exec, bool track_chunks) {
  PathPlan plan;
  if (track_chunks) plan.read_chunks.assign(w.chunk_count(), 0);
  if (w.players().empty()) return plan;
  const auto& log = w.change_log();
  const auto recent_begin = log.begin() + static_cast<std::ptrdiff_t>(std::min(w.entity_change_cursor, log.size()));
  const int vicinity = w.params().path_vicinity;

  std::vector<kernels::PathRequest> requests;
  const auto& ents = w.entities();
  for (std::size_t i = 0; i < ents.size(); ++i) {
    const auto& e = ents[i];
    if (e.kind != EntityKind::npc) continue;
    const BlockPos cell = cell_of(e.pos);
    bool stale = !e.path.has_value();
    for (auto it = recent_begin; !stale && it != log.end(); ++it) stale = chebyshev(*it, cell) <= vicinity;
    if (!stale) continue;
    requests.push_back({cell, nearest_player(w, e.pos)});
    plan.entity_index.push_back(i);
  }
  plan.results.resize(requests.size());
  plan.expansions = kernels::find_paths(w, requests, plan.results, w.params().max_path_expansions, exec,
                                        track_chunks ? &plan.read_chunks : nullptr);
  return plan;
}

void apply_paths(WorldState& w, PathPlan& plan, EntityReport& report, WorkCounters& work) {
  auto& ents = w.entities();
  for (std::size_t k = 0; k < plan.entity_index.size(); ++k) {
    auto& e = ents[plan.entity_index[k]];
    e.path = std::move(plan.results[k].path).value_or(std::vector<BlockPos>{});
    e.path_next = 0;
  }
  report.pathfinds += plan.entity_index.size();
  w.stats().pathfinds += plan.entity_index.size();
  work.path_expansions += plan.expansions;
  w.entity_change_cursor = w.change_log().size();
}

EntityReport run_entity_phase(WorldState& w, BlockWriter& out, kernels::Exec exec) {
  EntityReport r;
  auto& ents = w.entities();
  auto& sink = out.sink();
  std::vector<kernels::MotionOutcome> outcomes(ents.size());
  const auto mt = kernels::integrate_motion(ents, w, outcomes, exec);
  r.moved = mt.moved;
  r.collided = mt.collided;
  sink.work.entity_updates += mt.updates;
  sink.work.collision_checks += mt.collision_checks;
  const auto pt = kernels::apply_push(ents, w.params(), exec);
  sink.work.collision_checks += pt.pairs_checked;

  std::vector<char> removed(ents.size(), 0);
  const int capacity = w.params().hopper_capacity;
  for (std::size_t i = 0; i < ents.size(); ++i) {
    const auto& o = outcomes[i];
    if (o.despawn) {
      removed[i] = 1;
      ++r.despawned;
    } else if (o.absorb) {
      const Block h = w.block(o.hopper);
      if (h.kind == BlockKind::hopper && h.aux < capacity) {
        out.set(o.hopper, {BlockKind::hopper, static_cast<std::uint8_t>(h.aux + 1)});
        removed[i] = 1;
        ++r.absorbed;
      }
    } else if (o.detonate) {
      removed[i] = 1;
      ++r.detonations;
      const Vec3 center{ents[i].pos.x, ents[i].pos.y + 0.5, ents[i].pos.z};
      blast(w, out, center, ents, exec);
    }
  }
  std::size_t keep = 0;
  for (std::size_t i = 0; i < ents.size(); ++i) {
    if (removed[i]) continue;
    if (keep != i) ents[keep] = std::move(ents[i]);
    ++keep;
  }
  ents.resize(keep);
  sink.stats.items_absorbed += r.absorbed;
  sink.stats.entities_despawned += r.despawned + r.absorbed + r.detonations;
  return r;
}

std::vector<std::uint8_t> entity_region(const WorldState& w, const PathPlan& plan) {
  std::vector<std::uint8_t> region(w.chunk_count(), 0);
  const auto& dims = w.dims();
  for (const auto& e : w.entities()) {
    const int cx = std::clamp(static_cast<int>(e.pos.x) / kChunkSize, 0, dims.chunks_x - 1);
    const int cz = std::clamp(static_cast<int>(e.pos.z) / kChunkSize, 0, dims.chunks_z - 1);
    for (int z = std::max(0, cz - 1); z <= std::min(dims.chunks_z - 1, cz + 1); ++z) {
      for (int x = std::max(0, cx - 1); x <= std::min(dims.chunks_x - 1, cx + 1); ++x) {
        region[static_cast<std::size_t>(z * dims.chunks_x + x)] = 1;
      }
    }
  }
  for (std::size_t c = 0; c < plan.read_chunks.size(); ++c) region[c] |= plan.read_chunks[c];
  return region;
}

EntityReport step_entities(WorldState& w, kernels::Exec exec) {
  EntityReport r;
  PhaseSink sink;
  auto plan = plan_paths(w, exec);
  apply_paths(w, plan, r, sink.work);
  BlockWriter out(w, sink, EnqueueMode::direct);
  r += run_entity_phase(w, out, exec);
  w.commit(sink);
  return r;
}

}  // namespace meterstick::world
