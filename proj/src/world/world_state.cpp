// SPDX-License-Identifier: Apache-2.0
#include "meterstick/world/world_state.hpp"

#include <algorithm>
#include <bit>

#include "meterstick/common/digest.hpp"
#include "meterstick/common/error.hpp"

namespace meterstick::world {

Chunk::Chunk(BlockPos origin, int height)
    : origin_(origin), height_(height), cells_(static_cast<std::size_t>(kChunkSize * kChunkSize * height)) {}

std::string_view entity_kind_name(EntityKind kind) {
  switch (kind) {
    case EntityKind::npc:
      return "npc";
    case EntityKind::item:
      return "item";
    case EntityKind::tnt_primed:
      return "tnt_primed";
  }
  return "unknown";
}

std::string_view construct_kind_name(ConstructKind kind) {
  switch (kind) {
    case ConstructKind::entity_farm:
      return "entity_farm";
    case ConstructKind::stone_farm:
      return "stone_farm";
    case ConstructKind::kelp_farm:
      return "kelp_farm";
    case ConstructKind::item_sorter:
      return "item_sorter";
  }
  return "unknown";
}

bool UpdateQueue::push(BlockPos p) {
  if (!members_.insert(pack(p)).second) return false;
  queue_.push_back(p);
  return true;
}

void UpdateQueue::push_front(BlockPos p) {
  if (!members_.insert(pack(p)).second) return;
  queue_.push_front(p);
}

std::optional<BlockPos> UpdateQueue::pop() {
  if (queue_.empty()) return std::nullopt;
  const BlockPos p = queue_.front();
  queue_.pop_front();
  members_.erase(pack(p));
  return p;
}

void UpdateQueue::clear() {
  queue_.clear();
  members_.clear();
}

WorldStats& WorldStats::operator+=(const WorldStats& o) {
  rules_fired += o.rules_fired;
  blocks_changed += o.blocks_changed;
  fuses_started += o.fuses_started;
  detonations += o.detonations;
  tnt_chained += o.tnt_chained;
  blocks_destroyed += o.blocks_destroyed;
  items_absorbed += o.items_absorbed;
  pathfinds += o.pathfinds;
  entities_spawned += o.entities_spawned;
  entities_despawned += o.entities_despawned;
  return *this;
}

int BlockWriter::set(BlockPos p, Block b) {
  if (!world_.store(p, b, sink_.work)) return 0;
  sink_.changes.push_back(p);
  ++sink_.stats.blocks_changed;
  if (mode_ == EnqueueMode::direct) {
    world_.queue_.push(p);
  } else {
    sink_.deferred_enqueue.push_back(p);
  }
  int n = 0;
  for (const auto& off : kFaceOffsets) {
    const BlockPos q = p + off;
    if (!world_.in_bounds(q)) continue;
    ++n;
    if (mode_ == EnqueueMode::direct) {
      world_.queue_.push(q);
    } else {
      sink_.deferred_enqueue.push_back(q);
    }
  }
  return n;
}

WorldState::WorldState(WorldDims dims, std::uint64_t seed, WorldParams params)
    : dims_(dims), seed_(seed), params_(params) {
  if (dims.chunks_x <= 0 || dims.chunks_z <= 0 || dims.height <= 0 || dims.height > 1024) {
    throw Error("invalid world dimensions");
  }
  chunks_.reserve(static_cast<std::size_t>(dims.chunk_count()));
  for (int cz = 0; cz < dims.chunks_z; ++cz) {
    for (int cx = 0; cx < dims.chunks_x; ++cx) {
      chunks_.emplace_back(BlockPos{cx * kChunkSize, 0, cz * kChunkSize}, dims.height);
    }
  }
  heightmap_.assign(static_cast<std::size_t>(dims.size_x() * dims.size_z()), -1);
  dirty_.assign(chunks_.size(), 0);
}

Block WorldState::block(BlockPos p) const {
  if (!in_bounds(p)) return kAir;
  return chunks_[chunk_index(p)].at(p.x % kChunkSize, p.y, p.z % kChunkSize);
}

bool WorldState::store(BlockPos p, Block b, WorkCounters& work) {
  Block& cell = chunks_[chunk_index(p)].at(p.x % kChunkSize, p.y, p.z % kChunkSize);
  if (cell == b) return false;
  cell = b;
  dirty_[chunk_index(p)] = 1;
  ++work.block_changes;
  // Lighting stand-in: keep the column heightmap current and count the work.
  auto& top = heightmap_[static_cast<std::size_t>(p.z * dims_.size_x() + p.x)];
  if (b.kind != BlockKind::air) {
    if (p.y > top) top = static_cast<std::int16_t>(p.y);
  } else if (p.y == top) {
    int y = p.y - 1;
    while (y >= 0 && block({p.x, y, p.z}).kind == BlockKind::air) --y;
    top = static_cast<std::int16_t>(y);
  }
  ++work.light_updates;
  return true;
}

void WorldState::set_block_raw(BlockPos p, Block b) {
  if (!in_bounds(p)) throw Error("block position out of bounds");
  WorkCounters scratch;
  store(p, b, scratch);
  dirty_[chunk_index(p)] = 0;
}

int WorldState::apply_block_update(BlockPos p, Block b) {
  if (!in_bounds(p)) {
    throw Error("block update out of bounds at " + std::to_string(p.x) + "," + std::to_string(p.y) + "," +
                std::to_string(p.z));
  }
  if (!b.valid()) throw Error("aux value out of range for " + std::string(block_name(b.kind)));
  if (store(p, b, work_)) {
    change_log_.push_back(p);
    ++stats_.blocks_changed;
  }
  queue_.push(p);
  int n = 0;
  for (const auto& off : kFaceOffsets) {
    const BlockPos q = p + off;
    if (!in_bounds(q)) continue;
    queue_.push(q);
    ++n;
  }
  return n;
}

const Chunk* WorldState::chunk_at(BlockPos origin) const {
  if (origin.y != 0 || origin.x % kChunkSize != 0 || origin.z % kChunkSize != 0) return nullptr;
  if (!in_bounds(origin)) return nullptr;
  return &chunks_[chunk_index(origin)];
}

const Entity* WorldState::find_entity(EntityId id) const {
  auto it = std::lower_bound(entities_.begin(), entities_.end(), id,
                             [](const Entity& e, EntityId v) { return e.id < v; });
  return it != entities_.end() && it->id == id ? &*it : nullptr;
}

Entity* WorldState::find_entity(EntityId id) {
  return const_cast<Entity*>(static_cast<const WorldState*>(this)->find_entity(id));
}

EntityId WorldState::spawn_entity(Entity e) {
  e.id = next_entity_id_++;
  entities_.push_back(std::move(e));
  ++stats_.entities_spawned;
  return entities_.back().id;
}

void WorldState::schedule(BlockPos p, std::uint64_t tick) {
  if (!scheduled_set_.insert(pack(p)).second) return;
  scheduled_[tick].push_back(p);
}

std::vector<BlockPos> WorldState::take_due(std::uint64_t tick) {
  std::vector<BlockPos> due;
  while (!scheduled_.empty() && scheduled_.begin()->first <= tick) {
    for (const auto& p : scheduled_.begin()->second) {
      scheduled_set_.erase(pack(p));
      due.push_back(p);
    }
    scheduled_.erase(scheduled_.begin());
  }
  return due;
}

void WorldState::add_player(PlayerId id, std::string name, BlockPos pos) {
  if (!any_joined_) {
    any_joined_ = true;
    for (auto& t : timers_) {
      if (!t.fire_at) t.fire_at = tick_counter_ + t.delay;
    }
  }
  players_[id] = Player{std::move(name), pos};
}

void WorldState::remove_player(PlayerId id) { players_.erase(id); }

void WorldState::commit(PhaseSink& sink) {
  change_log_.insert(change_log_.end(), sink.changes.begin(), sink.changes.end());
  for (const auto& p : sink.deferred_enqueue) queue_.push(p);
  for (auto& e : sink.spawns) spawn_entity(std::move(e));
  work_ += sink.work;
  stats_ += sink.stats;
  sink = PhaseSink{};
}

namespace {

void hash_vec(Fnv1a& h, const Vec3& v) {
  h.value(std::bit_cast<std::uint64_t>(v.x));
  h.value(std::bit_cast<std::uint64_t>(v.y));
  h.value(std::bit_cast<std::uint64_t>(v.z));
}

void hash_pos(Fnv1a& h, const BlockPos& p) {
  h.value(p.x);
  h.value(p.y);
  h.value(p.z);
}

}  // namespace

std::uint64_t WorldState::digest() const {
  Fnv1a h;
  h.value(dims_.chunks_x);
  h.value(dims_.chunks_z);
  h.value(dims_.height);
  h.value(seed_);
  h.value(tick_counter_);
  for (const auto& c : chunks_) {
    for (const Block& b : c.cells()) {
      h.value(b.kind);
      h.value(b.aux);
    }
  }
  h.value(next_entity_id_);
  for (const auto& e : entities_) {
    h.value(e.id);
    h.value(e.kind);
    hash_vec(h, e.pos);
    hash_vec(h, e.vel);
    h.value(e.payload);
    h.value(e.age);
    h.value(e.owner);
    h.value(e.path.has_value());
    if (e.path) {
      h.value(e.path->size());
      for (const auto& p : *e.path) hash_pos(h, p);
      h.value(e.path_next);
    }
  }
  for (const auto& p : queue_.items()) hash_pos(h, p);
  for (const auto& [tick, list] : scheduled_) {
    h.value(tick);
    for (const auto& p : list) hash_pos(h, p);
  }
  for (const auto& t : timers_) {
    hash_pos(h, t.pos);
    h.value(t.fire_at.value_or(~0ULL));
    h.value(t.fired);
  }
  for (const auto& c : clocks_) {
    hash_pos(h, c.pos);
    h.value(c.phase);
  }
  for (const auto& c : constructs_) {
    h.value(c.kind);
    h.value(c.state);
    h.value(c.produced);
  }
  for (const auto& [id, p] : players_) {
    h.value(id);
    h.text(p.name);
    hash_pos(h, p.pos);
  }
  return h.get();
}

}  // namespace meterstick::world
