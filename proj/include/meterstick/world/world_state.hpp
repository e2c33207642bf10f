// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "meterstick/world/block.hpp"
#include "meterstick/world/params.hpp"
#include "meterstick/world/work.hpp"

namespace meterstick::world {

inline constexpr int kChunkSize = 16;
inline constexpr int kDefaultHeight = 64;

struct WorldDims {
  int chunks_x = 8;
  int chunks_z = 8;
  int height = kDefaultHeight;

  int size_x() const { return chunks_x * kChunkSize; }
  int size_z() const { return chunks_z * kChunkSize; }
  int chunk_count() const { return chunks_x * chunks_z; }
  friend bool operator==(const WorldDims&, const WorldDims&) = default;
};

class Chunk {
 public:
  Chunk(BlockPos origin, int height);

  const BlockPos& origin() const { return origin_; }
  int height() const { return height_; }

  Block at(int lx, int ly, int lz) const { return cells_[index(lx, ly, lz)]; }
  Block& at(int lx, int ly, int lz) { return cells_[index(lx, ly, lz)]; }
  std::span<const Block> cells() const { return cells_; }
  std::span<Block> cells() { return cells_; }

 private:
  static std::size_t index(int lx, int ly, int lz) {
    return (static_cast<std::size_t>(ly) * kChunkSize + static_cast<std::size_t>(lz)) * kChunkSize +
           static_cast<std::size_t>(lx);
  }

  BlockPos origin_;
  int height_;
  std::vector<Block> cells_;
};

using EntityId = std::uint64_t;

enum class EntityKind : std::uint8_t { npc, item, tnt_primed };

std::string_view entity_kind_name(EntityKind kind);

struct Entity {
  EntityId id = 0;
  EntityKind kind = EntityKind::item;
  Vec3 pos;
  Vec3 vel;
  /// Item: the BlockKind it carries. tnt_primed: remaining fuse ticks.
  std::int32_t payload = 0;
  /// npc only. nullopt = never planned; an empty vector = no route (or
  /// finished) and is only replanned once it goes stale.
  std::optional<std::vector<BlockPos>> path;
  std::uint32_t path_next = 0;
  std::uint32_t age = 0;
  /// Index of the construct that spawned it, or -1.
  std::int32_t owner = -1;
};

using PlayerId = std::uint64_t;

struct Player {
  std::string name;
  BlockPos pos;
};

/// Places a powered signal source once `delay` ticks after the first player joins.
struct Timer {
  BlockPos pos;
  std::uint32_t delay = 0;
  std::optional<std::uint64_t> fire_at;
  bool fired = false;
};

/// Signal source toggled every `half_period` ticks.
struct ClockCircuit {
  BlockPos pos;
  std::uint32_t half_period = 10;
  std::uint32_t phase = 0;
};

enum class ConstructKind : std::uint8_t { entity_farm, stone_farm, kelp_farm, item_sorter };

std::string_view construct_kind_name(ConstructKind kind);

/// Scripted device standing in for a player-built farm. The meaning of the
/// two cell lists depends on the kind; see constructs.hpp.
struct Construct {
  ConstructKind kind = ConstructKind::entity_farm;
  int tile = 0;
  std::uint32_t phase = 0;
  std::vector<BlockPos> cells_a;
  std::vector<BlockPos> cells_b;
  std::uint64_t state = 0;
  std::uint64_t produced = 0;
};

/// FIFO of positions awaiting rule evaluation; a position is queued at most once.
class UpdateQueue {
 public:
  /// Returns false if already queued.
  bool push(BlockPos p);
  /// Re-queues a position that was just popped, ahead of everything else.
  void push_front(BlockPos p);
  std::optional<BlockPos> pop();

  bool contains(BlockPos p) const { return members_.count(pack(p)) != 0; }
  std::size_t size() const { return queue_.size(); }
  bool empty() const { return queue_.empty(); }
  const std::deque<BlockPos>& items() const { return queue_; }
  void clear();

 private:
  std::deque<BlockPos> queue_;
  std::unordered_set<std::uint64_t> members_;
};

/// Cumulative event counts since world creation.
struct WorldStats {
  std::uint64_t rules_fired = 0;
  std::uint64_t blocks_changed = 0;
  std::uint64_t fuses_started = 0;
  std::uint64_t detonations = 0;
  std::uint64_t tnt_chained = 0;
  std::uint64_t blocks_destroyed = 0;
  std::uint64_t items_absorbed = 0;
  std::uint64_t pathfinds = 0;
  std::uint64_t entities_spawned = 0;
  std::uint64_t entities_despawned = 0;

  WorldStats& operator+=(const WorldStats& o);
  friend bool operator==(const WorldStats&, const WorldStats&) = default;
};

/// Side effects of one simulation phase that are merged into the world only
/// after the phase (and any phase running beside it) has finished.
struct PhaseSink {
  std::vector<BlockPos> changes;
  std::vector<BlockPos> deferred_enqueue;
  std::vector<Entity> spawns;
  WorkCounters work;
  WorldStats stats;
};

class WorldState;

enum class EnqueueMode : std::uint8_t { direct, deferred };

/// Cell writer used by simulation phases. Cell contents change immediately;
/// neighbor enqueues go to the queue (direct) or to the sink (deferred).
class BlockWriter {
 public:
  BlockWriter(WorldState& world, PhaseSink& sink, EnqueueMode mode) : world_(world), sink_(sink), mode_(mode) {}

  /// Writes the cell if it differs and enqueues it and its neighbors;
  /// returns the number of neighbors enqueued.
  int set(BlockPos p, Block b);
  void spawn(Entity e) { sink_.spawns.push_back(std::move(e)); }
  PhaseSink& sink() { return sink_; }
  WorldState& world() { return world_; }

 private:
  WorldState& world_;
  PhaseSink& sink_;
  EnqueueMode mode_;
};

class WorldState {
 public:
  explicit WorldState(WorldDims dims = {}, std::uint64_t seed = 0, WorldParams params = {});

  const WorldDims& dims() const { return dims_; }
  const WorldParams& params() const { return params_; }
  WorldParams& params() { return params_; }
  std::uint64_t seed() const { return seed_; }

  bool in_bounds(BlockPos p) const {
    return p.x >= 0 && p.y >= 0 && p.z >= 0 && p.x < dims_.size_x() && p.y < dims_.height && p.z < dims_.size_z();
  }

  /// Out-of-bounds cells read as air.
  Block block(BlockPos p) const;
  bool solid(BlockPos p) const { return is_solid(block(p).kind); }

  /// Writes without enqueuing or logging; used while generating worlds.
  void set_block_raw(BlockPos p, Block b);

  /// Writes the cell, logs the change, and enqueues the cell followed by its
  /// in-bounds face neighbors. Returns the number of neighbors enqueued.
  /// Throws meterstick::Error when out of bounds.
  int apply_block_update(BlockPos p, Block b);

  std::size_t chunk_index(BlockPos p) const {
    return static_cast<std::size_t>((p.z / kChunkSize) * dims_.chunks_x + p.x / kChunkSize);
  }
  std::size_t chunk_count() const { return chunks_.size(); }
  const Chunk& chunk(std::size_t index) const { return chunks_[index]; }
  Chunk& chunk(std::size_t index) { return chunks_[index]; }
  /// Chunk whose origin is `origin`, or nullptr.
  const Chunk* chunk_at(BlockPos origin) const;

  /// Highest non-air y in a column, or -1.
  int column_top(int x, int z) const { return heightmap_[static_cast<std::size_t>(z * dims_.size_x() + x)]; }

  // Entities, sorted by id.
  std::vector<Entity>& entities() { return entities_; }
  const std::vector<Entity>& entities() const { return entities_; }
  const Entity* find_entity(EntityId id) const;
  Entity* find_entity(EntityId id);
  /// Adds an entity now, assigning the next id.
  EntityId spawn_entity(Entity e);
  EntityId next_entity_id() const { return next_entity_id_; }

  UpdateQueue& update_queue() { return queue_; }
  const UpdateQueue& update_queue() const { return queue_; }

  /// Positions due for a scheduled (growth) evaluation, keyed by tick.
  void schedule(BlockPos p, std::uint64_t tick);
  bool is_scheduled(BlockPos p) const { return scheduled_set_.count(pack(p)) != 0; }
  /// Removes and returns positions due at or before `tick`, in schedule order.
  std::vector<BlockPos> take_due(std::uint64_t tick);
  const std::map<std::uint64_t, std::vector<BlockPos>>& scheduled() const { return scheduled_; }

  std::vector<Timer>& timers() { return timers_; }
  const std::vector<Timer>& timers() const { return timers_; }
  std::vector<ClockCircuit>& clocks() { return clocks_; }
  const std::vector<ClockCircuit>& clocks() const { return clocks_; }
  std::vector<Construct>& constructs() { return constructs_; }
  const std::vector<Construct>& constructs() const { return constructs_; }

  /// Players keyed by id. The first join arms all timers.
  void add_player(PlayerId id, std::string name, BlockPos pos);
  void remove_player(PlayerId id);
  std::map<PlayerId, Player>& players() { return players_; }
  const std::map<PlayerId, Player>& players() const { return players_; }
  bool any_player_joined() const { return any_joined_; }

  std::uint64_t tick_counter() const { return tick_counter_; }
  void advance_tick() { ++tick_counter_; }
  void set_tick_counter(std::uint64_t t) { tick_counter_ = t; }

  /// Every block change since world creation, in order.
  const std::vector<BlockPos>& change_log() const { return change_log_; }
  /// Position in the change log up to which the entity phase has looked.
  std::size_t entity_change_cursor = 0;

  std::vector<std::uint8_t>& dirty_chunks() { return dirty_; }
  const std::vector<std::uint8_t>& dirty_chunks() const { return dirty_; }

  WorldStats& stats() { return stats_; }
  const WorldStats& stats() const { return stats_; }
  WorkCounters& work() { return work_; }
  const WorkCounters& work() const { return work_; }

  /// Merges a finished phase: change log, deferred enqueues, spawns (ids are
  /// assigned here, in sink order), work and stats.
  void commit(PhaseSink& sink);

  /// Digest over blocks, entities, queue, schedules, devices and tick counter.
  std::uint64_t digest() const;

 private:
  friend class BlockWriter;
  friend struct SnapshotAccess;

  /// Stores the cell and maintains heightmap and dirty flags; returns true if changed.
  bool store(BlockPos p, Block b, WorkCounters& work);

  WorldDims dims_;
  std::uint64_t seed_ = 0;
  WorldParams params_;
  std::vector<Chunk> chunks_;
  std::vector<std::int16_t> heightmap_;
  std::vector<std::uint8_t> dirty_;
  std::vector<Entity> entities_;
  EntityId next_entity_id_ = 1;
  UpdateQueue queue_;
  std::map<std::uint64_t, std::vector<BlockPos>> scheduled_;
  std::unordered_set<std::uint64_t> scheduled_set_;
  std::vector<Timer> timers_;
  std::vector<ClockCircuit> clocks_;
  std::vector<Construct> constructs_;
  std::map<PlayerId, Player> players_;
  bool any_joined_ = false;
  std::uint64_t tick_counter_ = 0;
  std::vector<BlockPos> change_log_;
  WorldStats stats_;
  WorkCounters work_;
};

}  // namespace meterstick::world
