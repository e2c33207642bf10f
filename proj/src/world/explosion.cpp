// SPDX-License-Identifier: Apache-2.0
#include "meterstick/world/explosion.hpp"

#include <algorithm>
#include <cmath>

#include "meterstick/common/error.hpp"
#include "meterstick/common/rng.hpp"
#include "meterstick/kernels/explosion.hpp"

namespace meterstick::world {

namespace {

bool resists(BlockKind k) {
  return k == BlockKind::stone || k == BlockKind::hopper || k == BlockKind::signal_source || k == BlockKind::water;
}

}  // namespace

int chain_fuse(const WorldState& w, BlockPos p) {
  const auto& params = w.params();
  const auto span = static_cast<std::uint64_t>(params.chain_fuse_max - params.chain_fuse_min + 1);
  return params.chain_fuse_min + static_cast<int>(mix64(w.seed(), pack(p), w.tick_counter()) % span);
}

DetonationReport blast(WorldState& w, BlockWriter& out, const Vec3& center, std::span<Entity> entities,
                       kernels::Exec exec) {
  DetonationReport r;
  const auto& params = w.params();
  const double radius = params.blast_radius;
  const int reach = static_cast<int>(std::ceil(radius));
  const BlockPos c = cell_of(center);
  for (int y = c.y - reach; y <= c.y + reach; ++y) {
    for (int z = c.z - reach; z <= c.z + reach; ++z) {
      for (int x = c.x - reach; x <= c.x + reach; ++x) {
        const BlockPos p{x, y, z};
        if (!w.in_bounds(p)) continue;
        const Vec3 rel = center_of(p) - center;
        const double d = rel.length();
        if (d > radius) continue;
        const Block b = w.block(p);
        if (b.kind == BlockKind::air || resists(b.kind)) continue;
        out.set(p, kAir);
        Entity e;
        if (b.kind == BlockKind::tnt_block) {
          e.kind = EntityKind::tnt_primed;
          e.pos = feet_of(p);
          e.payload = chain_fuse(w, p);
          ++r.tnt_chained;
        } else {
          e.kind = EntityKind::item;
          e.pos = center_of(p);
          e.payload = static_cast<std::int32_t>(b.kind);
          if (d > 1e-9) e.vel = rel * (params.debris_speed / d);
          ++r.blocks_destroyed;
        }
        out.spawn(std::move(e));
      }
    }
  }
  const auto k = kernels::apply_blast(entities, w, center, exec);
  r.entities_affected = k.affected;
  auto& sink = out.sink();
  sink.work.ray_steps += k.ray_steps;
  sink.work.entity_updates += k.affected;
  ++sink.stats.detonations;
  sink.stats.tnt_chained += r.tnt_chained;
  sink.stats.blocks_destroyed += r.blocks_destroyed;
  return r;
}

DetonationReport detonate(WorldState& w, BlockPos pos, kernels::Exec exec) {
  if (!w.in_bounds(pos)) throw Error("detonation position out of bounds");
  PhaseSink sink;
  BlockWriter out(w, sink, EnqueueMode::direct);
  DetonationReport r;
  if (w.block(pos).kind == BlockKind::tnt_block) {
    out.set(pos, kAir);
    r = blast(w, out, center_of(pos), w.entities(), exec);
    ++r.blocks_destroyed;
    ++sink.stats.blocks_destroyed;
  } else {
    auto& ents = w.entities();
    auto it = std::find_if(ents.begin(), ents.end(), [&](const Entity& e) {
      return e.kind == EntityKind::tnt_primed && cell_of(e.pos) == pos;
    });
    if (it == ents.end()) throw Error("no TNT at detonation position");
    const Vec3 center{it->pos.x, it->pos.y + 0.5, it->pos.z};
    ents.erase(it);
    ++sink.stats.entities_despawned;
    r = blast(w, out, center, ents, exec);
  }
  w.commit(sink);
  return r;
}

}  // namespace meterstick::world
