// SPDX-License-Identifier: Apache-2.0
#include "meterstick/workloads/worldgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "meterstick/common/error.hpp"
#include "meterstick/common/rng.hpp"
#include "meterstick/world/constructs.hpp"

namespace meterstick::workloads {

using world::Block;
using world::BlockKind;
using world::BlockPos;
using world::WorldState;

namespace {

constexpr std::array<std::string_view, 5> kNames = {"control", "tnt", "farm", "lag", "players"};

constexpr int kBaseHeight = 20;
constexpr int kNoiseCell = 16;
constexpr BlockPos kSpawnCenter{kPlazaSize, 0, kPlazaSize};

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

/// Value noise on a 16-cell lattice, two octaves, over one tile.
std::vector<int> tile_heights(std::uint64_t seed) {
  auto lattice = [&](int octave, int lx, int lz) {
    return unit_from_hash(mix64(seed, static_cast<std::uint64_t>(octave),
                                (static_cast<std::uint64_t>(lx) << 20) ^ static_cast<std::uint64_t>(lz)));
  };
  auto sample = [&](int octave, int cell, double x, double z) {
    const int lx = static_cast<int>(x) / cell;
    const int lz = static_cast<int>(z) / cell;
    const double fx = smooth((x - lx * cell) / cell);
    const double fz = smooth((z - lz * cell) / cell);
    const double a = lattice(octave, lx, lz);
    const double b = lattice(octave, lx + 1, lz);
    const double c = lattice(octave, lx, lz + 1);
    const double d = lattice(octave, lx + 1, lz + 1);
    return (a * (1 - fx) + b * fx) * (1 - fz) + (c * (1 - fx) + d * fx) * fz;
  };
  std::vector<int> h(static_cast<std::size_t>(kTileSize * kTileSize));
  for (int z = 0; z < kTileSize; ++z) {
    for (int x = 0; x < kTileSize; ++x) {
      const double v = 10.0 * (sample(0, kNoiseCell, x, z) - 0.5) + 4.0 * (sample(1, kNoiseCell / 4, x, z) - 0.5);
      h[static_cast<std::size_t>(z * kTileSize + x)] = kBaseHeight + static_cast<int>(std::lround(v));
    }
  }
  return h;
}

void fill_column(WorldState& w, int x, int z, int top) {
  for (int y = 0; y <= top; ++y) {
    const BlockKind k = (y == 0 || y < top - 3) ? BlockKind::stone : BlockKind::soil;
    w.set_block_raw({x, y, z}, {k, 0});
  }
}

/// Level solid pad with cleared air above, like the construct builders use.
void level(WorldState& w, BlockPos o, int size_x, int size_z, int ground) {
  for (int z = o.z; z < o.z + size_z; ++z) {
    for (int x = o.x; x < o.x + size_x; ++x) {
      for (int y = 0; y < w.dims().height; ++y) {
        if (y <= ground) {
          if (w.block({x, y, z}).kind == BlockKind::air) w.set_block_raw({x, y, z}, {BlockKind::soil, 0});
        } else {
          w.set_block_raw({x, y, z}, world::kAir);
        }
      }
    }
  }
}

int height_at(const std::vector<int>& h, int x, int z) { return h[static_cast<std::size_t>(z * kTileSize + x)]; }

void build_tnt(WorldState& w, const WorkloadSpec& spec, int ground) {
  const BlockPos o = kCuboidOrigin;
  level(w, {o.x - 6, 0, o.z - 4}, kCuboidSide + 10, kCuboidSide + 8, ground);
  for (int y = ground + 1; y <= ground + kCuboidHeight; ++y) {
    for (int z = o.z; z < o.z + kCuboidSide; ++z) {
      for (int x = o.x; x < o.x + kCuboidSide; ++x) w.set_block_raw({x, y, z}, {BlockKind::tnt_block, 0});
    }
  }
  // Timer cell, then a short wire into the cuboid's -x face.
  const int wz = o.z + kCuboidSide / 2;
  for (int x = o.x - 3; x < o.x; ++x) w.set_block_raw({x, ground + 1, wz}, {BlockKind::signal_wire, 0});
  w.timers().push_back({BlockPos{o.x - 4, ground + 1, wz}, spec.tnt_timer_ticks, std::nullopt, false});
}

void build_farm(WorldState& w, int tile) {
  const auto t = static_cast<std::uint32_t>(tile);
  int ground = kBaseHeight;
  for (int i = 0; i < 12; ++i) {
    world::build_entity_farm(w, {60 + 12 * (i % 4), 0, 6 + 12 * (i / 4)}, ground, tile, t);
  }
  for (int i = 0; i < 4; ++i) world::build_stone_farm(w, {58 + 17 * i, 0, 44}, ground, tile, t);
  for (int i = 0; i < 4; ++i) world::build_kelp_farm(w, {60 + 12 * i, 0, 56}, ground, tile, t);
  world::build_item_sorter(w, {60, 0, 72}, ground, tile);
}

void build_lag(WorldState& w, const WorkloadSpec& spec) {
  // Comb of oscillators: each clock drives a wire run along +x. Every clock in
  // a tile switches on the same tick.
  constexpr int kRun = 6;
  constexpr BlockPos o{56, 0, 56};
  constexpr int kCols = 64 / (kRun + 1);
  const int rows = std::max(1, (spec.lag_clocks + kCols - 1) / kCols);
  const int ground = kBaseHeight;
  level(w, o, 64, rows * 2, ground);
  int placed = 0;
  for (int r = 0; r < rows && placed < spec.lag_clocks; ++r) {
    for (int c = 0; c < kCols && placed < spec.lag_clocks; ++c, ++placed) {
      const BlockPos src{o.x + c * (kRun + 1), ground + 1, o.z + 2 * r};
      w.set_block_raw(src, {BlockKind::signal_source, 0});
      for (int k = 1; k <= kRun; ++k) w.set_block_raw({src.x + k, src.y, src.z}, {BlockKind::signal_wire, 0});
      w.clocks().push_back({src, spec.lag_half_period, 0});
    }
  }
}

/// Everything in tile 0; copied afterwards.
void build_tile(WorldState& w, const WorkloadSpec& spec) {
  const auto h = tile_heights(spec.seed);
  for (int z = 0; z < kTileSize; ++z) {
    for (int x = 0; x < kTileSize; ++x) fill_column(w, x, z, height_at(h, x, z));
  }
  const int plaza = height_at(h, kSpawnCenter.x, kSpawnCenter.z);
  level(w, {kSpawnCenter.x - kPlazaSize / 2, 0, kSpawnCenter.z - kPlazaSize / 2}, kPlazaSize, kPlazaSize, plaza);
  switch (spec.kind) {
    case WorkloadKind::control:
    case WorkloadKind::players:
      break;
    case WorkloadKind::tnt:
      build_tnt(w, spec, height_at(h, kCuboidOrigin.x + kCuboidSide / 2, kCuboidOrigin.z + kCuboidSide / 2));
      break;
    case WorkloadKind::farm:
      build_farm(w, 0);
      break;
    case WorkloadKind::lag:
      build_lag(w, spec);
      break;
  }
}

BlockPos shifted(BlockPos p, BlockPos by) { return p + by; }

// Tiles run their devices a quarter of the farm interval apart. Adjacent
// tiles firing on adjacent ticks would merge into one long plateau, and a
// plateau has no more tick-to-tick jitter than a single spike.
constexpr std::uint32_t kTilePhaseStride = 20;

void copy_tile(WorldState& w, int tile, BlockPos to) {
  for (int z = 0; z < kTileSize; ++z) {
    for (int x = 0; x < kTileSize; ++x) {
      for (int y = 0; y < w.dims().height; ++y) {
        const Block b = w.block({x, y, z});
        if (b.kind != BlockKind::air) w.set_block_raw({to.x + x, y, to.z + z}, b);
      }
    }
  }
  const auto timers = w.timers();
  for (auto t : timers) {
    if (t.pos.x >= kTileSize || t.pos.z >= kTileSize) continue;
    t.pos = shifted(t.pos, to);
    w.timers().push_back(t);
  }
  const auto clocks = w.clocks();
  for (auto c : clocks) {
    if (c.pos.x >= kTileSize || c.pos.z >= kTileSize) continue;
    c.pos = shifted(c.pos, to);
    w.clocks().push_back(c);
  }
  const auto constructs = w.constructs();
  for (auto c : constructs) {
    if (c.tile != 0) continue;
    c.tile = tile;
    c.phase = static_cast<std::uint32_t>(tile) * kTilePhaseStride;
    for (auto& p : c.cells_a) p = shifted(p, to);
    for (auto& p : c.cells_b) p = shifted(p, to);
    if (c.kind == world::ConstructKind::kelp_farm) {
      for (const auto& base : c.cells_a) {
        w.schedule(base, static_cast<std::uint64_t>(tile) * kTilePhaseStride +
                             static_cast<std::uint64_t>(w.params().growth_interval));
      }
    }
    w.constructs().push_back(std::move(c));
  }
}

}  // namespace

std::string_view workload_name(WorkloadKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<WorkloadKind> parse_workload(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<WorkloadKind>(i);
  }
  return std::nullopt;
}

void validate(const WorkloadSpec& spec) {
  if (spec.scale != 1 && spec.scale != 2 && spec.scale != 4) {
    throw ConfigError(fmt::format("scale must be one of 1, 2, 4 (got {})", spec.scale));
  }
  if (spec.bot_count < 0) throw ConfigError("bot_count must not be negative");
  if (spec.lag_clocks < 1) throw ConfigError("lag_clocks must be positive");
  if (spec.lag_half_period < 1) throw ConfigError("lag_half_period must be positive");
}

WorkloadSpec parse_world_ref(std::string_view text) {
  WorkloadSpec spec;
  std::vector<std::string_view> parts;
  while (true) {
    const auto colon = text.find(':');
    parts.push_back(text.substr(0, colon));
    if (colon == std::string_view::npos) break;
    text.remove_prefix(colon + 1);
  }
  if (parts.size() > 3) throw ConfigError("world reference must be kind[:scale[:seed]]");
  const auto kind = parse_workload(parts[0]);
  if (!kind) throw ConfigError(fmt::format("unknown workload '{}'", parts[0]));
  spec.kind = *kind;
  auto number = [](std::string_view s, auto& out, const char* what) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(fmt::format("bad {} '{}'", what, s));
  };
  if (parts.size() > 1) number(parts[1], spec.scale, "scale");
  if (parts.size() > 2) number(parts[2], spec.seed, "seed");
  validate(spec);
  return spec;
}

std::string world_ref(const WorkloadSpec& spec) {
  return fmt::format("{}:{}:{}", workload_name(spec.kind), spec.scale, spec.seed);
}

world::WorldDims dims_for_scale(int scale) {
  const int tiles_x = scale == 1 ? 1 : 2;
  const int tiles_z = scale == 4 ? 2 : 1;
  const int per = kTileSize / world::kChunkSize;
  return {per * tiles_x, per * tiles_z, world::kDefaultHeight};
}

BlockPos world_spawn(const WorldState& w) {
  return {kSpawnCenter.x, w.column_top(kSpawnCenter.x, kSpawnCenter.z) + 1, kSpawnCenter.z};
}

WorldState build_world(const WorkloadSpec& spec) {
  validate(spec);
  WorldState w(dims_for_scale(spec.scale), spec.seed);
  build_tile(w, spec);
  const int tiles_x = w.dims().size_x() / kTileSize;
  const int tiles_z = w.dims().size_z() / kTileSize;
  int tile = 0;
  for (int tz = 0; tz < tiles_z; ++tz) {
    for (int tx = 0; tx < tiles_x; ++tx) {
      if (tx == 0 && tz == 0) continue;
      copy_tile(w, ++tile, {tx * kTileSize, 0, tz * kTileSize});
    }
  }
  return w;
}

}  // namespace meterstick::workloads
