// SPDX-License-Identifier: Apache-2.0
// Procedural worlds for the environment workloads. Every world is built from
// one 128x128 tile that is copied `scale` times (1x1, 2x1, 2x2 tiles).
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "meterstick/world/world_state.hpp"

namespace meterstick::workloads {

enum class WorkloadKind : std::uint8_t { control, tnt, farm, lag, players };

std::string_view workload_name(WorkloadKind kind);
std::optional<WorkloadKind> parse_workload(std::string_view name);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::control;
  int scale = 1;
  std::uint64_t seed = 0;
  /// players workload only.
  int bot_count = 25;
  /// Ticks between the first join and the TNT timer firing.
  std::uint32_t tnt_timer_ticks = 400;
  /// Oscillators per lag tile; the lag machine's intensity knob.
  int lag_clocks = 192;
  /// Half period of every lag oscillator, in ticks.
  std::uint32_t lag_half_period = 2;
};

/// Parses "kind:scale:seed" (scale and seed optional). Throws ConfigError.
WorkloadSpec parse_world_ref(std::string_view text);
std::string world_ref(const WorkloadSpec& spec);

/// Throws ConfigError unless scale is 1, 2 or 4.
void validate(const WorkloadSpec& spec);

inline constexpr int kTileSize = 128;
inline constexpr int kPlazaSize = 32;

/// Tile grid for a scale: 1 -> 1x1, 2 -> 2x1, 4 -> 2x2.
world::WorldDims dims_for_scale(int scale);

/// Standing cell at the centre of the spawn plaza in tile 0.
world::BlockPos world_spawn(const world::WorldState& world);

world::WorldState build_world(const WorkloadSpec& spec);

/// Fixed features of the tile layout, relative to each tile's origin.
inline constexpr world::BlockPos kCuboidOrigin{72, 0, 72};
inline constexpr int kCuboidSide = 16;
inline constexpr int kCuboidHeight = 14;

}  // namespace meterstick::workloads
