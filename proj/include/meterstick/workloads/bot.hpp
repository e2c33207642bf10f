// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "meterstick/common/rng.hpp"
#include "meterstick/server/protocol.hpp"

namespace meterstick::workloads {

/// Bounded-random walker confined to a square area around the world spawn.
struct Bot {
  int x = 0;
  int z = 0;
  int center_x = 0;
  int center_z = 0;
  int half_extent = 16;
  /// Every `probe_every` actions is a chat probe instead of a move; 0 disables probes.
  std::uint32_t probe_every = 40;
  std::uint64_t actions = 0;

  bool inside(int px, int pz) const {
    return px >= center_x - half_extent && px < center_x + half_extent && pz >= center_z - half_extent &&
           pz < center_z + half_extent;
  }
};

/// One action: a chat probe on every `probe_every`-th call, otherwise a unit
/// move in one of four directions drawn uniformly. A move that would leave
/// the area is reflected.
server::PlayerAction bot_behavior_step(Bot& bot, Rng& rng);

}  // namespace meterstick::workloads
