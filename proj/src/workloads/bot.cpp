// SPDX-License-Identifier: Apache-2.0
#include "meterstick/workloads/bot.hpp"

#include <array>

namespace meterstick::workloads {

server::PlayerAction bot_behavior_step(Bot& bot, Rng& rng) {
  static constexpr std::array<std::array<int, 2>, 4> kDirs = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  ++bot.actions;
  server::PlayerAction a;
  if (bot.probe_every != 0 && bot.actions % bot.probe_every == 0) {
    a.kind = server::ActionKind::chat;
    return a;  // the session fills in nonce and text
  }
  const auto& d = kDirs[uniform_below(rng, kDirs.size())];
  int dx = d[0];
  int dz = d[1];
  if (!bot.inside(bot.x + dx, bot.z + dz)) {
    dx = -dx;
    dz = -dz;
  }
  bot.x += dx;
  bot.z += dz;
  a.kind = server::ActionKind::move;
  a.dx = dx;
  a.dz = dz;
  return a;
}

}  // namespace meterstick::workloads
