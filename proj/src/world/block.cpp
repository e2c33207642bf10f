// SPDX-License-Identifier: Apache-2.0
#include "meterstick/world/block.hpp"

#include <array>

namespace meterstick::world {

namespace {

constexpr std::array<std::string_view, kBlockKindCount> kNames = {
    "air",         "stone",         "soil",   "sand",          "water", "kelp", "tnt_block",
    "signal_wire", "signal_source", "hopper", "support_sensitive",
};

}  // namespace

std::string_view block_name(BlockKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<BlockKind> parse_block(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<BlockKind>(i);
  }
  return std::nullopt;
}

}  // namespace meterstick::world
