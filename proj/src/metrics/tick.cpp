// SPDX-License-Identifier: Apache-2.0
#include "meterstick/metrics/tick.hpp"

namespace meterstick::metrics {

namespace {
constexpr std::array<std::string_view, kComponentCount> kNames = {
    "player_handling", "terrain_rules", "entities", "persistence", "networking", "other",
};
}  // namespace

std::string_view component_name(ComponentKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<ComponentKind> parse_component(std::string_view name) {
  for (std::size_t i = 0; i < kComponentCount; ++i) {
    if (kNames[i] == name) return static_cast<ComponentKind>(i);
  }
  return std::nullopt;
}

}  // namespace meterstick::metrics
