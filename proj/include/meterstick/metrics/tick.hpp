// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "meterstick/common/time.hpp"

namespace meterstick::metrics {

/// Where a tick's compute time went.
enum class ComponentKind : std::uint8_t {
  player_handling,
  terrain_rules,
  entities,
  persistence,
  networking,
  other,
};

inline constexpr std::size_t kComponentCount = 6;

inline constexpr std::array<ComponentKind, kComponentCount> kAllComponents = {
    ComponentKind::player_handling, ComponentKind::terrain_rules, ComponentKind::entities,
    ComponentKind::persistence,     ComponentKind::networking,    ComponentKind::other,
};

std::string_view component_name(ComponentKind kind);
std::optional<ComponentKind> parse_component(std::string_view name);

/// Fraction of busy time per component, indexed by ComponentKind.
using ComponentShares = std::array<double, kComponentCount>;

inline double& share_of(ComponentShares& s, ComponentKind k) { return s[static_cast<std::size_t>(k)]; }
inline double share_of(const ComponentShares& s, ComponentKind k) { return s[static_cast<std::size_t>(k)]; }

/// One game-loop iteration. `busy_ns` excludes the wait for the next schedule slot.
struct TickRecord {
  std::uint64_t index = 0;
  std::int64_t start_ns = 0;
  std::int64_t busy_ns = 0;
  ComponentShares shares{};

  friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

inline constexpr std::int64_t kDefaultTickPeriodNs = ms_to_ns(50);

/// Ticks observed in one measurement window. `wall_duration_ns` runs from the
/// first tick start to the window end.
struct TickTrace {
  std::vector<TickRecord> ticks;
  std::int64_t wall_duration_ns = 0;
  std::int64_t tick_period_ns = kDefaultTickPeriodNs;
};

}  // namespace meterstick::metrics
