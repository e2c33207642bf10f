// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>

namespace meterstick {

using SteadyClock = std::chrono::steady_clock;

/// Monotonic nanoseconds. Shared by every process on the host (CLOCK_MONOTONIC),
/// so timestamps taken by the server and by a co-located logger compare directly.
inline std::int64_t monotonic_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             SteadyClock::now().time_since_epoch())
      .count();
}

constexpr std::int64_t kNsPerMs = 1'000'000;
constexpr std::int64_t kNsPerSec = 1'000'000'000;

constexpr std::int64_t ms_to_ns(std::int64_t ms) { return ms * kNsPerMs; }

}  // namespace meterstick
