// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "meterstick/kernels/exec.hpp"
#include "meterstick/world/pathfind.hpp"

namespace meterstick::kernels {

struct PathRequest {
  world::BlockPos from;
  world::BlockPos to;
};

/// Solves independent requests against a read-only world. When `read_chunks`
/// is given, it receives the union of chunks every search touched.
std::uint64_t find_paths(const world::WorldState& w, std::span<const PathRequest> requests,
                         std::span<world::PathResult> results, int max_expansions, Exec exec,
                         std::vector<std::uint8_t>* read_chunks = nullptr);

}  // namespace meterstick::kernels
