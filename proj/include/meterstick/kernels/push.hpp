// SPDX-License-Identifier: Apache-2.0
// Entity-entity separation. Overlapping entities push each other apart
// horizontally, proportional to the overlap.
#pragma once

#include <cstdint>
#include <span>

#include "meterstick/kernels/exec.hpp"
#include "meterstick/world/params.hpp"
#include "meterstick/world/world_state.hpp"

namespace meterstick::kernels {

struct PushTotals {
  std::uint64_t pairs_checked = 0;
  std::uint64_t contacts = 0;
};

/// serial compares all pairs; parallel bins entities into a cell grid. Both
/// accumulate contributions in ascending neighbor index, so velocities match
/// bit for bit. `pairs_checked` differs between the two.
PushTotals apply_push(std::span<world::Entity> entities, const world::WorldParams& params, Exec exec);

}  // namespace meterstick::kernels
