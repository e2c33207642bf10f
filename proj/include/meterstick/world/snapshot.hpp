// SPDX-License-Identifier: Apache-2.0
// Versioned binary world snapshot, plus a CSV dump for inspection.
#pragma once

#include <iosfwd>
#include <string>

#include "meterstick/world/world_state.hpp"

namespace meterstick::world {

inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(std::ostream& out, const WorldState& world);
/// Throws meterstick::FormatError on malformed input.
WorldState read_snapshot(std::istream& in);

void save_snapshot(const std::string& path, const WorldState& world);
WorldState load_snapshot(const std::string& path);

/// `x,y,z,kind,aux` for every non-air cell.
void write_block_csv(std::ostream& out, const WorldState& world);
/// `id,kind,x,y,z,vx,vy,vz,payload`.
void write_entity_csv(std::ostream& out, const WorldState& world);

}  // namespace meterstick::world
