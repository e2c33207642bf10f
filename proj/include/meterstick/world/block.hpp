// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

namespace meterstick::world {

enum class BlockKind : std::uint8_t {
  air,
  stone,
  soil,
  sand,
  water,
  kelp,
  tnt_block,
  signal_wire,
  signal_source,
  hopper,
  support_sensitive,
};

inline constexpr std::size_t kBlockKindCount = 11;

std::string_view block_name(BlockKind kind);
std::optional<BlockKind> parse_block(std::string_view name);

/// Cells an entity cannot occupy and that support entities standing on them.
constexpr bool is_solid(BlockKind k) {
  switch (k) {
    case BlockKind::air:
    case BlockKind::water:
    case BlockKind::kelp:
    case BlockKind::signal_wire:
      return false;
    default:
      return true;
  }
}

/// Water-filled cells (kelp grows submerged).
constexpr bool is_liquid(BlockKind k) { return k == BlockKind::water || k == BlockKind::kelp; }

/// Largest legal aux value per kind: water level 0-7, signal strength 0-15,
/// kelp growth stage 0-15, hopper item count 0-15; everything else carries none.
constexpr std::uint8_t max_aux(BlockKind k) {
  switch (k) {
    case BlockKind::water:
      return 7;
    case BlockKind::signal_wire:
    case BlockKind::signal_source:
    case BlockKind::kelp:
    case BlockKind::hopper:
      return 15;
    default:
      return 0;
  }
}

struct Block {
  BlockKind kind = BlockKind::air;
  std::uint8_t aux = 0;

  constexpr bool valid() const { return aux <= max_aux(kind); }
  friend constexpr bool operator==(const Block&, const Block&) = default;
};

inline constexpr Block kAir{};

struct BlockPos {
  int x = 0;
  int y = 0;
  int z = 0;

  constexpr BlockPos operator+(const BlockPos& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr BlockPos operator-(const BlockPos& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr BlockPos above() const { return {x, y + 1, z}; }
  constexpr BlockPos below() const { return {x, y - 1, z}; }
  friend constexpr bool operator==(const BlockPos&, const BlockPos&) = default;
  friend constexpr auto operator<=>(const BlockPos&, const BlockPos&) = default;
};

/// Face-adjacent offsets in the order neighbors are enqueued: -x, +x, -y, +y, -z, +z.
inline constexpr std::array<BlockPos, 6> kFaceOffsets = {{
    {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1},
}};

inline constexpr std::array<BlockPos, 4> kHorizontalOffsets = {{
    {-1, 0, 0}, {1, 0, 0}, {0, 0, -1}, {0, 0, 1},
}};

/// Dense 64-bit key; coordinates must be within +-2^20.
constexpr std::uint64_t pack(const BlockPos& p) {
  constexpr std::uint64_t mask = (1ULL << 21) - 1;
  return ((static_cast<std::uint64_t>(p.x + (1 << 20)) & mask) << 42) |
         ((static_cast<std::uint64_t>(p.y + (1 << 20)) & mask) << 21) |
         (static_cast<std::uint64_t>(p.z + (1 << 20)) & mask);
}

constexpr BlockPos unpack(std::uint64_t k) {
  constexpr std::uint64_t mask = (1ULL << 21) - 1;
  return {static_cast<int>((k >> 42) & mask) - (1 << 20), static_cast<int>((k >> 21) & mask) - (1 << 20),
          static_cast<int>(k & mask) - (1 << 20)};
}

constexpr int manhattan(const BlockPos& a, const BlockPos& b) {
  return (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y) +
         (a.z > b.z ? a.z - b.z : b.z - a.z);
}

struct Vec3 {
  double x = 0;
  double y = 0;
  double z = 0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double length() const { return std::sqrt(x * x + y * y + z * z); }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 center_of(const BlockPos& p) { return {p.x + 0.5, p.y + 0.5, p.z + 0.5}; }

/// Standing point on the floor of a cell.
inline Vec3 feet_of(const BlockPos& p) { return {p.x + 0.5, static_cast<double>(p.y), p.z + 0.5}; }

inline BlockPos cell_of(const Vec3& v) {
  return {static_cast<int>(std::floor(v.x)), static_cast<int>(std::floor(v.y)), static_cast<int>(std::floor(v.z))};
}

}  // namespace meterstick::world

template <>
struct std::hash<meterstick::world::BlockPos> {
  std::size_t operator()(const meterstick::world::BlockPos& p) const noexcept {
    return std::hash<std::uint64_t>{}(meterstick::world::pack(p));
  }
};
