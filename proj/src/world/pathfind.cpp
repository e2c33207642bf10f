// SPDX-License-Identifier: Apache-2.0
#include "meterstick/world/pathfind.hpp"

#include <algorithm>
#include <cstdlib>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace meterstick::world {

bool walkable(const WorldState& world, BlockPos p) {
  return world.in_bounds(p) && world.block(p).kind == BlockKind::air && p.y > 0 && world.solid(p.below());
}

namespace {

int heuristic(BlockPos a, BlockPos b) {
  const int horizontal = std::abs(a.x - b.x) + std::abs(a.z - b.z);
  return std::max(horizontal, std::abs(a.y - b.y));
}

struct Node {
  int f;
  int h;
  std::uint64_t seq;
  std::uint64_t key;
  bool operator>(const Node& o) const { return std::tie(f, h, seq) > std::tie(o.f, o.h, o.seq); }
};

}  // namespace

PathResult find_path(const WorldState& world, BlockPos from, BlockPos to, int max_expansions,
                     std::vector<std::uint8_t>* read_chunks) {
  PathResult result;
  if (from == to) {
    result.path = std::vector<BlockPos>{};
    return result;
  }
  auto mark = [&](BlockPos p) {
    if (read_chunks && world.in_bounds(p)) (*read_chunks)[world.chunk_index(p)] = 1;
  };
  mark(to);
  if (!walkable(world, to)) return result;

  struct Info {
    int g;
    std::uint64_t parent;
    bool closed;
  };
  std::unordered_map<std::uint64_t, Info> info;
  std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
  std::uint64_t seq = 0;
  const auto start = pack(from);
  info[start] = {0, start, false};
  open.push({heuristic(from, to), heuristic(from, to), seq++, start});

  static constexpr int kDy[3] = {0, 1, -1};
  while (!open.empty()) {
    const Node n = open.top();
    open.pop();
    auto& cur = info[n.key];
    if (cur.closed) continue;
    cur.closed = true;
    const BlockPos p = unpack(n.key);
    if (p == to) {
      std::vector<BlockPos> path;
      for (auto k = n.key; k != start; k = info[k].parent) path.push_back(unpack(k));
      std::reverse(path.begin(), path.end());
      result.path = std::move(path);
      return result;
    }
    if (result.expansions >= static_cast<std::uint64_t>(max_expansions)) return result;
    ++result.expansions;
    const int g = cur.g;
    for (const auto& off : kHorizontalOffsets) {
      for (int dy : kDy) {
        const BlockPos q{p.x + off.x, p.y + dy, p.z + off.z};
        mark(q);
        if (!walkable(world, q)) continue;
        const auto key = pack(q);
        auto it = info.find(key);
        if (it != info.end() && (it->second.closed || it->second.g <= g + 1)) continue;
        info[key] = {g + 1, n.key, false};
        const int h = heuristic(q, to);
        open.push({g + 1 + h, h, seq++, key});
      }
    }
  }
  return result;
}

}  // namespace meterstick::world
