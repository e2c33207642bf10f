// SPDX-License-Identifier: Apache-2.0
#include "meterstick/kernels/push.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace meterstick::kernels {

using world::Entity;
using world::Vec3;

namespace {

/// Contribution of j to i, or false if they do not touch.
bool contribution(const Entity& a, const Entity& b, const world::WorldParams& p, Vec3& dv) {
  const double dx = a.pos.x - b.pos.x;
  const double dy = a.pos.y - b.pos.y;
  const double dz = a.pos.z - b.pos.z;
  const double d2 = dx * dx + dy * dy + dz * dz;
  if (d2 >= p.push_radius * p.push_radius) return false;
  const double h = std::hypot(dx, dz);
  const double overlap = 1.0 - std::sqrt(d2) / p.push_radius;
  if (h > 1e-12) {
    dv.x += dx / h * p.push_strength * overlap;
    dv.z += dz / h * p.push_strength * overlap;
  } else {
    // Exactly stacked: split deterministically along x by id order.
    dv.x += (a.id < b.id ? -1.0 : 1.0) * p.push_strength * overlap;
  }
  return true;
}

std::int64_t cell_key(double v, double size) { return static_cast<std::int64_t>(std::floor(v / size)); }

std::uint64_t grid_key(std::int64_t x, std::int64_t y, std::int64_t z) {
  return (static_cast<std::uint64_t>(x & 0x1fffff) << 42) | (static_cast<std::uint64_t>(y & 0x1fffff) << 21) |
         static_cast<std::uint64_t>(z & 0x1fffff);
}

}  // namespace

PushTotals apply_push(std::span<Entity> entities, const world::WorldParams& p, Exec exec) {
  const auto n = static_cast<std::int64_t>(entities.size());
  std::vector<Vec3> dv(static_cast<std::size_t>(n));
  std::uint64_t checked = 0;
  std::uint64_t contacts = 0;

  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < n; ++j) {
        if (i == j) continue;
        ++checked;
        contacts += contribution(entities[i], entities[j], p, dv[i]);
      }
    }
  } else {
    const double size = std::max(p.push_radius, 1e-3);
    std::unordered_map<std::uint64_t, std::vector<std::int64_t>> grid;
    grid.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& e = entities[i];
      grid[grid_key(cell_key(e.pos.x, size), cell_key(e.pos.y, size), cell_key(e.pos.z, size))].push_back(i);
    }
#pragma omp parallel reduction(+ : checked, contacts)
    {
      std::vector<std::int64_t> near;
#pragma omp for schedule(dynamic, 64)
      for (std::int64_t i = 0; i < n; ++i) {
        const auto& e = entities[i];
        const auto cx = cell_key(e.pos.x, size);
        const auto cy = cell_key(e.pos.y, size);
        const auto cz = cell_key(e.pos.z, size);
        near.clear();
        for (int ox = -1; ox <= 1; ++ox) {
          for (int oy = -1; oy <= 1; ++oy) {
            for (int oz = -1; oz <= 1; ++oz) {
              auto it = grid.find(grid_key(cx + ox, cy + oy, cz + oz));
              if (it == grid.end()) continue;
              near.insert(near.end(), it->second.begin(), it->second.end());
            }
          }
        }
        std::sort(near.begin(), near.end());
        for (auto j : near) {
          if (j == i) continue;
          ++checked;
          contacts += contribution(e, entities[j], p, dv[i]);
        }
      }
    }
  }
  for (std::int64_t i = 0; i < n; ++i) {
    entities[i].vel.x += dv[i].x;
    entities[i].vel.z += dv[i].z;
  }
  return {checked, contacts / 2};
}

}  // namespace meterstick::kernels
