// SPDX-License-Identifier: Apache-2.0
#include "meterstick/kernels/explosion.hpp"

#include <cmath>

namespace meterstick::kernels {

using world::Entity;
using world::Vec3;
using world::WorldState;

namespace {

constexpr double kHalfWidth = 0.3;
constexpr double kHeight = 0.9;

bool ray_clear(const WorldState& w, const Vec3& from, const Vec3& to, double step, std::uint64_t& steps) {
  const Vec3 d = to - from;
  const double len = d.length();
  const int n = static_cast<int>(std::floor(len / step));
  const auto target = world::cell_of(to);
  for (int i = 1; i <= n; ++i) {
    const Vec3 p = from + d * (i * step / len);
    ++steps;
    const auto c = world::cell_of(p);
    if (c == target) break;
    if (w.solid(c)) return false;
  }
  return true;
}

void blast_one(Entity& e, const WorldState& w, const Vec3& center, double reach, std::uint64_t& affected,
               std::uint64_t& steps) {
  const Vec3 rel = e.pos - center;
  const double d = rel.length();
  if (d >= reach) return;
  const double exp = exposure(w, center, e.pos, steps);
  const double impact = (1.0 - d / reach) * exp * w.params().knockback;
  ++affected;
  if (d < 1e-9 || impact <= 0) return;
  e.vel = e.vel + rel * (impact / d);
}

}  // namespace

double exposure(const WorldState& w, const Vec3& center, const Vec3& pos, std::uint64_t& steps) {
  const int k = std::max(1, w.params().exposure_samples);
  int clear = 0;
  for (int ix = 0; ix < k; ++ix) {
    for (int iy = 0; iy < k; ++iy) {
      for (int iz = 0; iz < k; ++iz) {
        const double fx = k == 1 ? 0.5 : static_cast<double>(ix) / (k - 1);
        const double fy = k == 1 ? 0.5 : static_cast<double>(iy) / (k - 1);
        const double fz = k == 1 ? 0.5 : static_cast<double>(iz) / (k - 1);
        const Vec3 sample{pos.x - kHalfWidth + 2 * kHalfWidth * fx, pos.y + 0.05 + (kHeight - 0.1) * fy,
                          pos.z - kHalfWidth + 2 * kHalfWidth * fz};
        clear += ray_clear(w, sample, center, w.params().ray_step, steps);
      }
    }
  }
  return static_cast<double>(clear) / (k * k * k);
}

BlastTotals apply_blast(std::span<Entity> entities, const WorldState& w, const Vec3& center, Exec exec) {
  const double reach = 2.0 * w.params().blast_radius;
  const auto n = static_cast<std::int64_t>(entities.size());
  std::uint64_t affected = 0;
  std::uint64_t steps = 0;
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) blast_one(entities[i], w, center, reach, affected, steps);
  } else {
#pragma omp parallel for schedule(dynamic, 32) reduction(+ : affected, steps) if (n > 64)
    for (std::int64_t i = 0; i < n; ++i) blast_one(entities[i], w, center, reach, affected, steps);
  }
  return {affected, steps};
}

}  // namespace meterstick::kernels
