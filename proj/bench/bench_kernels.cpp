// SPDX-License-Identifier: Apache-2.0
// Serial reference vs parallel kernel, same inputs. The second argument of
// every benchmark selects the route: 0 serial, 1 parallel.
#include <benchmark/benchmark.h>

#include "meterstick/common/rng.hpp"
#include "meterstick/kernels/explosion.hpp"
#include "meterstick/kernels/motion.hpp"
#include "meterstick/kernels/pathing.hpp"
#include "meterstick/kernels/push.hpp"
#include "meterstick/kernels/vi_batch.hpp"
#include "meterstick/world/pathfind.hpp"

using namespace meterstick;
using namespace meterstick::world;
namespace k = meterstick::kernels;

namespace {

k::Exec exec_of(const benchmark::State& state) { return state.range(1) ? k::Exec::parallel : k::Exec::serial; }

WorldState rubble_world() {
  WorldState w({4, 4, 32}, 3);
  Rng rng(3);
  for (int z = 0; z < 64; ++z) {
    for (int x = 0; x < 64; ++x) {
      const int h = 1 + static_cast<int>(uniform_below(rng, 3));
      for (int y = 0; y < h; ++y) w.set_block_raw({x, y, z}, {BlockKind::stone, 0});
      if (uniform_below(rng, 10) == 0) w.set_block_raw({x, h, z}, {BlockKind::water, 3});
    }
  }
  return w;
}

std::vector<Entity> crowd(std::size_t n) {
  Rng rng(5);
  std::vector<Entity> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& e = out[i];
    e.id = i + 1;
    e.kind = EntityKind::item;
    e.payload = 2;
    e.pos = {8 + 48 * uniform_unit(rng), 4 + 4 * uniform_unit(rng), 8 + 48 * uniform_unit(rng)};
    e.vel = {uniform_unit(rng) - 0.5, 0.0, uniform_unit(rng) - 0.5};
  }
  return out;
}

void BM_Motion(benchmark::State& state) {
  const auto w = rubble_world();
  const auto start = crowd(static_cast<std::size_t>(state.range(0)));
  std::vector<k::MotionOutcome> out(start.size());
  for (auto _ : state) {
    state.PauseTiming();
    auto ents = start;
    state.ResumeTiming();
    benchmark::DoNotOptimize(k::integrate_motion(ents, w, out, exec_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Push(benchmark::State& state) {
  WorldParams params;
  const auto start = crowd(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    state.PauseTiming();
    auto ents = start;
    state.ResumeTiming();
    benchmark::DoNotOptimize(k::apply_push(ents, params, exec_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Blast(benchmark::State& state) {
  const auto w = rubble_world();
  auto ents = crowd(static_cast<std::size_t>(state.range(0)));
  for (auto& e : ents) e.pos = {30 + (e.pos.x - 32) / 8, e.pos.y, 30 + (e.pos.z - 32) / 8};
  for (auto _ : state) benchmark::DoNotOptimize(k::apply_blast(ents, w, {30, 5, 30}, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Paths(benchmark::State& state) {
  const auto w = rubble_world();
  Rng rng(9);
  std::vector<k::PathRequest> req;
  std::vector<BlockPos> open;
  for (int z = 0; z < 64; ++z)
    for (int x = 0; x < 64; ++x)
      if (walkable(w, {x, w.column_top(x, z) + 1, z})) open.push_back({x, w.column_top(x, z) + 1, z});
  for (int i = 0; i < state.range(0); ++i) {
    req.push_back({open[uniform_below(rng, open.size())], open[uniform_below(rng, open.size())]});
  }
  std::vector<PathResult> res(req.size());
  for (auto _ : state) benchmark::DoNotOptimize(k::find_paths(w, req, res, 4096, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ViBatch(benchmark::State& state) {
  Rng rng(11);
  const std::int64_t b = metrics::kDefaultTickPeriodNs;
  std::vector<metrics::TickTrace> traces(static_cast<std::size_t>(state.range(0)));
  for (auto& t : traces) {
    std::int64_t start = 0;
    for (std::uint64_t i = 0; i < 1200; ++i) {
      metrics::TickRecord r;
      r.index = i;
      r.start_ns = start;
      r.busy_ns = static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(3 * b)));
      start += std::max(r.busy_ns, b);
      t.ticks.push_back(r);
    }
    t.wall_duration_ns = start;
  }
  for (auto _ : state) benchmark::DoNotOptimize(k::compute_vi_batch(traces, b, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Motion)->ArgsProduct({{1000, 10000, 40000}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Push)->ArgsProduct({{500, 2000}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Blast)->ArgsProduct({{200, 2000}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Paths)->ArgsProduct({{16, 128}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ViBatch)->ArgsProduct({{64, 512}, {0, 1}})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
