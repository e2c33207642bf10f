// SPDX-License-Identifier: Apache-2.0
// Workload intensity grows with scale: median VI over five seeds is
// non-decreasing from scale 1 to 2 to 4 for every tileable workload.
//
// Lag and farm use 10 s windows of virtual time. TNT uses 60 s with the timer
// shortened to 1 s so the whole chain reaction fits; a 10 s window cuts the
// reaction off while it is still ramping up, and a truncated ramp looks the
// same at every scale.
#include <gtest/gtest.h>

#include <algorithm>

#include "meterstick/metrics/variability.hpp"
#include "meterstick/server/offline.hpp"
#include "meterstick/workloads/worldgen.hpp"

using namespace meterstick;
using workloads::WorkloadKind;

namespace {

constexpr int kRuns = 5;

double median_vi(WorkloadKind kind, int scale) {
  const std::int64_t window = (kind == WorkloadKind::tnt ? 60 : 10) * kNsPerSec;
  std::vector<double> vis;
  for (int seed = 1; seed <= kRuns; ++seed) {
    workloads::WorkloadSpec spec;
    spec.kind = kind;
    spec.scale = scale;
    spec.seed = static_cast<std::uint64_t>(seed);
    spec.tnt_timer_ticks = 20;
    const auto run = server::run_virtual(workloads::build_world(spec), server::LoopConfig{}, window);
    vis.push_back(metrics::compute_vi(run.trace, metrics::kDefaultTickPeriodNs));
  }
  std::sort(vis.begin(), vis.end());
  return vis[kRuns / 2];
}

void expect_monotone(WorkloadKind kind) {
  const double v1 = median_vi(kind, 1);
  const double v2 = median_vi(kind, 2);
  const double v4 = median_vi(kind, 4);
  ::testing::Test::RecordProperty("vi_scale1", std::to_string(v1));
  ::testing::Test::RecordProperty("vi_scale2", std::to_string(v2));
  ::testing::Test::RecordProperty("vi_scale4", std::to_string(v4));
  std::printf("%s median VI: %.4f %.4f %.4f\n", std::string(workloads::workload_name(kind)).c_str(), v1, v2, v4);
  EXPECT_GE(v2, v1);
  EXPECT_GE(v4, v2);
}

}  // namespace

TEST(Intensity, LagGrowsWithScale) { expect_monotone(WorkloadKind::lag); }
TEST(Intensity, FarmGrowsWithScale) { expect_monotone(WorkloadKind::farm); }
TEST(Intensity, TntGrowsWithScale) { expect_monotone(WorkloadKind::tnt); }
