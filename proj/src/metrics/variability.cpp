// SPDX-License-Identifier: Apache-2.0
#include "meterstick/metrics/variability.hpp"

#include <algorithm>
#include <cmath>

#include "meterstick/common/error.hpp"
#include "meterstick/common/log.hpp"

namespace meterstick::metrics {

namespace {

void check_threshold(std::int64_t b_ns) {
  if (b_ns <= 0) throw Error("overload threshold must be positive");
}

std::uint64_t abs_diff(std::int64_t a, std::int64_t b) {
  return a > b ? static_cast<std::uint64_t>(a - b) : static_cast<std::uint64_t>(b - a);
}

}  // namespace

std::int64_t expected_ticks(std::int64_t wall_duration_ns, std::int64_t b_ns) {
  check_threshold(b_ns);
  if (wall_duration_ns < b_ns) throw Error("window shorter than one tick period");
  return wall_duration_ns / b_ns;
}

double vi_from_sum(std::uint64_t jitter_sum_ns, std::int64_t wall_duration_ns, std::int64_t b_ns) {
  const std::int64_t n_expected = expected_ticks(wall_duration_ns, b_ns);
  const double vi = static_cast<double>(jitter_sum_ns) /
                    (static_cast<double>(n_expected) * 2.0 * static_cast<double>(b_ns));
  if (vi > 1.0) {
    log::warn("variability index {} exceeds 1 (jitter {} ns over {} expected ticks); clamped", vi,
              jitter_sum_ns, n_expected);
    return 1.0;
  }
  return vi;
}

double compute_vi(const TickTrace& trace, std::int64_t b_ns) {
  if (trace.ticks.empty()) throw Error("empty trace");
  check_threshold(b_ns);
  std::uint64_t sum = 0;
  std::int64_t prev = std::max(b_ns, trace.ticks.front().busy_ns);
  for (std::size_t n = 1; n < trace.ticks.size(); ++n) {
    const std::int64_t cur = std::max(b_ns, trace.ticks[n].busy_ns);
    sum += abs_diff(cur, prev);
    prev = cur;
  }
  return vi_from_sum(sum, trace.wall_duration_ns, b_ns);
}

VariabilityStream::VariabilityStream(std::int64_t b_ns) : b_ns_(b_ns) { check_threshold(b_ns); }

void VariabilityStream::push(std::int64_t busy_ns) {
  const std::int64_t cur = std::max(b_ns_, busy_ns);
  if (count_ > 0) sum_ += abs_diff(cur, prev_);
  prev_ = cur;
  ++count_;
}

double VariabilityStream::value(std::int64_t wall_duration_ns) const {
  if (count_ == 0) throw Error("empty trace");
  return vi_from_sum(sum_, wall_duration_ns, b_ns_);
}

std::int64_t nearest_rank(std::span<const std::int64_t> sorted, double percentile) {
  if (sorted.empty()) throw Error("percentile of empty sample");
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

VariabilityReport summarize_trace(const TickTrace& trace, std::int64_t b_ns) {
  if (trace.ticks.empty()) throw Error("empty trace");
  VariabilityReport r;
  r.overload_threshold_ns = b_ns;
  r.tick_count = trace.ticks.size();
  r.vi = compute_vi(trace, b_ns);

  std::vector<std::int64_t> busy;
  busy.reserve(trace.ticks.size());
  long double total = 0;
  std::size_t overloaded = 0;
  for (const auto& t : trace.ticks) {
    busy.push_back(t.busy_ns);
    total += t.busy_ns;
    if (is_overloaded(t.busy_ns, b_ns)) ++overloaded;
  }
  std::sort(busy.begin(), busy.end());
  r.mean_busy_ns = static_cast<double>(total / static_cast<long double>(busy.size()));
  r.median_busy_ns = nearest_rank(busy, 50.0);
  r.p95_busy_ns = nearest_rank(busy, 95.0);
  r.max_busy_ns = busy.back();
  r.overloaded_tick_fraction = static_cast<double>(overloaded) / static_cast<double>(busy.size());
  return r;
}

ComponentShares component_shares(std::span<const TickRecord> ticks) {
  if (ticks.empty()) throw Error("empty trace");
  ComponentShares acc{};
  long double total = 0;
  for (const auto& t : ticks) {
    if (t.busy_ns <= 0) continue;
    total += t.busy_ns;
    for (std::size_t k = 0; k < kComponentCount; ++k) {
      acc[k] += static_cast<double>(t.busy_ns) * t.shares[k];
    }
  }
  if (total <= 0) throw Error("no computation recorded");
  double sum = 0;
  for (double v : acc) sum += v;
  if (sum <= 0) throw Error("no computation recorded");
  for (double& v : acc) v /= sum;
  return acc;
}

}  // namespace meterstick::metrics
