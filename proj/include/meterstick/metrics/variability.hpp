// SPDX-License-Identifier: Apache-2.0
// Variability Index and trace-level statistics. Pure functions; safe to call
// concurrently.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "meterstick/metrics/tick.hpp"

namespace meterstick::metrics {

/// A tick is overloaded when its compute time strictly exceeds the budget `b`.
constexpr bool is_overloaded(std::int64_t busy_ns, std::int64_t b_ns) { return busy_ns > b_ns; }

/// Expected tick count of a window: floor(wall / b).
std::int64_t expected_ticks(std::int64_t wall_duration_ns, std::int64_t b_ns);

/// Normalized cycle-to-cycle jitter of tick durations:
///
///   sum_{n=1}^{N_a-1} |max(b, t_n) - max(b, t_{n-1})|  /  (N_e * 2b)
///
/// with t_n the busy time of tick n and N_e = floor(wall / b). The first tick
/// contributes a difference of zero. Results above 1 are clamped and logged.
/// Throws meterstick::Error for an empty trace or a window shorter than `b`.
double compute_vi(const TickTrace& trace, std::int64_t b_ns);

/// Same value as compute_vi, fed one busy duration at a time. The jitter sum is
/// kept as an exact integer so the result matches the batch evaluation bit for bit.
class VariabilityStream {
 public:
  explicit VariabilityStream(std::int64_t b_ns);

  void push(std::int64_t busy_ns);

  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t jitter_sum_ns() const noexcept { return sum_; }

  /// VI over the ticks pushed so far for a window of `wall_duration_ns`.
  double value(std::int64_t wall_duration_ns) const;

 private:
  std::int64_t b_ns_;
  std::int64_t prev_ = 0;
  std::uint64_t sum_ = 0;
  std::uint64_t count_ = 0;
};

/// Shared final step of both VI routes.
double vi_from_sum(std::uint64_t jitter_sum_ns, std::int64_t wall_duration_ns, std::int64_t b_ns);

struct VariabilityReport {
  double vi = 0.0;
  double mean_busy_ns = 0.0;
  std::int64_t median_busy_ns = 0;
  std::int64_t p95_busy_ns = 0;
  std::int64_t max_busy_ns = 0;
  double overloaded_tick_fraction = 0.0;
  std::int64_t overload_threshold_ns = 0;
  std::size_t tick_count = 0;
};

/// Nearest-rank percentile of an ascending range: element ceil(p/100 * n), 1-based.
std::int64_t nearest_rank(std::span<const std::int64_t> sorted, double percentile);

VariabilityReport summarize_trace(const TickTrace& trace, std::int64_t b_ns);

/// Busy-time-weighted average of per-tick shares. Output sums to 1.
/// Throws meterstick::Error("no computation recorded") when every tick is idle.
ComponentShares component_shares(std::span<const TickRecord> ticks);

inline ComponentShares component_shares(const TickTrace& trace) { return component_shares(trace.ticks); }

}  // namespace meterstick::metrics
