// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "meterstick/common/time.hpp"

namespace meterstick::metrics {

struct RttSample {
  std::int64_t sent_ns = 0;
  std::int64_t received_ns = 0;
  std::int64_t rtt_ns = 0;

  static RttSample between(std::int64_t sent, std::int64_t received) {
    return {sent, received, received - sent};
  }
  friend bool operator==(const RttSample&, const RttSample&) = default;
};

/// Response-time thresholds: above 60 ms a delay is noticeable, above 118 ms the
/// game is unplayable.
inline constexpr std::int64_t kNoticeableRttNs = ms_to_ns(60);
inline constexpr std::int64_t kUnplayableRttNs = ms_to_ns(118);

struct RttClassification {
  double fraction_noticeable = 0.0;
  double fraction_unplayable = 0.0;
  double mean_ns = 0.0;
  std::int64_t median_ns = 0;
  std::int64_t max_ns = 0;
};

/// Throws meterstick::Error on empty input.
RttClassification classify_rtt(std::span<const RttSample> samples);

}  // namespace meterstick::metrics
