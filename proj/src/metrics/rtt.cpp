// SPDX-License-Identifier: Apache-2.0
#include "meterstick/metrics/rtt.hpp"

#include <algorithm>
#include <vector>

#include "meterstick/common/error.hpp"
#include "meterstick/metrics/variability.hpp"

namespace meterstick::metrics {

RttClassification classify_rtt(std::span<const RttSample> samples) {
  if (samples.empty()) throw Error("no rtt samples");
  RttClassification c;
  std::vector<std::int64_t> rtts;
  rtts.reserve(samples.size());
  long double total = 0;
  std::size_t noticeable = 0;
  std::size_t unplayable = 0;
  for (const auto& s : samples) {
    rtts.push_back(s.rtt_ns);
    total += s.rtt_ns;
    if (s.rtt_ns > kNoticeableRttNs) ++noticeable;
    if (s.rtt_ns > kUnplayableRttNs) ++unplayable;
  }
  std::sort(rtts.begin(), rtts.end());
  const auto n = static_cast<double>(rtts.size());
  c.fraction_noticeable = static_cast<double>(noticeable) / n;
  c.fraction_unplayable = static_cast<double>(unplayable) / n;
  c.mean_ns = static_cast<double>(total / static_cast<long double>(rtts.size()));
  c.median_ns = nearest_rank(rtts, 50.0);
  c.max_ns = rtts.back();
  return c;
}

}  // namespace meterstick::metrics
