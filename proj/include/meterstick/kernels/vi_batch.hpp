// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "meterstick/kernels/exec.hpp"
#include "meterstick/metrics/variability.hpp"

namespace meterstick::kernels {

/// VI of many traces at once (one per iteration). Each trace is independent;
/// results are identical under both execution policies.
std::vector<double> compute_vi_batch(std::span<const metrics::TickTrace> traces, std::int64_t b_ns, Exec exec);

}  // namespace meterstick::kernels
