// SPDX-License-Identifier: Apache-2.0
#include "meterstick/kernels/vi_batch.hpp"

#include <exception>

namespace meterstick::kernels {

std::vector<double> compute_vi_batch(std::span<const metrics::TickTrace> traces, std::int64_t b_ns, Exec exec) {
  const auto n = static_cast<std::int64_t>(traces.size());
  std::vector<double> out(traces.size());
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) out[i] = metrics::compute_vi(traces[i], b_ns);
    return out;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = metrics::compute_vi(traces[i], b_ns);
    } catch (...) {
#pragma omp critical(meterstick_vi_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace meterstick::kernels
