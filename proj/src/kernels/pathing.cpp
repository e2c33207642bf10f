// SPDX-License-Identifier: Apache-2.0
#include "meterstick/kernels/pathing.hpp"

namespace meterstick::kernels {

std::uint64_t find_paths(const world::WorldState& w, std::span<const PathRequest> requests,
                         std::span<world::PathResult> results, int max_expansions, Exec exec,
                         std::vector<std::uint8_t>* read_chunks) {
  const auto n = static_cast<std::int64_t>(requests.size());
  std::uint64_t expansions = 0;
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) {
      results[i] = world::find_path(w, requests[i].from, requests[i].to, max_expansions, read_chunks);
      expansions += results[i].expansions;
    }
    return expansions;
  }
  const std::size_t chunks = w.chunk_count();
#pragma omp parallel reduction(+ : expansions) if (n > 1)
  {
    std::vector<std::uint8_t> local(read_chunks ? chunks : 0, 0);
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) {
      results[i] = world::find_path(w, requests[i].from, requests[i].to, max_expansions,
                                    read_chunks ? &local : nullptr);
      expansions += results[i].expansions;
    }
    if (read_chunks) {
#pragma omp critical(meterstick_path_marks)
      for (std::size_t c = 0; c < chunks; ++c) (*read_chunks)[c] |= local[c];
    }
  }
  return expansions;
}

}  // namespace meterstick::kernels
