// SPDX-License-Identifier: Apache-2.0
#include "meterstick/kernels/exec.hpp"

#include <omp.h>

namespace meterstick::kernels {

namespace {
int g_default_threads = 0;
}

std::string_view exec_name(Exec e) { return e == Exec::serial ? "serial" : "parallel"; }

std::optional<Exec> parse_exec(std::string_view name) {
  if (name == "serial") return Exec::serial;
  if (name == "parallel") return Exec::parallel;
  return std::nullopt;
}

void set_threads(int n) {
  if (g_default_threads == 0) g_default_threads = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : g_default_threads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace meterstick::kernels
