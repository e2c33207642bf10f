// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace meterstick::kernels {

/// serial: the plain reference implementation, kept for equivalence tests.
/// parallel: the optimized OpenMP implementation used by the server.
enum class Exec : std::uint8_t { serial, parallel };

std::string_view exec_name(Exec e);
std::optional<Exec> parse_exec(std::string_view name);

/// Worker threads used by parallel kernels (OpenMP); n <= 0 restores the default.
void set_threads(int n);
int thread_count();

}  // namespace meterstick::kernels
