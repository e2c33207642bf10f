// SPDX-License-Identifier: Apache-2.0
#include "meterstick/common/digest.hpp"

#include <fmt/format.h>

#include <fstream>

#include "meterstick/common/error.hpp"

namespace meterstick {

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  Fnv1a h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.bytes(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.get();
}

}  // namespace meterstick
