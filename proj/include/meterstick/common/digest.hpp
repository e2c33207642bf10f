// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

namespace meterstick {

/// 64-bit FNV-1a. Used for state and file digests; not cryptographic.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }

  template <typename T>
    requires std::is_arithmetic_v<T> || std::is_enum_v<T>
  void value(T v) {
    bytes(&v, sizeof(v));
  }

  void text(std::string_view s) { bytes(s.data(), s.size()); }

  std::uint64_t get() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a(std::string_view s) {
  Fnv1a h;
  h.text(s);
  return h.get();
}

std::string hex64(std::uint64_t v);

/// Digest of a file's bytes; throws meterstick::Error when unreadable.
std::uint64_t file_digest(const std::string& path);

}  // namespace meterstick
