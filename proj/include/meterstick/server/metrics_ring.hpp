// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "meterstick/metrics/tick.hpp"

namespace meterstick::server {

/// Single-writer, multi-reader ring of the most recent tick records. Each
/// slot is a seqlock over atomic words, so readers never block the writer and
/// a slot overwritten mid-read is detected and dropped.
class MetricsRing {
 public:
  static constexpr std::size_t kDefaultCapacity = 4096;

  explicit MetricsRing(std::size_t capacity = kDefaultCapacity);

  std::size_t capacity() const noexcept { return capacity_; }
  /// Records ever pushed.
  std::uint64_t written() const noexcept { return written_.load(std::memory_order_acquire); }

  /// Writer side. Record indices must run 0, 1, 2, ... in push order.
  void push(const metrics::TickRecord& r);

  /// Retained records with index >= `from`, oldest first, contiguous.
  std::vector<metrics::TickRecord> read(std::uint64_t from = 0) const;

 private:
  static constexpr std::size_t kWords = 3 + metrics::kComponentCount;
  struct Slot {
    std::atomic<std::uint64_t> seq{0};
    std::array<std::atomic<std::uint64_t>, kWords> words{};
  };

  bool load(std::uint64_t position, metrics::TickRecord& out) const;

  std::size_t capacity_;
  std::unique_ptr<Slot[]> slots_;
  std::atomic<std::uint64_t> written_{0};
};

}  // namespace meterstick::server
