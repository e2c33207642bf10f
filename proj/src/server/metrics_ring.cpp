// SPDX-License-Identifier: Apache-2.0
#include "meterstick/server/metrics_ring.hpp"

#include <bit>

#include "meterstick/common/error.hpp"

namespace meterstick::server {

MetricsRing::MetricsRing(std::size_t capacity) : capacity_(capacity), slots_(new Slot[capacity]) {
  if (capacity == 0) throw Error("metrics ring capacity must be positive");
}

void MetricsRing::push(const metrics::TickRecord& r) {
  const std::uint64_t pos = written_.load(std::memory_order_relaxed);
  if (r.index != pos) throw Error("metrics ring records must carry consecutive indices from 0");
  Slot& s = slots_[pos % capacity_];
  const std::uint64_t seq = s.seq.load(std::memory_order_relaxed);
  s.seq.store(seq + 1, std::memory_order_relaxed);
  std::atomic_thread_fence(std::memory_order_release);
  s.words[0].store(r.index, std::memory_order_relaxed);
  s.words[1].store(static_cast<std::uint64_t>(r.start_ns), std::memory_order_relaxed);
  s.words[2].store(static_cast<std::uint64_t>(r.busy_ns), std::memory_order_relaxed);
  for (std::size_t i = 0; i < metrics::kComponentCount; ++i) {
    s.words[3 + i].store(std::bit_cast<std::uint64_t>(r.shares[i]), std::memory_order_relaxed);
  }
  s.seq.store(seq + 2, std::memory_order_release);
  written_.store(pos + 1, std::memory_order_release);
}

bool MetricsRing::load(std::uint64_t position, metrics::TickRecord& out) const {
  const Slot& s = slots_[position % capacity_];
  const std::uint64_t before = s.seq.load(std::memory_order_acquire);
  if (before % 2 != 0) return false;
  out.index = s.words[0].load(std::memory_order_relaxed);
  out.start_ns = static_cast<std::int64_t>(s.words[1].load(std::memory_order_relaxed));
  out.busy_ns = static_cast<std::int64_t>(s.words[2].load(std::memory_order_relaxed));
  for (std::size_t i = 0; i < metrics::kComponentCount; ++i) {
    out.shares[i] = std::bit_cast<double>(s.words[3 + i].load(std::memory_order_relaxed));
  }
  std::atomic_thread_fence(std::memory_order_acquire);
  return s.seq.load(std::memory_order_relaxed) == before;
}

std::vector<metrics::TickRecord> MetricsRing::read(std::uint64_t from) const {
  const std::uint64_t end = written();
  std::uint64_t begin = end > capacity_ ? end - capacity_ : 0;
  std::vector<metrics::TickRecord> out;
  // Positions near the tail may be overwritten while we copy; anything that
  // fails validation is older than what survives, so drop the prefix.
  for (std::uint64_t pos = begin; pos < end; ++pos) {
    metrics::TickRecord r;
    if (!load(pos, r) || r.index != pos) {
      out.clear();
      continue;
    }
    if (r.index >= from) out.push_back(r);
  }
  return out;
}

}  // namespace meterstick::server
