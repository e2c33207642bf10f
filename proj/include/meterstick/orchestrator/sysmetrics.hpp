// SPDX-License-Identifier: Apache-2.0
// Per-process system metrics from /proc, sampled at 2 Hz.
#pragma once

#include <sys/types.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace meterstick::orchestrator {

/// Cumulative counters are as reported by the kernel; cpu_fraction is the
/// process CPU time over the interval since the previous sample, in cores.
struct MetricSample {
  std::int64_t t_ns = 0;
  double cpu_fraction = 0.0;
  std::uint64_t memory_bytes = 0;
  std::uint64_t thread_count = 0;
  std::uint64_t disk_read_bytes = 0;
  std::uint64_t disk_write_bytes = 0;
  std::uint64_t net_sent_bytes = 0;
  std::uint64_t net_recv_bytes = 0;
  /// "ok"; "gap" when the interval overran by more than half a period;
  /// "end" as the terminal marker once the process is gone.
  std::string flag = "ok";
};

inline constexpr std::string_view kSysmetricsCsvHeader =
    "t_ns,cpu_fraction,memory_bytes,thread_count,disk_read_bytes,disk_write_bytes,net_sent_bytes,"
    "net_recv_bytes,flag";

/// Raw counters of one process; nullopt once it no longer exists.
struct ProcCounters {
  std::uint64_t cpu_ticks = 0;  // utime + stime, in clock ticks
  std::uint64_t rss_bytes = 0;
  std::uint64_t threads = 0;
  std::uint64_t read_bytes = 0;
  std::uint64_t write_bytes = 0;
  std::uint64_t net_sent = 0;
  std::uint64_t net_recv = 0;
};
std::optional<ProcCounters> read_proc_counters(pid_t pid);

void write_sysmetrics_csv_row(std::ostream& out, const MetricSample& s);

/// Samples a process on its own thread and appends rows to a CSV file.
class SystemSampler {
 public:
  SystemSampler(pid_t pid, std::string csv_path, std::chrono::milliseconds period = std::chrono::milliseconds(500));
  SystemSampler(const SystemSampler&) = delete;
  SystemSampler& operator=(const SystemSampler&) = delete;
  ~SystemSampler();

  /// Stops and joins; idempotent. Returns all samples taken.
  std::vector<MetricSample> stop();

 private:
  void run();

  pid_t pid_;
  std::string path_;
  std::chrono::milliseconds period_;
  std::atomic<bool> running_{true};
  std::vector<MetricSample> samples_;
  std::thread thread_;
};

}  // namespace meterstick::orchestrator
