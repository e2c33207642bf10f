// SPDX-License-Identifier: Apache-2.0
#include "meterstick/orchestrator/sysmetrics.hpp"

#include <unistd.h>

#include <fstream>
#include <sstream>

#include "meterstick/common/error.hpp"
#include "meterstick/common/log.hpp"
#include "meterstick/common/time.hpp"
#include "meterstick/metrics/trace_io.hpp"

namespace meterstick::orchestrator {

namespace {

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t field_after(const std::string& text, std::string_view key) {
  const auto pos = text.find(key);
  if (pos == std::string::npos) return 0;
  std::istringstream in(text.substr(pos + key.size()));
  std::uint64_t v = 0;
  in >> v;
  return v;
}

}  // namespace

std::optional<ProcCounters> read_proc_counters(pid_t pid) {
  const std::string base = "/proc/" + std::to_string(pid);
  const auto stat = slurp(base + "/stat");
  if (!stat) return std::nullopt;
  // Fields after the parenthesised command name; utime and stime are 14 and 15.
  const auto close = stat->rfind(')');
  if (close == std::string::npos) return std::nullopt;
  std::istringstream in(stat->substr(close + 2));
  std::string state;
  in >> state;
  if (state == "Z" || state == "X") return std::nullopt;
  std::uint64_t v = 0;
  ProcCounters c;
  for (int field = 4; field <= 15 && in >> v; ++field) {
    if (field == 14 || field == 15) c.cpu_ticks += v;
  }
  if (const auto status = slurp(base + "/status")) {
    c.rss_bytes = field_after(*status, "VmRSS:") * 1024;
    c.threads = field_after(*status, "Threads:");
  }
  if (const auto io = slurp(base + "/io")) {
    c.read_bytes = field_after(*io, "read_bytes:");
    c.write_bytes = field_after(*io, "\nwrite_bytes:");
  }
  if (const auto dev = slurp(base + "/net/dev")) {
    std::istringstream lines(*dev);
    std::string line;
    while (std::getline(lines, line)) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::istringstream f(line.substr(colon + 1));
      std::uint64_t x[16] = {};
      for (auto& e : x) f >> e;
      c.net_recv += x[0];
      c.net_sent += x[8];
    }
  }
  return c;
}

void write_sysmetrics_csv_row(std::ostream& out, const MetricSample& s) {
  out << s.t_ns << ',' << metrics::format_double(s.cpu_fraction) << ',' << s.memory_bytes << ',' << s.thread_count
      << ',' << s.disk_read_bytes << ',' << s.disk_write_bytes << ',' << s.net_sent_bytes << ',' << s.net_recv_bytes
      << ',' << s.flag << '\n';
}

SystemSampler::SystemSampler(pid_t pid, std::string csv_path, std::chrono::milliseconds period)
    : pid_(pid), path_(std::move(csv_path)), period_(period) {
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw Error("cannot write " + path_);
  out << kSysmetricsCsvHeader << '\n';
  thread_ = std::thread([this] { run(); });
}

SystemSampler::~SystemSampler() { stop(); }

std::vector<MetricSample> SystemSampler::stop() {
  running_.store(false);
  if (thread_.joinable()) thread_.join();
  return samples_;
}

void SystemSampler::run() {
  std::ofstream out(path_, std::ios::app);
  const double ticks_per_sec = static_cast<double>(::sysconf(_SC_CLK_TCK));
  const std::int64_t period = period_.count() * kNsPerMs;
  std::optional<ProcCounters> prev = read_proc_counters(pid_);
  std::int64_t prev_t = monotonic_ns();
  std::int64_t next = prev_t + period;
  while (running_.load()) {
    // Sleep in short steps so stop() is prompt.
    while (running_.load() && monotonic_ns() < next) {
      std::this_thread::sleep_for(std::chrono::nanoseconds(std::min<std::int64_t>(next - monotonic_ns(), 50 * kNsPerMs)));
    }
    if (!running_.load()) break;
    const std::int64_t now = monotonic_ns();
    const auto cur = read_proc_counters(pid_);
    MetricSample s;
    s.t_ns = now;
    if (!cur) {
      s.flag = "end";
      samples_.push_back(s);
      write_sysmetrics_csv_row(out, s);
      out.flush();
      log::info("sampled process {} is gone", pid_);
      break;
    }
    if (prev) {
      const double cpu_s = static_cast<double>(cur->cpu_ticks - std::min(cur->cpu_ticks, prev->cpu_ticks)) / ticks_per_sec;
      s.cpu_fraction = cpu_s / (static_cast<double>(now - prev_t) / 1e9);
    }
    s.memory_bytes = cur->rss_bytes;
    s.thread_count = cur->threads;
    s.disk_read_bytes = cur->read_bytes;
    s.disk_write_bytes = cur->write_bytes;
    s.net_sent_bytes = cur->net_sent;
    s.net_recv_bytes = cur->net_recv;
    if (now - prev_t > period + period / 2) s.flag = "gap";
    samples_.push_back(s);
    write_sysmetrics_csv_row(out, s);
    out.flush();
    prev = cur;
    prev_t = now;
    next += period;
    if (next < now) next = now + period;
  }
}

}  // namespace meterstick::orchestrator
