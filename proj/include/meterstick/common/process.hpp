// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <sys/types.h>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace meterstick::process {

struct SpawnOptions {
  /// Address-space limit applied in the child; 0 leaves it unlimited.
  std::uint64_t memory_limit_mb = 0;
  /// CPU affinity mask for the child; 0 leaves it unchanged.
  std::uint64_t cpu_affinity = 0;
  /// Redirect stdout/stderr to this file when non-empty.
  std::string log_file;
};

/// A spawned child process. Terminates (SIGTERM, then SIGKILL) on destruction.
class Child {
 public:
  Child() = default;
  explicit Child(pid_t pid) : pid_(pid) {}
  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;
  Child(Child&& o) noexcept;
  Child& operator=(Child&& o) noexcept;
  ~Child();

  pid_t pid() const noexcept { return pid_; }
  bool running();
  /// Exit status once reaped.
  std::optional<int> exit_status() const noexcept { return status_; }

  /// SIGTERM, wait up to `grace`, then SIGKILL. Returns the exit status.
  int terminate(std::chrono::milliseconds grace = std::chrono::seconds(3));
  /// Blocks until the child exits or the timeout expires.
  std::optional<int> wait(std::chrono::milliseconds timeout);
  /// Detach without killing.
  pid_t release() noexcept;

 private:
  bool reap(bool block);

  pid_t pid_ = -1;
  std::optional<int> status_;
};

/// fork+exec of argv[0] (PATH lookup). Throws meterstick::Error on failure.
Child spawn(const std::vector<std::string>& argv, const SpawnOptions& options = {});

/// Runs a shell command line to completion and returns its exit status.
int run_shell(const std::string& command);

/// Absolute path of the running executable.
std::string self_executable();

}  // namespace meterstick::process
