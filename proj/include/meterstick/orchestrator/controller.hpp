// SPDX-License-Identifier: Apache-2.0
// Experiment controller. Listens on the control port, launches one server
// node and one emulation node, and drives every (server, workload,
// iteration) through the lifecycle:
//
//   M: set_server, set_metrics_endpoint, iter, initialize, log_start
//   Y: set_server, iter, connect
//   wait for the duration (keep_alive to both)
//   M: log_stop    Y: convert    M: stop_server, convert
//   retrieve into <output_dir>/<server>/<workload>/<iteration>/
//
// Any err reply, timeout or lost worker marks the iteration failed; the
// server is stopped and both workers are restarted before the next one.
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "meterstick/report/config.hpp"

namespace meterstick::orchestrator {

struct IterationKey {
  std::string server;
  std::string workload;
  std::uint32_t iteration = 0;
};

struct ControllerOptions {
  /// Executable providing the `worker` subcommand; empty uses this process's.
  std::string exe;
  std::chrono::milliseconds register_timeout = std::chrono::seconds(30);
  /// Longest silence tolerated while waiting for a reply. Worker heartbeats
  /// reset it.
  std::chrono::milliseconds reply_timeout = std::chrono::seconds(60);
  std::chrono::milliseconds keep_alive_period = std::chrono::seconds(10);
  /// Called once the emulation is running; tests use it to inject faults.
  std::function<void(const IterationKey&)> on_running;
};

struct IterationOutcome {
  IterationKey key;
  enum class Status : std::uint8_t { complete, failed, skipped } status = Status::complete;
  std::string error;
  std::string dir;
};

struct RunOutcome {
  std::vector<IterationOutcome> iterations;
  std::size_t count(IterationOutcome::Status s) const;
  /// 0 when nothing failed, 3 otherwise.
  int exit_code() const;
};

/// Runs every iteration of the experiment. Throws meterstick::Error only if
/// the workers cannot be started at all.
RunOutcome run_experiment(const report::ExperimentConfig& config, const ControllerOptions& options = {});

/// Seed of one iteration's world and bots.
std::uint64_t iteration_seed(const report::ExperimentConfig& config, std::uint32_t iteration);

/// True if <dir>/meta.json records a complete iteration.
bool iteration_complete(const std::string& dir);

/// Replaces {name} placeholders.
std::string substitute(std::string text, const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace meterstick::orchestrator
