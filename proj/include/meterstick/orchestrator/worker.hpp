// SPDX-License-Identifier: Apache-2.0
// Worker daemons. A worker dials the controller, registers with
// `keep_alive:role=<M|Y> name=<name>`, then executes control messages one
// at a time and answers each with ok or err. While an effect is running it
// sends an unacknowledged `keep_alive` every 10 s.
//
// Artifacts of one iteration land in <data_dir>/<server>/<workload>/<iter>/:
//   server node:     ticks.bin, ticks.csv, sysmetrics.csv, server.log, meta.json
//   emulation node:  rtt.bin, rtt.csv, probes.json
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "meterstick/common/net.hpp"
#include "meterstick/orchestrator/run_state.hpp"

namespace meterstick::orchestrator {

struct WorkerOptions {
  Role role = Role::server_node;
  std::string name = "worker";
  net::Endpoint controller{"127.0.0.1", 25555};
  std::string data_dir = "work";
  /// Executable providing the `simserver` subcommand; empty uses this process's.
  std::string server_exe;
  std::chrono::milliseconds connect_timeout = std::chrono::seconds(30);
  std::chrono::milliseconds heartbeat = std::chrono::seconds(10);
};

/// Effects of the server node: runs the reference server as a child process,
/// polls its metrics port into ticks.bin, samples system metrics.
std::unique_ptr<Effects> make_server_node(const WorkerOptions& options);
/// Effects of the emulation node: runs the player emulator on a thread.
std::unique_ptr<Effects> make_emulation_node(const WorkerOptions& options);

/// Connects, registers and serves until `exit`, disconnect or `stop`.
/// Returns 0 after `exit`, 1 otherwise.
int run_worker(const WorkerOptions& options, const std::atomic<bool>* stop = nullptr);

/// Directory of one iteration's artifacts below a data dir.
std::string iteration_dir(const std::string& data_dir, const std::string& server, const std::string& workload,
                          std::uint32_t iteration);

}  // namespace meterstick::orchestrator
