// SPDX-License-Identifier: Apache-2.0
// Experiment configuration file. YAML, flat keys plus a `nodes` list; see
// docs/formats.md for the grammar. Every key but `nodes` has a default.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meterstick/emulator/emulator.hpp"
#include "meterstick/orchestrator/control_message.hpp"
#include "meterstick/workloads/worldgen.hpp"

namespace meterstick::report {

enum class LaunchKind : std::uint8_t {
  /// Spawn the worker as a child process of the controller.
  local,
  /// Run `command` through the shell; it must start a worker that dials back.
  remote_exec,
};

struct NodeConfig {
  std::string name;
  std::string host;
  orchestrator::Role role = orchestrator::Role::server_node;
  LaunchKind launch = LaunchKind::local;
  /// remote_exec: command template. {host} {controller} {role} {name} {data_dir}
  /// are substituted.
  std::string command;
  /// remote_exec: copies one iteration's files to the controller. {host}
  /// {src} {dst} are substituted. Empty: the data directory is shared.
  std::string retrieve;
  /// Where the worker writes artifacts; default work/<name>.
  std::string data_dir;

  friend bool operator==(const NodeConfig&, const NodeConfig&) = default;
};

struct ExperimentConfig {
  std::vector<NodeConfig> nodes;
  std::vector<std::string> servers{"simserver"};
  std::vector<workloads::WorkloadKind> workloads{workloads::WorkloadKind::control};
  std::string output_dir = "results";
  bool resume = false;
  /// Address the workers dial; the controller listens on control_port.
  std::string controller_host = "127.0.0.1";
  std::uint16_t control_port = 25555;
  std::uint16_t game_port = 25565;
  /// First metrics port; server i of the list uses metrics_port + i, so the
  /// default covers 25585-25635 for up to 51 servers.
  std::uint16_t metrics_port = 25585;
  std::uint64_t memory_limit_mb = 4096;
  std::uint64_t cpu_affinity = 0xFFFFFFFF;
  int bots = 25;
  emulator::Behavior behavior = emulator::Behavior::bounded_random;
  double duration_s = 60.0;
  int iterations = 1;
  int scale = 1;
  std::uint64_t seed = 0;

  // Reference server settings.
  bool virtual_clock = false;
  int tick_ms = 50;
  bool concurrent_phases = false;
  std::uint32_t tnt_timer_ticks = 400;
  std::string cost_model = "default";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
/// Fills derived defaults (node names, roles, data dirs) and checks ranges.
void validate(ExperimentConfig& config);
/// YAML text that parses back to an equal config.
std::string serialize_config(const ExperimentConfig& config);

const NodeConfig& node_for(const ExperimentConfig& config, orchestrator::Role role);
std::uint16_t metrics_port_for(const ExperimentConfig& config, std::size_t server_index);

/// One idle probe player for the environment workloads, the configured bots
/// for the players workload.
int bots_for(const ExperimentConfig& config, workloads::WorkloadKind kind);
emulator::Behavior behavior_for(const ExperimentConfig& config, workloads::WorkloadKind kind);

}  // namespace meterstick::report
