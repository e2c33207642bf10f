// SPDX-License-Identifier: Apache-2.0
#include "meterstick/report/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "meterstick/common/error.hpp"
#include "meterstick/server/cost_model.hpp"

namespace meterstick::report {

using orchestrator::Role;

namespace {

const std::set<std::string> kTopKeys = {
    "nodes",    "servers",     "workloads",  "output_dir",       "resume",   "controller_host",
    "control_port", "game_port", "metrics_port", "memory_limit_mb", "cpu_affinity", "bots",
    "behavior", "duration",    "iterations", "scale",            "seed",     "clock",
    "tick_ms",  "concurrent_phases", "tnt_timer_ticks", "cost_model",
};
const std::set<std::string> kNodeKeys = {"name", "host", "role", "launch", "command", "retrieve", "data_dir"};

template <typename T>
T as(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("field '" + field + "' has an invalid value");
  }
}

std::uint64_t as_mask(const YAML::Node& n, const std::string& field) {
  const auto text = as<std::string>(n, field);
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + field + "' must be an integer (hex allowed)");
  }
}

NodeConfig parse_node(const YAML::Node& n, std::size_t i) {
  const std::string at = "nodes[" + std::to_string(i) + "]";
  NodeConfig node;
  if (n.IsScalar()) {
    node.host = n.as<std::string>();
    return node;
  }
  if (!n.IsMap()) throw ConfigError(at + " must be a host string or a map");
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!kNodeKeys.count(key)) throw ConfigError("unknown key '" + at + "." + key + "'");
  }
  if (!n["host"]) throw ConfigError("missing required field '" + at + ".host'");
  node.host = as<std::string>(n["host"], at + ".host");
  if (n["name"]) node.name = as<std::string>(n["name"], at + ".name");
  if (n["role"]) {
    const auto r = orchestrator::parse_role(as<std::string>(n["role"], at + ".role"));
    if (!r || *r == Role::controller) throw ConfigError(at + ".role must be server_node or emulation_node");
    node.role = *r;
  } else {
    node.role = i == 0 ? Role::server_node : Role::emulation_node;
  }
  if (n["launch"]) {
    const auto l = as<std::string>(n["launch"], at + ".launch");
    if (l == "local") {
      node.launch = LaunchKind::local;
    } else if (l == "remote-exec" || l == "remote_exec") {
      node.launch = LaunchKind::remote_exec;
    } else {
      throw ConfigError(at + ".launch must be local or remote-exec");
    }
  }
  if (n["command"]) node.command = as<std::string>(n["command"], at + ".command");
  if (n["retrieve"]) node.retrieve = as<std::string>(n["retrieve"], at + ".retrieve");
  if (n["data_dir"]) node.data_dir = as<std::string>(n["data_dir"], at + ".data_dir");
  return node;
}

template <typename T>
void read_int(const YAML::Node& root, const char* key, T& out) {
  if (root[key]) out = as<T>(root[key], key);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  ExperimentConfig c;
  if (!root || root.IsNull()) throw ConfigError("missing required field 'nodes'");
  if (!root.IsMap()) throw ConfigError("config must be a mapping of keys to values");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!kTopKeys.count(key)) throw ConfigError("unknown key '" + key + "'");
  }
  if (!root["nodes"]) throw ConfigError("missing required field 'nodes'");
  const auto nodes = root["nodes"];
  if (nodes.IsScalar()) {
    c.nodes.push_back(parse_node(nodes, 0));
  } else if (nodes.IsSequence()) {
    for (std::size_t i = 0; i < nodes.size(); ++i) c.nodes.push_back(parse_node(nodes[i], i));
  } else {
    throw ConfigError("field 'nodes' must be a list");
  }
  if (root["servers"]) {
    c.servers.clear();
    for (const auto& s : root["servers"]) c.servers.push_back(as<std::string>(s, "servers"));
  }
  if (root["workloads"]) {
    c.workloads.clear();
    const auto w = root["workloads"];
    auto add = [&](const YAML::Node& n) {
      const auto name = as<std::string>(n, "workloads");
      const auto k = workloads::parse_workload(name);
      if (!k) throw ConfigError("unknown workload '" + name + "' (expected control, tnt, farm, lag or players)");
      c.workloads.push_back(*k);
    };
    if (w.IsScalar()) {
      add(w);
    } else {
      for (const auto& n : w) add(n);
    }
  }
  if (root["output_dir"]) c.output_dir = as<std::string>(root["output_dir"], "output_dir");
  if (root["resume"]) c.resume = as<bool>(root["resume"], "resume");
  if (root["controller_host"]) c.controller_host = as<std::string>(root["controller_host"], "controller_host");
  read_int(root, "control_port", c.control_port);
  read_int(root, "game_port", c.game_port);
  read_int(root, "metrics_port", c.metrics_port);
  read_int(root, "memory_limit_mb", c.memory_limit_mb);
  if (root["cpu_affinity"]) c.cpu_affinity = as_mask(root["cpu_affinity"], "cpu_affinity");
  read_int(root, "bots", c.bots);
  if (root["behavior"]) {
    try {
      c.behavior = emulator::parse_behavior(as<std::string>(root["behavior"], "behavior"));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("field 'behavior': ") + e.what());
    }
  }
  if (root["duration"]) c.duration_s = as<double>(root["duration"], "duration");
  read_int(root, "iterations", c.iterations);
  read_int(root, "scale", c.scale);
  read_int(root, "seed", c.seed);
  if (root["clock"]) {
    const auto clock = as<std::string>(root["clock"], "clock");
    if (clock != "wall" && clock != "virtual") throw ConfigError("field 'clock' must be wall or virtual");
    c.virtual_clock = clock == "virtual";
  }
  read_int(root, "tick_ms", c.tick_ms);
  if (root["concurrent_phases"]) c.concurrent_phases = as<bool>(root["concurrent_phases"], "concurrent_phases");
  read_int(root, "tnt_timer_ticks", c.tnt_timer_ticks);
  if (root["cost_model"]) c.cost_model = as<std::string>(root["cost_model"], "cost_model");
  validate(c);
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate(ExperimentConfig& c) {
  if (c.nodes.empty()) throw ConfigError("missing required field 'nodes'");
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    auto& n = c.nodes[i];
    if (n.host.empty()) throw ConfigError("missing required field 'nodes[" + std::to_string(i) + "].host'");
    if (n.launch == LaunchKind::remote_exec && n.command.empty()) {
      throw ConfigError("nodes[" + std::to_string(i) + "].command is required for remote-exec");
    }
  }
  // A single node hosts both roles.
  if (c.nodes.size() == 1 && c.nodes[0].role == Role::server_node) {
    NodeConfig emu = c.nodes[0];
    emu.role = Role::emulation_node;
    emu.name = c.nodes[0].name.empty() ? "" : c.nodes[0].name + "-emu";
    emu.data_dir = "";
    c.nodes.push_back(emu);
  }
  const auto servers = std::count_if(c.nodes.begin(), c.nodes.end(), [](auto& n) { return n.role == Role::server_node; });
  const auto emus = std::count_if(c.nodes.begin(), c.nodes.end(), [](auto& n) { return n.role == Role::emulation_node; });
  if (servers != 1) throw ConfigError("field 'nodes' needs exactly one server_node (got " + std::to_string(servers) + ")");
  if (emus != 1) throw ConfigError("field 'nodes' needs exactly one emulation_node (got " + std::to_string(emus) + ")");
  for (auto& n : c.nodes) {
    if (n.name.empty()) n.name = n.role == Role::server_node ? "server" : "emulation";
    if (n.data_dir.empty()) n.data_dir = "work/" + n.name;
  }
  if (c.servers.empty()) throw ConfigError("field 'servers' must list at least one server");
  for (const auto& s : c.servers) {
    if (s != "simserver") throw ConfigError("field 'servers': unsupported server '" + s + "' (available: simserver)");
  }
  if (c.workloads.empty()) throw ConfigError("field 'workloads' must list at least one workload");
  if (!(c.duration_s > 0)) throw ConfigError("field 'duration' must be > 0");
  if (c.iterations < 1) throw ConfigError("field 'iterations' must be >= 1");
  if (c.scale != 1 && c.scale != 2 && c.scale != 4) {
    throw ConfigError("field 'scale' must be one of 1, 2, 4 (got " + std::to_string(c.scale) + ")");
  }
  if (c.bots < 1) throw ConfigError("field 'bots' must be >= 1");
  if (c.tick_ms < 1) throw ConfigError("field 'tick_ms' must be >= 1");
  if (c.metrics_port == 0 || c.metrics_port + c.servers.size() - 1 > 65535) {
    throw ConfigError("field 'metrics_port': one port per server must fit below 65536");
  }
  if (c.cpu_affinity == 0) throw ConfigError("field 'cpu_affinity' must select at least one core");
  try {
    server::CostModel::parse(c.cost_model);
  } catch (const Error& e) {
    throw ConfigError(std::string("field 'cost_model': ") + e.what());
  }
}

std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (const auto& n : c.nodes) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << n.name;
    out << YAML::Key << "host" << YAML::Value << n.host;
    out << YAML::Key << "role" << YAML::Value << std::string(orchestrator::role_name(n.role));
    out << YAML::Key << "launch" << YAML::Value << (n.launch == LaunchKind::local ? "local" : "remote-exec");
    if (!n.command.empty()) out << YAML::Key << "command" << YAML::Value << n.command;
    if (!n.retrieve.empty()) out << YAML::Key << "retrieve" << YAML::Value << n.retrieve;
    out << YAML::Key << "data_dir" << YAML::Value << n.data_dir;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "servers" << YAML::Value << YAML::Flow << c.servers;
  std::vector<std::string> wl;
  for (auto k : c.workloads) wl.emplace_back(workloads::workload_name(k));
  out << YAML::Key << "workloads" << YAML::Value << YAML::Flow << wl;
  out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
  out << YAML::Key << "resume" << YAML::Value << c.resume;
  out << YAML::Key << "controller_host" << YAML::Value << c.controller_host;
  out << YAML::Key << "control_port" << YAML::Value << c.control_port;
  out << YAML::Key << "game_port" << YAML::Value << c.game_port;
  out << YAML::Key << "metrics_port" << YAML::Value << c.metrics_port;
  out << YAML::Key << "memory_limit_mb" << YAML::Value << c.memory_limit_mb;
  std::ostringstream mask;
  mask << "0x" << std::hex << std::uppercase << c.cpu_affinity;
  out << YAML::Key << "cpu_affinity" << YAML::Value << mask.str();
  out << YAML::Key << "bots" << YAML::Value << c.bots;
  out << YAML::Key << "behavior" << YAML::Value << std::string(emulator::behavior_name(c.behavior));
  out << YAML::Key << "duration" << YAML::Value << YAML::Precision(17) << c.duration_s;
  out << YAML::Key << "iterations" << YAML::Value << c.iterations;
  out << YAML::Key << "scale" << YAML::Value << c.scale;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "clock" << YAML::Value << (c.virtual_clock ? "virtual" : "wall");
  out << YAML::Key << "tick_ms" << YAML::Value << c.tick_ms;
  out << YAML::Key << "concurrent_phases" << YAML::Value << c.concurrent_phases;
  out << YAML::Key << "tnt_timer_ticks" << YAML::Value << c.tnt_timer_ticks;
  out << YAML::Key << "cost_model" << YAML::Value << c.cost_model;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

const NodeConfig& node_for(const ExperimentConfig& c, Role role) {
  for (const auto& n : c.nodes) {
    if (n.role == role) return n;
  }
  throw ConfigError("no node with role " + std::string(orchestrator::role_name(role)));
}

std::uint16_t metrics_port_for(const ExperimentConfig& c, std::size_t i) {
  return static_cast<std::uint16_t>(c.metrics_port + i);
}

int bots_for(const ExperimentConfig& c, workloads::WorkloadKind kind) {
  return kind == workloads::WorkloadKind::players ? c.bots : 1;
}

emulator::Behavior behavior_for(const ExperimentConfig& c, workloads::WorkloadKind kind) {
  return kind == workloads::WorkloadKind::players ? c.behavior : emulator::Behavior::idle;
}

}  // namespace meterstick::report
