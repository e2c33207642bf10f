// SPDX-License-Identifier: Apache-2.0
#include "meterstick/orchestrator/controller.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <thread>

#include "meterstick/common/error.hpp"
#include "meterstick/common/log.hpp"
#include "meterstick/common/net.hpp"
#include "meterstick/common/process.hpp"
#include "meterstick/common/time.hpp"
#include "meterstick/orchestrator/control_message.hpp"
#include "meterstick/orchestrator/worker.hpp"

namespace meterstick::orchestrator {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using report::ExperimentConfig;
using report::NodeConfig;
using namespace std::chrono_literals;

std::size_t RunOutcome::count(IterationOutcome::Status s) const {
  std::size_t n = 0;
  for (const auto& it : iterations) n += it.status == s;
  return n;
}

int RunOutcome::exit_code() const { return count(IterationOutcome::Status::failed) == 0 ? 0 : 3; }

std::uint64_t iteration_seed(const ExperimentConfig& config, std::uint32_t iteration) {
  return config.seed + iteration;
}

bool iteration_complete(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "meta.json");
  if (!in) return false;
  try {
    return Json::parse(in).value("status", "") == "complete";
  } catch (const std::exception&) {
    return false;
  }
}

std::string substitute(std::string text, const std::vector<std::pair<std::string, std::string>>& values) {
  for (const auto& [key, value] : values) {
    const std::string token = "{" + key + "}";
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size())) {
      text.replace(pos, token.size(), value);
    }
  }
  return text;
}

namespace {

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing " + path.string());
  return Json::parse(in);
}

struct Link {
  NodeConfig node;
  process::Child child;
  net::TcpStream conn;
  bool alive() const { return conn.valid(); }
};

class Controller {
 public:
  Controller(const ExperimentConfig& config, const ControllerOptions& options)
      : config_(config), options_(options), listener_(net::TcpListener::bind({"0.0.0.0", config.control_port})) {
    if (options_.exe.empty()) options_.exe = process::self_executable();
    for (const auto role : {Role::server_node, Role::emulation_node}) {
      links_[role].node = report::node_for(config_, role);
    }
    fs::create_directories(fs::path(config_.output_dir) / "logs");
    log::info("controller listening on port {}", listener_.port());
  }

  ~Controller() { shutdown(); }

  RunOutcome run() {
    RunOutcome out;
    for (std::size_t si = 0; si < config_.servers.size(); ++si) {
      for (const auto kind : config_.workloads) {
        for (int i = 0; i < config_.iterations; ++i) {
          IterationOutcome it;
          it.key = {config_.servers[si], std::string(workloads::workload_name(kind)), static_cast<std::uint32_t>(i)};
          it.dir = (fs::path(config_.output_dir) / it.key.server / it.key.workload / std::to_string(i)).string();
          if (config_.resume && iteration_complete(it.dir)) {
            it.status = IterationOutcome::Status::skipped;
            log::info("{}/{}/{}: already complete, skipped", it.key.server, it.key.workload, i);
            out.iterations.push_back(std::move(it));
            continue;
          }
          try {
            run_iteration(si, kind, it);
            it.status = IterationOutcome::Status::complete;
            log::info("{}/{}/{}: complete", it.key.server, it.key.workload, i);
          } catch (const std::exception& e) {
            it.status = IterationOutcome::Status::failed;
            it.error = e.what();
            log::error("{}/{}/{}: failed: {}", it.key.server, it.key.workload, i, e.what());
            mark_failed(it);
            abort_iteration();
          }
          out.iterations.push_back(std::move(it));
        }
      }
    }
    return out;
  }

 private:
  void launch(Link& link) {
    const auto& n = link.node;
    const std::string controller = config_.controller_host + ":" + std::to_string(listener_.port());
    if (n.launch == report::LaunchKind::local) {
      process::SpawnOptions so;
      so.log_file = (fs::path(config_.output_dir) / "logs" / (n.name + ".log")).string();
      link.child = process::spawn({options_.exe, "worker", "--role", std::string(role_name(n.role)), "--name", n.name,
                                   "--controller", controller, "--data-dir", n.data_dir},
                                  so);
    } else {
      const auto cmd = substitute(n.command, {{"host", n.host},
                                              {"controller", controller},
                                              {"role", std::string(role_name(n.role))},
                                              {"name", n.name},
                                              {"data_dir", n.data_dir}});
      link.child = process::spawn({"/bin/sh", "-c", cmd});
    }
  }

  /// Launches whichever workers are not connected and waits for them to register.
  void ensure_workers() {
    for (auto& [role, link] : links_) {
      if (!link.alive()) launch(link);
    }
    const auto deadline = monotonic_ns() + options_.register_timeout.count() * kNsPerMs;
    while (!links_[Role::server_node].alive() || !links_[Role::emulation_node].alive()) {
      if (monotonic_ns() > deadline) throw Error("workers did not register in time");
      for (auto& [role, link] : links_) {
        if (!link.alive() && link.child.pid() > 0 && !link.child.running()) {
          throw Error("worker " + link.node.name + " exited before registering");
        }
      }
      auto conn = listener_.accept(200ms);
      if (!conn) continue;
      std::optional<std::string> first;
      try {
        first = conn->read_line(5s);
      } catch (const Error&) {
      }
      if (!first) continue;
      try {
        const auto msg = parse_message(*first);
        const auto kv = parse_key_values(msg.arg);
        const auto role = kv.count("role") ? parse_role(kv.at("role")) : std::nullopt;
        if (msg.verb != Verb::keep_alive || !role || !links_.count(*role)) throw ProtocolError("bad registration");
        auto& link = links_[*role];
        if (link.alive()) throw ProtocolError("role already registered");
        link.conn = std::move(*conn);
        log::info("worker {} registered as {}", kv.count("name") ? kv.at("name") : "?", role_name(*role));
      } catch (const Error& e) {
        log::warn("rejected control connection: {}", e.what());
      }
    }
  }

  /// Sends one message and returns the reply; err replies throw.
  std::string request(Role role, const ControlMessage& msg) {
    auto& link = links_[role];
    if (!link.alive()) throw Error(link.node.name + " is not connected");
    const auto line = format_message(msg);
    if (!link.conn.write_line(line)) {
      link.conn.close();
      throw Error(link.node.name + " disconnected");
    }
    auto last_heard = monotonic_ns();
    while (true) {
      std::optional<std::string> reply;
      try {
        reply = link.conn.read_line(500ms);
      } catch (const Error& e) {
        link.conn.close();
        throw Error(link.node.name + " disconnected during " + std::string(verb_name(msg.verb)));
      }
      if (!reply) {
        if (monotonic_ns() - last_heard > options_.reply_timeout.count() * kNsPerMs) {
          link.conn.close();
          throw Error(link.node.name + " timed out on " + std::string(verb_name(msg.verb)));
        }
        continue;
      }
      last_heard = monotonic_ns();
      ControlMessage m;
      try {
        m = parse_message(*reply);
      } catch (const ProtocolError&) {
        throw Error(link.node.name + " sent a malformed reply: " + *reply);
      }
      if (m.verb == Verb::keep_alive) continue;
      if (m.verb == Verb::ok) return m.arg;
      if (m.verb == Verb::err) {
        throw Error(link.node.name + " rejected " + std::string(verb_name(msg.verb)) + ": " + m.arg);
      }
      throw Error(link.node.name + " sent an unexpected reply: " + *reply);
    }
  }

  void wait_with_keep_alive(std::chrono::milliseconds duration) {
    const auto end = monotonic_ns() + duration.count() * kNsPerMs;
    auto next_ping = monotonic_ns() + options_.keep_alive_period.count() * kNsPerMs;
    while (true) {
      const auto now = monotonic_ns();
      if (now >= end) return;
      if (now >= next_ping) {
        request(Role::server_node, {Verb::keep_alive, {}});
        request(Role::emulation_node, {Verb::keep_alive, {}});
        next_ping = now + options_.keep_alive_period.count() * kNsPerMs;
      }
      std::this_thread::sleep_for(std::chrono::nanoseconds(std::min<std::int64_t>(end - now, 100'000'000)));
    }
  }

  void run_iteration(std::size_t si, workloads::WorkloadKind kind, IterationOutcome& it) {
    ensure_workers();
    const auto& m = links_[Role::server_node].node;
    const auto& y = links_[Role::emulation_node].node;
    const auto seed = iteration_seed(config_, it.key.iteration);
    const auto duration_ms = static_cast<std::int64_t>(config_.duration_s * 1000.0);
    const std::string iter = std::to_string(it.key.iteration);
    fs::remove_all(it.dir);

    workloads::WorkloadSpec spec;
    spec.kind = kind;
    spec.scale = config_.scale;
    spec.seed = seed;

    request(Role::server_node, {Verb::set_server, it.key.server});
    request(Role::server_node,
            {Verb::set_metrics_endpoint, m.host + ":" + std::to_string(report::metrics_port_for(config_, si))});
    request(Role::server_node, {Verb::iter, iter});
    request(Role::server_node,
            {Verb::initialize, format_key_values({{"world", workloads::world_ref(spec)},
                                                  {"port", std::to_string(config_.game_port)},
                                                  {"clock", config_.virtual_clock ? "virtual" : "wall"},
                                                  {"hold", config_.virtual_clock ? "1" : "0"},
                                                  {"tick_ms", std::to_string(config_.tick_ms)},
                                                  {"tnt_timer", std::to_string(config_.tnt_timer_ticks)},
                                                  {"concurrent", config_.concurrent_phases ? "1" : "0"},
                                                  {"cost", config_.cost_model},
                                                  {"memory_limit_mb", std::to_string(config_.memory_limit_mb)},
                                                  {"cpu_affinity", std::to_string(config_.cpu_affinity)}})});
    request(Role::server_node, {Verb::log_start, {}});

    request(Role::emulation_node, {Verb::set_server, it.key.server});
    request(Role::emulation_node, {Verb::iter, iter});
    request(Role::emulation_node,
            {Verb::connect, format_key_values({{"endpoint", m.host + ":" + std::to_string(config_.game_port)},
                                               {"bots", std::to_string(report::bots_for(config_, kind))},
                                               {"behavior", std::string(emulator::behavior_name(
                                                                report::behavior_for(config_, kind)))},
                                               {"duration_ms", std::to_string(duration_ms)},
                                               {"seed", std::to_string(seed)},
                                               {"workload", it.key.workload}})});
    if (options_.on_running) options_.on_running(it.key);

    wait_with_keep_alive(std::chrono::milliseconds(duration_ms));
    request(Role::server_node, {Verb::log_stop, format_key_values({{"duration_ms", std::to_string(duration_ms)}})});
    request(Role::emulation_node, {Verb::convert, {}});
    request(Role::server_node, {Verb::stop_server, {}});
    request(Role::server_node, {Verb::convert, {}});

    fs::create_directories(it.dir);
    const auto m_dir = iteration_dir(m.data_dir, it.key.server, it.key.workload, it.key.iteration);
    const auto y_dir = iteration_dir(y.data_dir, it.key.server, it.key.workload, it.key.iteration);
    retrieve(m, m_dir, {"ticks.csv", "sysmetrics.csv", "meta.json", "server.log"}, it.dir);
    fs::rename(fs::path(it.dir) / "meta.json", fs::path(it.dir) / "server_meta.json");
    retrieve(y, y_dir, {"rtt.csv", "probes.json"}, it.dir);

    Json meta = read_json(fs::path(it.dir) / "server_meta.json");
    meta["rtt"] = read_json(fs::path(it.dir) / "probes.json");
    meta["scale"] = config_.scale;
    meta["seed"] = seed;
    meta["duration_s"] = config_.duration_s;
    meta["status"] = "complete";
    fs::remove(fs::path(it.dir) / "server_meta.json");
    fs::remove(fs::path(it.dir) / "probes.json");
    write_meta(it.dir, meta);
  }

  void retrieve(const NodeConfig& node, const std::string& src_dir, const std::vector<std::string>& files,
                const std::string& dst_dir) {
    for (const auto& f : files) {
      const auto src = (fs::path(src_dir) / f).string();
      const auto dst = (fs::path(dst_dir) / f).string();
      if (node.launch == report::LaunchKind::remote_exec && !node.retrieve.empty()) {
        const auto cmd = substitute(node.retrieve, {{"host", node.host}, {"src", src}, {"dst", dst}});
        if (process::run_shell(cmd) != 0) throw Error("retrieve failed: " + cmd);
      } else {
        fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
      }
    }
  }

  static void write_meta(const std::string& dir, const Json& meta) {
    std::ofstream out(fs::path(dir) / "meta.json");
    out << meta.dump(2) << '\n';
  }

  void mark_failed(const IterationOutcome& it) {
    std::error_code ec;
    fs::create_directories(it.dir, ec);
    write_meta(it.dir, Json{{"server", it.key.server},
                            {"workload", it.key.workload},
                            {"iteration", it.key.iteration},
                            {"status", "failed"},
                            {"error", it.error}});
  }

  /// Best-effort cleanup after a failure: stop the server, then restart both
  /// workers so the next iteration starts from a clean state.
  void abort_iteration() {
    try {
      if (links_[Role::server_node].alive()) request(Role::server_node, {Verb::stop_server, {}});
    } catch (const std::exception& e) {
      log::warn("cleanup: {}", e.what());
    }
    shutdown();
  }

  void shutdown() {
    for (auto& [role, link] : links_) {
      if (link.alive()) {
        link.conn.write_line(format_message({Verb::exit, {}}));
        try {
          link.conn.read_line(2s);
        } catch (const Error&) {
        }
        link.conn.close();
      }
      if (link.child.pid() > 0) {
        if (!link.child.wait(5s)) link.child.terminate();
        link.child = process::Child();
      }
    }
  }

  ExperimentConfig config_;
  ControllerOptions options_;
  net::TcpListener listener_;
  std::map<Role, Link> links_;
};

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, const ControllerOptions& options) {
  Controller controller(config, options);
  return controller.run();
}

}  // namespace meterstick::orchestrator
