// SPDX-License-Identifier: Apache-2.0
#include "meterstick/orchestrator/worker.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "meterstick/common/error.hpp"
#include "meterstick/common/log.hpp"
#include "meterstick/common/process.hpp"
#include "meterstick/common/time.hpp"
#include "meterstick/emulator/emulator.hpp"
#include "meterstick/metrics/trace_io.hpp"
#include "meterstick/orchestrator/sysmetrics.hpp"
#include "meterstick/workloads/worldgen.hpp"

namespace meterstick::orchestrator {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace std::chrono_literals;

std::string iteration_dir(const std::string& data_dir, const std::string& server, const std::string& workload,
                          std::uint32_t iteration) {
  return (fs::path(data_dir) / server / workload / std::to_string(iteration)).string();
}

namespace {

std::string kv_get(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::int64_t kv_int(const KeyValues& kv, const std::string& key, std::int64_t fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t used = 0;
    const auto v = std::stoll(it->second, &used, 0);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ProtocolError("argument " + key + " must be an integer");
  }
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

/// Request/response over the metrics port; returns the JSON lines before `end`.
std::vector<Json> metrics_query(net::TcpStream& conn, const std::string& request) {
  if (!conn.write_line(request)) throw Error("metrics connection lost");
  std::vector<Json> out;
  while (true) {
    const auto line = conn.read_line(5s);
    if (!line) throw Error("metrics request timed out: " + request);
    if (*line == "end") break;
    out.push_back(Json::parse(*line));
  }
  if (out.empty()) throw Error("empty metrics reply");
  if (out.front().value("kind", "") == "error") throw Error("metrics: " + out.front().value("detail", ""));
  return out;
}

class ServerNode final : public Effects {
 public:
  explicit ServerNode(WorkerOptions options) : opt_(std::move(options)) {
    if (opt_.server_exe.empty()) opt_.server_exe = process::self_executable();
  }
  ~ServerNode() override { shutdown(); }

  void set_server(const std::string& name) override {
    if (name != "simserver") throw ConfigError("unsupported server '" + name + "' (available: simserver)");
    server_ = name;
  }

  void set_metrics_endpoint(const std::string& endpoint) override { metrics_ = net::parse_endpoint(endpoint); }

  void set_iteration(std::uint32_t iteration) override { iteration_ = iteration; }

  void initialize(const std::string& arg) override {
    shutdown();
    const auto kv = parse_key_values(arg);
    if (!kv.count("world")) throw ProtocolError("initialize needs world=<kind:scale:seed>");
    const auto spec = workloads::parse_world_ref(kv.at("world"));
    workloads::validate(spec);
    workload_ = std::string(workloads::workload_name(spec.kind));
    world_ = kv.at("world");
    dir_ = iteration_dir(opt_.data_dir, server_, workload_, iteration_);
    fs::remove_all(dir_);
    fs::create_directories(dir_);

    const auto port = kv_int(kv, "port", 25565);
    clock_ = kv_get(kv, "clock", "wall");
    if (clock_ != "wall" && clock_ != "virtual") throw ProtocolError("clock must be wall or virtual");
    std::vector<std::string> argv = {opt_.server_exe,
                                     "simserver",
                                     "--world",
                                     world_,
                                     "--host",
                                     kv_get(kv, "bind", "0.0.0.0"),
                                     "--port",
                                     std::to_string(port),
                                     "--metrics-port",
                                     std::to_string(metrics_.port),
                                     "--tick-ms",
                                     std::to_string(kv_int(kv, "tick_ms", 50)),
                                     "--clock",
                                     clock_,
                                     "--tnt-timer",
                                     std::to_string(kv_int(kv, "tnt_timer", 400)),
                                     "--max-ticks",
                                     std::to_string(kv_int(kv, "max_ticks", 0)),
                                     "--cost-model",
                                     kv_get(kv, "cost", "default")};
    if (kv_int(kv, "hold", 0) != 0) argv.emplace_back("--hold");
    if (kv_int(kv, "concurrent", 0) != 0) argv.emplace_back("--concurrent-phases");

    process::SpawnOptions so;
    so.memory_limit_mb = static_cast<std::uint64_t>(kv_int(kv, "memory_limit_mb", 0));
    so.cpu_affinity = static_cast<std::uint64_t>(kv_int(kv, "cpu_affinity", 0));
    so.log_file = (fs::path(dir_) / "server.log").string();
    child_ = process::spawn(argv, so);
    log::info("server node: started {} (pid {}) for {} iteration {}", world_, child_.pid(), server_, iteration_);

    // The server answers on its metrics port once the world is built.
    const auto deadline = monotonic_ns() + ms_to_ns(kv_int(kv, "startup_ms", 60'000));
    while (true) {
      if (!child_.running()) throw Error("server exited during startup; see " + so.log_file);
      try {
        auto conn = net::TcpStream::connect({"127.0.0.1", metrics_.port}, 1s);
        metrics_query(conn, "status");
        break;
      } catch (const Error&) {
        if (monotonic_ns() > deadline) throw Error("server did not open its metrics port in time");
        std::this_thread::sleep_for(100ms);
      }
    }
    sampler_ = std::make_unique<SystemSampler>(child_.pid(), (fs::path(dir_) / "sysmetrics.csv").string());
  }

  void log_start(const std::string& /*arg*/) override {
    conn_ = net::TcpStream::connect({"127.0.0.1", metrics_.port}, 5s);
    const auto st = metrics_query(conn_, "status").front();
    {
      std::lock_guard lock(mu_);
      window_start_ = st.at("now_ns").get<std::int64_t>();
      window_end_ = std::numeric_limits<std::int64_t>::max();
      tick_ns_ = st.at("tick_ns").get<std::int64_t>();
      next_index_ = st.at("tick_counter").get<std::uint64_t>();
      first_start_ = -1;
      first_index_ = -1;
      logged_ = 0;
      missed_ = 0;
      saw_past_end_ = false;
      logger_error_.clear();
      last_status_ = st;
    }
    bin_.open(fs::path(dir_) / "ticks.bin", std::ios::binary | std::ios::trunc);
    if (!bin_) throw Error("cannot create ticks.bin");
    logging_ = true;
    logger_ = std::thread([this] { logger_loop(); });
  }

  void log_stop(const std::string& arg) override {
    const auto kv = parse_key_values(arg);
    const auto duration_ns = ms_to_ns(kv_int(kv, "duration_ms", 0));
    if (duration_ns <= 0) throw ProtocolError("log_stop needs duration_ms");
    const std::int64_t target = window_start_ + duration_ns;
    const auto give_up = monotonic_ns() + duration_ns + ms_to_ns(120'000);
    net::TcpStream conn = net::TcpStream::connect({"127.0.0.1", metrics_.port}, 5s);
    std::int64_t end = target;
    while (true) {
      if (!child_.running()) throw Error("server exited while logging");
      const auto st = metrics_query(conn, "status").front();
      const auto now = st.at("now_ns").get<std::int64_t>();
      if (now >= target) break;
      if (st.at("finished").get<bool>()) {
        end = now;
        break;
      }
      if (monotonic_ns() > give_up) throw Error("server clock did not reach the end of the window");
      std::this_thread::sleep_for(20ms);
    }
    {
      std::lock_guard lock(mu_);
      window_end_ = end;
    }
    stop_logger();
    // Pick up the ticks that started before the end but finished after it.
    const auto drain_until = monotonic_ns() + ms_to_ns(5000);
    while (monotonic_ns() < drain_until) {
      poll();
      std::lock_guard lock(mu_);
      if (saw_past_end_ || last_status_.value("finished", false) || !logger_error_.empty()) break;
    }
    bin_.close();
    if (!logger_error_.empty()) throw Error("tick logger: " + logger_error_);
  }

  void stop_server() override {
    stop_logger();
    if (bin_.is_open()) bin_.close();
    if (child_.pid() > 0) child_.terminate();
    child_ = process::Child();
    if (sampler_) {
      sysmetrics_samples_ = sampler_->stop().size();
      sampler_.reset();
    }
  }

  void convert(const std::string& /*arg*/) override {
    const auto ticks = metrics::convert_trace_file((fs::path(dir_) / "ticks.bin").string(),
                                                   (fs::path(dir_) / "ticks.csv").string());
    std::lock_guard lock(mu_);
    Json meta{{"server", server_},
              {"workload", workload_},
              {"world", world_},
              {"iteration", iteration_},
              {"clock", clock_},
              {"tick_period_ns", tick_ns_},
              {"window_start_ns", window_start_},
              {"window_end_ns", window_end_},
              {"wall_duration_ns", first_start_ < 0 ? 0 : window_end_ - first_start_},
              {"first_tick_index", first_index_},
              {"ticks", ticks},
              {"missed_ticks", missed_},
              {"detonations", last_status_.value("detonations", 0)},
              {"first_detonation_tick", last_status_.value("first_detonation_tick", -1)},
              {"sysmetrics_samples", sysmetrics_samples_},
              {"status", "complete"}};
    write_json(fs::path(dir_) / "meta.json", meta);
  }

 private:
  void logger_loop() {
    std::unique_lock lock(wake_mu_);
    while (logging_) {
      lock.unlock();
      poll();
      lock.lock();
      wake_.wait_for(lock, 500ms, [&] { return !logging_.load(); });
    }
  }

  /// Appends ring records that fall inside the window to ticks.bin.
  void poll() {
    std::lock_guard poll_lock(poll_mu_);
    try {
      const auto reply = metrics_query(conn_, "snapshot " + std::to_string(next_index_));
      std::lock_guard lock(mu_);
      last_status_ = reply.front();
      for (std::size_t i = 1; i < reply.size(); ++i) {
        const auto& j = reply[i];
        metrics::TickRow row;
        row.iteration = iteration_;
        row.record.index = j.at("index").get<std::uint64_t>();
        row.record.start_ns = j.at("start_ns").get<std::int64_t>();
        row.record.busy_ns = j.at("busy_ns").get<std::int64_t>();
        const auto shares = j.at("shares").get<std::vector<double>>();
        std::copy_n(shares.begin(), std::min(shares.size(), row.record.shares.size()), row.record.shares.begin());
        // Records overwritten in the ring before we read them.
        if (row.record.index > next_index_) missed_ += row.record.index - next_index_;
        next_index_ = row.record.index + 1;
        if (row.record.start_ns >= window_end_) {
          saw_past_end_ = true;
          continue;
        }
        if (row.record.start_ns < window_start_) continue;
        if (first_start_ < 0) {
          first_start_ = row.record.start_ns;
          first_index_ = static_cast<std::int64_t>(row.record.index);
        }
        metrics::write_tick_frame(bin_, row);
        ++logged_;
      }
      bin_.flush();
    } catch (const std::exception& e) {
      std::lock_guard lock(mu_);
      if (logger_error_.empty()) logger_error_ = e.what();
    }
  }

  void stop_logger() {
    {
      std::lock_guard lock(wake_mu_);
      logging_ = false;
    }
    wake_.notify_all();
    if (logger_.joinable()) logger_.join();
  }

  void shutdown() {
    stop_logger();
    if (child_.pid() > 0) child_.terminate();
    if (sampler_) sampler_->stop();
    sampler_.reset();
  }

  WorkerOptions opt_;
  std::string server_ = "simserver";
  net::Endpoint metrics_{"127.0.0.1", 25585};
  std::uint32_t iteration_ = 0;
  std::string workload_;
  std::string world_;
  std::string clock_ = "wall";
  std::string dir_;
  process::Child child_;
  std::unique_ptr<SystemSampler> sampler_;
  std::size_t sysmetrics_samples_ = 0;

  net::TcpStream conn_;
  std::ofstream bin_;
  std::thread logger_;
  std::atomic<bool> logging_{false};
  std::mutex wake_mu_;
  std::condition_variable wake_;
  std::mutex poll_mu_;

  std::mutex mu_;
  std::int64_t window_start_ = 0;
  std::int64_t window_end_ = std::numeric_limits<std::int64_t>::max();
  std::int64_t tick_ns_ = 50'000'000;
  std::uint64_t next_index_ = 0;
  std::int64_t first_start_ = -1;
  std::int64_t first_index_ = -1;
  std::uint64_t logged_ = 0;
  std::uint64_t missed_ = 0;
  bool saw_past_end_ = false;
  std::string logger_error_;
  Json last_status_;
};

class EmulationNode final : public Effects {
 public:
  explicit EmulationNode(WorkerOptions options) : opt_(std::move(options)) {}
  ~EmulationNode() override {
    stop_ = true;
    if (thread_.joinable()) thread_.join();
  }

  void set_server(const std::string& name) override { server_ = name; }
  void set_iteration(std::uint32_t iteration) override { iteration_ = iteration; }

  void connect(const std::string& arg) override {
    const auto kv = parse_key_values(arg);
    if (!kv.count("endpoint")) throw ProtocolError("connect needs endpoint=<host:port>");
    emulator::EmulatorConfig cfg;
    cfg.endpoint = net::parse_endpoint(kv.at("endpoint"));
    cfg.bots = static_cast<int>(kv_int(kv, "bots", 1));
    cfg.behavior = emulator::parse_behavior(kv_get(kv, "behavior", "idle"));
    cfg.duration = std::chrono::milliseconds(kv_int(kv, "duration_ms", 60'000));
    cfg.seed = static_cast<std::uint64_t>(kv_int(kv, "seed", 0));
    cfg.probe_every = static_cast<std::uint32_t>(kv_int(kv, "probe_every", 40));
    if (cfg.bots < 1) throw ProtocolError("bots must be >= 1");
    bots_ = cfg.bots;
    behavior_ = std::string(emulator::behavior_name(cfg.behavior));
    dir_ = iteration_dir(opt_.data_dir, server_, kv_get(kv, "workload", "unknown"), iteration_);
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    bin_.open(fs::path(dir_) / "rtt.bin", std::ios::binary | std::ios::trunc);
    if (!bin_) throw Error("cannot create rtt.bin");
    error_.clear();
    result_ = {};
    stop_ = false;
    thread_ = std::thread([this, cfg] {
      try {
        result_ = emulator::run_emulation(cfg, &stop_, [this](const metrics::RttSample& s) {
          std::lock_guard lock(mu_);
          metrics::write_rtt_frame(bin_, {iteration_, s});
        });
      } catch (const std::exception& e) {
        std::lock_guard lock(mu_);
        error_ = e.what();
      }
    });
  }

  void convert(const std::string& /*arg*/) override {
    if (thread_.joinable()) thread_.join();
    bin_.close();
    if (!error_.empty()) throw Error("emulation failed: " + error_);
    const auto samples = metrics::convert_rtt_file((fs::path(dir_) / "rtt.bin").string(),
                                                   (fs::path(dir_) / "rtt.csv").string());
    write_json(fs::path(dir_) / "probes.json", Json{{"iteration", iteration_},
                                                    {"bots", bots_},
                                                    {"behavior", behavior_},
                                                    {"samples", samples},
                                                    {"censored", result_.censored},
                                                    {"abandoned", result_.abandoned},
                                                    {"actions_sent", result_.actions_sent},
                                                    {"bots_disconnected", result_.bots_disconnected}});
  }

 private:
  WorkerOptions opt_;
  std::string server_ = "simserver";
  std::uint32_t iteration_ = 0;
  std::string dir_;
  int bots_ = 0;
  std::string behavior_;
  std::atomic<bool> stop_{false};
  std::thread thread_;
  std::mutex mu_;
  std::ofstream bin_;
  std::string error_;
  emulator::EmulationResult result_;
};

}  // namespace

std::unique_ptr<Effects> make_server_node(const WorkerOptions& options) { return std::make_unique<ServerNode>(options); }

std::unique_ptr<Effects> make_emulation_node(const WorkerOptions& options) {
  return std::make_unique<EmulationNode>(options);
}

int run_worker(const WorkerOptions& options, const std::atomic<bool>* stop) {
  auto stopped = [&] { return stop != nullptr && stop->load(); };
  net::TcpStream conn;
  const auto deadline = monotonic_ns() + options.connect_timeout.count() * kNsPerMs;
  while (!conn.valid()) {
    try {
      conn = net::TcpStream::connect(options.controller, 2s);
    } catch (const Error& e) {
      if (stopped() || monotonic_ns() > deadline) {
        log::error("worker {}: cannot reach controller {}: {}", options.name, options.controller.to_string(),
                   e.what());
        return 1;
      }
      std::this_thread::sleep_for(200ms);
    }
  }
  auto effects = options.role == Role::server_node ? make_server_node(options) : make_emulation_node(options);
  const ControlMessage hello{Verb::keep_alive,
                             format_key_values({{"role", std::string(role_name(options.role))}, {"name", options.name}})};
  if (!conn.write_line(format_message(hello))) return 1;
  log::info("worker {} ({}) registered with {}", options.name, role_name(options.role),
            options.controller.to_string());

  RunState state;
  while (!stopped()) {
    std::optional<std::string> line;
    try {
      line = conn.read_line(200ms);
    } catch (const Error& e) {
      log::warn("worker {}: controller connection closed: {}", options.name, e.what());
      return 1;
    }
    if (!line || line->empty()) continue;
    auto pending = std::async(std::launch::async, [&, l = *line] { return handle_control_line(state, l, options.role, *effects); });
    while (pending.wait_for(options.heartbeat) != std::future_status::ready) {
      conn.write_line(format_message({Verb::keep_alive, {}}));
    }
    const Transition t = pending.get();
    if (t.reply.verb == Verb::err) log::warn("worker {}: {} -> {}", options.name, *line, format_message(t.reply));
    state = t.state;
    if (!conn.write_line(format_message(t.reply))) return 1;
    if (t.exit) return 0;
  }
  return 1;
}

}  // namespace meterstick::orchestrator
