// SPDX-License-Identifier: Apache-2.0
// The networked reference server: the game loop on its own thread at a fixed
// tick rate, a line-protocol game port, and a metrics port serving the tick
// ring buffer.
#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "meterstick/common/net.hpp"
#include "meterstick/server/game_loop.hpp"
#include "meterstick/server/metrics_ring.hpp"
#include "meterstick/workloads/worldgen.hpp"

namespace meterstick::server {

inline constexpr std::uint16_t kDefaultGamePort = 25565;
inline constexpr std::uint16_t kDefaultMetricsPort = 25585;

struct ServerConfig {
  /// Generated world; ignored when `snapshot_path` is set.
  workloads::WorkloadSpec world;
  std::string snapshot_path;
  net::Endpoint game{"127.0.0.1", kDefaultGamePort};
  net::Endpoint metrics{"127.0.0.1", kDefaultMetricsPort};
  std::int64_t tick_ns = 50'000'000;
  /// Record modeled rather than measured time. The loop still paces itself at
  /// the tick rate in real time, but tick starts and busy durations in the
  /// trace come from the cost model, so they are reproducible.
  bool virtual_clock = false;
  /// Do not start ticking until the first join arrives; that join is tick 0.
  bool hold_until_join = false;
  /// Stop ticking after this many ticks; 0 runs until stopped.
  std::uint64_t max_ticks = 0;
  std::size_t ring_capacity = MetricsRing::kDefaultCapacity;
  LoopConfig loop;
};

/// Counters published by the loop after every tick, for the metrics port.
struct ServerStatus {
  std::uint64_t tick_counter = 0;
  std::uint64_t entity_count = 0;
  std::uint64_t incoming_depth = 0;
  std::uint64_t outgoing_last_tick = 0;
  std::uint64_t update_queue_depth = 0;
  std::uint64_t sessions = 0;
  std::uint64_t detonations = 0;
  std::int64_t first_detonation_tick = -1;
  std::int64_t now_ns = 0;
  bool finished = false;
  bool virtual_clock = false;
  std::int64_t tick_ns = 0;
};

class SimServer {
 public:
  explicit SimServer(ServerConfig config);
  SimServer(const SimServer&) = delete;
  SimServer& operator=(const SimServer&) = delete;
  ~SimServer();

  /// Starts the loop thread. Listening sockets are open from construction.
  void start();
  /// Stops ticking and closes both ports. Idempotent.
  void stop();
  /// Blocks until the loop thread exits (max_ticks reached or stop()).
  void wait();

  std::uint16_t game_port() const;
  std::uint16_t metrics_port() const;

  /// Adds `ms` of stall to the next tick, before its updates are flushed.
  void inject_stall(std::int64_t ms) { stall_ns_.fetch_add(ms * 1'000'000); }

  const MetricsRing& ring() const { return ring_; }
  ServerStatus status() const;
  LoopStats loop_stats() const;

  /// Reply to one metrics-port request line, newline terminated, ending
  /// with an `end` line.
  std::string handle_metrics_request(std::string_view line);

  /// The loop's world. Only safe to read once the loop thread has exited.
  const world::WorldState& world_after_stop() const { return loop_.world(); }

 private:
  void push_inbound(Inbound in);
  void run();
  bool wait_for_join();
  void publish(const TickResult& r);

  ServerConfig config_;
  GameLoop loop_;
  MetricsRing ring_;

  std::mutex in_mu_;
  std::condition_variable in_cv_;
  std::vector<Inbound> inbound_;

  std::atomic<bool> running_{true};
  std::atomic<std::int64_t> stall_ns_{0};
  std::atomic<std::uint64_t> loop_exited_{0};

  mutable std::mutex status_mu_;
  ServerStatus status_;
  LoopStats loop_stats_;

  std::unique_ptr<net::LineServer> game_;
  std::unique_ptr<net::LineServer> metrics_;
  std::thread thread_;
};

/// Builds the world named by a config (generated or loaded).
world::WorldState load_world(const ServerConfig& config);

}  // namespace meterstick::server
