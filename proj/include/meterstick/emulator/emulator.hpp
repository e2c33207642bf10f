// SPDX-License-Identifier: Apache-2.0
// Player emulation: bot connections driven at a fixed action rate, with chat
// probes timed from send to own echo.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "meterstick/common/net.hpp"
#include "meterstick/common/rng.hpp"
#include "meterstick/metrics/rtt.hpp"
#include "meterstick/workloads/bot.hpp"

namespace meterstick::emulator {

using namespace std::chrono_literals;

enum class Behavior : std::uint8_t {
  /// Probes only; stands in for the single idle player of the environment workloads.
  idle,
  /// The players workload: random walk inside the spawn area. Bot 0 probes.
  bounded_random,
};

std::string_view behavior_name(Behavior b);
/// Accepts "idle" and "bounded-random" (or "bounded_random"). Throws ConfigError.
Behavior parse_behavior(std::string_view text);

struct BotSession {
  std::string name;
  net::TcpStream conn;
  /// Outstanding probes: nonce -> send time.
  std::unordered_map<std::uint64_t, std::int64_t> pending;
  Rng rng;
  workloads::Bot bot;
  world::BlockPos spawn;
  std::uint64_t nonce_salt = 0;
  std::uint64_t nonce_counter = 0;

  /// Distinct for every call within a session, and across sessions with
  /// distinct salts: mix64 is a bijection and its inputs never repeat.
  std::uint64_t next_nonce() { return mix64(nonce_salt ^ nonce_counter++); }
};

/// Thread-safe sink shared by all bots.
class Recorder {
 public:
  void record(const metrics::RttSample& s);
  void censor(std::uint64_t n = 1);
  std::vector<metrics::RttSample> samples() const;
  std::uint64_t censored() const;
  void set_listener(std::function<void(const metrics::RttSample&)> f);

 private:
  mutable std::mutex mu_;
  std::vector<metrics::RttSample> samples_;
  std::uint64_t censored_ = 0;
  std::function<void(const metrics::RttSample&)> listener_;
};

/// Salt for bot `index` in a run seeded with `seed`. The low 40 bits are
/// zero and left to the counter, the high 24 identify the bot, so the mixed
/// inputs of different bots never meet.
constexpr std::uint64_t nonce_salt(std::uint64_t seed, std::uint64_t index) {
  constexpr std::uint64_t kHigh = ~((1ULL << 40) - 1);
  return ((index << 40) ^ mix64(seed)) & kHigh;
}

/// Opens `n` sessions, starting one every `stagger`, each joined and
/// acknowledged. A bot that fails `retries` attempts aborts the whole call:
/// open sessions are closed and the error lists every failed index.
std::vector<std::unique_ptr<BotSession>> connect_bots(const net::Endpoint& endpoint, int n,
                                                     std::chrono::milliseconds stagger = 100ms, int retries = 3,
                                                     std::uint64_t seed = 0, const std::string& prefix = "bot",
                                                     std::chrono::milliseconds join_timeout = 5s);

/// Handles one update line received at `now_ns`: a chat_event from this
/// session with a pending nonce completes that probe. Returns the sample, if
/// any. Repeated echoes of the same nonce are ignored.
std::optional<metrics::RttSample> on_update_line(BotSession& s, std::string_view line, std::int64_t now_ns);

/// Sends one chat probe and waits for its echo. nullopt when it times out
/// (censored). Throws meterstick::Error if the connection drops.
std::optional<metrics::RttSample> run_probe(BotSession& s, std::chrono::milliseconds timeout = 10s);

struct EmulatorConfig {
  net::Endpoint endpoint;
  int bots = 1;
  Behavior behavior = Behavior::idle;
  std::chrono::milliseconds duration = 60s;
  std::chrono::milliseconds stagger = 100ms;
  int retries = 3;
  std::chrono::milliseconds action_period = 50ms;
  /// Probe every this many action slots (40 slots = 2 s at 20 Hz).
  std::uint32_t probe_every = 40;
  std::chrono::milliseconds probe_timeout = 10s;
  std::uint64_t seed = 0;
  std::string name_prefix = "bot";
};

struct EmulationResult {
  std::vector<metrics::RttSample> samples;
  /// Probes not answered within the timeout.
  std::uint64_t censored = 0;
  /// Probes still in flight when the run ended or the server went away.
  std::uint64_t abandoned = 0;
  std::uint64_t actions_sent = 0;
  int bots_disconnected = 0;
};

/// Connects, drives every bot on its own thread for `duration`, then closes.
/// `stop` ends the run early. `on_sample` is called from bot threads.
EmulationResult run_emulation(const EmulatorConfig& config, const std::atomic<bool>* stop = nullptr,
                              std::function<void(const metrics::RttSample&)> on_sample = {});

}  // namespace meterstick::emulator
