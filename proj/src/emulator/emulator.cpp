// SPDX-License-Identifier: Apache-2.0
#include "meterstick/emulator/emulator.hpp"

#include <algorithm>
#include <thread>

#include "meterstick/common/error.hpp"
#include "meterstick/common/log.hpp"
#include "meterstick/common/time.hpp"
#include "meterstick/server/protocol.hpp"

namespace meterstick::emulator {

using server::ActionKind;
using server::PlayerAction;
using server::UpdateKind;

std::string_view behavior_name(Behavior b) { return b == Behavior::idle ? "idle" : "bounded-random"; }

Behavior parse_behavior(std::string_view text) {
  if (text == "idle") return Behavior::idle;
  if (text == "bounded-random" || text == "bounded_random") return Behavior::bounded_random;
  throw ConfigError("unknown behavior '" + std::string(text) + "' (expected idle or bounded-random)");
}

void Recorder::record(const metrics::RttSample& s) {
  std::function<void(const metrics::RttSample&)> listener;
  {
    std::lock_guard lock(mu_);
    samples_.push_back(s);
    listener = listener_;
  }
  if (listener) listener(s);
}

void Recorder::censor(std::uint64_t n) {
  std::lock_guard lock(mu_);
  censored_ += n;
}

std::vector<metrics::RttSample> Recorder::samples() const {
  std::lock_guard lock(mu_);
  return samples_;
}

std::uint64_t Recorder::censored() const {
  std::lock_guard lock(mu_);
  return censored_;
}

void Recorder::set_listener(std::function<void(const metrics::RttSample&)> f) {
  std::lock_guard lock(mu_);
  listener_ = std::move(f);
}

namespace {

std::unique_ptr<BotSession> try_join(const net::Endpoint& ep, const std::string& name,
                                     std::chrono::milliseconds timeout) {
  auto s = std::make_unique<BotSession>();
  s->name = name;
  s->conn = net::TcpStream::connect(ep, timeout);
  PlayerAction join;
  join.kind = ActionKind::join;
  join.name = name;
  if (!s->conn.write_line(server::encode_action(join))) throw Error("connection closed during join");
  const auto until = SteadyClock::now() + timeout;
  while (SteadyClock::now() < until) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(until - SteadyClock::now());
    auto line = s->conn.read_line(std::max(left, 1ms));
    if (!line) break;
    if (line->find("\"join_ack\"") == std::string::npos) continue;
    const auto u = server::decode_update(*line);
    if (u.kind != UpdateKind::join_ack) continue;
    s->spawn = u.pos;
    return s;
  }
  throw Error("no join_ack within " + std::to_string(timeout.count()) + " ms");
}

}  // namespace

std::vector<std::unique_ptr<BotSession>> connect_bots(const net::Endpoint& endpoint, int n,
                                                     std::chrono::milliseconds stagger, int retries,
                                                     std::uint64_t seed, const std::string& prefix,
                                                     std::chrono::milliseconds join_timeout) {
  if (n < 1) throw ConfigError("bot count must be at least 1");
  std::vector<std::unique_ptr<BotSession>> bots;
  std::vector<int> failed;
  std::string last_error;
  for (int i = 0; i < n; ++i) {
    if (i > 0) std::this_thread::sleep_for(stagger);
    const std::string name = prefix + std::to_string(i);
    std::unique_ptr<BotSession> s;
    for (int attempt = 1; attempt <= std::max(1, retries) && !s; ++attempt) {
      try {
        s = try_join(endpoint, name, join_timeout);
      } catch (const Error& e) {
        last_error = e.what();
        log::debug("{} join attempt {} failed: {}", name, attempt, e.what());
        if (attempt < retries) std::this_thread::sleep_for(200ms * attempt);
      }
    }
    if (!s) {
      failed.push_back(i);
      continue;
    }
    s->rng.seed(mix64(seed, static_cast<std::uint64_t>(i)));
    s->nonce_salt = nonce_salt(seed, static_cast<std::uint64_t>(i));
    s->bot.x = s->bot.center_x = s->spawn.x;
    s->bot.z = s->bot.center_z = s->spawn.z;
    bots.push_back(std::move(s));
  }
  if (!failed.empty()) {
    for (auto& b : bots) b->conn.close();
    std::string list;
    for (int i : failed) list += (list.empty() ? "" : ", ") + std::to_string(i);
    throw Error("bots failed to join after " + std::to_string(retries) + " attempts: " + list + " (" + last_error +
                ")");
  }
  return bots;
}

std::optional<metrics::RttSample> on_update_line(BotSession& s, std::string_view line, std::int64_t now_ns) {
  if (!server::looks_like_chat_event(line)) return std::nullopt;
  server::StateUpdate u;
  try {
    u = server::decode_update(line);
  } catch (const ProtocolError&) {
    return std::nullopt;
  }
  if (u.kind != UpdateKind::chat_event || u.from != s.name) return std::nullopt;
  const auto it = s.pending.find(u.nonce);
  if (it == s.pending.end()) return std::nullopt;
  const auto sample = metrics::RttSample::between(it->second, now_ns);
  s.pending.erase(it);
  return sample;
}

namespace {

PlayerAction probe_action(BotSession& s) {
  PlayerAction a;
  a.kind = ActionKind::chat;
  a.nonce = s.next_nonce();
  a.text = "probe " + std::to_string(a.nonce);
  return a;
}

}  // namespace

std::optional<metrics::RttSample> run_probe(BotSession& s, std::chrono::milliseconds timeout) {
  const PlayerAction a = probe_action(s);
  const std::int64_t sent = monotonic_ns();
  s.pending[a.nonce] = sent;
  if (!s.conn.write_line(server::encode_action(a))) throw Error("connection lost");
  const std::int64_t deadline = sent + timeout.count() * kNsPerMs;
  while (true) {
    const std::int64_t left = deadline - monotonic_ns();
    if (left <= 0) break;
    auto line = s.conn.read_line(std::chrono::milliseconds(left / kNsPerMs + 1));
    if (!line) continue;
    const std::int64_t now = monotonic_ns();
    if (auto sample = on_update_line(s, *line, now); sample && sample->sent_ns == sent) return sample;
  }
  s.pending.erase(a.nonce);
  return std::nullopt;
}

namespace {

struct BotOutcome {
  std::uint64_t actions = 0;
  std::uint64_t abandoned = 0;
  bool disconnected = false;
};

void reap_expired(BotSession& s, std::int64_t now, std::int64_t timeout_ns, Recorder& rec) {
  std::uint64_t n = 0;
  for (auto it = s.pending.begin(); it != s.pending.end();) {
    if (now - it->second >= timeout_ns) {
      it = s.pending.erase(it);
      ++n;
    } else {
      ++it;
    }
  }
  if (n) rec.censor(n);
}

BotOutcome drive_bot(BotSession& s, const EmulatorConfig& cfg, bool moves, std::uint32_t probe_every,
                     std::int64_t start, std::int64_t end, const std::atomic<bool>* stop, Recorder& rec) {
  BotOutcome out;
  const std::int64_t period = cfg.action_period.count() * kNsPerMs;
  const std::int64_t timeout_ns = cfg.probe_timeout.count() * kNsPerMs;
  s.bot.probe_every = probe_every;
  std::int64_t next = start;
  std::uint64_t slot = 0;
  try {
    while (true) {
      const std::int64_t now = monotonic_ns();
      if (now >= end || (stop && stop->load())) break;
      if (now >= next) {
        ++slot;
        std::optional<PlayerAction> a;
        if (moves) {
          a = workloads::bot_behavior_step(s.bot, s.rng);
          if (a->kind == ActionKind::chat) a = probe_action(s);
        } else if (probe_every != 0 && slot % probe_every == 0) {
          a = probe_action(s);
        }
        if (a) {
          if (a->kind == ActionKind::chat) s.pending[a->nonce] = monotonic_ns();
          if (!s.conn.write_line(server::encode_action(*a))) throw Error("connection lost");
          ++out.actions;
        }
        // Absolute schedule: a late slot does not push back the ones after it.
        next += period;
        if (next < now - 10 * period) next = now;
        reap_expired(s, now, timeout_ns, rec);
        continue;
      }
      const auto wait = std::chrono::nanoseconds(std::min(next, end) - now);
      auto line = s.conn.read_line(std::max(std::chrono::duration_cast<std::chrono::milliseconds>(wait), 1ms));
      while (line) {
        if (auto sample = on_update_line(s, *line, monotonic_ns())) rec.record(*sample);
        line = s.conn.try_buffered_line();
      }
    }
    // Collect answers to probes still in flight, up to the probe timeout.
    const std::int64_t grace_end = monotonic_ns() + (s.pending.empty() ? 0 : timeout_ns);
    while (!s.pending.empty() && monotonic_ns() < grace_end && !(stop && stop->load())) {
      auto line = s.conn.read_line(100ms);
      if (!line) {
        reap_expired(s, monotonic_ns(), timeout_ns, rec);
        continue;
      }
      if (auto sample = on_update_line(s, *line, monotonic_ns())) rec.record(*sample);
    }
    reap_expired(s, monotonic_ns(), timeout_ns, rec);
  } catch (const Error& e) {
    log::debug("{} stopped: {}", s.name, e.what());
    out.disconnected = true;
    reap_expired(s, monotonic_ns(), timeout_ns, rec);
  }
  out.abandoned = s.pending.size();
  s.pending.clear();
  return out;
}

}  // namespace

EmulationResult run_emulation(const EmulatorConfig& config, const std::atomic<bool>* stop,
                              std::function<void(const metrics::RttSample&)> on_sample) {
  if (config.duration <= 0ms) throw ConfigError("emulation duration must be positive");
  auto bots = connect_bots(config.endpoint, config.bots, config.stagger, config.retries, config.seed,
                           config.name_prefix);
  log::info("{} bot(s) joined {}", bots.size(), config.endpoint.to_string());
  Recorder rec;
  if (on_sample) rec.set_listener(std::move(on_sample));

  const std::int64_t start = monotonic_ns();
  const std::int64_t end = start + config.duration.count() * kNsPerMs;
  std::vector<BotOutcome> outcomes(bots.size());
  std::vector<std::thread> threads;
  threads.reserve(bots.size());
  for (std::size_t i = 0; i < bots.size(); ++i) {
    const bool moves = config.behavior == Behavior::bounded_random;
    // One designated prober: bot 0.
    const std::uint32_t probe_every = i == 0 ? config.probe_every : 0;
    // Spread the bots' action slots over the period.
    const std::int64_t offset = config.action_period.count() * kNsPerMs * static_cast<std::int64_t>(i) /
                                static_cast<std::int64_t>(bots.size());
    threads.emplace_back([&, i, moves, probe_every, offset] {
      outcomes[i] = drive_bot(*bots[i], config, moves, probe_every, start + offset, end, stop, rec);
    });
  }
  for (auto& t : threads) t.join();
  for (auto& b : bots) b->conn.close();

  EmulationResult r;
  r.samples = rec.samples();
  std::sort(r.samples.begin(), r.samples.end(),
            [](const metrics::RttSample& a, const metrics::RttSample& b) { return a.sent_ns < b.sent_ns; });
  r.censored = rec.censored();
  for (const auto& o : outcomes) {
    r.actions_sent += o.actions;
    r.abandoned += o.abandoned;
    r.bots_disconnected += o.disconnected ? 1 : 0;
  }
  return r;
}

}  // namespace meterstick::emulator
