// SPDX-License-Identifier: Apache-2.0
#include "meterstick/server/sim_server.hpp"

#include <charconv>
#include <nlohmann/json.hpp>

#include "meterstick/common/error.hpp"
#include "meterstick/common/log.hpp"
#include "meterstick/common/time.hpp"
#include "meterstick/world/snapshot.hpp"

namespace meterstick::server {

using Json = nlohmann::json;

namespace {

void sleep_until_ns(std::int64_t deadline) {
  const std::int64_t now = monotonic_ns();
  if (deadline > now) std::this_thread::sleep_for(std::chrono::nanoseconds(deadline - now));
}

bool is_join_line(const Inbound& in) {
  if (in.type != Inbound::Type::line) return false;
  try {
    return decode_action(in.line).kind == ActionKind::join;
  } catch (const ProtocolError&) {
    return false;
  }
}

Json tick_json(const metrics::TickRecord& r) {
  return Json{{"kind", "tick"},
              {"index", r.index},
              {"start_ns", r.start_ns},
              {"busy_ns", r.busy_ns},
              {"shares", Json(std::vector<double>(r.shares.begin(), r.shares.end()))}};
}

Json status_json(const ServerStatus& s) {
  return Json{{"kind", "status"},
              {"tick_counter", s.tick_counter},
              {"entity_count", s.entity_count},
              {"queue_depths",
               {{"incoming", s.incoming_depth}, {"outgoing", s.outgoing_last_tick}, {"updates", s.update_queue_depth}}},
              {"sessions", s.sessions},
              {"clock", s.virtual_clock ? "virtual" : "wall"},
              {"now_ns", s.now_ns},
              {"tick_ns", s.tick_ns},
              {"finished", s.finished},
              {"detonations", s.detonations},
              {"first_detonation_tick", s.first_detonation_tick}};
}

}  // namespace

world::WorldState load_world(const ServerConfig& config) {
  if (!config.snapshot_path.empty()) return world::load_snapshot(config.snapshot_path);
  workloads::validate(config.world);
  return workloads::build_world(config.world);
}

SimServer::SimServer(ServerConfig config)
    : config_(std::move(config)), loop_(load_world(config_), config_.loop), ring_(config_.ring_capacity) {
  if (config_.tick_ns <= 0) throw ConfigError("tick period must be positive");
  status_.virtual_clock = config_.virtual_clock;
  status_.tick_ns = config_.tick_ns;
  status_.now_ns = config_.virtual_clock ? 0 : monotonic_ns();

  net::LineServer::Handlers game;
  game.on_open = [this](net::ConnId id) { push_inbound({Inbound::Type::open, id, {}}); };
  game.on_line = [this](net::ConnId id, std::string_view line) {
    push_inbound({Inbound::Type::line, id, std::string(line)});
  };
  game.on_close = [this](net::ConnId id) { push_inbound({Inbound::Type::close, id, {}}); };
  game_ = std::make_unique<net::LineServer>(config_.game, std::move(game));

  net::LineServer::Handlers metrics;
  metrics.on_line = [this](net::ConnId id, std::string_view line) {
    metrics_->send(id, handle_metrics_request(line));
  };
  metrics_ = std::make_unique<net::LineServer>(config_.metrics, std::move(metrics));
  log::info("server listening: game {} metrics {} ({} clock)", game_->port(), metrics_->port(),
            config_.virtual_clock ? "virtual" : "wall");
}

SimServer::~SimServer() { stop(); }

void SimServer::start() {
  if (thread_.joinable()) return;
  thread_ = std::thread([this] { run(); });
}

void SimServer::stop() {
  running_.store(false);
  in_cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  if (game_) game_->stop();
  if (metrics_) metrics_->stop();
}

void SimServer::wait() {
  if (thread_.joinable()) thread_.join();
}

std::uint16_t SimServer::game_port() const { return game_->port(); }
std::uint16_t SimServer::metrics_port() const { return metrics_->port(); }

ServerStatus SimServer::status() const {
  std::lock_guard lock(status_mu_);
  ServerStatus s = status_;
  if (!s.virtual_clock) s.now_ns = monotonic_ns();
  return s;
}

LoopStats SimServer::loop_stats() const {
  std::lock_guard lock(status_mu_);
  return loop_stats_;
}

void SimServer::push_inbound(Inbound in) {
  {
    std::lock_guard lock(in_mu_);
    inbound_.push_back(std::move(in));
  }
  in_cv_.notify_all();
}

bool SimServer::wait_for_join() {
  std::unique_lock lock(in_mu_);
  in_cv_.wait(lock, [&] {
    if (!running_.load()) return true;
    return std::any_of(inbound_.begin(), inbound_.end(), is_join_line);
  });
  return running_.load();
}

void SimServer::publish(const TickResult& r) {
  const auto& w = loop_.world();
  std::lock_guard lock(status_mu_);
  status_.tick_counter = ring_.written();
  status_.entity_count = w.entities().size();
  status_.update_queue_depth = w.update_queue().size();
  status_.outgoing_last_tick = r.outbound.size();
  status_.sessions = loop_.sessions().size();
  if (w.stats().detonations > 0 && status_.first_detonation_tick < 0) {
    status_.first_detonation_tick = static_cast<std::int64_t>(ring_.written()) - 1;
  }
  status_.detonations = w.stats().detonations;
  loop_stats_ = loop_.stats();
}

void SimServer::run() {
  if (config_.hold_until_join && !wait_for_join()) return;

  const std::int64_t period = config_.tick_ns;
  const CostModel& cost = config_.loop.cost;
  std::int64_t deadline = monotonic_ns();
  std::int64_t virtual_start = 0;
  std::uint64_t index = 0;

  while (running_.load()) {
    if (config_.max_ticks != 0 && index >= config_.max_ticks) break;

    std::vector<Inbound> inbound;
    {
      std::lock_guard lock(in_mu_);
      inbound.swap(inbound_);
    }
    const std::int64_t stall = stall_ns_.exchange(0);
    const std::int64_t t0 = monotonic_ns();

    TickResult r = loop_.step(std::move(inbound));

    // Padding and stalls happen before the flush so clients see them as delay.
    const Composed target = compose_tick(r, cost, config_.virtual_clock, stall);
    const auto net_idx = static_cast<std::size_t>(metrics::ComponentKind::networking);
    if (config_.virtual_clock) {
      if (stall > 0) sleep_until_ns(t0 + stall);
    } else {
      sleep_until_ns(t0 + target.busy_ns - target.component_ns[net_idx]);
    }
    std::vector<std::pair<net::ConnId, std::string>> batch;
    batch.reserve(r.outbound.size());
    for (auto& o : r.outbound) batch.emplace_back(o.session, std::move(o.line));
    game_->send_many(std::move(batch));
    if (!config_.virtual_clock) sleep_until_ns(t0 + target.busy_ns);
    const std::int64_t t1 = monotonic_ns();

    metrics::TickRecord rec;
    rec.index = index;
    if (config_.virtual_clock) {
      rec.start_ns = virtual_start;
      rec.busy_ns = target.busy_ns;
      rec.shares = target.shares;
    } else {
      const Composed c = compose_tick(r, cost, false, stall, t1 - t0);
      rec.start_ns = t0;
      rec.busy_ns = c.busy_ns;
      rec.shares = c.shares;
    }
    ring_.push(rec);
    ++index;
    publish(r);
    if (config_.virtual_clock) {
      virtual_start += std::max(period, rec.busy_ns);
      std::lock_guard lock(status_mu_);
      status_.now_ns = virtual_start;
    }

    // Early: sleep to the slot. Late: start now and count the next period from here.
    deadline += period;
    const std::int64_t now = monotonic_ns();
    if (now > deadline) {
      deadline = now;
    } else {
      sleep_until_ns(deadline);
    }
  }
  std::lock_guard lock(status_mu_);
  status_.finished = true;
  log::info("server loop finished after {} ticks", index);
}

std::string SimServer::handle_metrics_request(std::string_view line) {
  std::string out;
  auto emit = [&](const Json& j) {
    out += j.dump();
    out += '\n';
  };
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
  const auto space = line.find(' ');
  const std::string_view cmd = line.substr(0, space);
  const std::string_view arg = space == std::string_view::npos ? std::string_view{} : line.substr(space + 1);

  auto parse_int = [](std::string_view s, std::int64_t& v) {
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && p == s.data() + s.size();
  };

  if (cmd == "snapshot") {
    std::int64_t from = 0;
    if (!arg.empty() && (!parse_int(arg, from) || from < 0)) {
      emit(Json{{"kind", "error"}, {"detail", "bad snapshot start"}});
    } else {
      const ServerStatus s = status();
      const auto records = ring_.read(static_cast<std::uint64_t>(from));
      Json st = status_json(s);
      st["records"] = records.size();
      emit(st);
      for (const auto& r : records) emit(tick_json(r));
    }
  } else if (cmd == "status") {
    emit(status_json(status()));
  } else if (cmd == "stall") {
    std::int64_t ms = 0;
    if (!parse_int(arg, ms) || ms < 0 || ms > 600'000) {
      emit(Json{{"kind", "error"}, {"detail", "stall needs milliseconds in [0, 600000]"}});
    } else {
      inject_stall(ms);
      emit(Json{{"kind", "ok"}});
    }
  } else if (cmd == "stats") {
    const LoopStats st = loop_stats();
    Json rejected = Json::object();
    for (std::size_t i = 1; i < kRejectCount; ++i) rejected[std::string(reject_name(static_cast<Reject>(i)))] = st.rejected[i];
    emit(Json{{"kind", "stats"},
              {"actions_applied", st.actions_applied},
              {"rejected", rejected},
              {"chat_events", st.chat_events},
              {"block_updates", st.block_updates},
              {"entity_updates", st.entity_updates},
              {"bytes_out", st.bytes_out}});
  } else {
    emit(Json{{"kind", "error"}, {"detail", "unknown command"}});
  }
  out += "end\n";
  return out;
}

}  // namespace meterstick::server
