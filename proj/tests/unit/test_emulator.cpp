// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <thread>
#include <unordered_set>

#include "meterstick/common/error.hpp"
#include "meterstick/emulator/emulator.hpp"
#include "meterstick/server/protocol.hpp"
#include "meterstick/server/sim_server.hpp"

using namespace meterstick;
using namespace meterstick::emulator;
using namespace std::chrono_literals;

namespace {

std::unique_ptr<server::SimServer> start_server() {
  server::ServerConfig c;
  c.world = workloads::parse_world_ref("control:1:1");
  c.game.port = 0;
  c.metrics.port = 0;
  auto s = std::make_unique<server::SimServer>(c);
  s->start();
  return s;
}

net::Endpoint game_of(const server::SimServer& s) { return {"127.0.0.1", s.game_port()}; }

std::uint16_t unused_port() {
  auto l = net::TcpListener::bind({"127.0.0.1", 0});
  return l.port();  // closed again when `l` goes out of scope
}

nlohmann::json metrics_line(std::uint16_t port, const std::string& req) {
  auto s = net::TcpStream::connect({"127.0.0.1", port});
  s.write_line(req);
  auto line = s.read_line(5s);
  if (!line) throw Error("metrics timeout");
  return nlohmann::json::parse(*line);
}

std::string chat_event_line(const std::string& from, std::uint64_t nonce) {
  server::StateUpdate u;
  u.kind = server::UpdateKind::chat_event;
  u.from = from;
  u.nonce = nonce;
  u.text = "x";
  return server::encode_update(u);
}

}  // namespace

TEST(Emulator, OneBotJoins) {
  auto server = start_server();
  auto bots = connect_bots(game_of(*server), 1);
  ASSERT_EQ(bots.size(), 1u);
  EXPECT_EQ(bots[0]->name, "bot0");
  EXPECT_EQ(bots[0]->spawn, workloads::world_spawn(workloads::build_world(workloads::parse_world_ref("control:1:1"))));
}

TEST(Emulator, TwentyFiveBotsAreSessions) {
  auto server = start_server();
  auto bots = connect_bots(game_of(*server), 25, 5ms);
  EXPECT_EQ(bots.size(), 25u);
  std::this_thread::sleep_for(150ms);
  EXPECT_EQ(metrics_line(server->metrics_port(), "status")["sessions"], 25);
}

TEST(Emulator, ServerDownListsFailedBots) {
  const auto port = unused_port();
  try {
    connect_bots({"127.0.0.1", port}, 2, 1ms, 3, 0, "bot", 200ms);
    FAIL() << "expected failure";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("after 3 attempts"), std::string::npos) << msg;
    EXPECT_NE(msg.find("0, 1"), std::string::npos) << msg;
  }
}

TEST(Emulator, IdleProbeWithinTwoTicks) {
  auto server = start_server();
  auto bots = connect_bots(game_of(*server), 1);
  for (int i = 0; i < 10; ++i) {
    const auto s = run_probe(*bots[0]);
    ASSERT_TRUE(s);
    EXPECT_GE(s->rtt_ns, 0);
    EXPECT_LE(s->rtt_ns, 2 * 50 * kNsPerMs + 10 * kNsPerMs);
  }
}

TEST(Emulator, StallShowsUpInProbe) {
  auto server = start_server();
  auto bots = connect_bots(game_of(*server), 1);
  ASSERT_TRUE(run_probe(*bots[0]));
  server->inject_stall(500);
  const auto s = run_probe(*bots[0]);
  ASSERT_TRUE(s);
  EXPECT_GE(s->rtt_ns, 450 * kNsPerMs);
}

TEST(Emulator, SecondEchoIgnored) {
  BotSession s;
  s.name = "bot0";
  s.pending[42] = 1000;
  const auto line = chat_event_line("bot0", 42);
  const auto first = on_update_line(s, line, 5000);
  ASSERT_TRUE(first);
  EXPECT_EQ(first->rtt_ns, 4000);
  EXPECT_FALSE(on_update_line(s, line, 6000));
  // Someone else's chat with a colliding nonce is not ours.
  s.pending[7] = 1;
  EXPECT_FALSE(on_update_line(s, chat_event_line("bot1", 7), 10));
}

TEST(Emulator, NoncesNeverCollide) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(1'100'000);
  for (std::uint64_t bot = 0; bot < 4; ++bot) {
    BotSession s;
    s.nonce_salt = nonce_salt(99, bot);
    for (int i = 0; i < 250'000; ++i) ASSERT_TRUE(seen.insert(s.next_nonce()).second);
  }
  EXPECT_EQ(seen.size(), 1'000'000u);
}

TEST(Emulator, ProbeTimesOutAsCensored) {
  // A listener that accepts and answers the join but never echoes chats.
  auto listener = net::TcpListener::bind({"127.0.0.1", 0});
  std::thread fake([&] {
    auto c = listener.accept(5s);
    if (!c) return;
    c->read_line(5s);
    server::StateUpdate ack;
    ack.kind = server::UpdateKind::join_ack;
    c->write_line(server::encode_update(ack));
    while (true) {
      try {
        c->read_line(2s);
      } catch (const Error&) {
        return;
      }
    }
  });
  auto bots = connect_bots({"127.0.0.1", listener.port()}, 1);
  EXPECT_FALSE(run_probe(*bots[0], 200ms));
  EXPECT_TRUE(bots[0]->pending.empty());
  bots[0]->conn.close();
  fake.join();
}

// 25 bots at 20 Hz: the server sees 500 actions per second over 10 s.
TEST(Emulator, ActionRateMatchesBotCount) {
  auto server = start_server();
  EmulatorConfig cfg;
  cfg.endpoint = game_of(*server);
  cfg.bots = 25;
  cfg.behavior = Behavior::bounded_random;
  cfg.duration = 13s;
  cfg.stagger = 5ms;
  std::uint64_t before = 0;
  std::uint64_t after = 0;
  auto count = [&] {
    const auto s = server->loop_stats();
    std::uint64_t n = s.actions_applied;
    for (auto r : s.rejected) n += r;
    return n;
  };
  std::thread watcher([&] {
    std::this_thread::sleep_for(2s);  // past the staggered joins
    before = count();
    std::this_thread::sleep_for(10s);
    after = count();
  });
  const auto r = run_emulation(cfg);
  watcher.join();
  const double rate = static_cast<double>(after - before) / 10.0;
  EXPECT_NEAR(rate, 500.0, 25.0);
  EXPECT_FALSE(r.samples.empty());
  for (const auto& s : r.samples) EXPECT_GE(s.rtt_ns, 0);
  EXPECT_EQ(r.bots_disconnected, 0);
}

TEST(Emulator, BehaviorNames) {
  EXPECT_EQ(parse_behavior("bounded-random"), Behavior::bounded_random);
  EXPECT_EQ(parse_behavior("idle"), Behavior::idle);
  EXPECT_THROW(parse_behavior("dance"), ConfigError);
}
