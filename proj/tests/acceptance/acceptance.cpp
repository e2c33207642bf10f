// SPDX-License-Identifier: Apache-2.0
// Acceptance gate. Runs every criterion at its stated tolerance and prints one
// PASS/FAIL line each. Exit status is the number of failures.
//
//   acceptance            all criteria
//   acceptance 3 7        only AC3 and AC7
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <thread>

#include "meterstick/common/digest.hpp"
#include "meterstick/common/error.hpp"
#include "meterstick/common/log.hpp"
#include "meterstick/common/net.hpp"
#include "meterstick/common/process.hpp"
#include "meterstick/common/rng.hpp"
#include "meterstick/common/time.hpp"
#include "meterstick/emulator/emulator.hpp"
#include "meterstick/metrics/variability.hpp"
#include "meterstick/orchestrator/control_message.hpp"
#include "meterstick/orchestrator/worker.hpp"
#include "meterstick/server/offline.hpp"
#include "meterstick/server/sim_server.hpp"
#include "meterstick/workloads/worldgen.hpp"
#include "meterstick/world/pathfind.hpp"

using namespace meterstick;
using namespace std::chrono_literals;
namespace fs = std::filesystem;
namespace m = meterstick::metrics;
using workloads::WorkloadKind;

namespace {

constexpr std::int64_t kB = metrics::kDefaultTickPeriodNs;

struct Verdict {
  bool pass = false;
  std::string detail;
};

// ---- AC1, AC2 -----------------------------------------------------------------

m::TickTrace trace_of(const std::vector<std::int64_t>& busy_ns, std::int64_t wall_ns) {
  m::TickTrace t;
  std::int64_t start = 0;
  for (std::size_t i = 0; i < busy_ns.size(); ++i) {
    m::TickRecord r;
    r.index = i;
    r.start_ns = start;
    r.busy_ns = busy_ns[i];
    m::share_of(r.shares, m::ComponentKind::other) = 1.0;
    start += std::max(r.busy_ns, kB);
    t.ticks.push_back(r);
  }
  t.wall_duration_ns = wall_ns;
  return t;
}

// Direct summation in floating point, written from the definition.
double oracle_vi(const m::TickTrace& t, std::int64_t b) {
  double sum = 0.0;
  for (std::size_t n = 1; n < t.ticks.size(); ++n) {
    sum += std::fabs(static_cast<double>(std::max(b, t.ticks[n].busy_ns)) -
                     static_cast<double>(std::max(b, t.ticks[n - 1].busy_ns)));
  }
  const double expected = std::floor(static_cast<double>(t.wall_duration_ns) / static_cast<double>(b));
  return std::min(1.0, sum / (expected * 2.0 * static_cast<double>(b)));
}

Verdict ac1() {
  std::string detail;
  bool pass = true;
  for (const std::int64_t ne : {10, 100, 1000}) {
    // One long tick in the middle of a window of ne periods.
    const auto t = trace_of({kB, kB * ne - 2 * kB, kB}, kB * ne);
    const double vi = m::compute_vi(t, kB);
    const double want = 1.0 - 3.0 / static_cast<double>(ne);
    pass = pass && std::fabs(vi - want) <= 1e-9;
    detail += fmt::format("N_e={} vi={:.12f} want={:.12f}; ", ne, vi, want);
  }
  const double constant = m::compute_vi(trace_of(std::vector<std::int64_t>(200, kB), 200 * kB), kB);
  const double never = m::compute_vi(trace_of({1, kB - 1, 3, kB, 0, 22'000'000}, 6 * kB), kB);
  pass = pass && constant == 0.0 && never == 0.0;
  detail += fmt::format("constant={} never_overloaded={}", constant, never);
  return {pass, detail};
}

Verdict ac2() {
  Rng rng(2024);
  int mismatches = 0;
  int out_of_range = 0;
  for (int i = 0; i < 10'000; ++i) {
    const auto n = 1 + uniform_below(rng, 300);
    std::vector<std::int64_t> busy(n);
    for (auto& b : busy) b = static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(100 * kB) + 1));
    std::int64_t wall = 0;
    for (auto b : busy) wall += std::max(b, kB);
    const auto t = trace_of(busy, wall);
    const double batch = m::compute_vi(t, kB);
    m::VariabilityStream stream(kB);
    for (auto b : busy) stream.push(b);
    const double streamed = stream.value(wall);
    const double oracle = oracle_vi(t, kB);
    if (!(batch >= 0.0 && batch <= 1.0)) ++out_of_range;
    if (std::bit_cast<std::uint64_t>(batch) != std::bit_cast<std::uint64_t>(streamed) ||
        std::bit_cast<std::uint64_t>(batch) != std::bit_cast<std::uint64_t>(oracle)) {
      ++mismatches;
    }
  }
  return {mismatches == 0 && out_of_range == 0,
          fmt::format("10000 traces, {} out of [0,1], {} route mismatches", out_of_range, mismatches)};
}

// ---- AC3 ----------------------------------------------------------------------

Verdict ac3() {
  server::ServerConfig c;
  c.world = workloads::parse_world_ref("control:1:1");
  c.game.port = 0;
  c.metrics.port = 0;
  server::SimServer s(c);
  s.start();
  std::this_thread::sleep_for(10s + 500ms);
  s.stop();
  const auto ticks = s.ring().read();
  if (ticks.empty()) return {false, "no ticks recorded"};
  const std::int64_t t0 = ticks.front().start_ns;
  m::TickTrace trace;
  trace.wall_duration_ns = 10 * kNsPerSec;
  for (const auto& r : ticks) {
    if (r.start_ns - t0 < trace.wall_duration_ns) trace.ticks.push_back(r);
  }
  const double vi = m::compute_vi(trace, kB);
  const auto n = trace.ticks.size();
  return {n >= 199 && n <= 201 && vi < 0.02, fmt::format("ticks in 10 s = {}, vi = {:.6f}", n, vi)};
}

// ---- AC4 ----------------------------------------------------------------------

double median_vi(WorkloadKind kind) {
  std::vector<double> vis;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    workloads::WorkloadSpec spec;
    spec.kind = kind;
    spec.seed = seed;
    spec.tnt_timer_ticks = 20;
    const auto run = server::run_virtual(workloads::build_world(spec), server::LoopConfig{}, 10 * kNsPerSec);
    vis.push_back(m::compute_vi(run.trace, kB));
  }
  std::sort(vis.begin(), vis.end());
  return vis[2];
}

Verdict ac4() {
  const double control = median_vi(WorkloadKind::control);
  const double tnt = median_vi(WorkloadKind::tnt);
  const double farm = median_vi(WorkloadKind::farm);
  const double lag = median_vi(WorkloadKind::lag);
  return {lag > tnt && tnt > control && farm > control,
          fmt::format("median vi: lag={:.4f} tnt={:.4f} farm={:.4f} control={:.4f}", lag, tnt, farm, control)};
}

// ---- AC5, AC6 -----------------------------------------------------------------

struct TntRun {
  server::OfflineRun run;
  std::int64_t first = -1;
  std::int64_t last = -1;
};

bool any_tnt_left(const world::WorldState& w) {
  for (std::size_t c = 0; c < w.chunk_count(); ++c) {
    for (const auto& b : w.chunk(c).cells()) {
      if (b.kind == world::BlockKind::tnt_block) return true;
    }
  }
  return false;
}

bool any_primed(const world::WorldState& w) {
  return std::any_of(w.entities().begin(), w.entities().end(),
                     [](const world::Entity& e) { return e.kind == world::EntityKind::tnt_primed; });
}

/// Runs the scale-1 TNT world for at most `max_ticks`. With `stop_when_spent`
/// the run ends once a detonation has happened and no TNT is left anywhere,
/// neither placed nor primed, since no later tick can detonate anything.
TntRun run_tnt(std::uint64_t seed, std::uint64_t max_ticks, bool stop_when_spent) {
  workloads::WorkloadSpec spec;
  spec.kind = WorkloadKind::tnt;
  spec.seed = seed;
  TntRun out;
  std::uint64_t seen = 0;
  out.run = server::run_virtual(workloads::build_world(spec), server::LoopConfig{}, std::numeric_limits<std::int32_t>::max() * kNsPerSec, kB, max_ticks,
                                [&](const m::TickRecord& r, const world::WorldState& w) {
                                  if (w.stats().detonations == seen) return;
                                  seen = w.stats().detonations;
                                  if (out.first < 0) out.first = static_cast<std::int64_t>(r.index);
                                  out.last = static_cast<std::int64_t>(r.index);
                                },
                                [&](const world::WorldState& w) {
                                  return stop_when_spent && seen > 0 && !any_primed(w) && !any_tnt_left(w);
                                });
  return out;
}

Verdict ac5() {
  const auto t = run_tnt(1, 2400, true);
  if (t.first < 0) return {false, "no detonation"};
  std::vector<m::TickRecord> window(t.run.trace.ticks.begin() + t.first, t.run.trace.ticks.begin() + t.last + 1);
  const auto shares = m::component_shares(window);
  const double ent = m::share_of(shares, m::ComponentKind::entities);
  bool largest = true;
  std::string detail = fmt::format("ticks {}..{}:", t.first, t.last);
  for (const auto k : m::kAllComponents) {
    detail += fmt::format(" {}={:.3f}", m::component_name(k), m::share_of(shares, k));
    if (k != m::ComponentKind::entities && m::share_of(shares, k) >= ent) largest = false;
  }
  return {largest, detail};
}

Verdict ac6() {
  // The timer is part of the budget: ignition, the chain and its end all fall
  // inside the first 2000 ticks. A run that stops early has no TNT left, so
  // the remaining ticks could not add a detonation.
  const auto a = run_tnt(7, 2000, true);
  const auto b = run_tnt(7, 2000, true);
  const auto c = run_tnt(8, 2000, true);
  const bool deterministic = a.run.final_digest == b.run.final_digest && a.run.detonations == b.run.detonations &&
                             a.first == b.first && a.last == b.last;
  const bool in_budget = a.run.trace.ticks.size() <= 2000 && c.run.trace.ticks.size() <= 2000;
  return {a.run.detonations == 3584 && c.run.detonations == 3584 && deterministic && in_budget,
          fmt::format("seed 7: {} detonations in ticks {}..{} (run ended at tick {}); seed 8: {}; repeat identical: {}",
                      a.run.detonations, a.first, a.last, a.run.trace.ticks.size(), c.run.detonations,
                      deterministic)};
}

// ---- AC7 ----------------------------------------------------------------------

Verdict ac7() {
  server::ServerConfig c;
  c.world = workloads::parse_world_ref("control:1:1");
  c.game.port = 0;
  c.metrics.port = 0;
  server::SimServer s(c);
  s.start();
  auto bots = emulator::connect_bots({"127.0.0.1", s.game_port()}, 1);
  std::vector<std::int64_t> idle;
  for (int i = 0; i < 50; ++i) {
    const auto p = emulator::run_probe(*bots[0]);
    if (!p) return {false, "idle probe censored"};
    idle.push_back(p->rtt_ns);
    std::this_thread::sleep_for(std::chrono::milliseconds(137 + 11 * (i % 7)));
  }
  std::sort(idle.begin(), idle.end());
  const auto median = idle[idle.size() / 2];
  const std::int64_t bound = 2 * kB + 10 * kNsPerMs;

  s.inject_stall(500);
  const auto stalled = emulator::run_probe(*bots[0]);
  s.stop();
  const std::int64_t stall_rtt = stalled ? stalled->rtt_ns : -1;
  return {median <= bound && stall_rtt >= 500 * kNsPerMs,
          fmt::format("idle median rtt {:.2f} ms (bound {} ms); probe across 500 ms stall {:.2f} ms",
                      static_cast<double>(median) / 1e6, bound / kNsPerMs, static_cast<double>(stall_rtt) / 1e6)};
}

// ---- AC8 ----------------------------------------------------------------------

std::optional<int> bfs_length(const world::WorldState& w, world::BlockPos from, world::BlockPos to) {
  if (from == to) return 0;
  static constexpr int kDx[] = {1, -1, 0, 0};
  static constexpr int kDz[] = {0, 0, 1, -1};
  std::map<world::BlockPos, int> dist{{from, 0}};
  std::queue<world::BlockPos> q;
  q.push(from);
  while (!q.empty()) {
    const auto p = q.front();
    q.pop();
    for (int d = 0; d < 4; ++d) {
      for (int dy = -1; dy <= 1; ++dy) {
        const world::BlockPos n{p.x + kDx[d], p.y + dy, p.z + kDz[d]};
        const bool open = w.in_bounds(n) && n.y > 0 && w.block(n).kind == world::BlockKind::air &&
                          world::is_solid(w.block({n.x, n.y - 1, n.z}).kind);
        if (!open || dist.count(n)) continue;
        dist[n] = dist[p] + 1;
        if (n == to) return dist[n];
        q.push(n);
      }
    }
  }
  return std::nullopt;
}

Verdict ac8() {
  Rng rng(8);
  int compared = 0, reachable = 0, wrong = 0;
  for (int grid = 0; grid < 100; ++grid) {
    world::WorldState w({1, 1, 16}, static_cast<std::uint64_t>(grid));
    for (int y = 0; y < 16; ++y)
      for (int z = 0; z < 16; ++z)
        for (int x = 0; x < 16; ++x)
          if (y == 0 || uniform_below(rng, 100) < 30) w.set_block_raw({x, y, z}, {world::BlockKind::stone, 0});
    std::vector<world::BlockPos> open;
    for (int y = 1; y < 16; ++y)
      for (int z = 0; z < 16; ++z)
        for (int x = 0; x < 16; ++x)
          if (world::walkable(w, {x, y, z})) open.push_back({x, y, z});
    for (int k = 0; k < 5 && !open.empty(); ++k) {
      const auto a = open[uniform_below(rng, open.size())];
      const auto b = open[uniform_below(rng, open.size())];
      const auto got = world::pathfind(w, a, b, 1 << 20);
      const auto want = bfs_length(w, a, b);
      ++compared;
      if (got.has_value() != want.has_value() || (got && static_cast<int>(got->size()) != *want)) ++wrong;
      reachable += want.has_value();
    }
  }
  return {wrong == 0 && reachable > 0,
          fmt::format("{} grids, {} queries, {} reachable, {} mismatches", 100, compared, reachable, wrong)};
}

// ---- AC9 ----------------------------------------------------------------------

std::uint16_t free_port() { return net::TcpListener::bind({"127.0.0.1", 0}).port(); }

/// Sends one line and returns the first reply that is not a heartbeat.
std::string exchange(net::TcpStream& conn, const std::string& line) {
  if (!conn.write_line(line)) throw Error("worker connection lost");
  while (true) {
    const auto reply = conn.read_line(30s);
    if (!reply) throw Error("no reply to " + line);
    if (*reply != "keep_alive") return *reply;
  }
}

Verdict ac9() {
  using orchestrator::Role;
  const auto dir = fs::temp_directory_path() / "meterstick_acceptance_ac9";
  fs::remove_all(dir);
  auto listener = net::TcpListener::bind({"127.0.0.1", 0});
  const auto game_port = free_port();
  const auto metrics_port = free_port();

  std::vector<std::thread> workers;
  for (const auto role : {Role::server_node, Role::emulation_node}) {
    orchestrator::WorkerOptions o;
    o.role = role;
    o.name = std::string(orchestrator::role_name(role));
    o.controller = {"127.0.0.1", listener.port()};
    o.data_dir = (dir / o.name).string();
    o.server_exe = METERSTICK_EXE;
    workers.emplace_back([o] { orchestrator::run_worker(o); });
  }
  std::map<Role, net::TcpStream> links;
  const auto give_up = monotonic_ns() + 10 * kNsPerSec;
  while (links.size() < 2 && monotonic_ns() < give_up) {
    auto conn = listener.accept(500ms);
    if (!conn) continue;
    const auto hello = orchestrator::parse_message(conn->read_line(5s).value_or("err"));
    const auto kv = orchestrator::parse_key_values(hello.arg);
    links.emplace(*orchestrator::parse_role(kv.at("role")), std::move(*conn));
  }
  if (links.size() < 2) {
    for (auto& t : workers) t.detach();
    return {false, "workers did not register"};
  }
  auto& mnode = links.at(Role::server_node);
  auto& ynode = links.at(Role::emulation_node);

  std::vector<std::string> failures;
  auto expect = [&](net::TcpStream& c, const std::string& line, bool ok) {
    const auto reply = exchange(c, line);
    const bool got_ok = reply == "ok" || reply.rfind("ok:", 0) == 0;
    const bool got_err = reply.rfind("err", 0) == 0;
    if ((ok && !got_ok) || (!ok && !got_err)) failures.push_back(line + " -> " + reply);
  };

  // Verbs sent to the wrong node.
  expect(mnode, "connect:endpoint=127.0.0.1:1 bots=1", false);
  expect(ynode, "initialize:world=control:1:1", false);
  expect(ynode, "log_start", false);
  expect(ynode, "log_stop:duration_ms=1", false);
  expect(ynode, "stop_server", false);
  expect(ynode, "set_metrics_endpoint:127.0.0.1:1", false);

  // The scripted session.
  expect(mnode, "set_server:simserver", true);
  expect(mnode, fmt::format("set_metrics_endpoint:127.0.0.1:{}", metrics_port), true);
  expect(mnode, "iter:0", true);
  expect(mnode,
         fmt::format("initialize:world=control:1:1 port={} clock=wall hold=0 tick_ms=50 tnt_timer=400 concurrent=0 "
                     "cost=default memory_limit_mb=4096 cpu_affinity=4294967295",
                     game_port),
         true);
  expect(mnode, "log_start", true);
  expect(ynode, "set_server:simserver", true);
  expect(ynode, "iter:0", true);
  expect(ynode,
         fmt::format("connect:endpoint=127.0.0.1:{} bots=1 behavior=idle duration_ms=2000 seed=1 workload=control",
                     game_port),
         true);
  std::this_thread::sleep_for(2s);
  expect(mnode, "log_stop:duration_ms=2000", true);
  expect(ynode, "convert", true);
  expect(mnode, "stop_server", true);
  expect(mnode, "convert", true);
  expect(mnode, "exit", true);
  expect(ynode, "exit", true);
  for (auto& t : workers) t.join();

  const auto mdir = fs::path(orchestrator::iteration_dir((dir / "server_node").string(), "simserver", "control", 0));
  const auto ydir = fs::path(orchestrator::iteration_dir((dir / "emulation_node").string(), "simserver", "control", 0));
  for (const auto& f : {mdir / "ticks.csv", mdir / "meta.json", ydir / "rtt.csv", ydir / "probes.json"}) {
    if (!fs::exists(f)) failures.push_back("missing " + f.string());
  }
  std::string detail = failures.empty() ? "16 session replies ok, 6 wrong-destination verbs rejected" : "";
  for (const auto& f : failures) detail += f + "; ";
  return {failures.empty(), detail};
}

// ---- AC10 ---------------------------------------------------------------------

struct RunDigest {
  int exit_code = -1;
  std::map<std::string, std::uint64_t> ticks;
  std::string summary;
};

RunDigest meterstick_run(const fs::path& root, const std::string& name, std::uint16_t base_port) {
  const auto out = root / name;
  fs::remove_all(out);
  fs::create_directories(root);
  const auto config = root / (name + ".yaml");
  std::ofstream(config) << fmt::format(R"(nodes:
  - {{host: 127.0.0.1, role: M, data_dir: {0}/work/M}}
  - {{host: 127.0.0.1, role: Y, data_dir: {0}/work/Y}}
workloads: [control]
duration: 5
iterations: 2
seed: 11
clock: virtual
control_port: {1}
game_port: {2}
metrics_port: {3}
output_dir: {0}
)",
                                       out.string(), base_port, base_port + 10, base_port + 20);
  RunDigest d;
  d.exit_code = process::run_shell(fmt::format("'{}' --log-level warn run --config '{}' > '{}' 2>&1", METERSTICK_EXE,
                                               config.string(), (root / (name + ".log")).string()));
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (e.path().filename() == "ticks.csv" && e.path().string().find("/work/") == std::string::npos) {
      d.ticks[fs::relative(e.path(), out).string()] = file_digest(e.path().string());
    }
  }
  std::ifstream in(out / "summary.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  d.summary = ss.str();
  return d;
}

Verdict ac10() {
  const auto root = fs::temp_directory_path() / "meterstick_acceptance_ac10";
  const auto port = static_cast<std::uint16_t>(free_port() % 20000 + 30000);
  const auto a = meterstick_run(root, "a", port);
  const auto b = meterstick_run(root, "b", static_cast<std::uint16_t>(port + 100));
  std::string digests;
  for (const auto& [path, h] : a.ticks) digests += fmt::format("{}={} ", path, hex64(h));
  const bool pass = a.exit_code == 0 && b.exit_code == 0 && a.ticks.size() == 2 && a.ticks == b.ticks &&
                    !a.summary.empty() && a.summary == b.summary;
  return {pass, fmt::format("exit {} / {}; ticks.csv digests {}{}; summary.csv identical: {}", a.exit_code, b.exit_code,
                            digests, a.ticks == b.ticks ? "match" : "DIFFER", a.summary == b.summary)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
  double limit_s;  // 0 = no hard runtime bound
};

}  // namespace

int main(int argc, char** argv) {
  log::set_level("error");
  const std::vector<Criterion> all = {
      {1, "VI exactness", ac1, 1.0},
      {2, "VI bounds and oracle", ac2, 10.0},
      {3, "schedule fidelity", ac3, 0.0},
      {4, "workload VI ordering", ac4, 0.0},
      {5, "entities dominate explosions", ac5, 0.0},
      {6, "TNT chain completeness", ac6, 30.0},
      {7, "RTT mechanics", ac7, 0.0},
      {8, "pathfinding optimality", ac8, 10.0},
      {9, "control protocol conformance", ac9, 10.0},
      {10, "end-to-end determinism", ac10, 0.0},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs >= c.limit_s) {
      v.pass = false;
      v.detail += fmt::format("; runtime over {} s", c.limit_s);
    }
    failed += !v.pass;
    fmt::print("AC{} {} {} ({:.1f} s): {}\n", c.id, v.pass ? "PASS" : "FAIL", c.name, secs, v.detail);
    std::fflush(stdout);
  }
  return failed;
}
