// SPDX-License-Identifier: Apache-2.0
// meterstick: run experiments, report on results, and host the pieces of a
// distributed run (reference server, emulator, workers).
#include <CLI11.hpp>

#include <sched.h>
#include <signal.h>
#include <sys/resource.h>

#include <cstdio>
#include <iostream>

#include "meterstick/common/error.hpp"
#include "meterstick/common/log.hpp"
#include "meterstick/emulator/emulator.hpp"
#include "meterstick/metrics/rtt.hpp"
#include "meterstick/metrics/trace_io.hpp"
#include "meterstick/orchestrator/controller.hpp"
#include "meterstick/orchestrator/worker.hpp"
#include "meterstick/report/config.hpp"
#include "meterstick/report/report.hpp"
#include "meterstick/server/sim_server.hpp"
#include "meterstick/world/snapshot.hpp"
#include "meterstick/workloads/worldgen.hpp"

using namespace meterstick;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;

/// Blocks SIGINT/SIGTERM in every thread; wait_for_signal() then picks them up.
sigset_t block_stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

void apply_limits(std::uint64_t memory_limit_mb, std::uint64_t affinity) {
  if (memory_limit_mb > 0) {
    rlimit lim{};
    lim.rlim_cur = lim.rlim_max = memory_limit_mb * 1024 * 1024;
    if (setrlimit(RLIMIT_AS, &lim) != 0) log::warn("could not apply memory limit");
  }
  if (affinity != 0) {
    cpu_set_t cpus;
    CPU_ZERO(&cpus);
    for (int i = 0; i < 64 && i < CPU_SETSIZE; ++i) {
      if (affinity & (1ULL << i)) CPU_SET(i, &cpus);
    }
    if (sched_setaffinity(0, sizeof(cpus), &cpus) != 0) log::warn("could not apply cpu affinity");
  }
}

bool on_off(const std::string& v) {
  if (v == "on" || v == "1" || v == "true") return true;
  if (v == "off" || v == "0" || v == "false") return false;
  throw ConfigError("expected on or off, got '" + v + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meterstick: performance variability benchmark for voxel game servers"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  // run
  auto* run = app.add_subcommand("run", "Run an experiment and write the report");
  std::string config_path;
  bool resume = false;
  std::string output_override;
  run->add_option("--config", config_path, "Experiment config (YAML)")->required();
  run->add_flag("--resume", resume, "Skip iterations that already completed");
  run->add_option("--output", output_override, "Override output_dir");

  // report
  auto* rep = app.add_subcommand("report", "Aggregate a results directory");
  std::string results_dir;
  std::string report_out;
  rep->add_option("results", results_dir, "Results directory")->required();
  rep->add_option("--out", report_out, "Where to write the report (default: the results directory)");

  // worldgen
  auto* wg = app.add_subcommand("worldgen", "Generate a workload world snapshot");
  std::string wg_kind;
  int wg_scale = 1;
  std::uint64_t wg_seed = 0;
  std::uint32_t wg_timer = 400;
  std::string wg_out;
  wg->add_option("--kind", wg_kind, "control, tnt, farm, lag or players")->required();
  wg->add_option("--scale", wg_scale, "1, 2 or 4");
  wg->add_option("--seed", wg_seed, "World seed");
  wg->add_option("--tnt-timer", wg_timer, "Ticks from first join to TNT ignition");
  wg->add_option("--out", wg_out, "Snapshot file")->required();

  // simserver
  auto* ss = app.add_subcommand("simserver", "Run the reference server");
  std::string ss_world = "control:1:0";
  std::string ss_host = "127.0.0.1";
  std::uint16_t ss_port = server::kDefaultGamePort;
  std::uint16_t ss_metrics = server::kDefaultMetricsPort;
  int ss_tick_ms = 50;
  std::string ss_concurrent = "off";
  std::uint64_t ss_memory = 0;
  std::uint64_t ss_affinity = 0;
  std::string ss_clock = "wall";
  bool ss_hold = false;
  std::uint64_t ss_max_ticks = 0;
  std::uint32_t ss_timer = 400;
  std::string ss_cost = "default";
  ss->add_option("--world", ss_world, "Snapshot file or kind:scale:seed");
  ss->add_option("--host", ss_host, "Bind address");
  ss->add_option("--port", ss_port, "Game port");
  ss->add_option("--metrics-port", ss_metrics, "Metrics port");
  ss->add_option("--tick-ms", ss_tick_ms, "Tick period in milliseconds");
  ss->add_option("--concurrent-phases", ss_concurrent, "Run terrain and entities side by side (on|off)")
      ->expected(0, 1)
      ->default_str("off");
  ss->add_option("--memory-limit-mb", ss_memory, "Address-space limit");
  ss->add_option("--cpu-affinity", ss_affinity, "CPU mask");
  ss->add_option("--clock", ss_clock, "wall or virtual");
  ss->add_flag("--hold", ss_hold, "Start ticking at the first join");
  ss->add_option("--max-ticks", ss_max_ticks, "Stop ticking after this many ticks (0: never)");
  ss->add_option("--tnt-timer", ss_timer, "Ticks from first join to TNT ignition (generated worlds)");
  ss->add_option("--cost-model", ss_cost, "Cost model: default, zero, or key=value overrides");

  // emulate
  auto* em = app.add_subcommand("emulate", "Drive bots against a server");
  std::string em_endpoint = "127.0.0.1:25565";
  int em_bots = 1;
  std::string em_behavior = "idle";
  double em_duration = 10;
  std::uint64_t em_seed = 0;
  std::string em_out;
  em->add_option("--endpoint", em_endpoint, "host:port");
  em->add_option("--bots", em_bots, "Number of bots");
  em->add_option("--behavior", em_behavior, "idle or bounded-random");
  em->add_option("--duration", em_duration, "Seconds");
  em->add_option("--seed", em_seed, "Seed");
  em->add_option("--out", em_out, "Write rtt CSV here");

  // worker
  auto* wk = app.add_subcommand("worker", "Run a worker that dials the controller");
  std::string wk_role;
  orchestrator::WorkerOptions wk_opts;
  std::string wk_controller = "127.0.0.1:25555";
  wk->add_option("--role", wk_role, "server_node (M) or emulation_node (Y)")->required();
  wk->add_option("--name", wk_opts.name, "Worker name");
  wk->add_option("--controller", wk_controller, "Controller host:port");
  wk->add_option("--data-dir", wk_opts.data_dir, "Artifact directory");

  // convert
  auto* cv = app.add_subcommand("convert", "Convert binary metric logs to CSV");
  std::string cv_kind = "ticks";
  std::string cv_in;
  std::string cv_out;
  bool cv_reverse = false;
  cv->add_option("--kind", cv_kind, "ticks or rtt");
  cv->add_option("--in", cv_in, "Input file")->required();
  cv->add_option("--out", cv_out, "Output file")->required();
  cv->add_flag("--reverse", cv_reverse, "ticks CSV back to binary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  log::set_level(log_level);

  try {
    if (run->parsed()) {
      auto config = report::parse_config_file(config_path);
      if (resume) config.resume = true;
      if (!output_override.empty()) config.output_dir = output_override;
      const auto outcome = orchestrator::run_experiment(config);
      const auto report = report::generate_report(config.output_dir, config.output_dir);
      std::printf("%zu complete, %zu skipped, %zu failed; report in %s\n",
                  outcome.count(orchestrator::IterationOutcome::Status::complete),
                  outcome.count(orchestrator::IterationOutcome::Status::skipped),
                  outcome.count(orchestrator::IterationOutcome::Status::failed), config.output_dir.c_str());
      return std::max(outcome.exit_code(), report.exit_code());
    }
    if (rep->parsed()) {
      const auto result = report::generate_report(results_dir, report_out.empty() ? results_dir : report_out);
      std::printf("%zu iteration(s), %zu gap(s)\n", result.rows.size(), result.gaps.size());
      return result.exit_code();
    }
    if (wg->parsed()) {
      const auto kind = workloads::parse_workload(wg_kind);
      if (!kind) throw ConfigError("unknown workload kind '" + wg_kind + "'");
      workloads::WorkloadSpec spec;
      spec.kind = *kind;
      spec.scale = wg_scale;
      spec.seed = wg_seed;
      spec.tnt_timer_ticks = wg_timer;
      workloads::validate(spec);
      world::save_snapshot(wg_out, workloads::build_world(spec));
      std::printf("wrote %s (%s)\n", wg_out.c_str(), workloads::world_ref(spec).c_str());
      return kExitOk;
    }
    if (ss->parsed()) {
      const auto signals = block_stop_signals();
      apply_limits(ss_memory, ss_affinity);
      server::ServerConfig cfg;
      if (ss_world.find(':') != std::string::npos || workloads::parse_workload(ss_world)) {
        cfg.world = workloads::parse_world_ref(ss_world);
        cfg.world.tnt_timer_ticks = ss_timer;
      } else {
        cfg.snapshot_path = ss_world;
      }
      cfg.game = {ss_host, ss_port};
      cfg.metrics = {ss_host, ss_metrics};
      if (ss_tick_ms < 1) throw ConfigError("--tick-ms must be >= 1");
      cfg.tick_ns = ms_to_ns(ss_tick_ms);
      if (ss_clock != "wall" && ss_clock != "virtual") throw ConfigError("--clock must be wall or virtual");
      cfg.virtual_clock = ss_clock == "virtual";
      cfg.hold_until_join = ss_hold;
      cfg.max_ticks = ss_max_ticks;
      cfg.loop.concurrent_phases = ss_concurrent.empty() || on_off(ss_concurrent);
      cfg.loop.cost = server::CostModel::parse(ss_cost);
      server::SimServer srv(std::move(cfg));
      srv.start();
      int sig = 0;
      sigwait(&signals, &sig);
      log::info("signal {}: stopping", sig);
      srv.stop();
      return kExitOk;
    }
    if (em->parsed()) {
      emulator::EmulatorConfig cfg;
      cfg.endpoint = net::parse_endpoint(em_endpoint);
      cfg.bots = em_bots;
      cfg.behavior = emulator::parse_behavior(em_behavior);
      cfg.duration = std::chrono::milliseconds(static_cast<std::int64_t>(em_duration * 1000));
      cfg.seed = em_seed;
      const auto result = emulator::run_emulation(cfg);
      if (!em_out.empty()) {
        std::vector<metrics::RttRow> rows;
        for (const auto& s : result.samples) rows.push_back({0, s});
        std::ofstream out(em_out);
        metrics::write_rtt_csv(out, rows);
      }
      std::printf("%zu samples, %llu censored, %llu actions\n", result.samples.size(),
                  static_cast<unsigned long long>(result.censored),
                  static_cast<unsigned long long>(result.actions_sent));
      if (!result.samples.empty()) {
        const auto c = metrics::classify_rtt(result.samples);
        std::printf("median %.1f ms, max %.1f ms, >60 ms %.3f, >118 ms %.3f\n", static_cast<double>(c.median_ns) / 1e6,
                    static_cast<double>(c.max_ns) / 1e6, c.fraction_noticeable, c.fraction_unplayable);
      }
      return kExitOk;
    }
    if (wk->parsed()) {
      const auto role = orchestrator::parse_role(wk_role);
      if (!role || *role == orchestrator::Role::controller) throw ConfigError("--role must be server_node or emulation_node");
      wk_opts.role = *role;
      wk_opts.controller = net::parse_endpoint(wk_controller);
      return orchestrator::run_worker(wk_opts);
    }
    if (cv->parsed()) {
      std::size_t n = 0;
      if (cv_kind == "ticks" && !cv_reverse) {
        n = metrics::convert_trace_file(cv_in, cv_out);
      } else if (cv_kind == "ticks") {
        std::ifstream in(cv_in);
        std::ofstream out(cv_out, std::ios::binary);
        if (!in || !out) throw Error("cannot open input or output file");
        n = metrics::convert_trace_back(in, out);
      } else if (cv_kind == "rtt") {
        n = metrics::convert_rtt_file(cv_in, cv_out);
      } else {
        throw ConfigError("--kind must be ticks or rtt");
      }
      std::printf("%zu record(s)\n", n);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
