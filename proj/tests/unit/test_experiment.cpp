// SPDX-License-Identifier: Apache-2.0
// Controller and workers end to end, with real processes on loopback.
#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "meterstick/common/error.hpp"
#include "meterstick/common/process.hpp"
#include "meterstick/orchestrator/controller.hpp"
#include "meterstick/report/config.hpp"

using namespace meterstick;
using namespace meterstick::orchestrator;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("meterstick_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

report::ExperimentConfig small_config(const fs::path& dir, std::uint16_t port_base, int iterations) {
  auto c = report::parse_config_text("nodes: [127.0.0.1]\n");
  c.output_dir = (dir / "results").string();
  for (auto& n : c.nodes) n.data_dir = (dir / "work" / n.name).string();
  c.workloads = {workloads::WorkloadKind::control};
  c.duration_s = 1.0;
  c.iterations = iterations;
  c.control_port = port_base;
  c.game_port = static_cast<std::uint16_t>(port_base + 10);
  c.metrics_port = static_cast<std::uint16_t>(port_base + 20);
  return c;
}

ControllerOptions options() {
  ControllerOptions o;
  o.exe = METERSTICK_EXE;
  return o;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return out;
}

}  // namespace

TEST(Experiment, TwoIterationsProduceTwoArtifactSets) {
  const auto dir = fresh_dir("two_iter");
  const auto config = small_config(dir, 27555, 2);
  const auto outcome = run_experiment(config, options());
  ASSERT_EQ(outcome.iterations.size(), 2u);
  for (std::uint32_t i = 0; i < 2; ++i) {
    const auto& it = outcome.iterations[i];
    EXPECT_EQ(it.key.iteration, i);
    EXPECT_EQ(it.status, IterationOutcome::Status::complete) << it.error;
    for (const auto* f : {"ticks.csv", "rtt.csv", "sysmetrics.csv", "meta.json"}) {
      EXPECT_TRUE(fs::exists(fs::path(it.dir) / f)) << it.dir << "/" << f;
    }
    const auto meta = nlohmann::json::parse(read_file(fs::path(it.dir) / "meta.json"));
    EXPECT_EQ(meta["iteration"], i);
    EXPECT_EQ(meta["status"], "complete");
    EXPECT_NEAR(meta["ticks"].get<double>(), 20, 1);
  }
  EXPECT_EQ(outcome.exit_code(), 0);
}

TEST(Experiment, KilledServerFailsOnlyThatIteration) {
  const auto dir = fresh_dir("kill");
  auto config = small_config(dir, 27655, 2);
  config.duration_s = 2.0;
  auto opts = options();
  opts.on_running = [&](const IterationKey& key) {
    if (key.iteration == 0) {
      process::run_shell("pkill -KILL -f -- '--metrics-port " + std::to_string(config.metrics_port) + "'");
    }
  };
  const auto outcome = run_experiment(config, opts);
  ASSERT_EQ(outcome.iterations.size(), 2u);
  EXPECT_EQ(outcome.iterations[0].status, IterationOutcome::Status::failed);
  EXPECT_EQ(outcome.iterations[1].status, IterationOutcome::Status::complete) << outcome.iterations[1].error;
  EXPECT_FALSE(iteration_complete(outcome.iterations[0].dir));
  EXPECT_TRUE(iteration_complete(outcome.iterations[1].dir));
  EXPECT_EQ(outcome.exit_code(), 3);
}

TEST(Experiment, ResumeRunsOnlyTheMissingIterations) {
  const auto dir = fresh_dir("resume");
  auto config = small_config(dir, 27755, 3);
  ASSERT_EQ(run_experiment(config, options()).count(IterationOutcome::Status::complete), 3u);
  const auto before = snapshot_tree(config.output_dir + "/simserver");

  config.iterations = 5;
  config.resume = true;
  const auto outcome = run_experiment(config, options());
  EXPECT_EQ(outcome.count(IterationOutcome::Status::skipped), 3u);
  EXPECT_EQ(outcome.count(IterationOutcome::Status::complete), 2u);
  const auto after = snapshot_tree(config.output_dir + "/simserver");
  for (const auto& [path, bytes] : before) {
    ASSERT_TRUE(after.count(path)) << path;
    EXPECT_EQ(after.at(path), bytes) << path;
  }
}

TEST(Experiment, UnreachableWorkerCommandFailsToStart) {
  const auto dir = fresh_dir("unreachable");
  auto config = small_config(dir, 27855, 1);
  for (auto& n : config.nodes) {
    n.launch = report::LaunchKind::remote_exec;
    n.command = "exit 0";
  }
  auto opts = options();
  opts.register_timeout = std::chrono::seconds(2);
  const auto outcome = run_experiment(config, opts);
  ASSERT_EQ(outcome.iterations.size(), 1u);
  EXPECT_EQ(outcome.iterations[0].status, IterationOutcome::Status::failed);
}

TEST(Experiment, InvalidConfigAbortsBeforeAnySideEffects) {
  const auto dir = fresh_dir("invalid");
  const auto out = dir / "results";
  EXPECT_THROW(report::parse_config_text("nodes: [127.0.0.1]\nscale: 3\noutput_dir: " + out.string() + "\n"),
               ConfigError);
  EXPECT_FALSE(fs::exists(out));
}
