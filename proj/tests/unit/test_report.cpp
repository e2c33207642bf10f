// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "meterstick/common/error.hpp"
#include "meterstick/common/rng.hpp"
#include "meterstick/metrics/trace_io.hpp"
#include "meterstick/report/config.hpp"
#include "meterstick/report/report.hpp"

using namespace meterstick;
namespace fs = std::filesystem;
namespace m = meterstick::metrics;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("meterstick_report_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

/// Writes one iteration's artifacts: ticks with the given busy times (ms),
/// starting back to back, and optional RTT samples (ms).
void write_iteration(const fs::path& root, const std::string& workload, std::uint32_t iteration,
                     const std::vector<std::int64_t>& busy_ms, std::int64_t wall_ms,
                     const std::vector<std::int64_t>& rtt_ms, bool with_rtt = true, bool with_sys = true) {
  const auto dir = root / "simserver" / workload / std::to_string(iteration);
  fs::create_directories(dir);
  std::vector<m::TickRow> rows;
  std::int64_t start = 0;
  for (std::size_t i = 0; i < busy_ms.size(); ++i) {
    m::TickRow r;
    r.iteration = iteration;
    r.record.index = i;
    r.record.start_ns = start;
    r.record.busy_ns = ms_to_ns(busy_ms[i]);
    r.record.shares = {0.1, 0.1, 0.5, 0.1, 0.1, 0.1};
    start += std::max(r.record.busy_ns, ms_to_ns(50));
    rows.push_back(r);
  }
  {
    std::ofstream out(dir / "ticks.csv");
    m::write_tick_csv(out, rows);
  }
  if (with_rtt) {
    std::vector<m::RttRow> rtt;
    for (std::size_t i = 0; i < rtt_ms.size(); ++i) {
      const auto sent = static_cast<std::int64_t>(i) * ms_to_ns(2000);
      rtt.push_back({iteration, m::RttSample::between(sent, sent + ms_to_ns(rtt_ms[i]))});
    }
    std::ofstream out(dir / "rtt.csv");
    m::write_rtt_csv(out, rtt);
  }
  if (with_sys) {
    std::ofstream out(dir / "sysmetrics.csv");
    out << "t_ns,cpu_fraction,memory_bytes,thread_count,disk_read_bytes,disk_write_bytes,net_sent_bytes,net_recv_bytes,flag\n";
  }
  nlohmann::json meta{{"status", "complete"},
                      {"tick_period_ns", ms_to_ns(50)},
                      {"wall_duration_ns", ms_to_ns(wall_ms)},
                      {"rtt", {{"censored", 0}}}};
  std::ofstream(dir / "meta.json") << meta.dump(2);
}

}  // namespace

// ---- config -----------------------------------------------------------------

TEST(Config, OneNodeGivesTableDefaults) {
  const auto c = report::parse_config_text("nodes: [10.0.0.5]\n");
  EXPECT_EQ(c.duration_s, 60.0);
  EXPECT_EQ(c.iterations, 1);
  EXPECT_EQ(c.bots, 25);
  EXPECT_EQ(c.scale, 1);
  EXPECT_EQ(c.behavior, emulator::Behavior::bounded_random);
  EXPECT_EQ(c.control_port, 25555);
  EXPECT_EQ(c.game_port, 25565);
  EXPECT_EQ(c.metrics_port, 25585);
  EXPECT_EQ(c.memory_limit_mb, 4096u);
  EXPECT_EQ(c.cpu_affinity, 0xFFFFFFFFu);
  ASSERT_EQ(c.nodes.size(), 2u);
  EXPECT_EQ(c.nodes[0].role, orchestrator::Role::server_node);
  EXPECT_EQ(c.nodes[1].role, orchestrator::Role::emulation_node);
  EXPECT_EQ(c.nodes[1].host, "10.0.0.5");
}

TEST(Config, RejectsScaleThreeCitingAllowedValues) {
  try {
    report::parse_config_text("nodes: [h]\nscale: 3\n");
    FAIL() << "scale 3 accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("1, 2, 4"), std::string::npos) << e.what();
  }
}

TEST(Config, MissingNodeAddressNamesTheField) {
  try {
    report::parse_config_text("nodes:\n  - role: server_node\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("nodes[0].host"), std::string::npos) << e.what();
  }
  EXPECT_THROW(report::parse_config_text(""), ConfigError);
  EXPECT_THROW(report::parse_config_text("duration: 10\n"), ConfigError);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(report::parse_config_text("nodes: [h]\ndurration: 10\n"), ConfigError);
  EXPECT_THROW(report::parse_config_text("nodes: [{host: h, colour: red}]\n"), ConfigError);
  EXPECT_THROW(report::parse_config_text("nodes: [h]\nduration: 0\n"), ConfigError);
  EXPECT_THROW(report::parse_config_text("nodes: [h]\niterations: 0\n"), ConfigError);
  EXPECT_THROW(report::parse_config_text("nodes: [h]\nworkloads: [quarry]\n"), ConfigError);
  EXPECT_THROW(report::parse_config_text("nodes: [h]\nbehavior: frantic\n"), ConfigError);
  EXPECT_THROW(report::parse_config_text("nodes: [h]\nbots: many\n"), ConfigError);
  EXPECT_THROW(report::parse_config_text("nodes: [h, i, j]\n"), ConfigError);
}

TEST(Config, SerializeParseIsIdentity) {
  const auto c = report::parse_config_text(R"(
nodes:
  - {host: 10.0.0.1, name: alpha, role: M, launch: remote-exec, command: "ssh {host} meterstick worker", retrieve: "scp {host}:{src} {dst}"}
  - {host: 10.0.0.2, role: Y}
workloads: [control, tnt, farm, lag, players]
duration: 12.5
iterations: 3
bots: 50
behavior: idle
scale: 4
seed: 99
clock: virtual
cpu_affinity: 0x0F
concurrent_phases: true
)");
  const auto text = report::serialize_config(c);
  const auto again = report::parse_config_text(text);
  EXPECT_EQ(again, c);
  EXPECT_EQ(report::serialize_config(again), text);
}

// ---- report -----------------------------------------------------------------

TEST(Report, GoldenHeaders) {
  const auto root = fresh_dir("headers");
  write_iteration(root / "results", "control", 0, {1, 1, 1}, 150, {20});
  report::generate_report((root / "results").string(), (root / "out").string());
  const auto out = root / "out";
  EXPECT_EQ(first_line(out / "summary.csv"),
            "server,workload,iteration,status,ticks,vi,mean_busy_ms,median_busy_ms,p95_busy_ms,max_busy_ms,"
            "overloaded_fraction,noticeable_fraction,unplayable_fraction");
  EXPECT_EQ(first_line(out / "plot_tick_series.csv"), "server,workload,iteration,tick_index,time_s,busy_ms");
  EXPECT_EQ(first_line(out / "plot_vi.csv"), "server,workload,iteration,vi");
  EXPECT_EQ(first_line(out / "plot_component_shares.csv"),
            "server,workload,iteration,player,terrain,entities,persistence,networking,other");
  EXPECT_EQ(first_line(out / "plot_rtt_box.csv"),
            "server,workload,samples,censored,min_ms,q1_ms,median_ms,q3_ms,max_ms,noticeable_fraction,"
            "unplayable_fraction");
  EXPECT_EQ(first_line(out / "gaps.csv"), "server,workload,iteration,missing");
  for (const auto* svg : {"tick_series.svg", "vi.svg", "component_shares.svg", "rtt.svg"}) {
    EXPECT_EQ(read_file(out / svg).rfind("<svg", 0), 0u) << svg;
  }
}

TEST(Report, ThreeTickInjectionGivesVi097) {
  const auto root = fresh_dir("three_tick");
  write_iteration(root, "synthetic", 0, {50, 4900, 50}, 5000, {30, 70, 130, 40});
  const auto r = report::generate_report(root.string(), root.string());
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_NEAR(r.rows[0].vi, 0.97, 1e-12);
  EXPECT_EQ(r.exit_code(), 0);
  EXPECT_DOUBLE_EQ(r.rows[0].noticeable_fraction, 0.5);
  EXPECT_DOUBLE_EQ(r.rows[0].unplayable_fraction, 0.25);
  std::ifstream in(root / "summary.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(row, "simserver,synthetic,0,complete,3,0.97,1666.6666666666667,50,4900,4900,0.3333333333333333,0.5,0.25");
}

TEST(Report, MissingArtifactsGivePartialReport) {
  const auto root = fresh_dir("gaps");
  write_iteration(root, "control", 0, {1, 2, 3}, 150, {10});
  write_iteration(root, "control", 1, {1, 2, 3}, 150, {10}, /*with_rtt=*/false);
  fs::create_directories(root / "simserver" / "control" / "2");
  std::ofstream(root / "simserver" / "control" / "2" / "meta.json") << R"({"status":"failed","error":"worker lost"})";
  const auto r = report::generate_report(root.string(), root.string());
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].status, "complete");
  EXPECT_EQ(r.rows[1].status, "gap");
  EXPECT_TRUE(r.rows[1].has_ticks);
  EXPECT_EQ(r.rows[2].status, "failed");
  EXPECT_EQ(r.gaps.size(), 2u);
  EXPECT_EQ(r.exit_code(), 3);
  const auto summary = read_file(root / "summary.csv");
  EXPECT_NE(summary.find("simserver,control,2,failed,,,,,,,,,"), std::string::npos);
}

TEST(Report, IdenticalTreesGiveIdenticalReports) {
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  for (const auto& root : {a, b}) {
    write_iteration(root / "results", "lag", 0, {40, 60, 120, 45}, 300, {20, 80});
    write_iteration(root / "results", "lag", 1, {70, 30, 30, 90}, 300, {25});
    write_iteration(root / "results", "control", 0, {1, 1, 1}, 150, {12});
    report::generate_report((root / "results").string(), (root / "out").string());
  }
  for (const auto& e : fs::directory_iterator(a / "out")) {
    EXPECT_EQ(read_file(e.path()), read_file(b / "out" / e.path().filename())) << e.path().filename();
  }
}

TEST(Report, MissingResultsDirectoryThrows) {
  EXPECT_THROW(report::generate_report("/nonexistent/meterstick", "/tmp/x"), Error);
}

// ---- convert ----------------------------------------------------------------

TEST(Convert, SingleRecordGivesOneMatchingRow) {
  m::TickRow row;
  row.iteration = 4;
  row.record = {17, 123456789, 52000000, {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.03125}};
  std::stringstream bin, csv;
  m::write_tick_frame(bin, row);
  EXPECT_EQ(m::convert_trace(bin, csv), 1u);
  EXPECT_EQ(csv.str(), std::string(m::kTickCsvHeader) +
                           "\n4,17,123456789,52000000,0.5,0.25,0.125,0.0625,0.03125,0.03125\n");
}

TEST(Convert, HundredThousandRandomRecordsRoundTrip) {
  Rng rng(77);
  std::stringstream bin;
  for (int i = 0; i < 100000; ++i) {
    m::TickRow row;
    row.iteration = static_cast<std::uint32_t>(uniform_below(rng, 1000));
    row.record.index = rng();
    row.record.start_ns = static_cast<std::int64_t>(rng() >> 1);
    row.record.busy_ns = static_cast<std::int64_t>(rng() >> 2);
    for (auto& s : row.record.shares) s = uniform_unit(rng);
    m::write_tick_frame(bin, row);
  }
  const auto original = bin.str();
  std::stringstream csv, back;
  EXPECT_EQ(m::convert_trace(bin, csv), 100000u);
  EXPECT_EQ(m::convert_trace_back(csv, back), 100000u);
  EXPECT_EQ(back.str(), original);
}
