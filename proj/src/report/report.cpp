// SPDX-License-Identifier: Apache-2.0
#include "meterstick/report/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "meterstick/common/error.hpp"
#include "meterstick/common/log.hpp"
#include "meterstick/metrics/rtt.hpp"
#include "meterstick/metrics/trace_io.hpp"
#include "meterstick/metrics/variability.hpp"
#include "meterstick/report/svg.hpp"

namespace meterstick::report {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using metrics::format_double;

namespace {

constexpr double kNsPerMsD = 1e6;

struct Iteration {
  std::string server;
  std::string workload;
  std::uint32_t iteration = 0;
  fs::path dir;
};

bool is_number(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<Iteration> discover(const fs::path& root) {
  std::vector<Iteration> out;
  for (const auto& server : fs::directory_iterator(root)) {
    if (!server.is_directory() || server.path().filename() == "logs") continue;
    for (const auto& workload : fs::directory_iterator(server.path())) {
      if (!workload.is_directory()) continue;
      for (const auto& iter : fs::directory_iterator(workload.path())) {
        const auto name = iter.path().filename().string();
        if (!iter.is_directory() || !is_number(name)) continue;
        out.push_back({server.path().filename().string(), workload.path().filename().string(),
                       static_cast<std::uint32_t>(std::stoul(name)), iter.path()});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Iteration& a, const Iteration& b) {
    return std::tie(a.server, a.workload, a.iteration) < std::tie(b.server, b.workload, b.iteration);
  });
  return out;
}

std::string ms(std::int64_t ns) { return format_double(static_cast<double>(ns) / kNsPerMsD); }
std::string msd(double ns) { return format_double(ns / kNsPerMsD); }

std::ofstream open_csv(const fs::path& path, std::string_view header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << header << '\n';
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

struct Loaded {
  SummaryRow row;
  std::vector<metrics::TickRecord> ticks;
  std::vector<metrics::RttSample> rtt;
  std::uint64_t censored = 0;
  bool has_shares = false;
  metrics::ComponentShares shares{};
};

Loaded load(const Iteration& it, std::vector<Gap>& gaps) {
  Loaded l;
  l.row.server = it.server;
  l.row.workload = it.workload;
  l.row.iteration = it.iteration;
  l.row.status = "complete";
  auto gap = [&](const std::string& what) {
    gaps.push_back({it.server, it.workload, std::to_string(it.iteration), what});
    if (l.row.status == "complete") l.row.status = "gap";
  };

  Json meta;
  {
    std::ifstream in(it.dir / "meta.json");
    if (!in) {
      gap("meta.json");
      return l;
    }
    try {
      meta = Json::parse(in);
    } catch (const std::exception&) {
      gap("meta.json");
      return l;
    }
  }
  if (meta.value("status", "") != "complete") {
    l.row.status = "failed";
    gaps.push_back({it.server, it.workload, std::to_string(it.iteration), "failed: " + meta.value("error", "")});
    return l;
  }

  std::ifstream ticks_in(it.dir / "ticks.csv");
  if (!ticks_in) {
    gap("ticks.csv");
  } else {
    try {
      for (const auto& row : metrics::read_tick_csv(ticks_in)) l.ticks.push_back(row.record);
      metrics::TickTrace trace;
      trace.ticks = l.ticks;
      trace.wall_duration_ns = meta.at("wall_duration_ns").get<std::int64_t>();
      trace.tick_period_ns = meta.at("tick_period_ns").get<std::int64_t>();
      const auto rep = metrics::summarize_trace(trace, trace.tick_period_ns);
      l.row.has_ticks = true;
      l.row.ticks = rep.tick_count;
      l.row.vi = rep.vi;
      l.row.mean_busy_ms = rep.mean_busy_ns / kNsPerMsD;
      l.row.median_busy_ms = static_cast<double>(rep.median_busy_ns) / kNsPerMsD;
      l.row.p95_busy_ms = static_cast<double>(rep.p95_busy_ns) / kNsPerMsD;
      l.row.max_busy_ms = static_cast<double>(rep.max_busy_ns) / kNsPerMsD;
      l.row.overloaded_fraction = rep.overloaded_tick_fraction;
      try {
        l.shares = metrics::component_shares(l.ticks);
        l.has_shares = true;
      } catch (const Error&) {
      }
    } catch (const std::exception& e) {
      gap(std::string("ticks.csv (") + e.what() + ")");
      l.ticks.clear();
    }
  }

  std::ifstream rtt_in(it.dir / "rtt.csv");
  if (!rtt_in) {
    gap("rtt.csv");
  } else {
    try {
      for (const auto& row : metrics::read_rtt_csv(rtt_in)) l.rtt.push_back(row.sample);
      l.censored = meta.contains("rtt") ? meta["rtt"].value("censored", 0ULL) : 0;
      if (!l.rtt.empty()) {
        const auto c = metrics::classify_rtt(l.rtt);
        l.row.has_rtt = true;
        l.row.noticeable_fraction = c.fraction_noticeable;
        l.row.unplayable_fraction = c.fraction_unplayable;
      }
    } catch (const std::exception& e) {
      gap(std::string("rtt.csv (") + e.what() + ")");
    }
  }
  if (!fs::exists(it.dir / "sysmetrics.csv")) gap("sysmetrics.csv");
  return l;
}

BoxStats box_of(std::string label, std::vector<double> v) {
  BoxStats b;
  b.label = std::move(label);
  if (v.empty()) return b;
  std::sort(v.begin(), v.end());
  auto rank = [&](double p) {
    const auto n = v.size();
    auto k = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
    return v[std::clamp<std::size_t>(k, 1, n) - 1];
  };
  b.min = v.front();
  b.q1 = rank(25);
  b.median = rank(50);
  b.q3 = rank(75);
  b.max = v.back();
  return b;
}

}  // namespace

std::string format_summary_row(const SummaryRow& r) {
  std::ostringstream s;
  s << r.server << ',' << r.workload << ',' << r.iteration << ',' << r.status << ',';
  if (r.has_ticks) {
    s << r.ticks << ',' << format_double(r.vi) << ',' << format_double(r.mean_busy_ms) << ','
      << format_double(r.median_busy_ms) << ',' << format_double(r.p95_busy_ms) << ',' << format_double(r.max_busy_ms)
      << ',' << format_double(r.overloaded_fraction) << ',';
  } else {
    s << ",,,,,,,";
  }
  if (r.has_rtt) {
    s << format_double(r.noticeable_fraction) << ',' << format_double(r.unplayable_fraction);
  } else {
    s << ',';
  }
  return s.str();
}

ReportResult generate_report(const std::string& results_dir, const std::string& out_dir) {
  if (!fs::is_directory(results_dir)) throw Error("results directory not found: " + results_dir);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  ReportResult result;

  auto summary = open_csv(out / "summary.csv", kSummaryHeader);
  auto series = open_csv(out / "plot_tick_series.csv", kTickSeriesHeader);
  auto vi = open_csv(out / "plot_vi.csv", kViHeader);
  auto shares = open_csv(out / "plot_component_shares.csv", kSharesHeader);

  std::vector<Series> lines;
  std::map<std::pair<std::string, std::string>, std::vector<double>> vi_by_group;
  std::map<std::pair<std::string, std::string>, std::vector<double>> rtt_by_group;
  std::map<std::pair<std::string, std::string>, std::uint64_t> censored_by_group;
  std::map<std::pair<std::string, std::string>, std::vector<metrics::RttSample>> samples_by_group;
  std::vector<StackedBar> bars;

  for (const auto& it : discover(results_dir)) {
    const auto l = load(it, result.gaps);
    result.rows.push_back(l.row);
    summary << format_summary_row(l.row) << '\n';
    const auto group = std::make_pair(it.server, it.workload);
    const std::string prefix = it.server + "," + it.workload + "," + std::to_string(it.iteration) + ",";
    if (l.row.has_ticks) {
      Series s;
      s.label = it.workload + " #" + std::to_string(it.iteration);
      const auto t0 = l.ticks.empty() ? 0 : l.ticks.front().start_ns;
      for (const auto& t : l.ticks) {
        const double time_s = static_cast<double>(t.start_ns - t0) / 1e9;
        series << prefix << t.index << ',' << format_double(time_s) << ',' << ms(t.busy_ns) << '\n';
        s.x.push_back(time_s);
        s.y.push_back(static_cast<double>(t.busy_ns) / kNsPerMsD);
      }
      lines.push_back(std::move(s));
      vi << prefix << format_double(l.row.vi) << '\n';
      vi_by_group[group].push_back(l.row.vi);
    }
    if (l.has_shares) {
      shares << prefix;
      for (std::size_t k = 0; k < l.shares.size(); ++k) shares << (k ? "," : "") << format_double(l.shares[k]);
      shares << '\n';
      bars.push_back({it.workload + " #" + std::to_string(it.iteration),
                      std::vector<double>(l.shares.begin(), l.shares.end())});
    }
    if (l.row.status != "failed") {
      auto& v = rtt_by_group[group];
      for (const auto& s : l.rtt) v.push_back(static_cast<double>(s.rtt_ns));
      auto& all = samples_by_group[group];
      all.insert(all.end(), l.rtt.begin(), l.rtt.end());
      censored_by_group[group] += l.censored;
    }
  }

  auto rtt = open_csv(out / "plot_rtt_box.csv", kRttBoxHeader);
  std::vector<BoxStats> rtt_boxes;
  for (const auto& [group, values] : rtt_by_group) {
    rtt << group.first << ',' << group.second << ',' << values.size() << ',' << censored_by_group[group] << ',';
    if (values.empty()) {
      rtt << ",,,,,,\n";
      continue;
    }
    auto b = box_of(group.second, values);
    const auto c = metrics::classify_rtt(samples_by_group[group]);
    rtt << msd(b.min) << ',' << msd(b.q1) << ',' << msd(b.median) << ',' << msd(b.q3) << ',' << msd(b.max) << ','
        << format_double(c.fraction_noticeable) << ',' << format_double(c.fraction_unplayable) << '\n';
    for (double* v : {&b.min, &b.q1, &b.median, &b.q3, &b.max}) *v /= kNsPerMsD;
    rtt_boxes.push_back(b);
  }

  auto gaps = open_csv(out / "gaps.csv", kGapsHeader);
  for (const auto& g : result.gaps) {
    std::string missing = g.missing;
    std::replace(missing.begin(), missing.end(), ',', ';');
    std::replace(missing.begin(), missing.end(), '\n', ' ');
    gaps << g.server << ',' << g.workload << ',' << g.iteration << ',' << missing << '\n';
  }

  std::vector<BoxStats> vi_boxes;
  for (const auto& [group, values] : vi_by_group) vi_boxes.push_back(box_of(group.second, values));
  write_text(out / "tick_series.svg",
             line_chart_svg("Tick duration over time", "time (s)", "busy (ms)", lines, 50.0));
  write_text(out / "vi.svg", box_chart_svg("Variability Index per iteration", "VI", vi_boxes));
  write_text(out / "component_shares.svg",
             stacked_bars_svg("Tick time by component", {"player", "terrain", "entities", "persistence", "networking", "other"},
                              bars));
  write_text(out / "rtt.svg", box_chart_svg("Response time", "RTT (ms)", rtt_boxes));
  if (!result.gaps.empty()) log::warn("report is partial: {} gap(s), see gaps.csv", result.gaps.size());
  return result;
}

}  // namespace meterstick::report
