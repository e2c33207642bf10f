// SPDX-License-Identifier: Apache-2.0
// Aggregates a results tree (<server>/<workload>/<iteration>/) into
// summary.csv and plot-ready data files. Column layouts are fixed; see
// docs/formats.md.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace meterstick::report {

inline constexpr std::string_view kSummaryHeader =
    "server,workload,iteration,status,ticks,vi,mean_busy_ms,median_busy_ms,p95_busy_ms,max_busy_ms,"
    "overloaded_fraction,noticeable_fraction,unplayable_fraction";
inline constexpr std::string_view kTickSeriesHeader = "server,workload,iteration,tick_index,time_s,busy_ms";
inline constexpr std::string_view kViHeader = "server,workload,iteration,vi";
inline constexpr std::string_view kSharesHeader =
    "server,workload,iteration,player,terrain,entities,persistence,networking,other";
inline constexpr std::string_view kRttBoxHeader =
    "server,workload,samples,censored,min_ms,q1_ms,median_ms,q3_ms,max_ms,noticeable_fraction,unplayable_fraction";
inline constexpr std::string_view kGapsHeader = "server,workload,iteration,missing";

struct Gap {
  std::string server;
  std::string workload;
  std::string iteration;
  std::string missing;
};

struct SummaryRow {
  std::string server;
  std::string workload;
  std::uint32_t iteration = 0;
  /// complete, failed or gap.
  std::string status;
  bool has_ticks = false;
  std::size_t ticks = 0;
  double vi = 0;
  double mean_busy_ms = 0;
  double median_busy_ms = 0;
  double p95_busy_ms = 0;
  double max_busy_ms = 0;
  double overloaded_fraction = 0;
  bool has_rtt = false;
  double noticeable_fraction = 0;
  double unplayable_fraction = 0;
};

struct ReportResult {
  std::vector<SummaryRow> rows;
  std::vector<Gap> gaps;
  /// 0 for a complete report, 3 when anything was missing or failed.
  int exit_code() const { return gaps.empty() ? 0 : 3; }
};

/// Reads `results_dir` and writes summary.csv, plot_*.csv, gaps.csv and
/// *.svg into `out_dir`. Throws meterstick::Error if results_dir does not exist.
ReportResult generate_report(const std::string& results_dir, const std::string& out_dir);

std::string format_summary_row(const SummaryRow& row);

}  // namespace meterstick::report
