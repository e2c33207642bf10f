// SPDX-License-Identifier: Apache-2.0
// Artifact formats for tick and RTT traces.
//
// CSV (headers are fixed and compared byte for byte by downstream tooling):
//   ticks: iteration,tick_index,start_ns,busy_ns,share_player,share_terrain,
//          share_entities,share_persistence,share_networking,share_other
//   rtt:   iteration,sent_ns,recv_ns,rtt_ns
//
// Binary tick log: a sequence of frames, each a little-endian u32 payload length
// followed by the payload: u32 iteration, u64 tick_index, i64 start_ns,
// i64 busy_ns, 6 x f64 shares (76 bytes). An empty file holds no records.
//
// Binary RTT log: the same framing with a 28-byte payload: u32 iteration,
// i64 sent_ns, i64 recv_ns, i64 rtt_ns.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "meterstick/metrics/rtt.hpp"
#include "meterstick/metrics/tick.hpp"

namespace meterstick::metrics {

inline constexpr std::string_view kTickCsvHeader =
    "iteration,tick_index,start_ns,busy_ns,share_player,share_terrain,share_entities,"
    "share_persistence,share_networking,share_other";
inline constexpr std::string_view kRttCsvHeader = "iteration,sent_ns,recv_ns,rtt_ns";

inline constexpr std::uint32_t kTickFramePayload = 76;
inline constexpr std::uint32_t kRttFramePayload = 28;

struct TickRow {
  std::uint32_t iteration = 0;
  TickRecord record;
  friend bool operator==(const TickRow&, const TickRow&) = default;
};

struct RttRow {
  std::uint32_t iteration = 0;
  RttSample sample;
  friend bool operator==(const RttRow&, const RttRow&) = default;
};

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

void write_tick_csv_header(std::ostream& out);
void write_tick_csv_row(std::ostream& out, const TickRow& row);
void write_tick_csv(std::ostream& out, const std::vector<TickRow>& rows);
/// Throws FormatError on a bad header or row.
std::vector<TickRow> read_tick_csv(std::istream& in);

void write_rtt_csv(std::ostream& out, const std::vector<RttRow>& rows);
std::vector<RttRow> read_rtt_csv(std::istream& in);

void write_tick_frame(std::ostream& out, const TickRow& row);
/// Throws FormatError naming the byte offset of a truncated or malformed frame.
std::vector<TickRow> read_tick_frames(std::istream& in);

/// Binary tick log -> CSV. Returns the number of records converted.
std::size_t convert_trace(std::istream& binary, std::ostream& csv);
/// CSV -> binary tick log (inverse of convert_trace).
std::size_t convert_trace_back(std::istream& csv, std::ostream& binary);

std::size_t convert_trace_file(const std::string& binary_path, const std::string& csv_path);

void write_rtt_frame(std::ostream& out, const RttRow& row);
std::vector<RttRow> read_rtt_frames(std::istream& in);
std::size_t convert_rtt_file(const std::string& binary_path, const std::string& csv_path);

}  // namespace meterstick::metrics
