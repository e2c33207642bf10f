// SPDX-License-Identifier: Apache-2.0
#include "meterstick/metrics/trace_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "meterstick/common/error.hpp"

namespace meterstick::metrics {

static_assert(std::endian::native == std::endian::little, "binary tick log assumes a little-endian host");

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, std::uint64_t offset, const char* what) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError(std::string("bad ") + what + " '" + std::string(s) + "'", offset);
  }
  return v;
}

/// Reads lines while tracking the byte offset of each line start.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    line_offset_ = offset_;
    if (!std::getline(in_, line)) return false;
    offset_ += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::uint64_t line_offset() const { return line_offset_; }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
  std::uint64_t line_offset_ = 0;
};

template <typename T>
void put(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_tick_csv_header(std::ostream& out) { out << kTickCsvHeader << '\n'; }

void write_tick_csv_row(std::ostream& out, const TickRow& row) {
  const auto& r = row.record;
  out << row.iteration << ',' << r.index << ',' << r.start_ns << ',' << r.busy_ns;
  for (double s : r.shares) out << ',' << format_double(s);
  out << '\n';
}

void write_tick_csv(std::ostream& out, const std::vector<TickRow>& rows) {
  write_tick_csv_header(out);
  for (const auto& row : rows) write_tick_csv_row(out, row);
}

std::vector<TickRow> read_tick_csv(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw FormatError("missing tick CSV header", 0);
  if (line != kTickCsvHeader) throw FormatError("unexpected tick CSV header", 0);
  std::vector<TickRow> rows;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto off = reader.line_offset();
    const auto f = split(line, ',');
    if (f.size() != 10) throw FormatError("tick CSV row has " + std::to_string(f.size()) + " fields", off);
    TickRow row;
    row.iteration = parse_number<std::uint32_t>(f[0], off, "iteration");
    row.record.index = parse_number<std::uint64_t>(f[1], off, "tick_index");
    row.record.start_ns = parse_number<std::int64_t>(f[2], off, "start_ns");
    row.record.busy_ns = parse_number<std::int64_t>(f[3], off, "busy_ns");
    for (std::size_t k = 0; k < kComponentCount; ++k) {
      row.record.shares[k] = parse_number<double>(f[4 + k], off, "share");
    }
    rows.push_back(row);
  }
  return rows;
}

void write_rtt_csv(std::ostream& out, const std::vector<RttRow>& rows) {
  out << kRttCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.iteration << ',' << r.sample.sent_ns << ',' << r.sample.received_ns << ','
        << r.sample.rtt_ns << '\n';
  }
}

std::vector<RttRow> read_rtt_csv(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw FormatError("missing rtt CSV header", 0);
  if (line != kRttCsvHeader) throw FormatError("unexpected rtt CSV header", 0);
  std::vector<RttRow> rows;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto off = reader.line_offset();
    const auto f = split(line, ',');
    if (f.size() != 4) throw FormatError("rtt CSV row has " + std::to_string(f.size()) + " fields", off);
    RttRow r;
    r.iteration = parse_number<std::uint32_t>(f[0], off, "iteration");
    r.sample.sent_ns = parse_number<std::int64_t>(f[1], off, "sent_ns");
    r.sample.received_ns = parse_number<std::int64_t>(f[2], off, "recv_ns");
    r.sample.rtt_ns = parse_number<std::int64_t>(f[3], off, "rtt_ns");
    rows.push_back(r);
  }
  return rows;
}

void write_tick_frame(std::ostream& out, const TickRow& row) {
  put<std::uint32_t>(out, kTickFramePayload);
  put<std::uint32_t>(out, row.iteration);
  put<std::uint64_t>(out, row.record.index);
  put<std::int64_t>(out, row.record.start_ns);
  put<std::int64_t>(out, row.record.busy_ns);
  for (double s : row.record.shares) put<double>(out, s);
}

std::vector<TickRow> read_tick_frames(std::istream& in) {
  std::vector<TickRow> rows;
  std::uint64_t offset = 0;
  char header[4];
  char payload[kTickFramePayload];
  while (true) {
    in.read(header, 4);
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    if (got < 4) throw FormatError("truncated frame header", offset);
    const auto len = get<std::uint32_t>(header);
    if (len != kTickFramePayload) {
      throw FormatError("unsupported frame length " + std::to_string(len), offset);
    }
    in.read(payload, kTickFramePayload);
    if (static_cast<std::size_t>(in.gcount()) < kTickFramePayload) {
      throw FormatError("truncated frame payload", offset);
    }
    TickRow row;
    const char* p = payload;
    row.iteration = get<std::uint32_t>(p);
    row.record.index = get<std::uint64_t>(p + 4);
    row.record.start_ns = get<std::int64_t>(p + 12);
    row.record.busy_ns = get<std::int64_t>(p + 20);
    for (std::size_t k = 0; k < kComponentCount; ++k) {
      row.record.shares[k] = get<double>(p + 28 + 8 * k);
    }
    rows.push_back(row);
    offset += 4 + kTickFramePayload;
  }
  return rows;
}

std::size_t convert_trace(std::istream& binary, std::ostream& csv) {
  const auto rows = read_tick_frames(binary);
  write_tick_csv(csv, rows);
  return rows.size();
}

std::size_t convert_trace_back(std::istream& csv, std::ostream& binary) {
  const auto rows = read_tick_csv(csv);
  for (const auto& row : rows) write_tick_frame(binary, row);
  return rows.size();
}

std::size_t convert_trace_file(const std::string& binary_path, const std::string& csv_path) {
  std::ifstream in(binary_path, std::ios::binary);
  if (!in) throw Error("cannot open " + binary_path);
  // Parse fully before touching the output so a corrupt log leaves no partial CSV.
  const auto rows = read_tick_frames(in);
  std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + csv_path);
  write_tick_csv(out, rows);
  return rows.size();
}

void write_rtt_frame(std::ostream& out, const RttRow& row) {
  put<std::uint32_t>(out, kRttFramePayload);
  put<std::uint32_t>(out, row.iteration);
  put<std::int64_t>(out, row.sample.sent_ns);
  put<std::int64_t>(out, row.sample.received_ns);
  put<std::int64_t>(out, row.sample.rtt_ns);
}

std::vector<RttRow> read_rtt_frames(std::istream& in) {
  std::vector<RttRow> rows;
  std::uint64_t offset = 0;
  char header[4];
  char payload[kRttFramePayload];
  while (true) {
    in.read(header, 4);
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    if (got < 4) throw FormatError("truncated frame header", offset);
    const auto len = get<std::uint32_t>(header);
    if (len != kRttFramePayload) throw FormatError("unsupported frame length " + std::to_string(len), offset);
    in.read(payload, kRttFramePayload);
    if (static_cast<std::size_t>(in.gcount()) < kRttFramePayload) {
      throw FormatError("truncated frame payload", offset);
    }
    RttRow r;
    r.iteration = get<std::uint32_t>(payload);
    r.sample.sent_ns = get<std::int64_t>(payload + 4);
    r.sample.received_ns = get<std::int64_t>(payload + 12);
    r.sample.rtt_ns = get<std::int64_t>(payload + 20);
    rows.push_back(r);
    offset += 4 + kRttFramePayload;
  }
  return rows;
}

std::size_t convert_rtt_file(const std::string& binary_path, const std::string& csv_path) {
  std::ifstream in(binary_path, std::ios::binary);
  if (!in) throw Error("cannot open " + binary_path);
  const auto rows = read_rtt_frames(in);
  std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + csv_path);
  write_rtt_csv(out, rows);
  return rows.size();
}

}  // namespace meterstick::metrics
