// SPDX-License-Identifier: Apache-2.0
#include "meterstick/report/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <limits>

namespace meterstick::report {

namespace {

constexpr double kWidth = 800, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * (kHeight - kTop - kBottom); }
};

std::string open(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
      kWidth, kHeight, kWidth, kHeight, kWidth / 2, escape(title));
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label, bool x_ticks) {
  std::string s;
  s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", kLeft, kHeight - kBottom,
                   kWidth - kRight, kHeight - kBottom);
  s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", kLeft, kTop, kLeft,
                   kHeight - kBottom);
  for (int i = 0; i <= 4; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 6, f.py(y) + 4, y);
    if (x_ticks) {
      const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
      s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", f.px(x),
                       kHeight - kBottom + 16, x);
    }
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (kLeft + kWidth - kRight) / 2,
                   kHeight - 14, escape(x_label));
  s += fmt::format("<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
                   (kTop + kHeight - kBottom) / 2, (kTop + kHeight - kBottom) / 2, escape(y_label));
  return s;
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, double reference_y) {
  Frame f{0, 1, 0, 1};
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!any) f = {s.x[i], s.x[i], 0, s.y[i]};
      any = true;
      f.x0 = std::min(f.x0, s.x[i]);
      f.x1 = std::max(f.x1, s.x[i]);
      f.y1 = std::max(f.y1, s.y[i]);
    }
  }
  if (reference_y > f.y1) f.y1 = reference_y;
  if (f.y1 <= f.y0) f.y1 = f.y0 + 1;
  std::string out = open(title) + axes(f, x_label, y_label, true);
  if (reference_y >= 0) {
    out += fmt::format("<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n",
                       kLeft, f.py(reference_y), kWidth - kRight, f.py(reference_y));
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      pts += fmt::format("{:.1f},{:.1f} ", f.px(s.x[i]), f.py(s.y[i]));
    }
    const char* color = kPalette[k % kPalette.size()];
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"{}\"/>\n", color, pts);
    out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kLeft + 10, kTop + 14 * (k + 1), color,
                       escape(s.label));
  }
  return out + "</svg>\n";
}

std::string box_chart_svg(const std::string& title, const std::string& y_label, const std::vector<BoxStats>& boxes) {
  Frame f{0, static_cast<double>(std::max<std::size_t>(boxes.size(), 1)), 0, 0};
  for (const auto& b : boxes) f.y1 = std::max(f.y1, b.max);
  if (f.y1 <= 0) f.y1 = 1;
  std::string out = open(title) + axes(f, "", y_label, false);
  const double slot = (kWidth - kLeft - kRight) / f.x1;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double w = std::min(60.0, slot * 0.5);
    out += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"black\"/>\n", cx,
                       f.py(b.min), f.py(b.max));
    out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"#cfe2f3\" stroke=\"black\"/>\n",
                       cx - w / 2, f.py(b.q3), w, std::max(0.5, f.py(b.q1) - f.py(b.q3)));
    out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#d62728\" stroke-width=\"2\"/>\n",
                       cx - w / 2, f.py(b.median), cx + w / 2, f.py(b.median));
    out += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", cx, kHeight - kBottom + 16,
                       escape(b.label));
  }
  return out + "</svg>\n";
}

std::string stacked_bars_svg(const std::string& title, const std::vector<std::string>& part_names,
                             const std::vector<StackedBar>& bars) {
  Frame f{0, static_cast<double>(std::max<std::size_t>(bars.size(), 1)), 0, 1};
  std::string out = open(title) + axes(f, "", "share of busy time", false);
  const double slot = (kWidth - kLeft - kRight) / f.x1;
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double w = std::min(60.0, slot * 0.6);
    double acc = 0;
    for (std::size_t k = 0; k < bars[i].parts.size(); ++k) {
      const double v = bars[i].parts[k];
      if (v <= 0) continue;
      out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n", cx - w / 2,
                         f.py(acc + v), w, f.py(acc) - f.py(acc + v), kPalette[k % kPalette.size()]);
      acc += v;
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", cx, kHeight - kBottom + 16,
                       escape(bars[i].label));
  }
  for (std::size_t k = 0; k < part_names.size(); ++k) {
    out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kWidth - kRight - 120, kTop + 14 * (k + 1),
                       kPalette[k % kPalette.size()], escape(part_names[k]));
  }
  return out + "</svg>\n";
}

}  // namespace meterstick::report
