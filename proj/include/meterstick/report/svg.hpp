// SPDX-License-Identifier: Apache-2.0
// Minimal SVG rendering for the report: line charts, box plots and stacked
// bars. Output depends only on the input data.
#pragma once

#include <string>
#include <vector>

namespace meterstick::report {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct BoxStats {
  std::string label;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

struct StackedBar {
  std::string label;
  std::vector<double> parts;
};

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, double reference_y = -1.0);
std::string box_chart_svg(const std::string& title, const std::string& y_label, const std::vector<BoxStats>& boxes);
std::string stacked_bars_svg(const std::string& title, const std::vector<std::string>& part_names,
                             const std::vector<StackedBar>& bars);

}  // namespace meterstick::report
