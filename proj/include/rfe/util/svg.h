#pragma once

#include <string>
#include <vector>

namespace rfe::util {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct BoxGroup {
  std::string label;
  std::vector<double> values;
};

struct PlotLabels {
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Static SVG renderers. Each returns a complete standalone document.
std::string svg_scatter(const PlotLabels& labels, const std::vector<Series>& series,
                        bool identity_line);
std::string svg_lines(const PlotLabels& labels, const std::vector<Series>& series, bool log_x);
std::string svg_boxplot(const PlotLabels& labels, const std::vector<BoxGroup>& groups);
std::string svg_histogram(const PlotLabels& labels, const std::vector<double>& values, int bins);

}  // namespace rfe::util
