#include "rfe/util/svg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rfe/util/csv.h"

namespace rfe::util {
namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 60;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0;
      hi = 1;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

class Canvas {
public:
  Canvas(const PlotLabels& labels, Range xr, Range yr) : xr_(xr), yr_(yr) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
         << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out_ << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
         << escape(labels.title) << "</text>\n";
    out_ << "<text x=\"" << kLeft + plot_w() / 2 << "\" y=\"" << kHeight - 15
         << "\" text-anchor=\"middle\">" << escape(labels.x_label) << "</text>\n";
    out_ << "<text transform=\"translate(18," << kTop + plot_h() / 2
         << ") rotate(-90)\" text-anchor=\"middle\">" << escape(labels.y_label) << "</text>\n";
    out_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w()
         << "\" height=\"" << plot_h() << "\" fill=\"none\" stroke=\"black\"/>\n";
  }

  static double plot_w() { return kWidth - kLeft - kRight; }
  static double plot_h() { return kHeight - kTop - kBottom; }
  double px(double x) const { return kLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * plot_w(); }
  double py(double y) const { return kTop + (1.0 - (y - yr_.lo) / (yr_.hi - yr_.lo)) * plot_h(); }

  void y_ticks() {
    for (int i = 0; i <= 5; ++i) {
      const double v = yr_.lo + (yr_.hi - yr_.lo) * i / 5.0;
      out_ << "<text x=\"" << kLeft - 5 << "\" y=\"" << py(v) + 4
           << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
      out_ << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w() << "\" y1=\"" << py(v)
           << "\" y2=\"" << py(v) << "\" stroke=\"#ddd\"/>\n";
    }
  }
  void x_ticks(bool log_x) {
    for (int i = 0; i <= 5; ++i) {
      const double v = xr_.lo + (xr_.hi - xr_.lo) * i / 5.0;
      out_ << "<text x=\"" << px(v) << "\" y=\"" << kTop + plot_h() + 16
           << "\" text-anchor=\"middle\">" << num(log_x ? std::pow(10.0, v) : v) << "</text>\n";
    }
  }
  void legend(const std::vector<std::string>& names) {
    for (size_t i = 0; i < names.size(); ++i) {
      const double y = kTop + 14 + 16.0 * static_cast<double>(i);
      out_ << "<rect x=\"" << kLeft + 8 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
           << kPalette[i % 8] << "\"/>\n";
      out_ << "<text x=\"" << kLeft + 22 << "\" y=\"" << y << "\">" << escape(names[i])
           << "</text>\n";
    }
  }
  std::ostringstream& raw() { return out_; }
  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

private:
  Range xr_;
  Range yr_;
  std::ostringstream out_;
};

}  // namespace

std::string svg_scatter(const PlotLabels& labels, const std::vector<Series>& series,
                        bool identity_line) {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  if (identity_line) {
    Range both = xr;
    both.add(yr.lo);
    both.add(yr.hi);
    xr = yr = both;
  }
  xr.finish();
  yr.finish();
  Canvas c(labels, xr, yr);
  c.y_ticks();
  c.x_ticks(false);
  if (identity_line) {
    c.raw() << "<line x1=\"" << c.px(xr.lo) << "\" y1=\"" << c.py(xr.lo) << "\" x2=\""
            << c.px(xr.hi) << "\" y2=\"" << c.py(xr.hi)
            << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  }
  std::vector<std::string> names;
  for (size_t k = 0; k < series.size(); ++k) {
    names.push_back(series[k].label);
    const auto& s = series[k];
    for (size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      c.raw() << "<circle cx=\"" << c.px(s.x[i]) << "\" cy=\"" << c.py(s.y[i])
              << "\" r=\"2.5\" fill=\"" << kPalette[k % 8] << "\" fill-opacity=\"0.6\"/>\n";
    }
  }
  c.legend(names);
  return c.finish();
}

std::string svg_lines(const PlotLabels& labels, const std::vector<Series>& series, bool log_x) {
  Range xr, yr;
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  for (const auto& s : series) {
    for (double v : s.x) xr.add(tx(v));
    for (double v : s.y) yr.add(v);
  }
  yr.add(0.0);
  xr.finish();
  yr.finish();
  Canvas c(labels, xr, yr);
  c.y_ticks();
  c.x_ticks(log_x);
  std::vector<std::string> names;
  for (size_t k = 0; k < series.size(); ++k) {
    names.push_back(series[k].label);
    const auto& s = series[k];
    c.raw() << "<polyline fill=\"none\" stroke=\"" << kPalette[k % 8]
            << "\" stroke-width=\"1.8\" points=\"";
    for (size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      c.raw() << c.px(tx(s.x[i])) << ',' << c.py(s.y[i]) << ' ';
    }
    c.raw() << "\"/>\n";
  }
  c.legend(names);
  return c.finish();
}

std::string svg_boxplot(const PlotLabels& labels, const std::vector<BoxGroup>& groups) {
  Range yr;
  for (const auto& g : groups) {
    for (double v : g.values) yr.add(v);
  }
  yr.finish();
  Range xr;
  xr.lo = 0;
  xr.hi = static_cast<double>(std::max<size_t>(groups.size(), 1));
  Canvas c(labels, xr, yr);
  c.y_ticks();
  auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const size_t i = static_cast<size_t>(std::floor(pos));
    const size_t j = std::min(i + 1, v.size() - 1);
    return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
  };
  for (size_t k = 0; k < groups.size(); ++k) {
    const auto& g = groups[k];
    const double cx = c.px(static_cast<double>(k) + 0.5);
    c.raw() << "<text x=\"" << cx << "\" y=\"" << kTop + Canvas::plot_h() + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(g.label) << "</text>\n";
    if (g.values.empty()) continue;
    const double q1 = quantile(g.values, 0.25), q2 = quantile(g.values, 0.5),
                 q3 = quantile(g.values, 0.75);
    const double iqr = q3 - q1;
    double lo = q1, hi = q3;
    for (double v : g.values) {
      if (v >= q1 - 1.5 * iqr) lo = std::min(lo, v);
      if (v <= q3 + 1.5 * iqr) hi = std::max(hi, v);
    }
    const double hw = 0.3 * Canvas::plot_w() / static_cast<double>(groups.size());
    const char* col = kPalette[k % 8];
    c.raw() << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << c.py(lo) << "\" y2=\""
            << c.py(hi) << "\" stroke=\"black\"/>\n";
    c.raw() << "<rect x=\"" << cx - hw << "\" y=\"" << c.py(q3) << "\" width=\"" << 2 * hw
            << "\" height=\"" << std::max(0.5, c.py(q1) - c.py(q3)) << "\" fill=\"" << col
            << "\" fill-opacity=\"0.5\" stroke=\"black\"/>\n";
    c.raw() << "<line x1=\"" << cx - hw << "\" x2=\"" << cx + hw << "\" y1=\"" << c.py(q2)
            << "\" y2=\"" << c.py(q2) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (double v : g.values) {
      if (v < lo || v > hi) {
        c.raw() << "<circle cx=\"" << cx << "\" cy=\"" << c.py(v)
                << "\" r=\"2\" fill=\"none\" stroke=\"" << col << "\"/>\n";
      }
    }
  }
  return c.finish();
}

std::string svg_histogram(const PlotLabels& labels, const std::vector<double>& values, int bins) {
  Range xr;
  for (double v : values) xr.add(v);
  xr.finish();
  bins = std::max(bins, 1);
  std::vector<double> counts(static_cast<size_t>(bins), 0.0);
  const double w = (xr.hi - xr.lo) / bins;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    auto b = static_cast<long>((v - xr.lo) / w);
    b = std::clamp<long>(b, 0, bins - 1);
    counts[static_cast<size_t>(b)] += 1;
  }
  Range yr;
  yr.lo = 0;
  yr.hi = std::max(1.0, *std::max_element(counts.begin(), counts.end()) * 1.05);
  Canvas c(labels, xr, yr);
  c.y_ticks();
  c.x_ticks(false);
  for (int b = 0; b < bins; ++b) {
    const double x0 = xr.lo + b * w;
    const double cnt = counts[static_cast<size_t>(b)];
    c.raw() << "<rect x=\"" << c.px(x0) << "\" y=\"" << c.py(cnt) << "\" width=\""
            << std::max(0.5, c.px(x0 + w) - c.px(x0) - 1) << "\" height=\"" << c.py(0) - c.py(cnt)
            << "\" fill=\"" << kPalette[0] << "\" fill-opacity=\"0.7\"/>\n";
  }
  return c.finish();
}

}  // namespace rfe::util
