#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rfe/summary.h"

namespace rfe::summary {

const std::array<std::string_view, kStatCount>& stat_names() {
  static const std::array<std::string_view, kStatCount> n{
      "mean", "std", "q20", "q40", "q60", "q80", "min", "median", "max", "skew", "kurt"};
  return n;
}

std::array<double, kStatCount> StatRecord::values() const {
  return {mean, std, q20, q40, q60, q80, min, median, max, skew, kurt};
}

StatRecord StatRecord::from_values(std::span<const double> v) {
  if (v.size() != kStatCount) throw std::invalid_argument("StatRecord: need 11 values");
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10]};
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty sample");
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("quantile_sorted: p outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

StatRecord summarize_signal(std::span<const double> series) {
  if (series.size() < 2) throw std::invalid_argument("summarize_signal: need at least 2 samples");
  std::vector<double> x(series.begin(), series.end());
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("summarize_signal: non-finite sample");
  }
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());

  StatRecord r;
  r.min = x.front();
  r.max = x.back();
  r.q20 = quantile_sorted(x, 0.2);
  r.q40 = quantile_sorted(x, 0.4);
  r.median = quantile_sorted(x, 0.5);
  r.q60 = quantile_sorted(x, 0.6);
  r.q80 = quantile_sorted(x, 0.8);
  if (r.min == r.max) {
    r.mean = r.min;
    return r;
  }

  double sum = 0;
  for (double v : x) sum += v;
  r.mean = sum / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - r.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  r.std = std::sqrt(m2 / (n - 1.0));
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 > 0) {
    r.skew = m3 / std::pow(m2, 1.5);
    r.kurt = m4 / (m2 * m2) - 3.0;
  }
  return r;
}

}  // namespace rfe::summary
