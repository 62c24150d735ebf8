#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rfe/observer.h"

namespace rfe::observer {
namespace {

void convolve_causal(const std::vector<double>& h, const std::vector<double>& x,
                     std::vector<double>& y) {
  const size_t m = h.size();
  y.assign(x.size(), 0.0);
  for (size_t n = 0; n < x.size(); ++n) {
    double acc = 0;
    const size_t kmax = std::min(m - 1, n);
    for (size_t k = 0; k <= kmax; ++k) acc += h[k] * x[n - k];
    y[n] = acc;
  }
}

}  // namespace

void FilterSpec::validate() const {
  if (!(sample_rate > 0)) throw std::invalid_argument("FilterSpec: sample rate must be positive");
  if (!(cutoff > 0) || cutoff >= 0.5 * sample_rate) {
    throw std::invalid_argument("FilterSpec: cutoff must lie in (0, Nyquist)");
  }
  if (order < 2 || order % 2 != 0) {
    throw std::invalid_argument("FilterSpec: order must be even and >= 2");
  }
}

std::vector<double> design_lowpass(const FilterSpec& spec) {
  spec.validate();
  const int taps = spec.order + 1;
  const double fc = spec.cutoff / spec.sample_rate;  // cycles per sample
  const double mid = 0.5 * spec.order;
  std::vector<double> h(static_cast<size_t>(taps));
  for (int n = 0; n < taps; ++n) {
    const double k = n - mid;
    const double sinc = k == 0 ? 2.0 * fc
                               : std::sin(2.0 * std::numbers::pi * fc * k) / (std::numbers::pi * k);
    const double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / spec.order);
    h[static_cast<size_t>(n)] = sinc * w;
  }
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (auto& v : h) v /= sum;
  return h;
}

std::vector<double> two_way_filter(std::span<const double> signal, const FilterSpec& spec) {
  const auto h = design_lowpass(spec);
  const size_t n = signal.size();
  if (n <= static_cast<size_t>(3 * spec.order)) {
    throw std::invalid_argument("two_way_filter: need more than " + std::to_string(3 * spec.order) +
                                " samples, got " + std::to_string(n));
  }
  const size_t pad = h.size();
  std::vector<double> x(n + 2 * pad);
  for (size_t i = 0; i < pad; ++i) {
    x[pad - 1 - i] = 2.0 * signal[0] - signal[i + 1];
    x[pad + n + i] = 2.0 * signal[n - 1] - signal[n - 2 - i];
  }
  std::copy(signal.begin(), signal.end(), x.begin() + static_cast<std::ptrdiff_t>(pad));

  std::vector<double> y;
  convolve_causal(h, x, y);
  std::reverse(y.begin(), y.end());
  convolve_causal(h, y, x);
  std::reverse(x.begin(), x.end());
  return {x.begin() + static_cast<std::ptrdiff_t>(pad),
          x.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace rfe::observer
