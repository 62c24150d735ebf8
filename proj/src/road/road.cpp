#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rfe/road.h"
#include "rfe/util/csv.h"

namespace rfe::road {
namespace {

// Index i such that xs[i] <= v < xs[i+1], clamped to a valid segment.
size_t segment_index(const std::vector<double>& xs, double v) {
  if (xs.size() < 2) return 0;
  auto it = std::upper_bound(xs.begin(), xs.end(), v);
  size_t i = static_cast<size_t>(std::distance(xs.begin(), it));
  if (i == 0) return 0;
  return std::min(i - 1, xs.size() - 2);
}

double lerp_at(const std::vector<double>& xs, const std::vector<double>& ys, double v) {
  if (xs.empty()) return 0;
  if (xs.size() == 1) return ys[0];
  v = std::clamp(v, xs.front(), xs.back());
  const size_t i = segment_index(xs, v);
  const double t = (v - xs[i]) / (xs[i + 1] - xs[i]);
  return ys[i] + t * (ys[i + 1] - ys[i]);
}

}  // namespace

double ideal_bank_ratio(double speed_limit_kmh, double radius_m) {
  if (!(radius_m > 0) || !(speed_limit_kmh > 0)) {
    throw std::invalid_argument("ideal_bank_ratio: speed and radius must be positive");
  }
  return speed_limit_kmh * speed_limit_kmh / (127.0 * radius_m) - kSideFriction;
}

BankAngles bank_angles(double speed_limit_kmh, double radius_m) {
  BankAngles b;
  b.ratio = ideal_bank_ratio(speed_limit_kmh, radius_m);
  b.ideal = std::max(0.0, std::atan(b.ratio));
  b.actual = std::min(b.ideal, kMaxBankAngle);
  return b;
}

RdiProfile rdi_profile(const RoadSection& section) {
  RdiProfile out;
  out.reserve(section.samples.size());
  for (const auto& smp : section.samples) {
    const double k = std::abs(smp.curvature);
    const double radius = k > 1.0 / kStraightRadius ? 1.0 / k : kStraightRadius;
    const double ideal = bank_angles(section.rated_speed_kmh, radius).ideal;
    // arctan already keeps ideal below 90 degrees.
    const double diff = ideal - std::abs(smp.bank);
    out.push_back(diff > 0 ? std::tan(diff) : 0.0);
  }
  return out;
}

RoadSample RoadSection::at(double s) const {
  if (samples.empty()) throw std::logic_error("RoadSection::at on empty section");
  s = std::clamp(s, 0.0, length);
  const double pos = s / kSampleSpacing;
  size_t i = static_cast<size_t>(std::floor(pos));
  if (i + 1 >= samples.size()) return samples.back();
  const double t = pos - static_cast<double>(i);
  const auto& a = samples[i];
  const auto& b = samples[i + 1];
  RoadSample r;
  r.s = s;
  r.curvature = a.curvature + t * (b.curvature - a.curvature);
  r.bank = a.bank + t * (b.bank - a.bank);
  r.heading = a.heading + t * (b.heading - a.heading);
  r.x = a.x + t * (b.x - a.x);
  r.y = a.y + t * (b.y - a.y);
  return r;
}

double MapProfile::curvature_at(double station) const { return lerp_at(s, curvature, station); }
double MapProfile::bank_at(double station) const { return lerp_at(s, bank, station); }

MapProfile decimate(const RoadSection& section, size_t max_samples) {
  if (max_samples < 2) throw std::invalid_argument("decimate: need at least 2 samples");
  MapProfile m;
  m.length = section.length;
  const size_t n = std::min(max_samples, section.samples.size());
  for (size_t k = 0; k < n; ++k) {
    const double st = section.length * static_cast<double>(k) / static_cast<double>(n - 1);
    const auto smp = section.at(st);
    m.s.push_back(st);
    m.curvature.push_back(smp.curvature);
    m.bank.push_back(smp.bank);
  }
  return m;
}

void write_csv(std::ostream& out, const RoadSection& section) {
  using util::format_double;
  out << "s,curvature,bank,x,y,heading\n";
  for (const auto& p : section.samples) {
    out << format_double(p.s) << ',' << format_double(p.curvature) << ',' << format_double(p.bank)
        << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
        << format_double(p.heading) << '\n';
  }
}

}  // namespace rfe::road
