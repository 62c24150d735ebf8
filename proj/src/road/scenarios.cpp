#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rfe/road.h"
#include "rfe/util/csv.h"
#include "rfe/util/kv_config.h"

namespace rfe::road {
namespace {

struct NamedScenario {
  Scenario id;
  std::string_view name;
};

constexpr NamedScenario kNames[] = {
    {Scenario::long_turn, "long_turn"},     {Scenario::s_turn, "s_turn"},
    {Scenario::sharp_turn, "sharp_turn"},   {Scenario::s_turn_split_mu, "s_turn_split_mu"},
    {Scenario::slalom, "slalom"},           {Scenario::lane_change, "lane_change"},
    {Scenario::ninety_turn, "ninety_turn"}, {Scenario::sine_drive, "sine_drive"},
};

Segment straight(double length) {
  Segment s;
  s.kind = Segment::Kind::straight;
  s.length = length;
  return s;
}

Segment curve(double length, double transition, double r_min, double r_max, int direction) {
  Segment s;
  s.kind = Segment::Kind::curve;
  s.length = length;
  s.transition = transition;
  s.r_min = r_min;
  s.r_max = r_max;
  s.direction = direction;
  return s;
}

Segment sinusoid(double length, double wavelength, double kappa_amplitude) {
  Segment s;
  s.kind = Segment::Kind::sinusoid;
  s.length = length;
  s.wavelength = wavelength;
  s.kappa_amplitude = kappa_amplitude;
  return s;
}

double segment_curvature(const Segment& seg, double u) {
  switch (seg.kind) {
    case Segment::Kind::straight:
      return 0.0;
    case Segment::Kind::sinusoid:
      return seg.direction * seg.kappa_amplitude *
             std::sin(2.0 * std::numbers::pi * u / seg.wavelength);
    case Segment::Kind::curve: {
      const double k_lo = 1.0 / seg.r_max;
      const double k_hi = 1.0 / seg.r_min;
      const double mid = 0.5 * seg.length;
      const double v = u <= mid ? u : seg.length - u;
      double k = 0;
      if (v <= 0) {
        k = 0;
      } else if (v < seg.transition) {
        k = k_lo * v / seg.transition;
      } else if (mid - seg.transition > 0) {
        k = k_lo + (k_hi - k_lo) * (v - seg.transition) / (mid - seg.transition);
      } else {
        k = k_hi;
      }
      return seg.direction * k;
    }
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(Scenario s) {
  for (const auto& n : kNames) {
    if (n.id == s) return n.name;
  }
  return "unknown";
}

Scenario scenario_from_string(std::string_view name) {
  for (const auto& n : kNames) {
    if (n.name == name) return n.id;
  }
  throw std::invalid_argument("unknown scenario: " + std::string(name));
}

bool is_extreme(Scenario s) {
  return s == Scenario::slalom || s == Scenario::lane_change || s == Scenario::ninety_turn ||
         s == Scenario::sine_drive;
}

const std::vector<Scenario>& normal_scenarios() {
  static const std::vector<Scenario> v{Scenario::long_turn, Scenario::s_turn, Scenario::sharp_turn,
                                       Scenario::s_turn_split_mu};
  return v;
}

const std::vector<Scenario>& extreme_scenarios() {
  static const std::vector<Scenario> v{Scenario::slalom, Scenario::lane_change,
                                       Scenario::ninety_turn, Scenario::sine_drive};
  return v;
}

double ScenarioSpec::curve_length() const {
  double total = 0;
  for (const auto& s : segments) {
    if (s.kind != Segment::Kind::straight) total += s.length;
  }
  return total;
}

std::vector<double> ScenarioSpec::curve_lengths() const {
  std::vector<double> out;
  for (const auto& s : segments) {
    if (s.kind != Segment::Kind::straight) out.push_back(s.length);
  }
  return out;
}

double ScenarioSpec::min_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& s : segments) {
    if (s.kind == Segment::Kind::curve) r = std::min(r, s.r_min);
    if (s.kind == Segment::Kind::sinusoid) r = std::min(r, 1.0 / s.kappa_amplitude);
  }
  return r;
}

void ScenarioSpec::validate() const {
  if (!(rated_speed_kmh > 0)) throw std::invalid_argument("scenario: rated speed must be positive");
  if (segments.empty()) throw std::invalid_argument("scenario: no segments");
  for (const auto& s : segments) {
    if (!(s.length > 0)) throw std::invalid_argument("scenario: segment length must be positive");
    if (s.direction != 1 && s.direction != -1) {
      throw std::invalid_argument("scenario: direction must be left or right");
    }
    if (s.kind == Segment::Kind::curve) {
      if (!(s.r_min > 0) || s.r_max < s.r_min) {
        throw std::invalid_argument("scenario: curve needs 0 < r_min <= r_max");
      }
      if (!(s.transition > 0) || 2.0 * s.transition > s.length) {
        throw std::invalid_argument("scenario: curve transition must fit twice in its length");
      }
    }
    if (s.kind == Segment::Kind::sinusoid && (!(s.wavelength > 0) || !(s.kappa_amplitude > 0))) {
      throw std::invalid_argument("scenario: sinusoid needs positive wavelength and amplitude");
    }
  }
}

ScenarioSpec default_spec(Scenario s) {
  ScenarioSpec spec;
  spec.name = s;
  switch (s) {
    case Scenario::long_turn:
      spec.rated_speed_kmh = 80;
      spec.segments = {straight(100), curve(600, 60, 100, 150, 1), straight(100)};
      break;
    case Scenario::s_turn:
    case Scenario::s_turn_split_mu:
      spec.rated_speed_kmh = 70;
      spec.segments = {straight(80), curve(300, 50, 55, 187, 1), straight(40),
                       curve(300, 50, 55, 187, -1), straight(80)};
      break;
    case Scenario::sharp_turn:
      // Minimum radius kept above ~31 m so low-speed kinematic sideslip stays below 3 deg.
      spec.rated_speed_kmh = 20;
      spec.segments = {straight(60), curve(100, 20, 33, 43, -1), straight(60)};
      break;
    case Scenario::slalom:
      spec.rated_speed_kmh = 50;
      spec.banked = false;
      spec.segments = {straight(80), sinusoid(144, 36, 1.0 / 25.0), straight(80)};
      break;
    case Scenario::lane_change:
      spec.rated_speed_kmh = 60;
      spec.banked = false;
      spec.segments = {straight(100), curve(25, 10, 45, 45, 1), curve(25, 10, 45, 45, -1),
                       straight(100)};
      break;
    case Scenario::ninety_turn:
      spec.rated_speed_kmh = 50;
      spec.banked = false;
      spec.segments = {straight(80), curve(std::numbers::pi / 2 * 30 + 15, 15, 30, 30, 1),
                       straight(80)};
      break;
    case Scenario::sine_drive:
      spec.rated_speed_kmh = 70;
      spec.banked = false;
      spec.segments = {straight(80), sinusoid(300, 100, 1.0 / 60.0), straight(80)};
      break;
  }
  return spec;
}

ScenarioSpec parse_scenario_spec(std::string_view text) {
  auto kv = util::KvConfig::parse(text);
  ScenarioSpec spec;
  spec.name = scenario_from_string(kv.get_string("name", ""));
  spec.rated_speed_kmh = kv.get_double("rated_speed_kmh", 0);
  spec.banked = kv.get_bool("banked", true);
  const auto n = kv.get_int("segments", 0);
  for (long long i = 1; i <= n; ++i) {
    const std::string p = "segment." + std::to_string(i) + ".";
    Segment seg;
    const auto kind = kv.get_string(p + "kind", "straight");
    if (kind == "straight") {
      seg.kind = Segment::Kind::straight;
    } else if (kind == "curve") {
      seg.kind = Segment::Kind::curve;
    } else if (kind == "sinusoid") {
      seg.kind = Segment::Kind::sinusoid;
    } else {
      throw std::invalid_argument("scenario: unknown segment kind " + kind);
    }
    seg.length = kv.get_double(p + "length", 0);
    seg.transition = kv.get_double(p + "transition", 0);
    seg.r_min = kv.get_double(p + "r_min", 0);
    seg.r_max = kv.get_double(p + "r_max", seg.r_min);
    seg.wavelength = kv.get_double(p + "wavelength", 0);
    seg.kappa_amplitude = kv.get_double(p + "kappa_amplitude", 0);
    const auto dir = kv.get_string(p + "direction", "left");
    if (dir == "left") {
      seg.direction = 1;
    } else if (dir == "right") {
      seg.direction = -1;
    } else {
      throw std::invalid_argument("scenario: direction must be left or right");
    }
    spec.segments.push_back(seg);
  }
  if (auto unused = kv.unused_keys(); !unused.empty()) {
    throw std::invalid_argument("scenario: unknown key " + unused.front());
  }
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario_spec(const std::filesystem::path& path) {
  return parse_scenario_spec(util::read_file(path));
}

RoadSection build_scenario(const ScenarioSpec& spec) {
  spec.validate();
  double total = 0;
  for (const auto& s : spec.segments) total += s.length;

  RoadSection sec;
  sec.id = std::string(to_string(spec.name));
  sec.rated_speed_kmh = spec.rated_speed_kmh;
  const auto n = static_cast<size_t>(std::llround(total / kSampleSpacing));
  sec.length = static_cast<double>(n) * kSampleSpacing;
  sec.samples.resize(n + 1);

  size_t seg_idx = 0;
  double seg_start = 0;
  for (size_t i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) * kSampleSpacing;
    while (seg_idx + 1 < spec.segments.size() && s > seg_start + spec.segments[seg_idx].length) {
      seg_start += spec.segments[seg_idx].length;
      ++seg_idx;
    }
    const auto& seg = spec.segments[seg_idx];
    const double u = std::clamp(s - seg_start, 0.0, seg.length);
    auto& smp = sec.samples[i];
    smp.s = s;
    smp.curvature = segment_curvature(seg, u);
    if (spec.banked && std::abs(smp.curvature) > 1.0 / kStraightRadius) {
      const double b = bank_angles(spec.rated_speed_kmh, 1.0 / std::abs(smp.curvature)).actual;
      smp.bank = std::copysign(b, smp.curvature);
    }
  }
  for (size_t i = 1; i <= n; ++i) {
    auto& prev = sec.samples[i - 1];
    auto& cur = sec.samples[i];
    cur.heading = prev.heading + 0.5 * kSampleSpacing * (prev.curvature + cur.curvature);
    const double mid = 0.5 * (prev.heading + cur.heading);
    cur.x = prev.x + kSampleSpacing * std::cos(mid);
    cur.y = prev.y + kSampleSpacing * std::sin(mid);
  }
  return sec;
}

RoadSection build_scenario(Scenario s) { return build_scenario(default_spec(s)); }

}  // namespace rfe::road
