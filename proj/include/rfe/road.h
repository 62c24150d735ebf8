#pragma once

#include <filesystem>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace rfe::road {

inline constexpr double kSampleSpacing = 0.5;  // [m]
inline constexpr double kMaxBankAngle = 8.0 * std::numbers::pi / 180.0;
inline constexpr double kSideFriction = 0.14;
/// Radius used for straight road when evaluating the bank formula.
inline constexpr double kStraightRadius = 1e6;

struct RoadSample {
  double s = 0;          // arclength [m]
  double curvature = 0;  // signed [1/m], positive turns left
  double bank = 0;       // signed [rad], positive lowers the left edge
  double heading = 0;    // [rad]
  double x = 0;
  double y = 0;
};

/// Arclength-parameterized centerline. Immutable once built.
struct RoadSection {
  std::string id;
  std::vector<RoadSample> samples;
  double length = 0;
  double rated_speed_kmh = 0;

  /// Linear interpolation; s is clamped to [0, length].
  RoadSample at(double s) const;
};

enum class Scenario {
  long_turn,
  s_turn,
  sharp_turn,
  s_turn_split_mu,
  slalom,
  lane_change,
  ninety_turn,
  sine_drive,
};

std::string_view to_string(Scenario s);
Scenario scenario_from_string(std::string_view name);
bool is_extreme(Scenario s);
const std::vector<Scenario>& normal_scenarios();
const std::vector<Scenario>& extreme_scenarios();

struct Segment {
  enum class Kind { straight, curve, sinusoid };
  Kind kind = Kind::straight;
  double length = 0;  // [m]
  // curve: curvature ramps 0 -> 1/r_max over `transition`, then linearly to
  // 1/r_min at the midpoint and back, mirrored on the exit side.
  double transition = 0;
  double r_min = 0;
  double r_max = 0;
  int direction = 1;  // +1 left, -1 right
  // sinusoid: kappa(s) = direction * kappa_amplitude * sin(2 pi s / wavelength)
  double kappa_amplitude = 0;
  double wavelength = 0;
};

struct ScenarioSpec {
  Scenario name = Scenario::long_turn;
  double rated_speed_kmh = 0;
  bool banked = true;  // test-track courses are flat
  std::vector<Segment> segments;

  /// Total length of curve segments (where curvature is non-zero).
  double curve_length() const;
  double min_radius() const;
  std::vector<double> curve_lengths() const;
  void validate() const;
};

ScenarioSpec default_spec(Scenario s);
ScenarioSpec load_scenario_spec(const std::filesystem::path& path);
ScenarioSpec parse_scenario_spec(std::string_view text);

RoadSection build_scenario(const ScenarioSpec& spec);
RoadSection build_scenario(Scenario s);

/// Superelevation e = V^2 / (127 R) - 0.14 with V in km/h and R in m.
double ideal_bank_ratio(double speed_limit_kmh, double radius_m);

struct BankAngles {
  double ratio = 0;   // e, may be negative
  double ideal = 0;   // arctan(e) clamped below at 0
  double actual = 0;  // ideal capped at 8 degrees
};
BankAngles bank_angles(double speed_limit_kmh, double radius_m);

/// Per-sample tan(theta_ideal - |theta_actual|), theta_ideal clamped to [0, 90deg).
using RdiProfile = std::vector<double>;
RdiProfile rdi_profile(const RoadSection& section);

/// Decimated (s, curvature, bank) map as carried by the RSU downlink.
struct MapProfile {
  std::vector<double> s;
  std::vector<double> curvature;
  std::vector<double> bank;
  double length = 0;

  double curvature_at(double station) const;
  double bank_at(double station) const;
  size_t size() const { return s.size(); }
};
MapProfile decimate(const RoadSection& section, size_t max_samples);

void write_csv(std::ostream& out, const RoadSection& section);

}  // namespace rfe::road
