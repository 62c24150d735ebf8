#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "rfe/road.h"

namespace rfe::vehsim {

inline constexpr double kGravity = 9.81;

/// Single-track vehicle, roughly a mid-size SUV.
struct VehicleParams {
  double mass = 2100.0;           // [kg]
  double yaw_inertia = 4200.0;    // [kg m^2]
  double cg_to_front = 1.41;      // a [m]
  double wheel_base = 2.984;      // b [m], front to rear axle
  double track = 1.665;           // L [m]
  double wheel_radius = 0.37;     // [m]
  double cog_height = 0.70;       // [m]
  double roll_gain = 0.05;        // chassis roll [rad] per g of lateral acceleration
  double rolling_resistance = 0.012;
  double drag_area = 0.9;         // Cd * A [m^2]
  double air_density = 1.2;       // [kg/m^3]

  double cg_to_rear() const { return wheel_base - cg_to_front; }
  void validate() const;
};

/// Magic-formula lateral characteristic, one shape per axle. The front axle
/// is slightly softer so the car understeers.
struct TyreParams {
  double b_front = 8.0;
  double b_rear = 10.0;
  double c_shape = 1.9;

  /// Slope dF/dalpha at zero slip for the given axle load and friction.
  double cornering_stiffness(bool front, double normal_load, double mu_eff) const;
};

/// F = mu * Fz * sin(C * atan(B * alpha)); odd in alpha, |F| <= mu * Fz.
double lateral_tyre_force(double slip_angle, double normal_load, double mu_eff, double b_shape,
                          double c_shape);

struct SensorNoise {
  double accel_sigma = 0.05;       // [m/s^2]
  double gyro_sigma = 0.002;       // [rad/s]
  double gyro_bias_walk = 1e-5;    // [rad/s per sqrt(s)]
  double encoder_sigma = 0.03;     // [m/s equivalent]
  double steer_sigma = 0.0005;     // [rad]

  static SensorNoise none() { return {0, 0, 0, 0, 0}; }
};

struct DriverParams {
  double lookahead_time = 0.8;   // [s]
  double min_lookahead = 4.0;    // [m]
  double speed_gain = 1.2;       // [1/s]
  double lateral_margin = 0.85;  // fraction of mu*g the driver is willing to use
  double decel_fraction = 0.35;  // anticipatory braking as a fraction of mu*g
  double accel_limit = 1.5;      // [m/s^2]
  double course_weight = 0.5;    // 0 aims along the body axis, 1 along the rear course
  double yaw_gain = 1.2;         // steering per unit yaw-rate error [s]
  double steer_time_constant = 0.05;  // [s]
  double max_steer = 0.6;        // [rad]
  bool cautious = true;          // slow down for predicted lateral demand
  bool passive = false;          // no steering and no traction: coast down
};

/// Stretch of road [s_from, s_to) with its own base friction.
struct MuPatch {
  double s_from = 0;
  double s_to = 0;
  double mu_base = 0;
};

struct RunConfig {
  std::string run_id;
  road::Scenario scenario = road::Scenario::long_turn;
  double mu_base = 0.5;          // base friction level of the run (grid value)
  double wear = 1.0;             // tyre wear/pressure factor in [0.8, 1]
  double target_speed_kmh = 0;
  std::uint64_t seed = 0;
  std::vector<MuPatch> patches;  // override mu_base on sub-ranges
  double grip_perception = 1.0;  // driver's friction guess relative to the truth

  double mu_base_at(double s) const;
  /// Minimum w * mu over every friction region of a section of `length`.
  double label(double length) const;
};

struct SimOptions {
  double dt = 0.001;             // integration step [s]
  double output_rate = 100.0;    // [Hz]
  double lane_limit = 2.0;       // lateral offset that counts as control loss [m]
  double min_approach = 200.0;   // straight approach before the section [m]
  double exit_length = 150.0;    // straight after the section [m]
  SensorNoise noise;
  DriverParams driver;
};

/// 100 Hz sensor record over the section. `station` is the map-matched
/// arclength, i.e. the output of the trajectory/map-matching stage which we
/// take as exact.
struct SensorLog {
  double dt = 0.01;
  std::vector<double> t;
  std::vector<double> station;
  std::vector<double> accel_x;
  std::vector<double> accel_y;
  std::vector<double> yaw_rate;
  std::vector<double> wheel_fl;  // encoder angular speeds [rad/s]
  std::vector<double> wheel_fr;
  std::vector<double> wheel_rl;
  std::vector<double> wheel_rr;
  std::vector<double> steer;     // road-wheel angle [rad]

  size_t size() const { return t.size(); }
};

struct GroundTruth {
  std::vector<double> vx;
  std::vector<double> vy;
  std::vector<double> sideslip;
  std::vector<double> yaw_rate;
  std::vector<double> roll;
  std::vector<double> lateral_offset;
  double label = 0;
  bool control_loss = false;
  double max_lateral_offset = 0;
};

struct RunResult {
  SensorLog log;
  GroundTruth truth;
};

RunResult simulate_run(const road::RoadSection& section, const VehicleParams& vp,
                       const TyreParams& tp, const RunConfig& cfg, const SimOptions& opt = {});

struct SamplingOptions {
  std::vector<double> mu_grid;   // defaults to 0.20..0.70 step 0.05
  double wear_lo = 0.8;
  double wear_hi = 1.0;
  double speed_spread = 0.2;     // triangular half-width relative to rated
  std::vector<double> split_offsets{0.1, 0.15, 0.2, 0.25, 0.3};
  double perception_lo = 1.0;    // 1: the driver plans with the true grip
  double perception_hi = 1.0;
};

std::vector<double> default_mu_grid();

/// Stratified run configurations: n_runs / |grid| runs per friction level.
/// For s_turn_split_mu the grid value is the friction of the slippery curve.
std::vector<RunConfig> sample_run_configs(const road::RoadSection& section,
                                          road::Scenario scenario, int n_runs,
                                          std::uint64_t seed, const SamplingOptions& opt = {});

void write_run_csv(std::ostream& out, const SensorLog& log, const GroundTruth& truth);

}  // namespace rfe::vehsim
