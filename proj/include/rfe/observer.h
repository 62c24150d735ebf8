#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "rfe/road.h"
#include "rfe/vehsim.h"

namespace rfe::observer {

struct ObserverParams {
  double alpha0 = 15.0;
  double alpha1 = 14.0;
  double alpha2 = 5.0;
  double ax_threshold = 1.0;   // [m/s^2]
  double ax_gate_scale = 0.2;  // alpha0, alpha1 multiplier above the threshold
  // Lateral zeroing F(t) = gamma * exp(-|w_z| / omega0).
  double gamma = 1.0;          // [1/s]
  double omega0 = 0.02;        // [rad/s]
  double divergence_factor = 3.0;
  // Activation-shaping widths from the tuned table. Stored for completeness;
  // the exponential gate above does not read them.
  double sigma_dw1 = 4.5;
  double sigma_dw2 = 1.0;
  double sigma_wz = 0.22;
  double sigma_dwz = 0.22;
  double sigma_delta = 0.12;
  double sigma_ddelta = 0.08;
  double sigma_dbeta = 0.05;
  double sigma_ddbeta = 0.3;

  void validate() const;
  double lateral_zeroing(double yaw_rate) const;
};

struct FilterSpec {
  double sample_rate = 100.0;  // [Hz]
  double cutoff = 10.0;        // [Hz]
  int order = 30;              // taps = order + 1

  void validate() const;
};

/// Hamming-windowed sinc low-pass, order + 1 taps, unit DC gain.
std::vector<double> design_lowpass(const FilterSpec& spec);

/// Zero-phase filtering: FIR forward, then backward, with odd reflection of
/// one filter length at each end. Throws if the signal has <= 3 * order samples.
std::vector<double> two_way_filter(std::span<const double> signal, const FilterSpec& spec = {});

/// Wheel speeds projected to the CoG longitudinal speed, averaged, then
/// two-way filtered. Lateral speed in the front-wheel projection is ignored.
std::vector<double> encoder_speed(const vehsim::SensorLog& log, const vehsim::VehicleParams& vp,
                                  const FilterSpec& spec = {});

struct ObserverState {
  std::vector<double> vx;
  std::vector<double> vy;
  bool diverged = false;
};

/// Explicit Euler integration of the stabilised kinematic observer at the log
/// rate. `ay` must already be corrected for bank and roll.
ObserverState integrate_observer(std::span<const double> ax, std::span<const double> ay,
                                 std::span<const double> yaw_rate, std::span<const double> v_enc,
                                 double dt, const ObserverParams& p = {});

/// Steering-intended yaw rate 2 v tan(d) / (2 b + L tan(d)).
double intended_yaw_rate(double speed, double steer, double wheel_base, double track);

/// w_z minus the intended yaw rate, computed from two-way filtered inputs.
std::vector<double> yaw_rate_excess(std::span<const double> yaw_rate,
                                    std::span<const double> steer, std::span<const double> v_enc,
                                    const vehsim::VehicleParams& vp, const FilterSpec& spec = {});

struct SideslipSignals {
  std::vector<double> sideslip;
  std::vector<double> sideslip_rate;
  bool low_speed = false;  // some V_x estimate at or below 1 m/s
};

SideslipSignals sideslip_and_rate(std::span<const double> vx_hat, std::span<const double> vy_hat,
                                  std::span<const double> ay, std::span<const double> yaw_rate,
                                  std::span<const double> v_enc, const FilterSpec& spec = {});

struct VehicleStateTrace {
  std::vector<double> t;
  std::vector<double> vx;
  std::vector<double> vy;
  std::vector<double> sideslip;
  std::vector<double> sideslip_rate;
  std::vector<double> yaw_excess;
  std::vector<double> v_enc;
  std::vector<double> steer;  // filtered road-wheel angle
  bool diverged = false;
  bool low_speed = false;

  size_t size() const { return t.size(); }
};

struct EstimatorOptions {
  ObserverParams observer;
  FilterSpec filter;
  bool bank_correction = true;
  bool roll_correction = true;
};

/// Full onboard stage: encoder speed, roll/bank correction of A_y with the
/// map bank at each station, observer integration and derived signals.
VehicleStateTrace estimate_vehicle_state(const vehsim::SensorLog& log,
                                         const vehsim::VehicleParams& vp,
                                         const road::MapProfile& map,
                                         const EstimatorOptions& opt = {});

void write_trace_csv(std::ostream& out, const VehicleStateTrace& trace);

}  // namespace rfe::observer
