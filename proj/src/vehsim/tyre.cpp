#include <cmath>
#include <stdexcept>

#include "rfe/vehsim.h"

namespace rfe::vehsim {

double lateral_tyre_force(double slip_angle, double normal_load, double mu_eff, double b_shape,
                          double c_shape) {
  return mu_eff * normal_load * std::sin(c_shape * std::atan(b_shape * slip_angle));
}

double TyreParams::cornering_stiffness(bool front, double normal_load, double mu_eff) const {
  return mu_eff * normal_load * c_shape * (front ? b_front : b_rear);
}

void VehicleParams::validate() const {
  const double vals[] = {mass, yaw_inertia, cg_to_front, wheel_base, track, wheel_radius,
                         cog_height};
  for (double v : vals) {
    if (!(v > 0)) throw std::invalid_argument("VehicleParams: all dimensions must be positive");
  }
  if (cg_to_front >= wheel_base) {
    throw std::invalid_argument("VehicleParams: CoG must lie between the axles");
  }
  if (wheel_base <= 0.5 || track <= 0.5) {
    throw std::invalid_argument("VehicleParams: wheel base and track must exceed 0.5 m");
  }
}

}  // namespace rfe::vehsim
