#include "rfe/util/csv.h"
#include "rfe/vehsim.h"

namespace rfe::vehsim {

void write_run_csv(std::ostream& out, const SensorLog& log, const GroundTruth& truth) {
  using util::format_double;
  out << "t,station,accel_x,accel_y,yaw_rate,wheel_fl,wheel_fr,wheel_rl,wheel_rr,steer,"
         "true_vx,true_vy,true_sideslip,true_yaw_rate,true_roll,lateral_offset\n";
  for (size_t i = 0; i < log.size(); ++i) {
    const double row[] = {log.t[i],         log.station[i],     log.accel_x[i],
                          log.accel_y[i],   log.yaw_rate[i],    log.wheel_fl[i],
                          log.wheel_fr[i],  log.wheel_rl[i],    log.wheel_rr[i],
                          log.steer[i],     truth.vx[i],        truth.vy[i],
                          truth.sideslip[i], truth.yaw_rate[i], truth.roll[i],
                          truth.lateral_offset[i]};
    bool first = true;
    for (double v : row) {
      if (!first) out << ',';
      out << format_double(v);
      first = false;
    }
    out << '\n';
  }
}

}  // namespace rfe::vehsim
