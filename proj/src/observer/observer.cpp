#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rfe/observer.h"
#include "rfe/util/csv.h"

namespace rfe::observer {
namespace {

void require_same_size(size_t n, std::initializer_list<size_t> others, const char* who) {
  for (size_t m : others) {
    if (m != n) throw std::invalid_argument(std::string(who) + ": input lengths differ");
  }
}

}  // namespace

void ObserverParams::validate() const {
  const double gains[] = {alpha0, alpha1, alpha2, ax_threshold, ax_gate_scale, gamma};
  for (double g : gains) {
    if (!(g >= 0)) throw std::invalid_argument("ObserverParams: gains must be non-negative");
  }
  if (!(omega0 > 0)) throw std::invalid_argument("ObserverParams: omega0 must be positive");
  if (!(divergence_factor > 1)) {
    throw std::invalid_argument("ObserverParams: divergence factor must exceed 1");
  }
}

double ObserverParams::lateral_zeroing(double yaw_rate) const {
  return gamma * std::exp(-std::abs(yaw_rate) / omega0);
}

std::vector<double> encoder_speed(const vehsim::SensorLog& log, const vehsim::VehicleParams& vp,
                                  const FilterSpec& spec) {
  const size_t n = log.size();
  require_same_size(n,
                    {log.wheel_fl.size(), log.wheel_fr.size(), log.wheel_rl.size(),
                     log.wheel_rr.size(), log.yaw_rate.size(), log.steer.size()},
                    "encoder_speed");
  const double rw = vp.wheel_radius;
  const double half = 0.5 * vp.track;
  const double a = vp.cg_to_front;
  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i) {
    const double w = log.yaw_rate[i];
    const double d = log.steer[i];
    const double cd = std::cos(d);
    const double sd = std::sin(d);
    // Front wheels roll along their own heading: v = (Vx -+ w L/2) cos d + (Vy + w a) sin d.
    const double fl = (log.wheel_fl[i] * rw - a * w * sd) / cd + w * half;
    const double fr = (log.wheel_fr[i] * rw - a * w * sd) / cd - w * half;
    const double rl = log.wheel_rl[i] * rw + w * half;
    const double rr = log.wheel_rr[i] * rw - w * half;
    v[i] = 0.25 * (fl + fr + rl + rr);
  }
  return two_way_filter(v, spec);
}

ObserverState integrate_observer(std::span<const double> ax, std::span<const double> ay,
                                 std::span<const double> yaw_rate, std::span<const double> v_enc,
                                 double dt, const ObserverParams& p) {
  p.validate();
  const size_t n = ax.size();
  require_same_size(n, {ay.size(), yaw_rate.size(), v_enc.size()}, "integrate_observer");
  if (!(dt > 0)) throw std::invalid_argument("integrate_observer: dt must be positive");
  ObserverState s;
  if (n == 0) return s;
  s.vx.resize(n);
  s.vy.resize(n);
  const double v_max = *std::max_element(v_enc.begin(), v_enc.end(),
                                         [](double x, double y) { return std::abs(x) < std::abs(y); });
  const double limit = p.divergence_factor * std::max(std::abs(v_max), 1.0);

  double vx = v_enc[0];
  double vy = 0;
  for (size_t i = 0; i < n; ++i) {
    s.vx[i] = vx;
    s.vy[i] = vy;
    if (std::hypot(vx, vy) > limit || !std::isfinite(vx) || !std::isfinite(vy)) s.diverged = true;
    const double w = yaw_rate[i];
    const double gate = std::abs(ax[i]) > p.ax_threshold ? p.ax_gate_scale : 1.0;
    const double k = gate * (p.alpha0 + p.alpha1 * std::abs(w));
    const double dvx = -k * vx + w * vy + ax[i] + k * v_enc[i];
    const double dvy = -(p.alpha2 + 1.0) * w * vx - p.lateral_zeroing(w) * vy + ay[i] +
                       p.alpha2 * w * v_enc[i];
    vx += dt * dvx;
    vy += dt * dvy;
  }
  return s;
}

double intended_yaw_rate(double speed, double steer, double wheel_base, double track) {
  const double t = std::tan(steer);
  return 2.0 * speed * t / (2.0 * wheel_base + track * t);
}

std::vector<double> yaw_rate_excess(std::span<const double> yaw_rate,
                                    std::span<const double> steer, std::span<const double> v_enc,
                                    const vehsim::VehicleParams& vp, const FilterSpec& spec) {
  require_same_size(yaw_rate.size(), {steer.size(), v_enc.size()}, "yaw_rate_excess");
  const auto w = two_way_filter(yaw_rate, spec);
  const auto d = two_way_filter(steer, spec);
  const auto v = two_way_filter(v_enc, spec);
  std::vector<double> out(w.size());
  for (size_t i = 0; i < w.size(); ++i) {
    out[i] = w[i] - intended_yaw_rate(v[i], d[i], vp.wheel_base, vp.track);
  }
  return out;
}

SideslipSignals sideslip_and_rate(std::span<const double> vx_hat, std::span<const double> vy_hat,
                                  std::span<const double> ay, std::span<const double> yaw_rate,
                                  std::span<const double> v_enc, const FilterSpec& spec) {
  const size_t n = vx_hat.size();
  require_same_size(n, {vy_hat.size(), ay.size(), yaw_rate.size(), v_enc.size()},
                    "sideslip_and_rate");
  SideslipSignals out;
  std::vector<double> beta(n), rate(n);
  for (size_t i = 0; i < n; ++i) {
    if (vx_hat[i] <= 1.0) out.low_speed = true;
    beta[i] = std::atan(vy_hat[i] / std::max(vx_hat[i], 1.0));
    const double v = std::max(v_enc[i], 1.0);
    rate[i] = (ay[i] - yaw_rate[i] * v_enc[i]) / v;
  }
  out.sideslip = two_way_filter(beta, spec);
  out.sideslip_rate = two_way_filter(rate, spec);
  return out;
}

VehicleStateTrace estimate_vehicle_state(const vehsim::SensorLog& log,
                                         const vehsim::VehicleParams& vp,
                                         const road::MapProfile& map,
                                         const EstimatorOptions& opt) {
  const size_t n = log.size();
  require_same_size(n, {log.accel_x.size(), log.accel_y.size(), log.station.size()},
                    "estimate_vehicle_state");
  VehicleStateTrace tr;
  tr.t = log.t;
  const auto& yaw = log.yaw_rate;
  tr.v_enc = encoder_speed(log, vp, opt.filter);

  // Roll follows lateral acceleration through the static roll gain; the
  // centripetal proxy w_z * V_x keeps the sideslip dynamics out of it.
  std::vector<double> roll(n, 0.0);
  if (opt.roll_correction) {
    const auto w = two_way_filter(yaw, opt.filter);
    for (size_t i = 0; i < n; ++i) {
      roll[i] = -vp.roll_gain * w[i] * tr.v_enc[i] / vehsim::kGravity;
    }
  }
  std::vector<double> ay(n);
  for (size_t i = 0; i < n; ++i) {
    const double bank = opt.bank_correction ? map.bank_at(log.station[i]) : 0.0;
    ay[i] = log.accel_y[i] + vehsim::kGravity * std::sin(bank + roll[i]);
  }

  auto st = integrate_observer(log.accel_x, ay, yaw, tr.v_enc, log.dt, opt.observer);
  tr.diverged = st.diverged;
  auto ss = sideslip_and_rate(st.vx, st.vy, ay, yaw, tr.v_enc, opt.filter);
  tr.low_speed = ss.low_speed;
  tr.vx = std::move(st.vx);
  tr.vy = std::move(st.vy);
  tr.sideslip = std::move(ss.sideslip);
  tr.sideslip_rate = std::move(ss.sideslip_rate);
  tr.yaw_excess = yaw_rate_excess(yaw, log.steer, tr.v_enc, vp, opt.filter);
  tr.steer = two_way_filter(log.steer, opt.filter);
  return tr;
}

void write_trace_csv(std::ostream& out, const VehicleStateTrace& tr) {
  using util::format_double;
  out << "t,vx,vy,sideslip,sideslip_rate,yaw_excess,v_enc,steer\n";
  for (size_t i = 0; i < tr.size(); ++i) {
    out << format_double(tr.t[i]) << ',' << format_double(tr.vx[i]) << ','
        << format_double(tr.vy[i]) << ',' << format_double(tr.sideslip[i]) << ','
        << format_double(tr.sideslip_rate[i]) << ',' << format_double(tr.yaw_excess[i]) << ','
        << format_double(tr.v_enc[i]) << ',' << format_double(tr.steer[i]) << '\n';
  }
}

}  // namespace rfe::observer
