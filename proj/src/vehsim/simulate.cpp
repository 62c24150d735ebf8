#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rfe/vehsim.h"

namespace rfe::vehsim {
namespace {

// Road centreline extended with a straight approach before s = 0 and a
// straight exit after the section end. Stations are section stations, so the
// approach has negative s.
class Path {
 public:
  Path(const road::RoadSection& sec, double approach, double exit) : approach_(approach) {
    const double ds = road::kSampleSpacing;
    const auto n_app = static_cast<size_t>(std::ceil(approach / ds));
    approach_ = static_cast<double>(n_app) * ds;
    for (size_t i = 0; i < n_app; ++i) {
      road::RoadSample p;
      p.s = -approach_ + static_cast<double>(i) * ds;
      p.x = p.s;
      pts_.push_back(p);
    }
    for (const auto& p : sec.samples) pts_.push_back(p);
    const auto last = sec.samples.back();
    const auto n_exit = static_cast<size_t>(std::ceil(exit / ds));
    for (size_t i = 1; i <= n_exit; ++i) {
      road::RoadSample p;
      p.s = last.s + static_cast<double>(i) * ds;
      p.heading = last.heading;
      p.x = last.x + static_cast<double>(i) * ds * std::cos(last.heading);
      p.y = last.y + static_cast<double>(i) * ds * std::sin(last.heading);
      pts_.push_back(p);
    }
  }

  double start() const { return pts_.front().s; }
  double end() const { return pts_.back().s; }
  size_t size() const { return pts_.size(); }
  const road::RoadSample& operator[](size_t i) const { return pts_[i]; }

  road::RoadSample at(double s) const {
    const double pos = (s - start()) / road::kSampleSpacing;
    if (pos <= 0) return extrapolate(pts_.front(), s);
    auto i = static_cast<size_t>(pos);
    if (i + 1 >= pts_.size()) return extrapolate(pts_.back(), s);
    const double t = pos - static_cast<double>(i);
    const auto& a = pts_[i];
    const auto& b = pts_[i + 1];
    road::RoadSample r;
    r.s = s;
    r.curvature = a.curvature + t * (b.curvature - a.curvature);
    r.bank = a.bank + t * (b.bank - a.bank);
    r.heading = a.heading + t * (b.heading - a.heading);
    r.x = a.x + t * (b.x - a.x);
    r.y = a.y + t * (b.y - a.y);
    return r;
  }

  // Newton-style refinement of the station closest to (x, y).
  double project(double x, double y, double s_guess) const {
    double s = s_guess;
    for (int k = 0; k < 3; ++k) {
      const auto c = at(s);
      s += (x - c.x) * std::cos(c.heading) + (y - c.y) * std::sin(c.heading);
    }
    return s;
  }

  double lateral_offset(double x, double y, double s) const {
    const auto c = at(s);
    return -(x - c.x) * std::sin(c.heading) + (y - c.y) * std::cos(c.heading);
  }

 private:
  static road::RoadSample extrapolate(const road::RoadSample& p, double s) {
    road::RoadSample r = p;
    const double d = s - p.s;
    r.s = s;
    r.x = p.x + d * std::cos(p.heading);
    r.y = p.y + d * std::sin(p.heading);
    r.curvature = 0;
    r.bank = 0;
    return r;
  }

  double approach_;
  std::vector<road::RoadSample> pts_;
};

// Reference speed over the path: lateral-demand limit, then backward
// (braking) and forward (acceleration) passes.
std::vector<double> speed_profile(const Path& path, const RunConfig& cfg, const DriverParams& d,
                                  double v_target, bool cautious) {
  std::vector<double> v(path.size(), v_target);
  if (!cautious) return v;
  const double ds = road::kSampleSpacing;
  for (size_t i = 0; i < path.size(); ++i) {
    const auto& p = path[i];
    const double k = std::abs(p.curvature);
    if (k < 1e-6) continue;
    const double mu = cfg.grip_perception * cfg.wear * cfg.mu_base_at(p.s);
    const double sgn = p.curvature > 0 ? 1.0 : -1.0;
    const double cap = d.lateral_margin * mu * kGravity + kGravity * std::sin(p.bank * sgn);
    v[i] = std::min(v_target, std::sqrt(std::max(cap, 0.05) / k));
  }
  for (size_t i = path.size() - 1; i-- > 0;) {
    const double mu = cfg.grip_perception * cfg.wear * cfg.mu_base_at(path[i].s);
    const double decel = d.decel_fraction * mu * kGravity;
    v[i] = std::min(v[i], std::sqrt(v[i + 1] * v[i + 1] + 2.0 * decel * ds));
  }
  for (size_t i = 1; i < path.size(); ++i) {
    v[i] = std::min(v[i], std::sqrt(v[i - 1] * v[i - 1] + 2.0 * d.accel_limit * ds));
  }
  return v;
}

double profile_at(const Path& path, const std::vector<double>& v, double s) {
  const double pos = (s - path.start()) / road::kSampleSpacing;
  if (pos <= 0) return v.front();
  auto i = static_cast<size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double t = pos - static_cast<double>(i);
  return v[i] + t * (v[i + 1] - v[i]);
}

struct State {
  double x = 0, y = 0, psi = 0;
  double vx = 0, vy = 0, r = 0;
  double delta = 0;
};

}  // namespace

double RunConfig::mu_base_at(double s) const {
  for (const auto& p : patches) {
    if (s >= p.s_from && s < p.s_to) return p.mu_base;
  }
  return mu_base;
}

double RunConfig::label(double length) const {
  // Walk the section and collect every friction level that is actually
  // present; a patch may cover the whole section and hide mu_base.
  std::vector<std::pair<double, double>> cover;
  double lowest = 1e9;
  for (const auto& p : patches) {
    const double a = std::max(p.s_from, 0.0);
    const double b = std::min(p.s_to, length);
    if (b > a) {
      cover.emplace_back(a, b);
      lowest = std::min(lowest, p.mu_base);
    }
  }
  std::sort(cover.begin(), cover.end());
  double reach = 0;
  bool base_seen = false;
  for (const auto& [a, b] : cover) {
    if (a > reach) base_seen = true;
    reach = std::max(reach, b);
  }
  if (reach < length) base_seen = true;
  if (base_seen) lowest = std::min(lowest, mu_base);
  return wear * lowest;
}

RunResult simulate_run(const road::RoadSection& section, const VehicleParams& vp,
                       const TyreParams& tp, const RunConfig& cfg, const SimOptions& opt) {
  vp.validate();
  if (section.samples.size() < 2) throw std::invalid_argument("simulate_run: empty section");
  if (!(cfg.target_speed_kmh > 0)) throw std::invalid_argument("simulate_run: target speed");
  if (!(cfg.wear > 0)) throw std::invalid_argument("simulate_run: wear must be positive");
  if (!(cfg.grip_perception > 0)) {
    throw std::invalid_argument("simulate_run: grip perception must be positive");
  }
  const int decim = static_cast<int>(std::lround(1.0 / (opt.dt * opt.output_rate)));
  if (decim < 1) throw std::invalid_argument("simulate_run: output rate above integration rate");

  const DriverParams& drv = opt.driver;
  const double v_target = cfg.target_speed_kmh / 3.6;
  const double approach = std::max(opt.min_approach, 8.0 * v_target);
  const Path path(section, approach, opt.exit_length);
  const auto v_ref = speed_profile(path, cfg, drv, v_target, drv.cautious && !drv.passive);

  const double a = vp.cg_to_front;
  const double c = vp.cg_to_rear();
  const double b = vp.wheel_base;
  const double m = vp.mass;
  const double half_track = 0.5 * vp.track;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto& nz = opt.noise;
  double gyro_bias = 0;

  State st;
  st.x = path.start();
  st.vx = drv.passive ? v_target : profile_at(path, v_ref, path.start());
  double s_cg = path.start();

  RunResult out;
  out.log.dt = 1.0 / opt.output_rate;
  out.truth.label = cfg.label(section.length);

  const double t_max = 3.0 * (path.end() - path.start()) / std::max(v_target, 1.0) + 60.0;
  double t = 0;
  long step = 0;
  bool in_section = false;

  while (t < t_max) {
    s_cg = path.project(st.x, st.y, s_cg);
    if (s_cg >= section.length && in_section) break;
    if (s_cg >= path.end()) break;

    const auto road_here = path.at(s_cg);
    const double bank = road_here.bank;
    const double lat_off = path.lateral_offset(st.x, st.y, s_cg);
    const double vx_safe = std::max(st.vx, 1.0);

    // Driver.
    double delta_cmd = 0;
    double fx_cmd = 0;
    if (!drv.passive) {
      const double xr = st.x - c * std::cos(st.psi);
      const double yr = st.y - c * std::sin(st.psi);
      const double s_rear = s_cg - c;
      const double ld = std::max(drv.lookahead_time * st.vx, drv.min_lookahead);
      const auto tgt = path.at(s_rear + ld);
      const double dx = tgt.x - xr;
      const double dy = tgt.y - yr;
      const double dist = std::max(std::hypot(dx, dy), 1e-3);
      // Aim along the rear axle's actual course so rear slip does not bias
      // the pursuit geometry.
      const double course = st.psi + drv.course_weight * std::atan2(st.vy - c * st.r, vx_safe);
      const double alpha = std::atan2(dy, dx) - course;
      // Pursuit curvature, realised through a yaw-rate loop so the driver
      // counter-steers when the rear lets go.
      const double kappa_cmd = 2.0 * std::sin(alpha) / dist;
      const double mu_drv = cfg.grip_perception * cfg.wear * cfg.mu_base_at(s_cg);
      const double r_max = (mu_drv + std::abs(std::sin(bank))) * kGravity / vx_safe;
      const double r_cmd = std::clamp(vx_safe * kappa_cmd, -r_max, r_max);
      delta_cmd = std::atan(b * kappa_cmd) + drv.yaw_gain * (r_cmd - st.r);
      delta_cmd = std::clamp(delta_cmd, -drv.max_steer, drv.max_steer);

      const double vr = profile_at(path, v_ref, s_cg);
      const double vr_ahead = profile_at(path, v_ref, s_cg + 1.0);
      double a_cmd = drv.speed_gain * (vr - st.vx) + (vr_ahead - vr) * st.vx;
      const double mu_here = cfg.wear * cfg.mu_base_at(s_cg);
      a_cmd = std::clamp(a_cmd, -0.8 * mu_here * kGravity, drv.accel_limit);
      fx_cmd = m * a_cmd;
    }

    // Resistances.
    const double f_roll = st.vx > 0.05 ? vp.rolling_resistance * m * kGravity : 0.0;
    const double f_drag = 0.5 * vp.air_density * vp.drag_area * st.vx * std::abs(st.vx);
    // The driver's command is the net longitudinal force; a passive vehicle
    // only feels the resistances.
    const double fx = drv.passive ? -(f_roll + f_drag) : fx_cmd;

    // Tyres.
    const double mu_f = cfg.wear * cfg.mu_base_at(s_cg + a);
    const double mu_r = cfg.wear * cfg.mu_base_at(s_cg - c);
    const double fz_total = m * kGravity * std::cos(bank);
    const double fz_f = fz_total * c / b;
    const double fz_r = fz_total * a / b;
    const double alpha_f = st.delta - std::atan2(st.vy + a * st.r, vx_safe);
    const double alpha_r = -std::atan2(st.vy - c * st.r, vx_safe);
    const double fyf = lateral_tyre_force(alpha_f, fz_f, mu_f, tp.b_front, tp.c_shape);
    const double fyr = lateral_tyre_force(alpha_r, fz_r, mu_r, tp.b_rear, tp.c_shape);
    const double f_bank = m * kGravity * std::sin(bank);

    const double ax_body = (fx - fyf * std::sin(st.delta)) / m;
    const double ay_body = (fyf * std::cos(st.delta) + fyr + f_bank) / m;
    const double dvx = ax_body + st.r * st.vy;
    const double dvy = ay_body - st.r * st.vx;
    const double dr = (a * fyf * std::cos(st.delta) - c * fyr) / vp.yaw_inertia;

    // Output sample at the start of each decimation window.
    const bool inside = s_cg >= 0 && s_cg < section.length;
    if (inside) in_section = true;
    if (step % decim == 0) {
      if (in_section && inside) {
        const double roll = -vp.roll_gain * ay_body / kGravity;
        gyro_bias += nz.gyro_bias_walk * std::sqrt(out.log.dt) * gauss(rng);
        auto& L = out.log;
        L.t.push_back(static_cast<double>(L.t.size()) * L.dt);
        L.station.push_back(s_cg);
        L.accel_x.push_back(ax_body + nz.accel_sigma * gauss(rng));
        L.accel_y.push_back(ay_body - kGravity * std::sin(bank + roll) +
                            nz.accel_sigma * gauss(rng));
        L.yaw_rate.push_back(st.r + gyro_bias + nz.gyro_sigma * gauss(rng));
        const double rw = vp.wheel_radius;
        const double vl = st.vx - st.r * half_track;
        const double vrr = st.vx + st.r * half_track;
        const double lat_f = (st.vy + a * st.r) * std::sin(st.delta);
        const double cd = std::cos(st.delta);
        L.wheel_fl.push_back((vl * cd + lat_f + nz.encoder_sigma * gauss(rng)) / rw);
        L.wheel_fr.push_back((vrr * cd + lat_f + nz.encoder_sigma * gauss(rng)) / rw);
        L.wheel_rl.push_back((vl + nz.encoder_sigma * gauss(rng)) / rw);
        L.wheel_rr.push_back((vrr + nz.encoder_sigma * gauss(rng)) / rw);
        L.steer.push_back(st.delta + nz.steer_sigma * gauss(rng));

        auto& G = out.truth;
        G.vx.push_back(st.vx);
        G.vy.push_back(st.vy);
        G.sideslip.push_back(std::atan2(st.vy, vx_safe));
        G.yaw_rate.push_back(st.r);
        G.roll.push_back(roll);
        G.lateral_offset.push_back(lat_off);
        G.max_lateral_offset = std::max(G.max_lateral_offset, std::abs(lat_off));
        if (std::abs(lat_off) > opt.lane_limit) G.control_loss = true;
      }
    }
    if (in_section && std::abs(lat_off) > 5.0 * opt.lane_limit) {
      out.truth.control_loss = true;
      break;
    }
    if (drv.passive && st.vx <= 0.05) break;

    // Explicit Euler.
    const State prev = st;
    st.vx += opt.dt * dvx;
    st.vy += opt.dt * dvy;
    st.r += opt.dt * dr;
    if (drv.passive && st.vx < 0) st.vx = 0;
    const double cp = std::cos(st.psi), sp = std::sin(st.psi);
    st.x += opt.dt * (prev.vx * cp - prev.vy * sp);
    st.y += opt.dt * (prev.vx * sp + prev.vy * cp);
    st.psi += opt.dt * prev.r;
    st.delta += opt.dt * (delta_cmd - st.delta) / drv.steer_time_constant;

    t += opt.dt;
    ++step;
  }
  return out;
}

}  // namespace rfe::vehsim
