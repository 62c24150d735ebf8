#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rfe/observer.h"

using namespace rfe;
using namespace rfe::observer;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

std::vector<double> sine(double freq, size_t n, double fs = 100.0) {
  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = std::sin(2 * kPi * freq * static_cast<double>(i) / fs);
  return v;
}

// Lag (in samples) maximising the cross-correlation of y against x.
int peak_lag(const std::vector<double>& x, const std::vector<double>& y, int max_lag) {
  int best = 0;
  double best_c = -1e300;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    double c = 0;
    for (size_t i = 200; i + 200 < x.size(); ++i) c += x[i] * y[static_cast<size_t>(static_cast<int>(i) + lag)];
    if (c > best_c) {
      best_c = c;
      best = lag;
    }
  }
  return best;
}

double interior_amplitude(const std::vector<double>& v) {
  double m = 0;
  for (size_t i = 200; i + 200 < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

// Single-pass magnitude response of an FIR at f (Hz).
double fir_gain(const std::vector<double>& h, double f, double fs) {
  double re = 0, im = 0;
  for (size_t k = 0; k < h.size(); ++k) {
    re += h[k] * std::cos(2 * kPi * f * static_cast<double>(k) / fs);
    im -= h[k] * std::sin(2 * kPi * f * static_cast<double>(k) / fs);
  }
  return std::hypot(re, im);
}

vehsim::RunConfig config(road::Scenario sc, double mu, double speed, std::uint64_t seed) {
  vehsim::RunConfig c;
  c.run_id = "t";
  c.scenario = sc;
  c.mu_base = mu;
  c.wear = 1.0;
  c.target_speed_kmh = speed;
  c.seed = seed;
  return c;
}

// Steady circular motion without slip, as the sensors would see it.
vehsim::SensorLog steady_turn_log(const vehsim::VehicleParams& vp, double v, double w, double bank,
                                  size_t n, double accel_noise) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  vehsim::SensorLog L;
  const double half = 0.5 * vp.track;
  const double delta = std::atan(w * vp.wheel_base / v);
  const double ay = v * w;
  const double roll = -vp.roll_gain * ay / vehsim::kGravity;
  for (size_t i = 0; i < n; ++i) {
    L.t.push_back(0.01 * static_cast<double>(i));
    L.station.push_back(v * 0.01 * static_cast<double>(i));
    L.accel_x.push_back(accel_noise * g(rng));
    L.accel_y.push_back(ay - vehsim::kGravity * std::sin(bank + roll) + accel_noise * g(rng));
    L.yaw_rate.push_back(w);
    const double lat_f = vp.cg_to_front * w * std::sin(delta);
    L.wheel_fl.push_back(((v - w * half) * std::cos(delta) + lat_f) / vp.wheel_radius);
    L.wheel_fr.push_back(((v + w * half) * std::cos(delta) + lat_f) / vp.wheel_radius);
    L.wheel_rl.push_back((v - w * half) / vp.wheel_radius);
    L.wheel_rr.push_back((v + w * half) / vp.wheel_radius);
    L.steer.push_back(delta);
  }
  return L;
}

road::MapProfile flat_map(double length, double bank) {
  road::MapProfile m;
  m.s = {0.0, length};
  m.curvature = {0.0, 0.0};
  m.bank = {bank, bank};
  m.length = length;
  return m;
}

}  // namespace

TEST_CASE("lowpass design has unit dc gain and symmetric taps") {
  const auto h = design_lowpass({});
  REQUIRE(h.size() == 31);
  double sum = 0;
  for (double v : h) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  for (size_t k = 0; k < h.size(); ++k) CHECK(h[k] == doctest::Approx(h[h.size() - 1 - k]));
}

TEST_CASE("two-way filter keeps a constant") {
  const std::vector<double> c(500, 3.25);
  for (double v : two_way_filter(c)) CHECK(std::abs(v - 3.25) < 1e-6 * 3.25);
}

TEST_CASE("two-way filter has zero phase and passes 1 Hz") {
  const auto x = sine(1.0, 1000);
  const auto y = two_way_filter(x);
  REQUIRE(y.size() == x.size());
  CHECK(peak_lag(x, y, 20) == 0);
  CHECK(interior_amplitude(y) >= 0.99);
}

TEST_CASE("two-way filter rejects 40 Hz") {
  const auto y = two_way_filter(sine(40.0, 1000));
  CHECK(interior_amplitude(y) <= 0.01);
  // Forward and backward passes square the single-pass response.
  const auto h = design_lowpass({});
  const double expect = std::pow(fir_gain(h, 40.0, 100.0), 2);
  CHECK(interior_amplitude(y) <= expect + 1e-6);
  CHECK(interior_amplitude(two_way_filter(sine(5.0, 1000))) ==
        doctest::Approx(std::pow(fir_gain(h, 5.0, 100.0), 2)).epsilon(1e-3));
}

TEST_CASE("zero phase holds for band-limited noise") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> raw(2000);
  for (auto& v : raw) v = g(rng);
  const auto x = two_way_filter(raw, {100.0, 3.0, 30});
  CHECK(peak_lag(x, two_way_filter(x), 20) == 0);
}

TEST_CASE("two-way filter needs more than three filter orders") {
  CHECK_THROWS_AS(two_way_filter(std::vector<double>(90, 1.0)), std::invalid_argument);
  CHECK_NOTHROW(two_way_filter(std::vector<double>(91, 1.0)));
  CHECK_THROWS_AS(design_lowpass({100.0, 60.0, 30}), std::invalid_argument);
}

TEST_CASE("encoder speed on a straight run") {
  const vehsim::VehicleParams vp;
  auto L = steady_turn_log(vp, 20.0, 0.0, 0.0, 400, 0.0);
  for (double v : encoder_speed(L, vp)) CHECK(std::abs(v - 20.0) < 0.01);
  for (auto* ch : {&L.wheel_fl, &L.wheel_fr, &L.wheel_rl, &L.wheel_rr}) {
    std::fill(ch->begin(), ch->end(), 0.0);
  }
  for (double v : encoder_speed(L, vp)) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("encoder speed removes the yaw-rate spread across the track") {
  vehsim::VehicleParams vp;
  vp.track = 1.6;
  const auto L = steady_turn_log(vp, 15.0, 0.5, 0.0, 400, 0.0);
  CHECK(std::abs((L.wheel_rr[0] - L.wheel_rl[0]) * vp.wheel_radius - 0.8) < 1e-12);
  const auto v = encoder_speed(L, vp);
  double mean = 0, var = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double x : v) var += (x - mean) * (x - mean);
  CHECK(std::sqrt(var / static_cast<double>(v.size() - 1)) < 0.05);
  CHECK(mean == doctest::Approx(15.0).epsilon(1e-6));
}

TEST_CASE("observer lateral speed decays on a straight") {
  const size_t n = 1000;
  std::vector<double> zero(n, 0.0), venc(n, 20.0);
  // Start the lateral state away from zero by a short lateral push.
  std::vector<double> ay(n, 0.0);
  for (size_t i = 0; i < 20; ++i) ay[i] = 5.0;
  const auto st = integrate_observer(zero, ay, zero, venc, 0.01);
  CHECK(std::abs(st.vy[20]) > 0.5);
  CHECK(std::abs(st.vy.back()) < 0.01);
  CHECK_FALSE(st.diverged);
}

TEST_CASE("observer longitudinal speed converges with rate alpha0") {
  const size_t n = 200;
  std::vector<double> zero(n, 0.0), venc(n, 20.0);
  venc[0] = 10.0;  // initial state comes from the first encoder sample
  const ObserverParams p;
  const auto st = integrate_observer(zero, zero, zero, venc, 0.01, p);
  // Euler recursion of x' = -a (x - 20): error shrinks by (1 - a dt) per step.
  // The first step still targets the first encoder sample, hence i - 1.
  for (size_t i = 1; i < 30; ++i) {
    const double expect =
        20.0 - 10.0 * std::pow(1.0 - p.alpha0 * 0.01, static_cast<double>(i) - 1.0);
    CHECK(st.vx[i] == doctest::Approx(expect).epsilon(1e-12));
  }
  // after one time constant (1/15 s) about 1/e of the gap remains
  const double frac = (20.0 - st.vx[8]) / 10.0;
  CHECK(frac == doctest::Approx(std::exp(-15.0 * 0.07)).epsilon(0.1));
}

TEST_CASE("observer flags divergence") {
  const size_t n = 300;
  std::vector<double> zero(n, 0.0), venc(n, 1.0), ax(n, 1e4);
  ObserverParams p;
  p.alpha0 = 0;
  p.alpha1 = 0;
  CHECK(integrate_observer(ax, zero, zero, venc, 0.01, p).diverged);
  CHECK_THROWS_AS(integrate_observer(ax, zero, zero, std::vector<double>(3, 1.0), 0.01),
                  std::invalid_argument);
  p.alpha0 = -1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("intended yaw rate by direct evaluation") {
  CHECK(intended_yaw_rate(20, 0.1, 2.7, 1.6) == doctest::Approx(0.72176).epsilon(1e-4));
  CHECK(intended_yaw_rate(20, 0.0, 2.7, 1.6) == 0.0);
  const vehsim::VehicleParams vp;
  const size_t n = 300;
  std::vector<double> w(n, 0.3), steer(n, 0.0), v(n, 15.0);
  for (double e : yaw_rate_excess(w, steer, v, vp)) CHECK(e == doctest::Approx(0.3));
}

TEST_CASE("sideslip and its rate by direct evaluation") {
  const size_t n = 200;
  std::vector<double> vx(n, 20.0), vy(n, 0.0), v(n, 20.0), w(n, 0.2), ay(n, 4.0);
  auto s = sideslip_and_rate(vx, vy, ay, w, v);
  for (double b : s.sideslip) CHECK(b == doctest::Approx(0.0).scale(1.0));
  // steady circular motion: A_y = w V
  for (double r : s.sideslip_rate) CHECK(std::abs(r) < 1e-12);
  CHECK_FALSE(s.low_speed);

  std::fill(vy.begin(), vy.end(), 0.5);
  s = sideslip_and_rate(vx, vy, ay, w, v);
  for (double b : s.sideslip) CHECK(b == doctest::Approx(0.024995).epsilon(1e-4));

  vx[50] = 0.5;
  CHECK(sideslip_and_rate(vx, vy, ay, w, v).low_speed);
}

TEST_CASE("bank and roll correction on a banked steady turn") {
  const vehsim::VehicleParams vp;
  const double bank = 8 * kDeg;
  const auto L = steady_turn_log(vp, 22.0, 22.0 / 150.0, bank, 1500, 0.05);
  const auto map = flat_map(1e4, bank);
  const auto tr = estimate_vehicle_state(L, vp, map);
  double peak = 0;
  for (double b : tr.sideslip) peak = std::max(peak, std::abs(b));
  CHECK(peak < 0.5 * kDeg);
  CHECK_FALSE(tr.diverged);

  EstimatorOptions raw;
  raw.bank_correction = false;
  double uncorrected = 0;
  for (double b : estimate_vehicle_state(L, vp, map, raw).sideslip) {
    uncorrected = std::max(uncorrected, std::abs(b));
  }
  CHECK(uncorrected > 0.5 * kDeg);
}

TEST_CASE("sideslip peak is picked up on a slippery s-turn") {
  const auto sec = road::build_scenario(road::Scenario::s_turn);
  const vehsim::VehicleParams vp;
  const auto run = vehsim::simulate_run(sec, vp, {}, config(road::Scenario::s_turn, 0.2, 70, 1));
  const auto tr = estimate_vehicle_state(run.log, vp, road::decimate(sec, 64));
  REQUIRE(tr.size() == run.log.size());
  const auto& truth = run.truth.sideslip;
  size_t kt = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (std::abs(truth[i]) > std::abs(truth[kt])) kt = i;
  }
  // The estimate's peak is searched within a second of the true one; the
  // trace has several lobes of similar height.
  const size_t lo = kt > 100 ? kt - 100 : 0;
  const size_t hi = std::min(truth.size(), kt + 101);
  size_t ke = lo;
  for (size_t i = lo; i < hi; ++i) {
    if (std::abs(tr.sideslip[i]) > std::abs(tr.sideslip[ke])) ke = i;
  }
  CHECK(std::abs(static_cast<double>(kt) - static_cast<double>(ke)) * run.log.dt <= 0.2);
  CHECK(std::abs(tr.sideslip[ke] - truth[kt]) <= 0.3 * std::abs(truth[kt]));
}

TEST_CASE("mean sideslip estimate falls as friction rises") {
  const auto sec = road::build_scenario(road::Scenario::s_turn);
  const auto map = road::decimate(sec, 64);
  const vehsim::VehicleParams vp;
  for (std::uint64_t seed : {3u, 4u}) {
    double prev = 1e9;
    for (double mu : {0.2, 0.45, 0.7}) {
      const auto run = vehsim::simulate_run(sec, vp, {}, config(road::Scenario::s_turn, mu, 70, seed));
      const auto tr = estimate_vehicle_state(run.log, vp, map);
      double m = 0;
      for (double b : tr.sideslip) m += std::abs(b);
      m /= static_cast<double>(tr.size());
      CHECK(m < prev);
      prev = m;
    }
  }
}

TEST_CASE("observer stays bounded on sampled corpus runs") {
  const vehsim::VehicleParams vp;
  for (auto sc : road::normal_scenarios()) {
    const auto sec = road::build_scenario(sc);
    const auto map = road::decimate(sec, 64);
    for (const auto& c : vehsim::sample_run_configs(sec, sc, 11, 21)) {
      const auto run = vehsim::simulate_run(sec, vp, {}, c);
      const auto tr = estimate_vehicle_state(run.log, vp, map);
      CHECK_FALSE(tr.diverged);
      CHECK_FALSE(tr.low_speed);
      for (size_t i = 0; i < tr.size(); ++i) {
        CHECK(std::isfinite(tr.vx[i]));
        CHECK(std::isfinite(tr.sideslip[i]));
      }
    }
  }
}

TEST_CASE("trace csv export") {
  const vehsim::VehicleParams vp;
  const auto L = steady_turn_log(vp, 20.0, 0.1, 0.0, 200, 0.0);
  const auto tr = estimate_vehicle_state(L, vp, flat_map(1e4, 0.0));
  std::ostringstream o;
  write_trace_csv(o, tr);
  const auto text = o.str();
  CHECK(static_cast<size_t>(std::count(text.begin(), text.end(), '\n')) == tr.size() + 1);
}
