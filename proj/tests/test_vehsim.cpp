#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rfe/vehsim.h"

using namespace rfe;
using namespace rfe::vehsim;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

RunConfig make_config(road::Scenario sc, double mu, double wear, double speed,
                      std::uint64_t seed) {
  RunConfig c;
  c.run_id = "t";
  c.scenario = sc;
  c.mu_base = mu;
  c.wear = wear;
  c.target_speed_kmh = speed;
  c.seed = seed;
  return c;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

road::RoadSection straight_section(double length, double speed) {
  road::ScenarioSpec spec;
  spec.rated_speed_kmh = speed;
  road::Segment s;
  s.length = length;
  spec.segments = {s};
  return road::build_scenario(spec);
}

}  // namespace

TEST_CASE("lateral tyre force shape") {
  const TyreParams tp;
  CHECK(lateral_tyre_force(0.0, 5000, 0.5, tp.b_front, tp.c_shape) == 0.0);
  for (double a : {0.01, 0.05, 0.1, 0.3, 1.0}) {
    const double f = lateral_tyre_force(a, 5000, 0.4, tp.b_front, tp.c_shape);
    CHECK(lateral_tyre_force(-a, 5000, 0.4, tp.b_front, tp.c_shape) == -f);
    CHECK(lateral_tyre_force(a, 5000, 0.8, tp.b_front, tp.c_shape) == doctest::Approx(2 * f));
    CHECK(std::abs(f) <= 0.4 * 5000 + 1e-9);
  }
  // slope at the origin equals mu Fz B C
  const double h = 1e-7;
  CHECK(lateral_tyre_force(h, 4000, 0.6, tp.b_rear, tp.c_shape) / h ==
        doctest::Approx(tp.cornering_stiffness(false, 4000, 0.6)).epsilon(1e-6));
}

TEST_CASE("run configs are stratified and deterministic") {
  const auto sec = road::build_scenario(road::Scenario::long_turn);
  const auto a = sample_run_configs(sec, road::Scenario::long_turn, 110, 7);
  const auto b = sample_run_configs(sec, road::Scenario::long_turn, 110, 7);
  REQUIRE(a.size() == 110);
  std::map<double, int> per_level;
  for (size_t i = 0; i < a.size(); ++i) {
    per_level[a[i].mu_base]++;
    CHECK(a[i].run_id == b[i].run_id);
    CHECK(a[i].wear == b[i].wear);
    CHECK(a[i].target_speed_kmh == b[i].target_speed_kmh);
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].wear >= 0.8);
    CHECK(a[i].wear <= 1.0);
    CHECK(a[i].target_speed_kmh >= 0.8 * 80);
    CHECK(a[i].target_speed_kmh <= 1.2 * 80);
  }
  CHECK(per_level.size() == 11);
  for (const auto& [mu, n] : per_level) CHECK(n == 10);
  CHECK_THROWS_AS(sample_run_configs(sec, road::Scenario::long_turn, 100, 7),
                  std::invalid_argument);
}

TEST_CASE("mu grid runs from 0.20 to 0.70 in 0.05 steps") {
  const auto g = default_mu_grid();
  REQUIRE(g.size() == 11);
  for (size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(0.2 + 0.05 * i));
}

TEST_CASE("sampled wear averages 0.9") {
  const auto sec = road::build_scenario(road::Scenario::s_turn);
  const auto cfgs = sample_run_configs(sec, road::Scenario::s_turn, 11000, 99);
  double sum = 0;
  for (const auto& c : cfgs) sum += c.wear;
  CHECK(sum / static_cast<double>(cfgs.size()) == doctest::Approx(0.9).epsilon(0.005 / 0.9));
}

TEST_CASE("sampled speeds follow a triangle centred on the rated speed") {
  const auto sec = road::build_scenario(road::Scenario::long_turn);
  const auto cfgs = sample_run_configs(sec, road::Scenario::long_turn, 11000, 3);
  std::vector<double> v;
  for (const auto& c : cfgs) v.push_back(c.target_speed_kmh);
  std::sort(v.begin(), v.end());
  // Symmetric triangle: the median is the mode, and P(v < 72) = 0.125.
  CHECK(v[v.size() / 2] == doctest::Approx(80).epsilon(0.01));
  const auto below = std::lower_bound(v.begin(), v.end(), 72.0) - v.begin();
  CHECK(static_cast<double>(below) / static_cast<double>(v.size()) ==
        doctest::Approx(0.125).epsilon(0.1));
}

TEST_CASE("labels are the lowest experienced friction") {
  RunConfig c = make_config(road::Scenario::s_turn_split_mu, 0.2, 0.9, 70, 1);
  c.patches.push_back({380.0, 1e9, 0.5});
  CHECK(c.label(760) == doctest::Approx(0.2 * 0.9));
  c.patches = {{-1e9, 1e9, 0.45}};
  CHECK(c.label(760) == doctest::Approx(0.45 * 0.9));
  c.patches.clear();
  CHECK(c.label(760) == doctest::Approx(0.2 * 0.9));

  for (const auto& rc : sample_run_configs(road::build_scenario(road::Scenario::s_turn_split_mu),
                                           road::Scenario::s_turn_split_mu, 22, 5)) {
    double lowest = rc.mu_base;
    for (const auto& p : rc.patches) lowest = std::min(lowest, p.mu_base);
    CHECK(rc.label(760) == doctest::Approx(rc.wear * lowest));
  }
}

TEST_CASE("split friction run is labelled by the slippery curve") {
  const auto sec = road::build_scenario(road::Scenario::s_turn_split_mu);
  RunConfig c = make_config(road::Scenario::s_turn_split_mu, 0.2, 0.85, 70, 11);
  c.patches.push_back({0.5 * sec.length, 1e9, 0.5});
  const auto r = simulate_run(sec, VehicleParams{}, TyreParams{}, c);
  CHECK(r.truth.label == doctest::Approx(0.2 * 0.85));
}

TEST_CASE("sharp turn on good grip stays under three degrees of sideslip") {
  const auto sec = road::build_scenario(road::Scenario::sharp_turn);
  const auto r = simulate_run(sec, VehicleParams{}, TyreParams{},
                              make_config(road::Scenario::sharp_turn, 0.7, 1.0, 20, 4));
  CHECK_FALSE(r.truth.control_loss);
  CHECK(max_abs(r.truth.sideslip) < 3 * kDeg);
}

TEST_CASE("straight road gives no sideslip") {
  const auto sec = straight_section(300, 70);
  for (double mu : {0.2, 0.7}) {
    const auto r = simulate_run(sec, VehicleParams{}, TyreParams{},
                                make_config(road::Scenario::long_turn, mu, 1.0, 70, 2));
    CHECK(max_abs(r.truth.sideslip) < 1e-3);
  }
}

TEST_CASE("sideslip grows as friction falls") {
  const auto sec = road::build_scenario(road::Scenario::s_turn);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto lo = simulate_run(sec, VehicleParams{}, TyreParams{},
                                 make_config(road::Scenario::s_turn, 0.2, 0.9, 70, seed));
    const auto hi = simulate_run(sec, VehicleParams{}, TyreParams{},
                                 make_config(road::Scenario::s_turn, 0.7, 0.9, 70, seed));
    CHECK(max_abs(lo.truth.sideslip) > max_abs(hi.truth.sideslip));
  }
}

TEST_CASE("sensor log is uniform, finite and confined to the section") {
  const auto sec = road::build_scenario(road::Scenario::long_turn);
  const auto r = simulate_run(sec, VehicleParams{}, TyreParams{},
                              make_config(road::Scenario::long_turn, 0.45, 0.9, 80, 8));
  const auto& L = r.log;
  REQUIRE(L.size() > 100);
  CHECK(L.dt == doctest::Approx(0.01));
  for (size_t i = 0; i < L.size(); ++i) {
    CHECK(L.t[i] == doctest::Approx(0.01 * static_cast<double>(i)));
    CHECK(L.station[i] >= 0.0);
    CHECK(L.station[i] < sec.length);
    CHECK(std::isfinite(L.accel_x[i]));
    CHECK(std::isfinite(L.accel_y[i]));
    CHECK(std::isfinite(L.yaw_rate[i]));
    CHECK(std::isfinite(L.steer[i]));
  }
  CHECK(r.truth.vx.size() == L.size());
  CHECK(r.truth.sideslip.size() == L.size());
}

TEST_CASE("encoder speeds carry zero-mean noise") {
  const auto sec = road::build_scenario(road::Scenario::s_turn);
  const VehicleParams vp;
  for (std::uint64_t seed : {5u, 6u}) {
    const auto r = simulate_run(sec, vp, TyreParams{},
                                make_config(road::Scenario::s_turn, 0.5, 0.9, 70, seed));
    // Rear wheels roll along the body axis, so their mean is V_x exactly.
    double err = 0;
    for (size_t i = 0; i < r.log.size(); ++i) {
      err += 0.5 * (r.log.wheel_rl[i] + r.log.wheel_rr[i]) * vp.wheel_radius - r.truth.vx[i];
    }
    CHECK(std::abs(err / static_cast<double>(r.log.size())) < 0.05);
  }
}

TEST_CASE("simulation is a pure function of its inputs") {
  const auto sec = road::build_scenario(road::Scenario::sharp_turn);
  const auto c = make_config(road::Scenario::sharp_turn, 0.3, 0.95, 21, 77);
  const auto a = simulate_run(sec, VehicleParams{}, TyreParams{}, c);
  const auto b = simulate_run(sec, VehicleParams{}, TyreParams{}, c);
  CHECK(a.log.accel_y == b.log.accel_y);
  CHECK(a.log.yaw_rate == b.log.yaw_rate);
  CHECK(a.truth.sideslip == b.truth.sideslip);
  auto c2 = c;
  c2.seed = 78;
  CHECK(simulate_run(sec, VehicleParams{}, TyreParams{}, c2).log.accel_y != a.log.accel_y);
}

TEST_CASE("bad inputs are rejected") {
  const auto sec = road::build_scenario(road::Scenario::sharp_turn);
  auto c = make_config(road::Scenario::sharp_turn, 0.3, 0.95, 20, 1);
  c.wear = 0;
  CHECK_THROWS_AS(simulate_run(sec, VehicleParams{}, TyreParams{}, c), std::invalid_argument);
  c = make_config(road::Scenario::sharp_turn, 0.3, 0.95, 0, 1);
  CHECK_THROWS_AS(simulate_run(sec, VehicleParams{}, TyreParams{}, c), std::invalid_argument);
  VehicleParams vp;
  vp.cg_to_front = 5;
  CHECK_THROWS_AS(vp.validate(), std::invalid_argument);
}

TEST_CASE("run csv has a header and one row per sample") {
  const auto sec = road::build_scenario(road::Scenario::sharp_turn);
  const auto r = simulate_run(sec, VehicleParams{}, TyreParams{},
                              make_config(road::Scenario::sharp_turn, 0.3, 0.95, 20, 1));
  std::ostringstream o;
  write_run_csv(o, r.log, r.truth);
  const auto text = o.str();
  CHECK(static_cast<size_t>(std::count(text.begin(), text.end(), '\n')) == r.log.size() + 1);
}
