#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "rfe/road.h"

using namespace rfe::road;

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

TEST_CASE("ideal bank ratio evaluated by hand") {
  // 80^2 / (127 * 150) - 0.14 = 6400 / 19050 - 0.14
  CHECK(ideal_bank_ratio(80, 150) == doctest::Approx(0.195958).epsilon(1e-5));
  const auto b = bank_angles(80, 150);
  CHECK(b.ideal / kDeg == doctest::Approx(11.0871).epsilon(1e-4));
  CHECK(b.actual == doctest::Approx(8 * kDeg));

  CHECK(ideal_bank_ratio(20, 30) == doctest::Approx(-0.034987).epsilon(1e-4));
  CHECK(bank_angles(20, 30).ideal == 0.0);
  CHECK(bank_angles(20, 30).actual == 0.0);
  CHECK(bank_angles(80, kStraightRadius).ideal == 0.0);
}

TEST_CASE("bank ratio rejects non-positive inputs") {
  CHECK_THROWS_AS(ideal_bank_ratio(80, 0), std::invalid_argument);
  CHECK_THROWS_AS(ideal_bank_ratio(0, 100), std::invalid_argument);
  CHECK_THROWS_AS(ideal_bank_ratio(80, -5), std::invalid_argument);
}

TEST_CASE("rdi of a capped bank") {
  // ideal 11.09 deg, actual 8 deg
  const double ideal = std::atan(6400.0 / (127.0 * 150.0) - 0.14);
  CHECK(std::tan(ideal - 8 * kDeg) == doctest::Approx(0.0540).epsilon(2e-3));

  ScenarioSpec spec;
  spec.rated_speed_kmh = 80;
  Segment c;
  c.kind = Segment::Kind::curve;
  c.length = 400;
  c.transition = 50;
  c.r_min = 150;
  c.r_max = 150;
  spec.segments = {c};
  const auto sec = build_scenario(spec);
  const auto rdi = rdi_profile(sec);
  REQUIRE(rdi.size() == sec.samples.size());
  CHECK(rdi[rdi.size() / 2] == doctest::Approx(std::tan(ideal - 8 * kDeg)).epsilon(1e-6));
}

TEST_CASE("rdi vanishes where banking suffices") {
  ScenarioSpec spec;
  spec.rated_speed_kmh = 40;
  Segment c;
  c.kind = Segment::Kind::curve;
  c.length = 300;
  c.transition = 30;
  c.r_min = 200;
  c.r_max = 300;
  Segment s;
  s.length = 50;
  spec.segments = {s, c, s};
  for (double v : rdi_profile(build_scenario(spec))) CHECK(v == 0.0);
}

TEST_CASE("scenario geometry honours the published ranges") {
  const auto lt = default_spec(Scenario::long_turn);
  CHECK(lt.curve_length() == doctest::Approx(600));
  CHECK(lt.min_radius() >= 100);
  CHECK(build_scenario(Scenario::long_turn).rated_speed_kmh == 80);

  const auto st = default_spec(Scenario::s_turn);
  for (double l : st.curve_lengths()) CHECK(l == doctest::Approx(300).epsilon(0.1));
  CHECK(st.min_radius() >= 55);
  for (const auto& seg : st.segments) {
    if (seg.kind == Segment::Kind::curve) CHECK(seg.r_max <= 187);
  }
  CHECK(build_scenario(Scenario::s_turn).rated_speed_kmh == 70);

  const auto sh = default_spec(Scenario::sharp_turn);
  CHECK(sh.curve_length() == doctest::Approx(100));
  CHECK(sh.min_radius() >= 20);
  CHECK(sh.min_radius() <= 43);
  const auto sec = build_scenario(Scenario::sharp_turn);
  CHECK(sec.length >= 200);
  CHECK(sec.rated_speed_kmh == 20);
}

TEST_CASE("every scenario satisfies the section invariants") {
  for (auto sc : {Scenario::long_turn, Scenario::s_turn, Scenario::sharp_turn,
                  Scenario::s_turn_split_mu, Scenario::slalom, Scenario::lane_change,
                  Scenario::ninety_turn, Scenario::sine_drive}) {
    CAPTURE(to_string(sc));
    const auto sec = build_scenario(sc);
    REQUIRE(sec.samples.size() > 2);
    double max_bank = 0;
    for (size_t i = 1; i < sec.samples.size(); ++i) {
      const auto& a = sec.samples[i - 1];
      const auto& b = sec.samples[i];
      CHECK(b.s > a.s);
      CHECK(b.s - a.s <= 1.0);
      CHECK(std::abs(b.curvature - a.curvature) <= 0.05);
      const double step = std::hypot(b.x - a.x, b.y - a.y);
      CHECK(step == doctest::Approx(b.s - a.s).epsilon(0.01));
      max_bank = std::max(max_bank, std::abs(b.bank));
    }
    CHECK(max_bank <= 8 * kDeg + 1e-9);
    CHECK(scenario_from_string(to_string(sc)) == sc);
  }
  CHECK_THROWS_AS(scenario_from_string("hairpin"), std::invalid_argument);
}

TEST_CASE("s_turn curvature is antisymmetric about its midpoint") {
  const auto sec = build_scenario(Scenario::s_turn);
  const size_t n = sec.samples.size();
  for (size_t i = 0; i < n; ++i) {
    CHECK(sec.samples[i].curvature + sec.samples[n - 1 - i].curvature ==
          doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("straight road has no bank and no rdi") {
  ScenarioSpec spec;
  spec.rated_speed_kmh = 100;
  Segment s;
  s.length = 120;
  spec.segments = {s};
  const auto sec = build_scenario(spec);
  for (const auto& p : sec.samples) CHECK(p.bank == 0.0);
  for (double v : rdi_profile(sec)) CHECK(v == 0.0);
}

TEST_CASE("decimated map stays within budget and interpolates") {
  const auto sec = build_scenario(Scenario::long_turn);
  const auto m = decimate(sec, 64);
  CHECK(m.size() <= 64);
  CHECK(m.s.front() == 0.0);
  CHECK(m.s.back() == doctest::Approx(sec.length));
  for (size_t i = 0; i < m.size(); ++i) {
    CHECK(m.bank_at(m.s[i]) == doctest::Approx(sec.at(m.s[i]).bank));
  }
}

TEST_CASE("scenario spec from key-value text") {
  const auto spec = parse_scenario_spec(
      "name = long_turn\n"
      "rated_speed_kmh = 60\n"
      "segments = 3\n"
      "segment.1.length = 50\n"
      "segment.2.kind = curve\n"
      "segment.2.length = 200\n"
      "segment.2.transition = 40\n"
      "segment.2.r_min = 120\n"
      "segment.2.r_max = 150\n"
      "segment.2.direction = right\n"
      "segment.3.length = 50\n");
  CHECK(spec.rated_speed_kmh == 60);
  REQUIRE(spec.segments.size() == 3);
  CHECK(spec.segments[1].r_min == 120);
  CHECK(spec.segments[1].direction == -1);
  CHECK(build_scenario(spec).length == doctest::Approx(300));
  CHECK_THROWS(parse_scenario_spec("name = long_turn\nrated_speed_kmh = 60\nsegments = 1\n"
                                   "segment.1.kind = wiggle\nsegment.1.length = 3\n"));
  CHECK_THROWS(parse_scenario_spec("name = long_turn\nrated_speed_kmh = 60\nsegments = 1\n"
                                   "segment.1.length = 30\nsegment.1.lenght = 3\n"));
}

TEST_CASE("section csv export has one row per sample") {
  const auto sec = build_scenario(Scenario::sharp_turn);
  std::ostringstream o;
  write_csv(o, sec);
  const auto text = o.str();
  CHECK(static_cast<size_t>(std::count(text.begin(), text.end(), '\n')) == sec.samples.size() + 1);
}
