#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "rfe/rsu.h"

using namespace rfe;
using namespace rfe::rsu;

namespace {

VehicleReportMsg random_report(std::mt19937_64& rng) {
  VehicleReportMsg m;
  m.section_id = static_cast<std::uint32_t>(rng());
  m.report_id = rng();
  // Arbitrary bit patterns, NaNs included: equality is bitwise.
  for (auto& q : m.speed_quantiles) q = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
  for (auto& v : m.summary) v = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
  return m;
}

RsuAdvisoryMsg random_advisory(std::mt19937_64& rng) {
  RsuAdvisoryMsg m;
  m.section_id = static_cast<std::uint32_t>(rng());
  m.speed_advisory_kmh = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
  m.rated_speed_kmh = static_cast<float>(rng() % 130);
  m.length = static_cast<float>(rng() % 2000);
  m.map.resize(rng() % (kMaxMapSamples + 1));
  for (auto& s : m.map) {
    s.s = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    s.curvature = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    s.bank = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
  }
  return m;
}

summary::KinematicSummary plausible_summary(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(summary::kKinematicFeatures);
  for (auto& x : v) x = u(rng);
  return summary::KinematicSummary::unflatten(v);
}

// A regressor that always answers mu over the full global layout.
std::shared_ptr<learn::TrainedRegressor> constant_model(double mu) {
  auto m = std::make_shared<learn::TrainedRegressor>();
  m->feature_names = summary::all_feature_names();
  m->base = mu;
  return m;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("report is 256 bytes on the wire") {
  CHECK(kReportBytes == 256);
  std::mt19937_64 rng(1);
  const auto bytes = encode(random_report(rng));
  CHECK(bytes.size() == 256);
  CHECK(bytes.size() <= kPacketBytes);
  CHECK(bytes[0] == kWireVersion);
  CHECK(bytes[1] == kTypeReport);
}

TEST_CASE("report layout is little-endian in a fixed order") {
  VehicleReportMsg m;
  m.section_id = 0x01020304;
  m.report_id = 0x1122334455667788ULL;
  m.speed_quantiles[0] = 1.0f;  // 0x3f800000
  m.summary[54] = -2.0f;        // 0xc0000000
  const auto b = encode(m);
  CHECK(b[2] == 55);
  CHECK(b[3] == 0);
  CHECK(b[4] == 0x04);
  CHECK(b[7] == 0x01);
  CHECK(b[8] == 0x88);
  CHECK(b[15] == 0x11);
  CHECK(b[16] == 0x00);
  CHECK(b[19] == 0x3f);
  CHECK(b[255] == 0xc0);
  CHECK(b[252] == 0x00);
}

TEST_CASE("ten thousand fuzzed messages survive the round trip") {
  std::mt19937_64 rng(2026);
  size_t failures = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto r = random_report(rng);
    const auto bytes = encode(r);
    if (bytes.size() > kPacketBytes || !(decode_report(bytes) == r) || encode(r) != bytes) ++failures;
    const auto a = random_advisory(rng);
    const auto ab = encode(a);
    if (ab.size() > 8 * kPacketBytes || !(decode_advisory(ab) == a)) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("malformed bytes raise a wire error") {
  std::mt19937_64 rng(3);
  const auto good = encode(random_report(rng));

  auto bad_version = good;
  bad_version[0] ^= 0xff;
  CHECK_THROWS_AS(decode_report(bad_version), WireError);

  auto bad_type = good;
  bad_type[1] = kTypeAdvisory;
  CHECK_THROWS_AS(decode_report(bad_type), WireError);

  auto bad_count = good;
  bad_count[2] = 54;
  CHECK_THROWS_AS(decode_report(bad_count), WireError);

  for (size_t n : {size_t{0}, size_t{1}, size_t{15}, size_t{16}, size_t{100}, size_t{255}}) {
    CHECK_THROWS_AS(decode_report(std::span(good).first(n)), WireError);
  }
  auto longer = good;
  longer.push_back(0);
  CHECK_THROWS_AS(decode_report(longer), WireError);

  const auto adv = encode(random_advisory(rng));
  CHECK_THROWS_AS(decode_report(adv), WireError);
  CHECK_THROWS_AS(decode_advisory(good), WireError);
  auto adv_long = adv;
  adv_long.push_back(1);
  CHECK_THROWS_AS(decode_advisory(adv_long), WireError);
  auto adv_reserved = adv;
  adv_reserved[9] = 1;
  CHECK_THROWS_AS(decode_advisory(adv_reserved), WireError);

  RsuAdvisoryMsg huge;
  huge.map.resize(kMaxMapSamples + 1);
  CHECK_THROWS_AS(encode(huge), WireError);
}

TEST_CASE("random garbage never decodes silently into a report of the wrong size") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::uint8_t> b(rng() % 400);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    try {
      decode_report(b);
      CHECK(b.size() == kReportBytes);
    } catch (const WireError&) {
    }
  }
}

TEST_CASE("advisory for every scenario fits eight packets") {
  for (auto sc : {road::Scenario::long_turn, road::Scenario::s_turn, road::Scenario::sharp_turn,
                  road::Scenario::slalom}) {
    const auto sec = road::build_scenario(sc);
    const auto m = make_advisory(7, sec, sec.rated_speed_kmh);
    CHECK(m.map.size() <= kMaxMapSamples);
    CHECK(m.map.front().s == 0.0f);
    CHECK(m.map.back().s == static_cast<float>(sec.samples.back().s));
    const auto b = encode(m);
    CHECK(b.size() <= 8 * kPacketBytes);
    CHECK(decode_advisory(b) == m);
  }
}

TEST_CASE("report carries the speed quantiles and the summary") {
  const auto ks = plausible_summary(5);
  const auto m = make_report(3, 99, ks);
  const auto& sp = ks[summary::Signal::speed];
  CHECK(m.speed_quantiles[0] == static_cast<float>(sp.q20));
  CHECK(m.speed_quantiles[2] == static_cast<float>(sp.median));
  CHECK(m.speed_quantiles[4] == static_cast<float>(sp.q80));
  CHECK(m.kinematic_summary().flatten() == quantize_f32(ks).flatten());
}

TEST_CASE("lossless link always delivers identical bytes") {
  std::mt19937_64 rng(6);
  const auto b = encode(random_report(rng));
  LinkModel link;
  for (std::uint64_t n = 0; n < 1000; ++n) {
    const auto d = transmit(b, link, n);
    REQUIRE(d.delivered);
    CHECK(d.bytes == b);
    CHECK(d.latency_ms == link.latency_ms);
  }
}

TEST_CASE("lossy link delivers the expected fraction") {
  const std::vector<std::uint8_t> b(10, 1);
  LinkModel link;
  link.p_loss = 0.9;
  link.jitter_ms = 3;
  link.seed = 12;
  int delivered = 0;
  for (std::uint64_t n = 0; n < 10000; ++n) {
    const auto d = transmit(b, link, n);
    if (d.delivered) {
      ++delivered;
      CHECK(d.latency_ms >= 5.0);
      CHECK(d.latency_ms <= 8.0);
    } else {
      CHECK(d.bytes.empty());
    }
  }
  CHECK(delivered / 10000.0 == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("link outcome depends only on seed and nonce") {
  const std::vector<std::uint8_t> b(4, 2);
  LinkModel link;
  link.p_loss = 0.5;
  link.jitter_ms = 10;
  std::vector<double> fwd, rev(200);
  for (std::uint64_t n = 0; n < 200; ++n) fwd.push_back(transmit(b, link, n).latency_ms);
  for (std::uint64_t n = 200; n-- > 0;) rev[n] = transmit(b, link, n).latency_ms;
  CHECK(fwd == rev);
  link.p_loss = 1.0;
  CHECK_THROWS_AS(transmit(b, link, 0), std::invalid_argument);
  link.p_loss = -0.1;
  CHECK_THROWS_AS(transmit(b, link, 0), std::invalid_argument);
}

TEST_CASE("consensus worked example") {
  const std::vector<double> e{0.3, 0.4, 0.5};
  const auto f = consensus(e, 1);
  REQUIRE(f);
  CHECK(f->upper == doctest::Approx(0.4444).epsilon(1e-4));
  CHECK(f->lower == doctest::Approx(0.3556).epsilon(1e-4));
  CHECK(f->midpoint == doctest::Approx(0.4));
  CHECK(f->batch == 3);
  CHECK(median(std::vector<double>{0.1, 0.4, 0.2, 0.3}) == doctest::Approx(0.25));
  CHECK_THROWS(median(std::vector<double>{}));
}

TEST_CASE("consensus needs a full batch") {
  const std::vector<double> e(49, 0.3);
  CHECK_FALSE(consensus(e).has_value());
  const std::vector<double> f(50, 0.3);
  CHECK(consensus(f).has_value());
  CHECK_FALSE(consensus(std::vector<double>{}, 0).has_value());
}

TEST_CASE("interval identities hold exactly") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 1.2);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> e(1 + rng() % 120);
    for (auto& x : e) x = u(rng);
    const auto f = consensus(e, 1);
    REQUIRE(f);
    CHECK(f->lower == 0.8 * f->upper);
    CHECK(f->midpoint == 0.5 * (f->lower + f->upper));
    CHECK(f->upper == median(e) / 0.9);
  }
  const double c = 0.37;
  const auto g = consensus(std::vector<double>(60, c));
  CHECK(g->upper == c / 0.9);
  CHECK(g->lower == 0.8 * (c / 0.9));
}

TEST_CASE("median shrugs off a corrupted fifth of the window") {
  // Estimates spread like mu * wear around a single section friction.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> wear(0.8, 1.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  // With one corrupted value the median may step across a wide central gap,
  // so the comparison with the mean is held on average and in 99% of trials.
  int worse = 0;
  double sum_dm = 0, sum_dmean = 0;
  for (int t = 0; t < 500; ++t) {
    std::vector<double> e(50);
    for (auto& x : e) x = 0.5 * wear(rng) + noise(rng);
    auto bad = e;
    const size_t k = 1 + rng() % 10;
    const double delta = rng() % 2 ? 0.3 : -0.3;
    for (size_t i = 0; i < k; ++i) bad[i] += delta;
    const double dm = std::abs(median(bad) - median(e));
    const double dmean = std::abs(mean(bad) - mean(e));
    CHECK(dm < 0.3);
    if (!(dm < dmean)) ++worse;
    sum_dm += dm;
    sum_dmean += dmean;
  }
  CHECK(worse <= 5);
  CHECK(sum_dm < 0.5 * sum_dmean);
}

TEST_CASE("midpoint error shrinks with batch size") {
  // Individual estimates are mu * wear with wear ~ U[0.8, 1] plus regressor noise.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> wear(0.8, 1.0);
  std::normal_distribution<double> noise(0.0, 0.03);
  const double mu = 0.5;
  std::vector<double> prev_err;
  double prev = 1e9;
  for (size_t batch : {1u, 10u, 50u, 100u}) {
    std::vector<double> errs;
    for (int t = 0; t < 400; ++t) {
      std::vector<double> e(batch);
      for (auto& x : e) x = mu * wear(rng) + noise(rng);
      errs.push_back(std::abs(consensus(e, 1)->upper - mu) / mu);
    }
    const double m = median(errs);
    CHECK(m <= prev);
    prev = m;
  }
}

TEST_CASE("rsu ingest, duplicates and foreign sections") {
  const auto sec = road::build_scenario(road::Scenario::long_turn);
  RsuNode node(4, sec, constant_model(0.42));
  const auto ks = plausible_summary(10);
  auto r = node.ingest(make_report(4, 1, ks), 0.0);
  CHECK(r.status == IngestStatus::accepted);
  CHECK(r.estimate == doctest::Approx(0.42));
  CHECK(node.ingest(encode(make_report(4, 1, ks)), 1.0).status == IngestStatus::duplicate);
  CHECK(node.ingest(make_report(5, 2, ks), 1.0).status == IngestStatus::unknown_section);
  std::vector<std::uint8_t> junk(40, 0xab);
  CHECK(node.ingest(junk, 1.0).status == IngestStatus::decode_error);
  CHECK(node.snapshot().size() == 1);
  const auto j = nlohmann::json::parse(node.state_json(2.0));
  CHECK(j["rejected"] == 3);
  CHECK(j["interval"].is_null());
  CHECK(to_string(IngestStatus::duplicate) == "duplicate");
}

TEST_CASE("rsu rejects reports its model cannot be fed") {
  const auto sec = road::build_scenario(road::Scenario::long_turn);
  auto m = constant_model(0.5);
  m->feature_names.push_back("tyre_temperature_mean");
  RsuNode node(1, sec, m);
  const auto r = node.ingest(make_report(1, 1, plausible_summary(11)), 0.0);
  CHECK(r.status == IngestStatus::unsatisfiable);
  CHECK_FALSE(r.diagnostic.empty());
  CHECK(node.snapshot().empty());
}

TEST_CASE("rsu window evicts stale estimates") {
  const auto sec = road::build_scenario(road::Scenario::s_turn);
  RsuOptions opt;
  opt.window_s = 100;
  opt.min_batch = 3;
  RsuNode node(1, sec, constant_model(0.3), opt);
  const auto ks = plausible_summary(12);
  for (std::uint64_t i = 0; i < 10; ++i) node.ingest(make_report(1, i, ks), 30.0 * static_cast<double>(i));
  for (double now : {270.0, 300.0, 500.0}) {
    node.evict(now);
    for (const auto& w : node.snapshot()) CHECK(w.timestamp >= now - 100);
  }
  CHECK(node.snapshot().empty());
  CHECK_FALSE(node.interval().has_value());
  // An evicted id may be reused.
  CHECK(node.ingest(make_report(1, 0, ks), 600).status == IngestStatus::accepted);
}

TEST_CASE("rsu window respects its capacity") {
  const auto sec = road::build_scenario(road::Scenario::s_turn);
  RsuOptions opt;
  opt.capacity = 5;
  opt.min_batch = 5;
  RsuNode node(1, sec, constant_model(0.3), opt);
  const auto ks = plausible_summary(13);
  for (std::uint64_t i = 0; i < 12; ++i) node.ingest(make_report(1, i, ks), static_cast<double>(i));
  const auto snap = node.snapshot();
  CHECK(snap.size() == 5);
  for (const auto& w : snap) CHECK(w.timestamp >= 7.0);
  REQUIRE(node.interval().has_value());
  CHECK(node.interval()->upper == doctest::Approx(0.3 / 0.9));
}

TEST_CASE("concurrent ingest keeps every distinct report") {
  const auto sec = road::build_scenario(road::Scenario::long_turn);
  RsuNode node(2, sec, constant_model(0.6));
  const auto ks = plausible_summary(14);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      for (std::uint64_t i = 0; i < 100; ++i) {
        // every id is sent twice across threads
        node.ingest(encode(make_report(2, i * 2 + static_cast<std::uint64_t>(t % 2), ks)), 1.0);
      }
    });
  }
  for (auto& th : pool) th.join();
  CHECK(node.snapshot().size() == 200);
  const auto j = nlohmann::json::parse(node.state_json(1.0));
  CHECK(j["rejected"] == 200);
  CHECK(j["interval"]["batch"] == 200);
}

TEST_CASE("rsu node constructor checks") {
  const auto sec = road::build_scenario(road::Scenario::long_turn);
  CHECK_THROWS(RsuNode(1, sec, nullptr));
  RsuOptions opt;
  opt.window_s = 0;
  CHECK_THROWS(RsuNode(1, sec, constant_model(0.5), opt));
}
