#include <bit>
#include <cmath>
#include <cstring>

#include "rfe/rsu.h"

namespace rfe::rsu {
namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  std::uint64_t le(int n) {
    if (pos_ + static_cast<size_t>(n) > b_.size()) throw WireError("truncated message");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{b_[pos_++]} << (8 * i);
    return v;
  }
  std::span<const std::uint8_t> b_;
  size_t pos_ = 0;
};

bool same_bits(float a, float b) {
  return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b);
}

void check_header(Reader& r, std::uint8_t type) {
  const auto version = r.u8();
  if (version != kWireVersion) throw WireError("unsupported wire version");
  if (r.u8() != type) throw WireError("unexpected message type");
}

}  // namespace

bool RsuAdvisoryMsg::operator==(const RsuAdvisoryMsg& o) const {
  if (section_id != o.section_id || map.size() != o.map.size()) return false;
  if (!same_bits(speed_advisory_kmh, o.speed_advisory_kmh) ||
      !same_bits(rated_speed_kmh, o.rated_speed_kmh) || !same_bits(length, o.length)) {
    return false;
  }
  for (size_t i = 0; i < map.size(); ++i) {
    if (!same_bits(map[i].s, o.map[i].s) || !same_bits(map[i].curvature, o.map[i].curvature) ||
        !same_bits(map[i].bank, o.map[i].bank)) {
      return false;
    }
  }
  return true;
}

bool VehicleReportMsg::operator==(const VehicleReportMsg& o) const {
  if (section_id != o.section_id || report_id != o.report_id) return false;
  for (size_t i = 0; i < speed_quantiles.size(); ++i) {
    if (!same_bits(speed_quantiles[i], o.speed_quantiles[i])) return false;
  }
  for (size_t i = 0; i < summary.size(); ++i) {
    if (!same_bits(summary[i], o.summary[i])) return false;
  }
  return true;
}

summary::KinematicSummary VehicleReportMsg::kinematic_summary() const {
  std::vector<double> v(summary.begin(), summary.end());
  return summary::KinematicSummary::unflatten(v);
}

VehicleReportMsg make_report(std::uint32_t section_id, std::uint64_t report_id,
                             const summary::KinematicSummary& ks) {
  VehicleReportMsg m;
  m.section_id = section_id;
  m.report_id = report_id;
  const auto& sp = ks[summary::Signal::speed];
  m.speed_quantiles = {static_cast<float>(sp.q20), static_cast<float>(sp.q40),
                       static_cast<float>(sp.median), static_cast<float>(sp.q60),
                       static_cast<float>(sp.q80)};
  const auto flat = ks.flatten();
  for (size_t i = 0; i < flat.size(); ++i) m.summary[i] = static_cast<float>(flat[i]);
  return m;
}

summary::KinematicSummary quantize_f32(const summary::KinematicSummary& ks) {
  auto flat = ks.flatten();
  for (auto& v : flat) v = static_cast<double>(static_cast<float>(v));
  return summary::KinematicSummary::unflatten(flat);
}

RsuAdvisoryMsg make_advisory(std::uint32_t section_id, const road::RoadSection& section,
                             double speed_advisory_kmh) {
  RsuAdvisoryMsg m;
  m.section_id = section_id;
  m.speed_advisory_kmh = static_cast<float>(speed_advisory_kmh);
  m.rated_speed_kmh = static_cast<float>(section.rated_speed_kmh);
  m.length = static_cast<float>(section.length);
  const size_t n = section.samples.size();
  const size_t k = std::min(n, kMaxMapSamples);
  for (size_t i = 0; i < k; ++i) {
    const size_t idx = k == 1 ? 0 : static_cast<size_t>(std::llround(
                                         static_cast<double>(i) * static_cast<double>(n - 1) /
                                         static_cast<double>(k - 1)));
    const auto& s = section.samples[idx];
    m.map.push_back({static_cast<float>(s.s), static_cast<float>(s.curvature),
                     static_cast<float>(s.bank)});
  }
  return m;
}

std::vector<std::uint8_t> encode(const VehicleReportMsg& m) {
  Writer w;
  w.u8(kWireVersion);
  w.u8(kTypeReport);
  w.u16(static_cast<std::uint16_t>(m.summary.size()));
  w.u32(m.section_id);
  w.u64(m.report_id);
  for (float q : m.speed_quantiles) w.f32(q);
  for (float v : m.summary) w.f32(v);
  return w.take();
}

std::vector<std::uint8_t> encode(const RsuAdvisoryMsg& m) {
  if (m.map.size() > kMaxMapSamples) throw WireError("advisory map exceeds 64 samples");
  Writer w;
  w.u8(kWireVersion);
  w.u8(kTypeAdvisory);
  w.u16(static_cast<std::uint16_t>(m.map.size()));
  w.u32(m.section_id);
  w.u64(0);  // reserved
  w.f32(m.speed_advisory_kmh);
  w.f32(m.rated_speed_kmh);
  w.f32(m.length);
  for (const auto& s : m.map) {
    w.f32(s.s);
    w.f32(s.curvature);
    w.f32(s.bank);
  }
  return w.take();
}

VehicleReportMsg decode_report(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw WireError("truncated message");
  Reader r(bytes);
  check_header(r, kTypeReport);
  if (r.u16() != summary::kKinematicFeatures) throw WireError("unexpected summary count");
  if (bytes.size() != kReportBytes) {
    throw WireError(bytes.size() < kReportBytes ? "truncated message" : "oversized message");
  }
  VehicleReportMsg m;
  m.section_id = r.u32();
  m.report_id = r.u64();
  for (auto& q : m.speed_quantiles) q = r.f32();
  for (auto& v : m.summary) v = r.f32();
  return m;
}

RsuAdvisoryMsg decode_advisory(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw WireError("truncated message");
  Reader r(bytes);
  check_header(r, kTypeAdvisory);
  const size_t count = r.u16();
  if (count > kMaxMapSamples) throw WireError("advisory map exceeds 64 samples");
  const size_t expect = kHeaderBytes + 12 + 12 * count;
  if (bytes.size() != expect) {
    throw WireError(bytes.size() < expect ? "truncated message" : "oversized message");
  }
  RsuAdvisoryMsg m;
  m.section_id = r.u32();
  if (r.u64() != 0) throw WireError("reserved field not zero");
  m.speed_advisory_kmh = r.f32();
  m.rated_speed_kmh = r.f32();
  m.length = r.f32();
  m.map.resize(count);
  for (auto& s : m.map) {
    s.s = r.f32();
    s.curvature = r.f32();
    s.bank = r.f32();
  }
  return m;
}

}  // namespace rfe::rsu
