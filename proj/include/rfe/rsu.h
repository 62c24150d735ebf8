#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfe/learn.h"
#include "rfe/road.h"
#include "rfe/summary.h"

namespace rfe::rsu {

inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::uint8_t kTypeAdvisory = 1;
inline constexpr std::uint8_t kTypeReport = 2;
inline constexpr size_t kHeaderBytes = 16;
inline constexpr size_t kPacketBytes = 1200;
inline constexpr size_t kMaxMapSamples = 64;
inline constexpr size_t kReportBytes = kHeaderBytes + 4 * (5 + summary::kKinematicFeatures);

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MapSample {
  float s = 0;
  float curvature = 0;
  float bank = 0;  // actual bank angle [rad]
};

struct RsuAdvisoryMsg {
  std::uint32_t section_id = 0;
  float speed_advisory_kmh = 0;
  float rated_speed_kmh = 0;
  float length = 0;
  std::vector<MapSample> map;  // at most kMaxMapSamples

  bool operator==(const RsuAdvisoryMsg& o) const;  // bitwise on floats
};

struct VehicleReportMsg {
  std::uint32_t section_id = 0;
  std::uint64_t report_id = 0;
  std::array<float, 5> speed_quantiles{};  // q20, q40, median, q60, q80
  std::array<float, summary::kKinematicFeatures> summary{};

  bool operator==(const VehicleReportMsg& o) const;  // bitwise on floats
  summary::KinematicSummary kinematic_summary() const;
};

VehicleReportMsg make_report(std::uint32_t section_id, std::uint64_t report_id,
                             const summary::KinematicSummary& ks);
/// Evenly decimated map payload.
RsuAdvisoryMsg make_advisory(std::uint32_t section_id, const road::RoadSection& section,
                             double speed_advisory_kmh);

/// Rounds every value through a 32-bit float, as the uplink does.
summary::KinematicSummary quantize_f32(const summary::KinematicSummary& ks);

std::vector<std::uint8_t> encode(const VehicleReportMsg& m);
std::vector<std::uint8_t> encode(const RsuAdvisoryMsg& m);
VehicleReportMsg decode_report(std::span<const std::uint8_t> bytes);
RsuAdvisoryMsg decode_advisory(std::span<const std::uint8_t> bytes);

struct LinkModel {
  double p_loss = 0;
  double latency_ms = 5;
  double jitter_ms = 0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Delivery {
  bool delivered = false;
  double latency_ms = 0;
  std::vector<std::uint8_t> bytes;  // empty when dropped
};

/// Outcome depends only on (link.seed, nonce), never on call order.
Delivery transmit(std::span<const std::uint8_t> bytes, const LinkModel& link, std::uint64_t nonce);

struct FrictionInterval {
  double lower = 0;
  double upper = 0;
  double midpoint = 0;
  size_t batch = 0;
};

/// Mean of the two central values for even sizes.
double median(std::span<const double> v);
/// Empty when fewer than min_batch estimates are supplied.
std::optional<FrictionInterval> consensus(std::span<const double> estimates, size_t min_batch = 50);

struct RsuOptions {
  double window_s = 3600;
  size_t capacity = 100000;
  size_t min_batch = 50;
};

enum class IngestStatus { accepted, decode_error, unknown_section, duplicate, unsatisfiable };
std::string_view to_string(IngestStatus s);

struct IngestResult {
  IngestStatus status = IngestStatus::accepted;
  double estimate = 0;
  std::string diagnostic;
};

struct WindowEntry {
  double timestamp = 0;
  std::uint64_t report_id = 0;
  double estimate = 0;
};

class RsuNode {
 public:
  RsuNode(std::uint32_t section_id, const road::RoadSection& section,
          std::shared_ptr<const learn::TrainedRegressor> model, RsuOptions opt = {});

  std::uint32_t section_id() const { return section_id_; }
  IngestResult ingest(std::span<const std::uint8_t> bytes, double timestamp);
  IngestResult ingest(const VehicleReportMsg& msg, double timestamp);
  void evict(double now);
  std::vector<WindowEntry> snapshot() const;
  std::optional<FrictionInterval> interval() const;
  std::string state_json(double now) const;

 private:
  void evict_locked(double now);

  std::uint32_t section_id_;
  summary::RoadBlock road_;
  std::shared_ptr<const learn::TrainedRegressor> model_;
  RsuOptions opt_;
  mutable std::mutex mutex_;
  std::vector<WindowEntry> window_;
  size_t rejected_ = 0;
};

}  // namespace rfe::rsu
