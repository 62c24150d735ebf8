#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rfe/observer.h"
#include "rfe/road.h"

namespace rfe::summary {

inline constexpr size_t kStatCount = 11;
inline constexpr size_t kSignalCount = 5;
inline constexpr size_t kKinematicFeatures = kStatCount * kSignalCount;  // 55
inline constexpr size_t kRoadFeatures = 1 + 2 * kStatCount;               // 23

/// Statistic names in record order.
const std::array<std::string_view, kStatCount>& stat_names();

struct StatRecord {
  double mean = 0;
  double std = 0;
  double q20 = 0;
  double q40 = 0;
  double q60 = 0;
  double q80 = 0;
  double min = 0;
  double median = 0;
  double max = 0;
  double skew = 0;
  double kurt = 0;  // excess

  std::array<double, kStatCount> values() const;
  static StatRecord from_values(std::span<const double> v);
};

/// Type-7 quantile of an ascending sample, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

/// Order-insensitive: the sample is sorted before any accumulation, so a
/// permutation of the input gives a bit-identical record.
StatRecord summarize_signal(std::span<const double> series);

enum class Signal { steer, sideslip, sideslip_rate, yaw_excess, speed };
const std::array<std::string_view, kSignalCount>& signal_names();

class FlaggedTraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KinematicSummary {
  std::array<StatRecord, kSignalCount> records;

  const StatRecord& operator[](Signal s) const { return records[static_cast<size_t>(s)]; }
  /// 55 values, signal-major in signal_names() order.
  std::vector<double> flatten() const;
  static KinematicSummary unflatten(std::span<const double> values);
};

/// Throws FlaggedTraceError for a diverged or low-speed trace.
KinematicSummary build_summary(const observer::VehicleStateTrace& trace);

struct RoadBlock {
  double length = 0;
  StatRecord curvature;
  StatRecord rdi;
};
RoadBlock road_block(const road::RoadSection& section);

enum class Ablation {
  full,         // every kinematic record
  no_sideslip,  // drops sideslip and sideslip_rate records
  no_speed,     // drops the speed record
  mean_std,     // mean and std of each record only
  quantiles,    // min, q20, q40, median, q60, q80, max
  skew_kurt,    // skew and kurt only
  subset,       // explicit names, in the given order
};
std::string_view to_string(Ablation a);
Ablation ablation_from_string(std::string_view s);

struct FeatureSpec {
  Ablation ablation = Ablation::full;
  bool include_road = true;
  std::vector<std::string> subset;  // used by Ablation::subset
};

/// Every feature name the layout knows: 55 kinematic then 23 road.
const std::vector<std::string>& all_feature_names();

/// Ordered feature names selected by `spec`; throws on unknown subset names.
std::vector<std::string> feature_names(const FeatureSpec& spec);

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
  bool include_road = false;

  double at(std::string_view name) const;
  size_t size() const { return values.size(); }
};

/// Full 78-value vector in all_feature_names() order. Without a road block
/// the road values are NaN.
std::vector<double> full_values(const KinematicSummary& ks, const RoadBlock* road);

FeatureVector assemble_features(const KinematicSummary& ks, const RoadBlock* road,
                                const FeatureSpec& spec);

/// Single-row CSV (header + values) round trip for a feature vector.
void write_feature_vector(std::ostream& out, const FeatureVector& fv);
FeatureVector read_feature_vector(std::string_view text);

/// Corpus file: run_id, scenario, label, then named feature columns.
struct CorpusRow {
  std::string run_id;
  std::string scenario;
  double label = 0;
  std::vector<double> values;
};

struct Corpus {
  std::vector<std::string> feature_names;
  std::vector<CorpusRow> rows;

  size_t feature_index(std::string_view name) const;
};

void write_corpus_csv(std::ostream& out, const Corpus& corpus);
void write_corpus_csv(const std::filesystem::path& path, const Corpus& corpus);
Corpus parse_corpus_csv(std::string_view text);
Corpus read_corpus_csv(const std::filesystem::path& path);

}  // namespace rfe::summary
