#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rfe/summary.h"
#include "rfe/util/csv.h"

namespace rfe::summary {
namespace {

constexpr std::array<Ablation, 7> kAblations{Ablation::full,      Ablation::no_sideslip,
                                             Ablation::no_speed,  Ablation::mean_std,
                                             Ablation::quantiles, Ablation::skew_kurt,
                                             Ablation::subset};

bool keeps_stat(Ablation a, std::string_view stat) {
  switch (a) {
    case Ablation::mean_std:
      return stat == "mean" || stat == "std";
    case Ablation::quantiles:
      return stat == "min" || stat == "q20" || stat == "q40" || stat == "median" ||
             stat == "q60" || stat == "q80" || stat == "max";
    case Ablation::skew_kurt:
      return stat == "skew" || stat == "kurt";
    default:
      return true;
  }
}

bool keeps_signal(Ablation a, std::string_view signal) {
  if (a == Ablation::no_sideslip) return signal != "sideslip" && signal != "sideslip_rate";
  if (a == Ablation::no_speed) return signal != "speed";
  return true;
}

}  // namespace

const std::array<std::string_view, kSignalCount>& signal_names() {
  static const std::array<std::string_view, kSignalCount> n{"steer", "sideslip", "sideslip_rate",
                                                           "yaw_excess", "speed"};
  return n;
}

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::no_sideslip: return "no_sideslip";
    case Ablation::no_speed: return "no_speed";
    case Ablation::mean_std: return "mean_std";
    case Ablation::quantiles: return "quantiles";
    case Ablation::skew_kurt: return "skew_kurt";
    case Ablation::subset: return "subset";
  }
  return "unknown";
}

Ablation ablation_from_string(std::string_view s) {
  for (auto a : kAblations) {
    if (to_string(a) == s) return a;
  }
  throw std::invalid_argument("unknown ablation: " + std::string(s));
}

std::vector<double> KinematicSummary::flatten() const {
  std::vector<double> out;
  out.reserve(kKinematicFeatures);
  for (const auto& r : records) {
    const auto v = r.values();
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

KinematicSummary KinematicSummary::unflatten(std::span<const double> values) {
  if (values.size() != kKinematicFeatures) {
    throw std::invalid_argument("KinematicSummary: need 55 values");
  }
  KinematicSummary ks;
  for (size_t s = 0; s < kSignalCount; ++s) {
    ks.records[s] = StatRecord::from_values(values.subspan(s * kStatCount, kStatCount));
  }
  return ks;
}

KinematicSummary build_summary(const observer::VehicleStateTrace& trace) {
  if (trace.diverged) throw FlaggedTraceError("build_summary: observer diverged");
  if (trace.low_speed) throw FlaggedTraceError("build_summary: low-speed samples in trace");
  KinematicSummary ks;
  ks.records[0] = summarize_signal(trace.steer);
  ks.records[1] = summarize_signal(trace.sideslip);
  ks.records[2] = summarize_signal(trace.sideslip_rate);
  ks.records[3] = summarize_signal(trace.yaw_excess);
  ks.records[4] = summarize_signal(trace.v_enc);
  return ks;
}

RoadBlock road_block(const road::RoadSection& section) {
  std::vector<double> curv;
  curv.reserve(section.samples.size());
  for (const auto& s : section.samples) curv.push_back(s.curvature);
  RoadBlock b;
  b.length = section.length;
  b.curvature = summarize_signal(curv);
  b.rdi = summarize_signal(road::rdi_profile(section));
  return b;
}

const std::vector<std::string>& all_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (auto sig : signal_names()) {
      for (auto st : stat_names()) n.push_back(std::string(sig) + "_" + std::string(st));
    }
    n.emplace_back("road_length");
    for (auto st : stat_names()) n.push_back("road_curv_" + std::string(st));
    for (auto st : stat_names()) n.push_back("road_rdi_" + std::string(st));
    return n;
  }();
  return names;
}

std::vector<std::string> feature_names(const FeatureSpec& spec) {
  const auto& all = all_feature_names();
  if (spec.ablation == Ablation::subset) {
    if (spec.subset.empty()) throw std::invalid_argument("feature subset is empty");
    for (const auto& name : spec.subset) {
      if (std::find(all.begin(), all.end(), name) == all.end()) {
        throw std::invalid_argument("unknown feature name: " + name);
      }
      if (!spec.include_road && name.starts_with("road_")) {
        throw std::invalid_argument("road feature in a no-road subset: " + name);
      }
    }
    return spec.subset;
  }
  std::vector<std::string> out;
  for (auto sig : signal_names()) {
    if (!keeps_signal(spec.ablation, sig)) continue;
    for (auto st : stat_names()) {
      if (keeps_stat(spec.ablation, st)) out.push_back(std::string(sig) + "_" + std::string(st));
    }
  }
  if (spec.include_road) {
    out.emplace_back("road_length");
    for (const char* block : {"road_curv_", "road_rdi_"}) {
      for (auto st : stat_names()) {
        if (keeps_stat(spec.ablation, st)) out.push_back(block + std::string(st));
      }
    }
  }
  return out;
}

double FeatureVector::at(std::string_view name) const {
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw std::invalid_argument("feature not present: " + std::string(name));
}

std::vector<double> full_values(const KinematicSummary& ks, const RoadBlock* road) {
  auto v = ks.flatten();
  if (road) {
    v.push_back(road->length);
    for (double x : road->curvature.values()) v.push_back(x);
    for (double x : road->rdi.values()) v.push_back(x);
  } else {
    v.resize(kKinematicFeatures + kRoadFeatures, std::numeric_limits<double>::quiet_NaN());
  }
  return v;
}

FeatureVector assemble_features(const KinematicSummary& ks, const RoadBlock* road,
                                const FeatureSpec& spec) {
  if (spec.include_road && !road) {
    throw std::invalid_argument("assemble_features: road block requested but not supplied");
  }
  const auto& all = all_feature_names();
  const auto full = full_values(ks, road);
  FeatureVector fv;
  fv.include_road = spec.include_road;
  fv.names = feature_names(spec);
  fv.values.reserve(fv.names.size());
  for (const auto& name : fv.names) {
    const auto idx = static_cast<size_t>(std::find(all.begin(), all.end(), name) - all.begin());
    fv.values.push_back(full[idx]);
  }
  return fv;
}

void write_feature_vector(std::ostream& out, const FeatureVector& fv) {
  util::CsvTable t;
  t.header = fv.names;
  std::vector<std::string> row;
  for (double v : fv.values) row.push_back(util::format_double(v));
  t.rows.push_back(std::move(row));
  util::write_csv(out, t);
}

FeatureVector read_feature_vector(std::string_view text) {
  const auto t = util::parse_csv(text);
  if (t.rows.size() != 1) throw std::invalid_argument("feature vector: expected one data row");
  FeatureVector fv;
  fv.names = t.header;
  for (const auto& c : t.rows[0]) fv.values.push_back(util::parse_double(c));
  fv.include_road = std::any_of(fv.names.begin(), fv.names.end(),
                                [](const std::string& n) { return n.starts_with("road_"); });
  return fv;
}

}  // namespace rfe::summary
