#include <algorithm>
#include <cstdio>

#include "json.hpp"
#include "rfe/rsu.h"

namespace rfe::rsu {

double median(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const size_t n = s.size();
  return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

std::optional<FrictionInterval> consensus(std::span<const double> estimates, size_t min_batch) {
  if (estimates.empty() || estimates.size() < min_batch) return std::nullopt;
  FrictionInterval f;
  f.upper = median(estimates) / 0.9;
  f.lower = 0.8 * f.upper;
  f.midpoint = 0.5 * (f.lower + f.upper);
  f.batch = estimates.size();
  return f;
}

std::string_view to_string(IngestStatus s) {
  switch (s) {
    case IngestStatus::accepted: return "accepted";
    case IngestStatus::decode_error: return "decode_error";
    case IngestStatus::unknown_section: return "unknown_section";
    case IngestStatus::duplicate: return "duplicate";
    case IngestStatus::unsatisfiable: return "unsatisfiable";
  }
  return "unknown";
}

RsuNode::RsuNode(std::uint32_t section_id, const road::RoadSection& section,
                 std::shared_ptr<const learn::TrainedRegressor> model, RsuOptions opt)
    : section_id_(section_id), road_(summary::road_block(section)), model_(std::move(model)),
      opt_(opt) {
  if (!model_) throw std::invalid_argument("RsuNode: no regressor");
  if (!(opt_.window_s > 0) || opt_.capacity == 0) {
    throw std::invalid_argument("RsuNode: window and capacity must be positive");
  }
}

IngestResult RsuNode::ingest(std::span<const std::uint8_t> bytes, double timestamp) {
  try {
    return ingest(decode_report(bytes), timestamp);
  } catch (const WireError& e) {
    std::lock_guard lock(mutex_);
    ++rejected_;
    return {IngestStatus::decode_error, 0, e.what()};
  }
}

IngestResult RsuNode::ingest(const VehicleReportMsg& msg, double timestamp) {
  IngestResult res;
  if (msg.section_id != section_id_) {
    res = {IngestStatus::unknown_section, 0, "report for section " + std::to_string(msg.section_id)};
  } else {
    // Prediction runs outside the lock; the model is immutable.
    try {
      const auto ks = msg.kinematic_summary();
      const auto values = summary::full_values(ks, &road_);
      summary::FeatureVector fv;
      fv.names = summary::all_feature_names();
      fv.values = values;
      fv.include_road = true;
      res.estimate = model_->predict(fv);
    } catch (const std::exception& e) {
      res = {IngestStatus::unsatisfiable, 0, e.what()};
    }
  }

  std::lock_guard lock(mutex_);
  if (res.status == IngestStatus::accepted) {
    evict_locked(timestamp);
    const bool dup = std::any_of(window_.begin(), window_.end(), [&](const WindowEntry& w) {
      return w.report_id == msg.report_id;
    });
    if (dup) {
      res = {IngestStatus::duplicate, 0, "report id already in window"};
    } else {
      if (window_.size() >= opt_.capacity) {
        window_.erase(std::min_element(window_.begin(), window_.end(),
                                       [](const WindowEntry& a, const WindowEntry& b) {
                                         return a.timestamp < b.timestamp;
                                       }));
      }
      window_.push_back({timestamp, msg.report_id, res.estimate});
    }
  }
  if (res.status != IngestStatus::accepted) ++rejected_;
  return res;
}

void RsuNode::evict_locked(double now) {
  const double cutoff = now - opt_.window_s;
  std::erase_if(window_, [&](const WindowEntry& w) { return w.timestamp < cutoff; });
}

void RsuNode::evict(double now) {
  std::lock_guard lock(mutex_);
  evict_locked(now);
}

std::vector<WindowEntry> RsuNode::snapshot() const {
  std::lock_guard lock(mutex_);
  return window_;
}

std::optional<FrictionInterval> RsuNode::interval() const {
  const auto snap = snapshot();
  std::vector<double> est;
  est.reserve(snap.size());
  for (const auto& w : snap) est.push_back(w.estimate);
  return consensus(est, opt_.min_batch);
}

std::string RsuNode::state_json(double now) const {
  std::vector<WindowEntry> snap;
  size_t rejected = 0;
  {
    std::lock_guard lock(mutex_);
    snap = window_;
    rejected = rejected_;
  }
  nlohmann::json j;
  j["section_id"] = section_id_;
  j["now"] = now;
  j["window_s"] = opt_.window_s;
  j["min_batch"] = opt_.min_batch;
  j["rejected"] = rejected;
  auto entries = nlohmann::json::array();
  std::vector<double> est;
  for (const auto& w : snap) {
    char id[17];
    std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(w.report_id));
    entries.push_back({{"t", w.timestamp}, {"report_id", id}, {"estimate", w.estimate}});
    est.push_back(w.estimate);
  }
  j["entries"] = std::move(entries);
  if (const auto f = consensus(est, opt_.min_batch)) {
    j["interval"] = {{"lower", f->lower}, {"upper", f->upper}, {"midpoint", f->midpoint},
                     {"batch", f->batch}};
  } else {
    j["interval"] = nullptr;
  }
  return j.dump(1);
}

}  // namespace rfe::rsu
