#include <stdexcept>

#include "json.hpp"
#include "rfe/learn.h"
#include "rfe/util/csv.h"

namespace rfe::learn {

using nlohmann::json;

namespace {
constexpr int kFormatVersion = 1;
}

std::string model_to_json(const TrainedRegressor& r) {
  json j;
  j["format"] = "rfe-gbt";
  j["version"] = kFormatVersion;
  j["feature_names"] = r.feature_names;
  j["base"] = r.base;
  j["learning_rate"] = r.learning_rate;
  j["clamp"] = {r.clamp_lo, r.clamp_hi};
  j["corpus_fingerprint"] = r.corpus_fingerprint;
  j["training_runs"] = r.training_runs;
  json trees = json::array();
  for (const auto& t : r.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      if (n.feature < 0) {
        nodes.push_back({{"leaf", n.value}});
      } else {
        nodes.push_back({{"feature", r.feature_names.at(static_cast<size_t>(n.feature))},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j.dump(1);
}

TrainedRegressor model_from_json(std::string_view text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "rfe-gbt" || j.value("version", 0) != kFormatVersion) {
    throw std::invalid_argument("model file: unknown format or version");
  }
  TrainedRegressor r;
  r.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  r.base = j.at("base").get<double>();
  r.learning_rate = j.at("learning_rate").get<double>();
  r.clamp_lo = j.at("clamp").at(0).get<double>();
  r.clamp_hi = j.at("clamp").at(1).get<double>();
  r.corpus_fingerprint = j.value("corpus_fingerprint", "");
  r.training_runs = j.value("training_runs", std::vector<std::string>{});

  std::map<std::string, int> index;
  for (size_t i = 0; i < r.feature_names.size(); ++i) {
    index[r.feature_names[i]] = static_cast<int>(i);
  }
  for (const auto& jt : j.at("trees")) {
    Tree t;
    for (const auto& jn : jt) {
      TreeNode n;
      if (jn.contains("leaf")) {
        n.value = jn.at("leaf").get<double>();
      } else {
        const auto name = jn.at("feature").get<std::string>();
        auto it = index.find(name);
        if (it == index.end()) throw std::invalid_argument("model file: unknown feature " + name);
        n.feature = it->second;
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
      }
      t.nodes.push_back(n);
    }
    const auto size = static_cast<int>(t.nodes.size());
    for (const auto& n : t.nodes) {
      if (n.feature >= 0 && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
        throw std::invalid_argument("model file: child index out of range");
      }
    }
    if (t.nodes.empty()) throw std::invalid_argument("model file: empty tree");
    r.trees.push_back(std::move(t));
  }
  return r;
}

void save_model(const std::filesystem::path& path, const TrainedRegressor& r) {
  util::write_file(path, model_to_json(r));
}

TrainedRegressor load_model(const std::filesystem::path& path) {
  return model_from_json(util::read_file(path));
}

}  // namespace rfe::learn
