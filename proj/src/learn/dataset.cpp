#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rfe/learn.h"

namespace rfe::learn {

size_t Dataset::column(std::string_view name) const {
  for (size_t i = 0; i < feature_names.size(); ++i) {
    if (feature_names[i] == name) return i;
  }
  throw std::invalid_argument("dataset has no feature " + std::string(name));
}

void Dataset::validate() const {
  if (x.size() != rows() * cols()) throw std::invalid_argument("dataset: matrix size mismatch");
  if (!run_ids.empty() && run_ids.size() != rows()) {
    throw std::invalid_argument("dataset: run id count mismatch");
  }
  if (!scenarios.empty() && scenarios.size() != rows()) {
    throw std::invalid_argument("dataset: scenario count mismatch");
  }
  if (!mu_base.empty() && mu_base.size() != rows()) {
    throw std::invalid_argument("dataset: mu_base count mismatch");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: missing or non-finite feature");
  }
  for (double v : y) {
    if (!(v > 0) || !std::isfinite(v)) throw std::invalid_argument("dataset: labels must be > 0");
  }
}

Dataset Dataset::select_rows(std::span<const size_t> idx) const {
  Dataset d;
  d.feature_names = feature_names;
  d.x.reserve(idx.size() * cols());
  for (size_t r : idx) {
    if (r >= rows()) throw std::out_of_range("dataset: row index");
    const auto src = row(r);
    d.x.insert(d.x.end(), src.begin(), src.end());
    d.y.push_back(y[r]);
    if (!run_ids.empty()) d.run_ids.push_back(run_ids[r]);
    if (!scenarios.empty()) d.scenarios.push_back(scenarios[r]);
    if (!mu_base.empty()) d.mu_base.push_back(mu_base[r]);
  }
  return d;
}

Dataset Dataset::select_features(const std::vector<std::string>& names) const {
  std::vector<size_t> cols_idx;
  for (const auto& n : names) cols_idx.push_back(column(n));
  Dataset d;
  d.feature_names = names;
  d.y = y;
  d.run_ids = run_ids;
  d.scenarios = scenarios;
  d.mu_base = mu_base;
  d.x.reserve(rows() * names.size());
  for (size_t r = 0; r < rows(); ++r) {
    for (size_t c : cols_idx) d.x.push_back(at(r, c));
  }
  return d;
}

Dataset from_corpus(const summary::Corpus& corpus,
                    const std::map<std::string, double>& mu_base_by_run) {
  Dataset d;
  d.feature_names = corpus.feature_names;
  d.x.reserve(corpus.rows.size() * corpus.feature_names.size());
  for (const auto& r : corpus.rows) {
    d.x.insert(d.x.end(), r.values.begin(), r.values.end());
    d.y.push_back(r.label);
    d.run_ids.push_back(r.run_id);
    d.scenarios.push_back(r.scenario);
    if (!mu_base_by_run.empty()) {
      auto it = mu_base_by_run.find(r.run_id);
      if (it == mu_base_by_run.end()) {
        throw std::invalid_argument("no mu_base recorded for run " + r.run_id);
      }
      d.mu_base.push_back(it->second);
    }
  }
  d.validate();
  return d;
}

std::vector<size_t> shuffled_indices(size_t n, std::uint64_t seed) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  // Explicit Fisher-Yates: std::shuffle's draw pattern is implementation-defined.
  for (size_t i = n; i > 1; --i) {
    const size_t j = static_cast<size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

Split stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0 && test_fraction < 1)) {
    throw std::invalid_argument("stratified_split: fraction must lie in (0, 1)");
  }
  std::map<std::pair<std::string, long long>, std::vector<size_t>> strata;
  for (size_t r = 0; r < d.rows(); ++r) {
    const std::string sc = d.scenarios.empty() ? std::string() : d.scenarios[r];
    const long long mu = d.mu_base.empty() ? 0 : std::llround(d.mu_base[r] * 1000.0);
    strata[{sc, mu}].push_back(r);
  }
  Split s;
  std::uint64_t k = 0;
  for (auto& [key, rows] : strata) {
    const auto perm = shuffled_indices(rows.size(), seed + 0x9E3779B97F4A7C15ULL * ++k);
    const auto n_test = static_cast<size_t>(std::llround(test_fraction * rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      (i < n_test ? s.test : s.train).push_back(rows[perm[i]]);
    }
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

double mape(std::span<const double> y, std::span<const double> yhat) {
  if (y.empty() || y.size() != yhat.size()) {
    throw std::invalid_argument("mape: inputs must be non-empty and equally long");
  }
  double acc = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0) throw std::invalid_argument("mape: zero label");
    acc += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
  }
  return 100.0 * acc / static_cast<double>(y.size());
}

}  // namespace rfe::learn
