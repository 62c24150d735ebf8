#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfe/summary.h"

namespace rfe::learn {

/// Row-major feature matrix with labels and provenance.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<double> x;  // rows * cols
  std::vector<double> y;
  std::vector<std::string> run_ids;
  std::vector<std::string> scenarios;
  std::vector<double> mu_base;  // stratification key; may be empty

  size_t rows() const { return y.size(); }
  size_t cols() const { return feature_names.size(); }
  double at(size_t r, size_t c) const { return x[r * cols() + c]; }
  std::span<const double> row(size_t r) const { return {x.data() + r * cols(), cols()}; }
  size_t column(std::string_view name) const;  // throws if absent

  void validate() const;
  Dataset select_rows(std::span<const size_t> rows) const;
  Dataset select_features(const std::vector<std::string>& names) const;
};

/// Corpus rows joined with optional per-run mu_base values.
Dataset from_corpus(const summary::Corpus& corpus,
                    const std::map<std::string, double>& mu_base_by_run = {});

struct GbtParams {
  int n_estimators = 100;
  int max_depth = 6;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  double clamp_lo = 0.05;
  double clamp_hi = 1.2;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;     // x <= threshold
  int right = -1;
  double value = 0;  // leaf output (mean residual)
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double eval(std::span<const double> row) const;
};

struct TrainedRegressor {
  std::vector<std::string> feature_names;
  double base = 0;
  double learning_rate = 0.1;
  double clamp_lo = 0.05;
  double clamp_hi = 1.2;
  std::vector<Tree> trees;
  // Provenance, for leakage checks.
  std::string corpus_fingerprint;
  std::vector<std::string> training_runs;

  /// Unclamped ensemble output on a row aligned with feature_names,
  /// optionally using only the first `stages` trees.
  double raw(std::span<const double> row, size_t stages = SIZE_MAX) const;
  /// Clamped prediction; row aligned with feature_names.
  double predict_row(std::span<const double> row) const;
  /// Looks features up by name; throws if any is missing.
  double predict(const summary::FeatureVector& fv) const;
  /// Looks columns up by name in the dataset.
  std::vector<double> predict(const Dataset& d) const;
};

/// Mean absolute percentage error in percent.
double mape(std::span<const double> y, std::span<const double> yhat);

/// Presorted training engine. Sorting is done once per dataset; fits on row
/// and feature subsets reuse it, which is what makes CV and SFS affordable.
class GbtTrainer {
 public:
  explicit GbtTrainer(const Dataset& d);

  const Dataset& data() const { return data_; }
  TrainedRegressor fit(std::span<const size_t> rows, std::span<const size_t> features,
                       const GbtParams& p) const;
  TrainedRegressor fit_all(const GbtParams& p) const;

 private:
  const Dataset& data_;
  std::vector<std::vector<size_t>> order_;  // per feature, rows by ascending value
};

TrainedRegressor train_gbt(const Dataset& train, const GbtParams& p);

/// Contiguous fold partition of the (already shuffled) rows.
std::vector<std::pair<size_t, size_t>> fold_bounds(size_t n, int k);

struct CvOptions {
  int k = 8;
  unsigned threads = 1;
};

std::vector<double> kfold_cv(const Dataset& d, const GbtParams& p, const CvOptions& opt = {});
std::vector<double> kfold_cv(const GbtTrainer& trainer, std::span<const size_t> features,
                             const GbtParams& p, const CvOptions& opt = {});

struct SfsResult {
  std::vector<std::string> names;
  std::vector<double> scores;  // mean CV MAPE after each addition
};

using SfsProgress = std::function<void(size_t step, const std::string& name, double score)>;

SfsResult sequential_feature_selection(const Dataset& d, size_t target_count, const GbtParams& p,
                                       const CvOptions& opt = {},
                                       const SfsProgress& progress = {});

/// Fisher-Yates permutation of 0..n-1 under a 64-bit Mersenne Twister.
std::vector<size_t> shuffled_indices(size_t n, std::uint64_t seed);

struct Split {
  std::vector<size_t> train;
  std::vector<size_t> test;
};

/// Stratified by (scenario, mu_base): each stratum contributes
/// round(test_fraction * size) rows to the test side.
Split stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed);

std::string model_to_json(const TrainedRegressor& r);
TrainedRegressor model_from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const TrainedRegressor& r);
TrainedRegressor load_model(const std::filesystem::path& path);

}  // namespace rfe::learn
