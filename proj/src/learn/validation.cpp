#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rfe/learn.h"
#include "rfe/util/parallel.h"

namespace rfe::learn {
namespace {

double fold_mape(const GbtTrainer& trainer, std::span<const size_t> features, const GbtParams& p,
                 size_t lo, size_t hi) {
  const auto& d = trainer.data();
  std::vector<size_t> train;
  train.reserve(d.rows() - (hi - lo));
  for (size_t r = 0; r < d.rows(); ++r) {
    if (r < lo || r >= hi) train.push_back(r);
  }
  const auto reg = trainer.fit(train, features, p);
  std::vector<double> y, yhat;
  std::vector<double> row(features.size());
  for (size_t r = lo; r < hi; ++r) {
    for (size_t j = 0; j < features.size(); ++j) row[j] = d.at(r, features[j]);
    y.push_back(d.y[r]);
    yhat.push_back(reg.predict_row(row));
  }
  return mape(y, yhat);
}

}  // namespace

std::vector<std::pair<size_t, size_t>> fold_bounds(size_t n, int k) {
  if (k < 2) throw std::invalid_argument("kfold: k must be >= 2");
  if (static_cast<size_t>(k) > n) throw std::invalid_argument("kfold: k exceeds row count");
  std::vector<std::pair<size_t, size_t>> out;
  const auto kk = static_cast<size_t>(k);
  for (size_t f = 0; f < kk; ++f) out.emplace_back(f * n / kk, (f + 1) * n / kk);
  return out;
}

std::vector<double> kfold_cv(const GbtTrainer& trainer, std::span<const size_t> features,
                             const GbtParams& p, const CvOptions& opt) {
  const auto folds = fold_bounds(trainer.data().rows(), opt.k);
  std::vector<double> scores(folds.size());
  util::parallel_for(folds.size(), opt.threads, [&](size_t f) {
    scores[f] = fold_mape(trainer, features, p, folds[f].first, folds[f].second);
  });
  return scores;
}

std::vector<double> kfold_cv(const Dataset& d, const GbtParams& p, const CvOptions& opt) {
  const GbtTrainer trainer(d);
  std::vector<size_t> feats(d.cols());
  std::iota(feats.begin(), feats.end(), size_t{0});
  return kfold_cv(trainer, feats, p, opt);
}

SfsResult sequential_feature_selection(const Dataset& d, size_t target_count, const GbtParams& p,
                                       const CvOptions& opt, const SfsProgress& progress) {
  if (target_count > d.cols()) throw std::invalid_argument("sfs: target exceeds feature count");
  const GbtTrainer trainer(d);
  const auto folds = fold_bounds(d.rows(), opt.k);

  SfsResult res;
  std::vector<size_t> chosen;
  std::vector<size_t> remaining(d.cols());
  std::iota(remaining.begin(), remaining.end(), size_t{0});

  while (chosen.size() < target_count) {
    const size_t nc = remaining.size();
    std::vector<double> fold_scores(nc * folds.size());
    util::parallel_for(fold_scores.size(), opt.threads, [&](size_t job) {
      const size_t c = job / folds.size();
      const size_t f = job % folds.size();
      auto feats = chosen;
      feats.push_back(remaining[c]);
      fold_scores[job] = fold_mape(trainer, feats, p, folds[f].first, folds[f].second);
    });

    size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < nc; ++c) {
      double s = 0;
      for (size_t f = 0; f < folds.size(); ++f) s += fold_scores[c * folds.size() + f];
      s /= static_cast<double>(folds.size());
      const auto& name = d.feature_names[remaining[c]];
      if (s < best_score || (s == best_score && name < d.feature_names[remaining[best]])) {
        best = c;
        best_score = s;
      }
    }
    chosen.push_back(remaining[best]);
    res.names.push_back(d.feature_names[remaining[best]]);
    res.scores.push_back(best_score);
    remaining.erase(remaining.begin() + static_cast<long>(best));
    if (progress) progress(chosen.size(), res.names.back(), best_score);
  }
  return res;
}

}  // namespace rfe::learn
