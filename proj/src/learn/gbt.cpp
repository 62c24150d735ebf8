#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rfe/learn.h"

namespace rfe::learn {
namespace {

struct NodeScan {
  size_t count = 0;
  double sum = 0;
  bool splittable = false;
  // running scan state for the current feature
  size_t left_count = 0;
  double left_sum = 0;
  double last = 0;
  bool seen = false;
  // best split so far
  int best_feature = -1;
  double best_threshold = 0;
  double best_gain = 0;
};

double midpoint(double lo, double hi) {
  const double m = 0.5 * (lo + hi);
  return m < hi ? m : lo;
}

}  // namespace

void GbtParams::validate() const {
  if (n_estimators < 1) throw std::invalid_argument("n_estimators must be >= 1");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (!(learning_rate > 0 && learning_rate <= 1)) {
    throw std::invalid_argument("learning_rate must lie in (0, 1]");
  }
  if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
  if (!(clamp_lo < clamp_hi)) throw std::invalid_argument("clamp bounds out of order");
}

double Tree::eval(std::span<const double> row) const {
  int i = 0;
  for (;;) {
    const auto& n = nodes[static_cast<size_t>(i)];
    if (n.feature < 0) return n.value;
    i = row[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
}

double TrainedRegressor::raw(std::span<const double> row, size_t stages) const {
  if (row.size() != feature_names.size()) throw std::invalid_argument("predict: row width");
  double f = base;
  const size_t m = std::min(stages, trees.size());
  for (size_t t = 0; t < m; ++t) f += learning_rate * trees[t].eval(row);
  return f;
}

double TrainedRegressor::predict_row(std::span<const double> row) const {
  return std::clamp(raw(row), clamp_lo, clamp_hi);
}

double TrainedRegressor::predict(const summary::FeatureVector& fv) const {
  std::vector<double> row;
  row.reserve(feature_names.size());
  for (const auto& n : feature_names) row.push_back(fv.at(n));
  for (double v : row) {
    if (!std::isfinite(v)) throw std::invalid_argument("predict: non-finite feature");
  }
  return predict_row(row);
}

std::vector<double> TrainedRegressor::predict(const Dataset& d) const {
  std::vector<size_t> cols;
  for (const auto& n : feature_names) cols.push_back(d.column(n));
  std::vector<double> out(d.rows());
  std::vector<double> row(cols.size());
  for (size_t r = 0; r < d.rows(); ++r) {
    for (size_t j = 0; j < cols.size(); ++j) row[j] = d.at(r, cols[j]);
    out[r] = predict_row(row);
  }
  return out;
}

GbtTrainer::GbtTrainer(const Dataset& d) : data_(d) {
  d.validate();
  order_.resize(d.cols());
  for (size_t c = 0; c < d.cols(); ++c) {
    auto& o = order_[c];
    o.resize(d.rows());
    std::iota(o.begin(), o.end(), size_t{0});
    std::stable_sort(o.begin(), o.end(),
                     [&](size_t a, size_t b) { return d.at(a, c) < d.at(b, c); });
  }
}

TrainedRegressor GbtTrainer::fit_all(const GbtParams& p) const {
  std::vector<size_t> rows(data_.rows()), feats(data_.cols());
  std::iota(rows.begin(), rows.end(), size_t{0});
  std::iota(feats.begin(), feats.end(), size_t{0});
  return fit(rows, feats, p);
}

TrainedRegressor GbtTrainer::fit(std::span<const size_t> rows, std::span<const size_t> features,
                                 const GbtParams& p) const {
  p.validate();
  const size_t n = rows.size();
  const size_t nf = features.size();
  if (n < 2) throw std::invalid_argument("train_gbt: need at least 2 rows");
  if (nf == 0) throw std::invalid_argument("train_gbt: no features");

  std::vector<long> local(data_.rows(), -1);
  for (size_t i = 0; i < n; ++i) {
    if (local[rows[i]] >= 0) throw std::invalid_argument("train_gbt: duplicate row index");
    local[rows[i]] = static_cast<long>(i);
  }

  // Per selected feature: local positions in ascending value order, and the values.
  std::vector<std::vector<unsigned>> pos(nf);
  std::vector<std::vector<double>> val(nf);
  for (size_t j = 0; j < nf; ++j) {
    const size_t c = features[j];
    if (c >= data_.cols()) throw std::out_of_range("train_gbt: feature index");
    pos[j].reserve(n);
    val[j].reserve(n);
    for (size_t r : order_[c]) {
      if (local[r] < 0) continue;
      pos[j].push_back(static_cast<unsigned>(local[r]));
      val[j].push_back(data_.at(r, c));
    }
  }

  TrainedRegressor reg;
  for (size_t c : features) reg.feature_names.push_back(data_.feature_names[c]);
  reg.learning_rate = p.learning_rate;
  reg.clamp_lo = p.clamp_lo;
  reg.clamp_hi = p.clamp_hi;
  for (size_t r : rows) {
    if (!data_.run_ids.empty()) reg.training_runs.push_back(data_.run_ids[r]);
  }

  std::vector<double> y(n);
  double ysum = 0;
  for (size_t i = 0; i < n; ++i) {
    y[i] = data_.y[rows[i]];
    ysum += y[i];
  }
  reg.base = ysum / static_cast<double>(n);

  std::vector<double> f(n, reg.base), resid(n);
  std::vector<int> node_of(n);
  const auto min_leaf = static_cast<size_t>(p.min_samples_leaf);

  for (int stage = 0; stage < p.n_estimators; ++stage) {
    for (size_t i = 0; i < n; ++i) resid[i] = y[i] - f[i];
    std::fill(node_of.begin(), node_of.end(), 0);

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<NodeScan> scan(1);
    for (size_t i = 0; i < n; ++i) {
      scan[0].count++;
      scan[0].sum += resid[i];
    }
    std::vector<int> frontier{0};

    for (int depth = 0; depth < p.max_depth && !frontier.empty(); ++depth) {
      bool any = false;
      for (int nd : frontier) {
        auto& s = scan[static_cast<size_t>(nd)];
        s.splittable = s.count >= 2 * min_leaf;
        s.best_feature = -1;
        s.best_gain = 0;
        any = any || s.splittable;
      }
      if (!any) break;

      for (size_t j = 0; j < nf; ++j) {
        for (int nd : frontier) {
          auto& s = scan[static_cast<size_t>(nd)];
          s.left_count = 0;
          s.left_sum = 0;
          s.seen = false;
        }
        const auto& pj = pos[j];
        const auto& vj = val[j];
        for (size_t k = 0; k < n; ++k) {
          const unsigned i = pj[k];
          auto& s = scan[static_cast<size_t>(node_of[i])];
          if (!s.splittable) continue;
          const double v = vj[k];
          if (s.seen && v != s.last) {
            const size_t rc = s.count - s.left_count;
            if (s.left_count >= min_leaf && rc >= min_leaf) {
              const double rs = s.sum - s.left_sum;
              const double lt = s.left_sum * s.left_sum / static_cast<double>(s.left_count);
              const double rt = rs * rs / static_cast<double>(rc);
              const double gain = lt + rt - s.sum * s.sum / static_cast<double>(s.count);
              // Equal partitions reached through different features differ only by
              // summation order; treat them as ties so the first candidate wins.
              if (gain > s.best_gain + 1e-12 * (lt + rt)) {
                s.best_gain = gain;
                s.best_feature = static_cast<int>(j);
                s.best_threshold = midpoint(s.last, v);
              }
            }
          }
          s.left_count++;
          s.left_sum += resid[i];
          s.last = v;
          s.seen = true;
        }
      }

      std::vector<int> next;
      std::vector<int> left_of(tree.nodes.size(), -1);
      for (int nd : frontier) {
        const auto& s = scan[static_cast<size_t>(nd)];
        if (!s.splittable || s.best_feature < 0) continue;
        const int l = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& node = tree.nodes[static_cast<size_t>(nd)];
        node.feature = s.best_feature;
        node.threshold = s.best_threshold;
        node.left = l;
        node.right = l + 1;
        left_of[static_cast<size_t>(nd)] = l;
        next.push_back(l);
        next.push_back(l + 1);
      }
      for (int nd : frontier) scan[static_cast<size_t>(nd)].splittable = false;
      if (next.empty()) break;
      scan.resize(tree.nodes.size());
      for (size_t i = 0; i < n; ++i) {
        const int nd = node_of[i];
        if (static_cast<size_t>(nd) >= left_of.size() || left_of[static_cast<size_t>(nd)] < 0) {
          continue;
        }
        const auto& node = tree.nodes[static_cast<size_t>(nd)];
        const double x = data_.at(rows[i], features[static_cast<size_t>(node.feature)]);
        const int child = x <= node.threshold ? node.left : node.right;
        node_of[i] = child;
        scan[static_cast<size_t>(child)].count++;
        scan[static_cast<size_t>(child)].sum += resid[i];
      }
      frontier = std::move(next);
    }

    for (size_t k = 0; k < tree.nodes.size(); ++k) {
      auto& node = tree.nodes[k];
      if (node.feature < 0 && scan[k].count > 0) {
        node.value = scan[k].sum / static_cast<double>(scan[k].count);
      }
    }
    for (size_t i = 0; i < n; ++i) {
      f[i] += p.learning_rate * tree.nodes[static_cast<size_t>(node_of[i])].value;
    }
    reg.trees.push_back(std::move(tree));
  }
  return reg;
}

TrainedRegressor train_gbt(const Dataset& train, const GbtParams& p) {
  const GbtTrainer t(train);
  return t.fit_all(p);
}

}  // namespace rfe::learn
