#pragma once
// Independent reference implementations shared by the unit tests and the
// acceptance binary. Deliberately naive: sort, select, scan everything.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "rfe/learn.h"

namespace rfe::oracle {

// Type-7 quantile through selection rather than a full sort.
inline double select_quantile(std::vector<double> v, double p) {
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto k = static_cast<size_t>(std::floor(h));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  const double a = v[k];
  if (k + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(k) + 1, v.end());
  return a + (h - static_cast<double>(k)) * (b - a);
}

inline double sse(const std::vector<double>& v) {
  if (v.empty()) return 0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s;
}

struct OracleSplit {
  int feature = -1;
  double threshold = 0;
  double gain = 0;
};

// Every (feature, midpoint) pair, scored by direct SSE reduction. The first
// strictly best pair in (feature, threshold) order wins.
inline OracleSplit exhaustive_split(const learn::Dataset& d, const std::vector<size_t>& rows,
                             const std::vector<double>& resid, size_t min_leaf) {
  OracleSplit best;
  std::vector<double> all;
  for (size_t r : rows) all.push_back(resid[r]);
  const double parent = sse(all);
  for (size_t f = 0; f < d.cols(); ++f) {
    std::set<double> distinct;
    for (size_t r : rows) distinct.insert(d.at(r, f));
    const std::vector<double> vals(distinct.begin(), distinct.end());
    for (size_t k = 0; k + 1 < vals.size(); ++k) {
      double t = 0.5 * (vals[k] + vals[k + 1]);
      if (!(t < vals[k + 1])) t = vals[k];
      std::vector<double> l, rr;
      for (size_t r : rows) (d.at(r, f) <= t ? l : rr).push_back(resid[r]);
      if (l.size() < min_leaf || rr.size() < min_leaf) continue;
      const double gain = parent - sse(l) - sse(rr);
      if (gain > best.gain * (1 + 1e-12) + 1e-15) {
        best = {static_cast<int>(f), t, gain};
      }
    }
  }
  return best;
}

inline void collect_rows(const learn::Tree& t, int node, const learn::Dataset& d,
                         std::vector<size_t> rows,
                         std::vector<std::pair<int, std::vector<size_t>>>& out) {
  out.emplace_back(node, rows);
  const auto& n = t.nodes[static_cast<size_t>(node)];
  if (n.feature < 0) return;
  std::vector<size_t> l, r;
  for (size_t i : rows) (d.at(i, static_cast<size_t>(n.feature)) <= n.threshold ? l : r).push_back(i);
  collect_rows(t, n.left, d, l, out);
  collect_rows(t, n.right, d, r, out);
}

inline int depth_of(const learn::Tree& t, int target) {
  std::vector<int> depth(t.nodes.size(), 0);
  for (size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& n = t.nodes[i];
    if (n.feature >= 0) {
      depth[static_cast<size_t>(n.left)] = depth[i] + 1;
      depth[static_cast<size_t>(n.right)] = depth[i] + 1;
    }
  }
  return depth[static_cast<size_t>(target)];
}


}  // namespace rfe::oracle
