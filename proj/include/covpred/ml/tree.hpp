#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "covpred/rng.hpp"

namespace covpred {

struct TreeNode {
  int feature = -1;  // -1: leaf
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;  // leaf prediction
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict(const std::vector<double>& row) const {
    int cur = 0;
    while (nodes[cur].feature >= 0)
      cur = row[nodes[cur].feature] <= nodes[cur].threshold ? nodes[cur].left : nodes[cur].right;
    return nodes[cur].value;
  }
};

enum class SplitCriterion { SquaredError, AbsoluteError };

struct TreeParams {
  int max_depth = 20;
  int min_samples_split = 2;
  SplitCriterion criterion = SplitCriterion::SquaredError;
  int max_features = -1;  // -1: all features at every split
};

namespace detail {

inline double median_of_sorted(const std::vector<double>& v) {
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline double sad_of_sorted(const std::vector<double>& v) {
  double med = median_of_sorted(v);
  double s = 0;
  for (double x : v) s += std::abs(x - med);
  return s;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
              const TreeParams& params, Rng rng)
      : x_(x), y_(y), params_(params), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> idx) {
    DecisionTree tree;
    grow(tree, std::move(idx), 0);
    return tree;
  }

 private:
  double leaf_value(const std::vector<std::size_t>& idx) const {
    if (params_.criterion == SplitCriterion::AbsoluteError) {
      std::vector<double> ys;
      ys.reserve(idx.size());
      for (auto i : idx) ys.push_back(y_[i]);
      std::sort(ys.begin(), ys.end());
      return median_of_sorted(ys);
    }
    double s = 0;
    for (auto i : idx) s += y_[i];
    return s / static_cast<double>(idx.size());
  }

  struct Split {
    int feature = -1;
    double threshold = 0;
    double score = std::numeric_limits<double>::infinity();
  };

  // Best split of one feature: scan boundaries between distinct sorted values.
  void scan_feature(const std::vector<std::size_t>& idx, int feature, Split& best) const {
    std::vector<std::size_t> order = idx;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      double va = x_[a][feature], vb = x_[b][feature];
      if (va != vb) return va < vb;
      return a < b;
    });
    const std::size_t n = order.size();

    if (params_.criterion == SplitCriterion::SquaredError) {
      double total_sum = 0, total_sq = 0;
      for (auto i : order) {
        total_sum += y_[i];
        total_sq += y_[i] * y_[i];
      }
      double left_sum = 0, left_sq = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        double yv = y_[order[k]];
        left_sum += yv;
        left_sq += yv * yv;
        double xv = x_[order[k]][feature];
        double xn = x_[order[k + 1]][feature];
        if (xv == xn) continue;
        double nl = static_cast<double>(k + 1), nr = static_cast<double>(n - k - 1);
        double right_sum = total_sum - left_sum, right_sq = total_sq - left_sq;
        double sse = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
        if (sse < best.score) {
          best.score = sse;
          best.feature = feature;
          best.threshold = (xv + xn) / 2.0;
        }
      }
    } else {
      // absolute error: incremental sorted partitions; quadratic in the node
      // size, which is fine at the scales this criterion is used for
      std::vector<double> left;
      std::vector<double> right;
      right.reserve(n);
      for (auto i : order) right.push_back(y_[i]);
      std::sort(right.begin(), right.end());
      left.reserve(n);
      for (std::size_t k = 0; k + 1 < n; ++k) {
        double yv = y_[order[k]];
        left.insert(std::upper_bound(left.begin(), left.end(), yv), yv);
        right.erase(std::lower_bound(right.begin(), right.end(), yv));
        double xv = x_[order[k]][feature];
        double xn = x_[order[k + 1]][feature];
        if (xv == xn) continue;
        double sad = sad_of_sorted(left) + sad_of_sorted(right);
        if (sad < best.score) {
          best.score = sad;
          best.feature = feature;
          best.threshold = (xv + xn) / 2.0;
        }
      }
    }
  }

  int grow(DecisionTree& tree, std::vector<std::size_t> idx, int depth) {
    int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});

    bool pure = true;
    for (std::size_t i = 1; i < idx.size(); ++i)
      if (y_[idx[i]] != y_[idx[0]]) {
        pure = false;
        break;
      }
    if (pure || depth >= params_.max_depth ||
        idx.size() < static_cast<std::size_t>(params_.min_samples_split)) {
      tree.nodes[node_id].value = leaf_value(idx);
      return node_id;
    }

    const int d = static_cast<int>(x_[0].size());
    std::vector<int> features(d);
    for (int i = 0; i < d; ++i) features[i] = i;
    int take = params_.max_features > 0 ? std::min(params_.max_features, d) : d;
    if (take < d) {
      // deterministic per-split feature subsample
      for (int i = 0; i < take; ++i) {
        int j = i + static_cast<int>(rng_.next_below(d - i));
        std::swap(features[i], features[j]);
      }
      features.resize(take);
      std::sort(features.begin(), features.end());
    }

    Split best;
    for (int f : features) scan_feature(idx, f, best);
    if (best.feature < 0) {
      tree.nodes[node_id].value = leaf_value(idx);
      return node_id;
    }

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : idx)
      (x_[i][best.feature] <= best.threshold ? left_idx : right_idx).push_back(i);
    if (left_idx.empty() || right_idx.empty()) {
      tree.nodes[node_id].value = leaf_value(idx);
      return node_id;
    }

    tree.nodes[node_id].feature = best.feature;
    tree.nodes[node_id].threshold = best.threshold;
    int l = grow(tree, std::move(left_idx), depth + 1);
    int r = grow(tree, std::move(right_idx), depth + 1);
    tree.nodes[node_id].left = l;
    tree.nodes[node_id].right = r;
    return node_id;
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<double>& y_;
  TreeParams params_;
  Rng rng_;
};

}  // namespace detail

inline DecisionTree fit_tree(const std::vector<std::vector<double>>& x,
                             const std::vector<double>& y, const TreeParams& params, Rng rng,
                             std::vector<std::size_t> idx = {}) {
  if (idx.empty()) {
    idx.resize(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  }
  return detail::TreeBuilder(x, y, params, rng).build(std::move(idx));
}

}  // namespace covpred
