#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "covpred/common.hpp"

namespace covpred {

struct HgbrParams {
  std::string loss = "least_squares";  // or "least_absolute_deviation"
  int max_depth = 10;
  int min_samples_leaf = 20;
  int max_iter = 100;
  double learning_rate = 0.1;
  int max_bins = 255;
};

struct HgbNode {
  int feature = -1;   // -1: leaf
  int bin = 0;        // samples with bin index <= bin go left
  int left = -1;
  int right = -1;
  double value = 0;
};

struct HgbTree {
  std::vector<HgbNode> nodes;

  double predict_binned(const std::vector<int>& bins) const {
    int cur = 0;
    while (nodes[cur].feature >= 0)
      cur = bins[nodes[cur].feature] <= nodes[cur].bin ? nodes[cur].left : nodes[cur].right;
    return nodes[cur].value;
  }
};

struct HgbModel {
  double init_value = 0;
  double learning_rate = 0.1;
  std::vector<std::vector<double>> bin_edges;  // per feature, ascending
  std::vector<HgbTree> trees;

  std::vector<int> bin_row(const std::vector<double>& row) const {
    std::vector<int> bins(row.size());
    for (std::size_t f = 0; f < row.size(); ++f) {
      const auto& edges = bin_edges[f];
      bins[f] = static_cast<int>(std::upper_bound(edges.begin(), edges.end(), row[f]) -
                                 edges.begin());
    }
    return bins;
  }

  /// Prediction after the first `stages` trees (telescoping by construction).
  double predict_at_stage(const std::vector<double>& row, std::size_t stages) const {
    std::vector<int> bins = bin_row(row);
    double pred = init_value;
    stages = std::min(stages, trees.size());
    for (std::size_t k = 0; k < stages; ++k)
      pred += learning_rate * trees[k].predict_binned(bins);
    return pred;
  }

  double predict(const std::vector<double>& row) const {
    return predict_at_stage(row, trees.size());
  }
};

namespace detail {

/// Quantile bin edges: exact boundaries between distinct values when few,
/// otherwise up to max_bins-1 deduplicated quantile cuts.
inline std::vector<double> compute_bin_edges(std::vector<double> values, int max_bins) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> edges;
  if (values.size() <= 1) return edges;
  if (static_cast<int>(values.size()) <= max_bins) {
    edges.reserve(values.size() - 1);
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
      edges.push_back((values[i] + values[i + 1]) / 2.0);
    return edges;
  }
  for (int b = 1; b < max_bins; ++b) {
    double p = static_cast<double>(b) / max_bins;
    double pos = p * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    double q = values[lo] * (1 - frac) + values[std::min(lo + 1, values.size() - 1)] * frac;
    if (edges.empty() || q > edges.back()) edges.push_back(q);
  }
  return edges;
}

class HgbTreeBuilder {
 public:
  HgbTreeBuilder(const std::vector<std::vector<int>>& bins, const std::vector<int>& bin_counts,
                 const std::vector<double>& structure_y, const std::vector<double>& leaf_y,
                 bool median_leaves, int max_depth, int min_samples_leaf)
      : bins_(bins),
        bin_counts_(bin_counts),
        structure_y_(structure_y),
        leaf_y_(leaf_y),
        median_leaves_(median_leaves),
        max_depth_(max_depth),
        min_leaf_(min_samples_leaf) {}

  HgbTree build() {
    std::vector<std::size_t> idx(bins_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    HgbTree tree;
    grow(tree, std::move(idx), 0);
    return tree;
  }

 private:
  double leaf_value(const std::vector<std::size_t>& idx) const {
    if (median_leaves_) {
      std::vector<double> v;
      v.reserve(idx.size());
      for (auto i : idx) v.push_back(leaf_y_[i]);
      std::sort(v.begin(), v.end());
      return v.size() % 2 == 1 ? v[v.size() / 2]
                               : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2.0;
    }
    double s = 0;
    for (auto i : idx) s += leaf_y_[i];
    return s / static_cast<double>(idx.size());
  }

  int grow(HgbTree& tree, std::vector<std::size_t> idx, int depth) {
    int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(HgbNode{});
    const std::size_t n = idx.size();

    double total = 0;
    for (auto i : idx) total += structure_y_[i];

    bool can_split = depth < max_depth_ && n >= 2 * static_cast<std::size_t>(min_leaf_);
    int best_feature = -1, best_bin = 0;
    double best_gain = total * total / static_cast<double>(n) + 1e-12;

    if (can_split) {
      const std::size_t d = bins_[0].size();
      std::vector<double> hist_sum;
      std::vector<int> hist_cnt;
      for (std::size_t f = 0; f < d; ++f) {
        int nb = bin_counts_[f];
        if (nb <= 1) continue;
        hist_sum.assign(nb, 0.0);
        hist_cnt.assign(nb, 0);
        for (auto i : idx) {
          int b = bins_[i][f];
          hist_sum[b] += structure_y_[i];
          hist_cnt[b] += 1;
        }
        double left_sum = 0;
        int left_cnt = 0;
        for (int b = 0; b + 1 < nb; ++b) {
          left_sum += hist_sum[b];
          left_cnt += hist_cnt[b];
          int right_cnt = static_cast<int>(n) - left_cnt;
          if (left_cnt < min_leaf_ || right_cnt < min_leaf_) continue;
          double right_sum = total - left_sum;
          double gain = left_sum * left_sum / left_cnt + right_sum * right_sum / right_cnt;
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = static_cast<int>(f);
            best_bin = b;
          }
        }
      }
    }

    if (best_feature < 0) {
      tree.nodes[node_id].value = leaf_value(idx);
      return node_id;
    }

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : idx)
      (bins_[i][best_feature] <= best_bin ? left_idx : right_idx).push_back(i);
    tree.nodes[node_id].feature = best_feature;
    tree.nodes[node_id].bin = best_bin;
    int l = grow(tree, std::move(left_idx), depth + 1);
    int r = grow(tree, std::move(right_idx), depth + 1);
    tree.nodes[node_id].left = l;
    tree.nodes[node_id].right = r;
    return node_id;
  }

  const std::vector<std::vector<int>>& bins_;
  const std::vector<int>& bin_counts_;
  const std::vector<double>& structure_y_;
  const std::vector<double>& leaf_y_;
  bool median_leaves_;
  int max_depth_;
  int min_leaf_;
};

}  // namespace detail

/// Histogram gradient boosting: quantile-binned features, stagewise trees on
/// loss gradients with fixed shrinkage. Least-squares trees fit residual
/// means; least-absolute-deviation trees split on residual signs and take
/// median leaf values.
inline HgbModel fit_hgb(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                        const HgbrParams& params) {
  if (x.empty()) throw TrainingError("gradient boosting: empty training set");
  const std::size_t n = x.size();
  const std::size_t d = x[0].size();
  const bool lad = params.loss == "least_absolute_deviation";

  HgbModel model;
  model.learning_rate = params.learning_rate;
  model.bin_edges.resize(d);
  for (std::size_t f = 0; f < d; ++f) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = x[i][f];
    model.bin_edges[f] = detail::compute_bin_edges(std::move(col), params.max_bins);
  }

  std::vector<std::vector<int>> bins(n);
  for (std::size_t i = 0; i < n; ++i) bins[i] = model.bin_row(x[i]);
  std::vector<int> bin_counts(d);
  for (std::size_t f = 0; f < d; ++f) bin_counts[f] = static_cast<int>(model.bin_edges[f].size()) + 1;

  if (lad) {
    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    model.init_value = sorted.size() % 2 == 1
                           ? sorted[sorted.size() / 2]
                           : (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]) / 2.0;
  } else {
    double s = 0;
    for (double v : y) s += v;
    model.init_value = s / static_cast<double>(n);
  }

  std::vector<double> pred(n, model.init_value);
  std::vector<double> residual(n), structure(n);
  for (int it = 0; it < params.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] = y[i] - pred[i];
      structure[i] = lad ? (residual[i] > 0 ? 1.0 : (residual[i] < 0 ? -1.0 : 0.0)) : residual[i];
    }
    detail::HgbTreeBuilder builder(bins, bin_counts, structure, residual, lad, params.max_depth,
                                   params.min_samples_leaf);
    HgbTree tree = builder.build();
    for (std::size_t i = 0; i < n; ++i)
      pred[i] += params.learning_rate * tree.predict_binned(bins[i]);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace covpred
