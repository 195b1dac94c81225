#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "covpred/common.hpp"
#include "covpred/ml/tree.hpp"
#include "covpred/parallel.hpp"
#include "covpred/rng.hpp"

namespace covpred {

struct RfrParams {
  int n_estimators = 100;
  std::string criterion = "squared_error";  // or "absolute_error"
  int max_depth = 20;
  int min_samples_split = 2;
  bool bootstrap = true;  // n draws with replacement per tree
};

struct ForestModel {
  std::vector<DecisionTree> trees;

  /// Forest prediction is exactly the arithmetic mean of its trees.
  double predict(const std::vector<double>& row) const {
    double s = 0;
    for (const auto& t : trees) s += t.predict(row);
    return s / static_cast<double>(trees.size());
  }
};

/// Random forest: each tree fits a bootstrap sample with ceil(d/3) feature
/// candidates per split. Tree seeds derive from (seed, tree index) so
/// training order never changes results.
inline ForestModel fit_forest(const std::vector<std::vector<double>>& x,
                              const std::vector<double>& y, const RfrParams& params,
                              std::uint64_t seed) {
  if (x.empty()) throw TrainingError("random forest: empty training set");
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_samples_split = params.min_samples_split;
  tp.criterion = params.criterion == "absolute_error" ? SplitCriterion::AbsoluteError
                                                      : SplitCriterion::SquaredError;
  tp.max_features = static_cast<int>(
      std::ceil(static_cast<double>(x[0].size()) / 3.0));

  ForestModel model;
  model.trees.resize(params.n_estimators);
  const std::size_t n = x.size();
  parallel_for(static_cast<std::size_t>(params.n_estimators), [&](std::size_t t) {
    Rng rng = Rng::stream(seed, 0xf04e57, static_cast<std::uint64_t>(t));
    std::vector<std::size_t> idx(n);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::size_t>(rng.next_below(n));
    } else {
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    }
    model.trees[t] = fit_tree(x, y, tp, rng, std::move(idx));
  });
  return model;
}

}  // namespace covpred
