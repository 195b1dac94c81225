#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "covpred/common.hpp"
#include "covpred/ml/evaluate.hpp"
#include "covpred/ml/model.hpp"
#include "covpred/rng.hpp"

namespace covpred {

struct CvFold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

struct CvPlan {
  std::vector<CvFold> folds;
  std::uint64_t seed = 0;
};

/// Shuffle-split plan: each fold is an independent random train/validation
/// resample of the same rows (folds may overlap across iterations).
inline CvPlan make_cv_plan(std::size_t n, std::uint64_t seed, int folds = 5,
                           double train_ratio = 0.75) {
  if (n < 4) throw ValidationError("cross-validation needs at least 4 rows");
  CvPlan plan;
  plan.seed = seed;
  for (int f = 0; f < folds; ++f) {
    Rng rng = Rng::stream(seed, 0xcf01d, static_cast<std::uint64_t>(f));
    std::vector<std::size_t> order = rng.permutation(n);
    std::size_t train_count =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_ratio + 0.5));
    train_count = std::min(std::max<std::size_t>(train_count, 1), n - 1);
    CvFold fold;
    fold.train.assign(order.begin(), order.begin() + train_count);
    fold.validation.assign(order.begin() + train_count, order.end());
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.validation.begin(), fold.validation.end());
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

struct TraceRow {
  std::string config_id;
  std::vector<double> fold_rmse;
  double mean_rmse = 0;
};

struct GridSearchResult {
  Hyperparameters best;
  double best_score = std::numeric_limits<double>::infinity();
  TrainedModel final_model;  // best config retrained on the full training set
  TrainedModel checkpoint;   // best fold model saved during the search
  bool has_checkpoint = false;
  std::vector<TraceRow> trace;
};

/// Exhaustive search over the given configurations, scored by mean validation
/// RMSE across the plan's folds. A configuration whose training fails scores
/// +inf and the search continues. Ties keep the earlier configuration. The
/// winner is checkpointed, then retrained on the entire training set.
inline GridSearchResult grid_search(const std::vector<Hyperparameters>& grid,
                                    const std::vector<std::vector<double>>& x,
                                    const std::vector<double>& y, const CvPlan& plan,
                                    std::uint64_t seed) {
  if (grid.empty()) throw ValidationError("grid search needs at least one configuration");
  GridSearchResult result;

  for (std::size_t ci = 0; ci < grid.size(); ++ci) {
    TraceRow row;
    row.config_id = grid[ci].id();
    double sum = 0;
    bool failed = false;
    TrainedModel best_fold_model;
    double best_fold_rmse = std::numeric_limits<double>::infinity();

    for (std::size_t fi = 0; fi < plan.folds.size(); ++fi) {
      const CvFold& fold = plan.folds[fi];
      std::vector<std::vector<double>> fx;
      std::vector<double> fy;
      fx.reserve(fold.train.size());
      for (auto i : fold.train) {
        fx.push_back(x[i]);
        fy.push_back(y[i]);
      }
      try {
        std::uint64_t fold_seed = seed + 31 * (ci + 1) + fi;
        TrainedModel m = train_model(grid[ci], fx, fy, fold_seed);
        std::vector<double> yv, pv;
        yv.reserve(fold.validation.size());
        for (auto i : fold.validation) {
          yv.push_back(y[i]);
          pv.push_back(m.predict_scaled(x[i]));
        }
        double rmse = evaluate(yv, pv).rmse;
        if (!std::isfinite(rmse)) throw TrainingError("non-finite validation error");
        row.fold_rmse.push_back(rmse);
        sum += rmse;
        if (rmse < best_fold_rmse) {
          best_fold_rmse = rmse;
          best_fold_model = std::move(m);
        }
      } catch (const TrainingError&) {
        failed = true;
        break;
      }
    }

    row.mean_rmse = failed ? std::numeric_limits<double>::infinity()
                           : sum / static_cast<double>(plan.folds.size());
    if (failed) row.fold_rmse.assign(plan.folds.size(), std::numeric_limits<double>::infinity());
    if (row.mean_rmse < result.best_score) {
      result.best_score = row.mean_rmse;
      result.best = grid[ci];
      result.checkpoint = std::move(best_fold_model);
      result.has_checkpoint = true;
    }
    result.trace.push_back(std::move(row));
  }

  if (!std::isfinite(result.best_score))
    throw TrainingError("every grid configuration failed to train");
  result.final_model = train_model(result.best, x, y, seed);
  return result;
}

// ---------------------------------------------------------------------------
// Search grids
// ---------------------------------------------------------------------------

/// The full hyperparameter grid per learner. Exhaustive and large; intended
/// for corpus-scale runs.
inline std::vector<Hyperparameters> full_grid(LearnerKind kind) {
  std::vector<Hyperparameters> grid;
  Hyperparameters base;
  base.kind = kind;
  switch (kind) {
    case LearnerKind::Sgdr:
      for (const char* loss : {"squared_loss", "huber"})
        for (const char* penalty : {"l2", "l1", "elasticnet"})
          for (const char* lr : {"invscaling", "optimal", "constant", "adaptive"})
            for (int iter = 50; iter < 500; iter += 50) {
              base.sgdr = SgdrParams{};
              base.sgdr.loss = loss;
              base.sgdr.penalty = penalty;
              base.sgdr.learning_rate = lr;
              base.sgdr.max_iter = iter;
              grid.push_back(base);
            }
      break;
    case LearnerKind::Mlpr:
      for (const auto& layers :
           {std::vector<int>{128, 64}, std::vector<int>{256, 100}, std::vector<int>{512, 256, 100}})
        for (const char* act : {"relu", "tanh", "logistic"})
          for (const char* lr : {"constant", "adaptive"})
            for (int epochs = 100; epochs < 500; epochs += 50) {
              base.mlpr = MlprParams{};
              base.mlpr.hidden_layer_sizes = layers;
              base.mlpr.activation = act;
              base.mlpr.learning_rate = lr;
              base.mlpr.epochs = epochs;
              grid.push_back(base);
            }
      break;
    case LearnerKind::Rfr:
      for (int trees = 50; trees < 500; trees += 50)
        for (const char* crit : {"squared_error", "absolute_error"})
          for (int depth = 3; depth < 50; depth += 1)
            for (int mss = 2; mss < 30; mss += 2) {
              base.rfr = RfrParams{};
              base.rfr.n_estimators = trees;
              base.rfr.criterion = crit;
              base.rfr.max_depth = depth;
              base.rfr.min_samples_split = mss;
              grid.push_back(base);
            }
      break;
    case LearnerKind::Hgbr:
      for (const char* loss : {"least_squares", "least_absolute_deviation"})
        for (int depth = 3; depth < 50; depth += 1)
          for (int leaf = 5; leaf < 50; leaf += 10)
            for (int iter = 50; iter < 500; iter += 50) {
              base.hgbr = HgbrParams{};
              base.hgbr.loss = loss;
              base.hgbr.max_depth = depth;
              base.hgbr.min_samples_leaf = leaf;
              base.hgbr.max_iter = iter;
              grid.push_back(base);
            }
      break;
    case LearnerKind::Vor:
      for (const auto& w : {std::array<double, 4>{1, 1, 1, 1},
                            std::array<double, 4>{0, 1.0 / 3, 1.0 / 3, 1.0 / 3},
                            std::array<double, 4>{0, 1.0 / 6, 2.0 / 6, 3.0 / 6}}) {
        base.vor_weights = w;
        grid.push_back(base);
      }
      break;
  }
  return grid;
}

/// A small grid per learner for desk-scale runs and the benchmark suite.
inline std::vector<Hyperparameters> reduced_grid(LearnerKind kind) {
  std::vector<Hyperparameters> grid;
  Hyperparameters base;
  base.kind = kind;
  switch (kind) {
    case LearnerKind::Sgdr:
      for (const char* loss : {"squared_loss", "huber"}) {
        base.sgdr = SgdrParams{};
        base.sgdr.loss = loss;
        base.sgdr.max_iter = 100;
        grid.push_back(base);
      }
      break;
    case LearnerKind::Mlpr:
      base.mlpr = MlprParams{};
      base.mlpr.hidden_layer_sizes = {128, 64};
      base.mlpr.activation = "relu";
      base.mlpr.eta0 = 0.02;
      base.mlpr.batch_size = 32;
      base.mlpr.epochs = 250;
      grid.push_back(base);
      break;
    case LearnerKind::Rfr:
      base.rfr = RfrParams{};
      base.rfr.n_estimators = 150;
      base.rfr.max_depth = 20;
      grid.push_back(base);
      break;
    case LearnerKind::Hgbr:
      for (int depth : {3, 6}) {
        base.hgbr = HgbrParams{};
        base.hgbr.max_depth = depth;
        base.hgbr.min_samples_leaf = 20;
        base.hgbr.max_iter = 200;
        grid.push_back(base);
      }
      break;
    case LearnerKind::Vor:
      base.vor_weights = {0, 1.0 / 6, 2.0 / 6, 3.0 / 6};
      base.mlpr.hidden_layer_sizes = {128, 64};
      base.mlpr.eta0 = 0.02;
      base.mlpr.batch_size = 32;
      base.mlpr.epochs = 250;
      base.rfr.n_estimators = 150;
      base.rfr.max_depth = 20;
      base.hgbr.max_iter = 200;
      base.hgbr.max_depth = 6;
      base.hgbr.min_samples_leaf = 20;
      grid.push_back(base);
      break;
  }
  return grid;
}

}  // namespace covpred
