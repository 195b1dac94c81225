#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "covpred/common.hpp"
#include "covpred/rng.hpp"

namespace covpred {

struct SgdrParams {
  std::string loss = "squared_loss";   // or "huber"
  std::string penalty = "l2";          // "l1", "elasticnet"
  std::string learning_rate = "invscaling";  // "optimal", "constant", "adaptive"
  int max_iter = 100;                  // epochs
  double alpha = 1e-4;
  double eta0 = 0.01;
  double power_t = 0.25;
  double huber_epsilon = 0.1;
  double l1_ratio = 0.15;  // elasticnet mix
  double tol = 1e-3;       // adaptive schedule improvement threshold
};

struct SgdModel {
  std::vector<double> weights;
  double intercept = 0;

  double predict(const std::vector<double>& row) const {
    double p = intercept;
    for (std::size_t i = 0; i < weights.size(); ++i) p += weights[i] * row[i];
    return p;
  }
};

/// Linear model fit by per-sample stochastic gradient descent. Divergence
/// (non-finite loss or weights) raises TrainingError so a surrounding search
/// can score the configuration and continue.
inline SgdModel fit_sgdr(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                         const SgdrParams& params, std::uint64_t seed) {
  if (x.empty()) throw TrainingError("sgdr: empty training set");
  const std::size_t n = x.size();
  const std::size_t d = x[0].size();
  SgdModel model;
  model.weights.assign(d, 0.0);

  const bool huber = params.loss == "huber";
  const double t0 = params.learning_rate == "optimal" ? 1.0 / (params.alpha * params.eta0) : 0.0;
  double adaptive_eta = params.eta0;
  double best_epoch_loss = std::numeric_limits<double>::infinity();
  std::uint64_t t = 0;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < params.max_iter; ++epoch) {
    Rng rng = Rng::stream(seed, 0x56d7, static_cast<std::uint64_t>(epoch));
    rng.shuffle(order);
    double epoch_loss = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& row = x[order[k]];
      double target = y[order[k]];
      ++t;
      double eta = params.eta0;
      if (params.learning_rate == "invscaling")
        eta = params.eta0 / std::pow(static_cast<double>(t), params.power_t);
      else if (params.learning_rate == "optimal")
        eta = 1.0 / (params.alpha * (t0 + static_cast<double>(t)));
      else if (params.learning_rate == "adaptive")
        eta = adaptive_eta;

      double resid = model.predict(row) - target;
      double dloss;
      if (huber) {
        if (std::abs(resid) <= params.huber_epsilon) {
          dloss = resid;
          epoch_loss += 0.5 * resid * resid;
        } else {
          dloss = params.huber_epsilon * (resid > 0 ? 1.0 : -1.0);
          epoch_loss += params.huber_epsilon * std::abs(resid) -
                        0.5 * params.huber_epsilon * params.huber_epsilon;
        }
      } else {
        dloss = resid;
        epoch_loss += 0.5 * resid * resid;
      }

      for (std::size_t j = 0; j < d; ++j) {
        double reg = 0;
        double w = model.weights[j];
        if (params.penalty == "l2")
          reg = params.alpha * w;
        else if (params.penalty == "l1")
          reg = params.alpha * (w > 0 ? 1.0 : (w < 0 ? -1.0 : 0.0));
        else if (params.penalty == "elasticnet")
          reg = params.alpha * (params.l1_ratio * (w > 0 ? 1.0 : (w < 0 ? -1.0 : 0.0)) +
                                (1.0 - params.l1_ratio) * w);
        model.weights[j] -= eta * (dloss * row[j] + reg);
      }
      model.intercept -= eta * dloss;
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) throw TrainingError("sgdr: loss diverged");
    for (double w : model.weights)
      if (!std::isfinite(w)) throw TrainingError("sgdr: weights diverged");
    if (params.learning_rate == "adaptive") {
      if (epoch_loss > best_epoch_loss - params.tol) adaptive_eta /= 2.0;
    }
    best_epoch_loss = std::min(best_epoch_loss, epoch_loss);
  }
  return model;
}

}  // namespace covpred
