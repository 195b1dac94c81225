#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "covpred/common.hpp"

namespace covpred {

/// Regression error report. MSLgE is absent when any value is negative
/// (the log form is undefined there). R² of a constant target with nonzero
/// residual is reported as -inf with r2_defined=false, never a fabricated
/// finite score.
struct EvaluationReport {
  double mae = 0;
  double mse = 0;
  double rmse = 0;
  std::optional<double> mslge;
  double mdae = 0;
  double r2 = 0;
  bool r2_defined = true;
  std::size_t n = 0;
};

inline EvaluationReport evaluate(const std::vector<double>& y, const std::vector<double>& y_hat) {
  if (y.size() != y_hat.size()) throw ValidationError("evaluate: length mismatch");
  if (y.empty()) throw ValidationError("evaluate: empty input");
  const std::size_t n = y.size();
  EvaluationReport rep;
  rep.n = n;

  double abs_sum = 0, sq_sum = 0, y_sum = 0;
  bool nonnegative = true;
  std::vector<double> abs_errors(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = y[i] - y_hat[i];
    abs_errors[i] = std::abs(d);
    abs_sum += std::abs(d);
    sq_sum += d * d;
    y_sum += y[i];
    if (y[i] < 0 || y_hat[i] < 0) nonnegative = false;
  }
  rep.mae = abs_sum / n;
  rep.mse = sq_sum / n;
  rep.rmse = std::sqrt(rep.mse);

  if (nonnegative) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = std::log1p(y[i]) - std::log1p(y_hat[i]);
      s += d * d;
    }
    rep.mslge = s / n;
  }

  std::sort(abs_errors.begin(), abs_errors.end());
  rep.mdae = n % 2 == 1 ? abs_errors[n / 2]
                        : (abs_errors[n / 2 - 1] + abs_errors[n / 2]) / 2.0;

  double y_mean = y_sum / n;
  double ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i) ss_tot += (y[i] - y_mean) * (y[i] - y_mean);
  if (ss_tot == 0.0) {
    if (sq_sum == 0.0) {
      rep.r2 = 1.0;
    } else {
      rep.r2 = -std::numeric_limits<double>::infinity();
      rep.r2_defined = false;
    }
  } else {
    rep.r2 = 1.0 - sq_sum / ss_tot;
  }
  return rep;
}

}  // namespace covpred
