#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "covpred/ml/evaluate.hpp"
#include "covpred/ml/model.hpp"
#include "covpred/rng.hpp"

namespace covpred {

struct FeatureImportance {
  std::string feature;
  std::vector<double> drops;  // one per repeat, baseline R2 minus shuffled R2
  double mean_drop = 0;
  int rank = 0;  // 1-based, by descending mean drop
};

struct ImportanceReport {
  double baseline_r2 = 0;
  int repeats = 0;
  std::uint64_t seed = 0;
  std::vector<FeatureImportance> features;  // schema order; ranks inside

  /// Rows sorted by rank (rank 1 first).
  std::vector<const FeatureImportance*> ranked() const {
    std::vector<const FeatureImportance*> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(&f);
    std::sort(out.begin(), out.end(),
              [](const FeatureImportance* a, const FeatureImportance* b) {
                return a->rank < b->rank;
              });
    return out;
  }
};

/// Apply a permutation to one column, leaving the rest untouched.
inline std::vector<std::vector<double>> shuffle_column(const std::vector<std::vector<double>>& x,
                                                       std::size_t column,
                                                       const std::vector<std::size_t>& perm) {
  std::vector<std::vector<double>> out = x;
  for (std::size_t i = 0; i < x.size(); ++i) out[i][column] = x[perm[i]][column];
  return out;
}

/// Permutation importance on a held-out set: for each feature and repeat,
/// shuffle that column (seeded per feature and repeat), re-predict and record
/// the R2 drop. Drops may be negative for uninformative features; they are
/// never clipped.
inline ImportanceReport permutation_importance(const TrainedModel& model,
                                               const std::vector<std::vector<double>>& x_scaled,
                                               const std::vector<double>& y, int repeats,
                                               std::uint64_t seed) {
  ImportanceReport report;
  report.repeats = repeats;
  report.seed = seed;

  std::vector<double> baseline_pred(x_scaled.size());
  for (std::size_t i = 0; i < x_scaled.size(); ++i)
    baseline_pred[i] = model.predict_scaled(x_scaled[i]);
  report.baseline_r2 = evaluate(y, baseline_pred).r2;

  const std::size_t d = x_scaled.empty() ? 0 : x_scaled[0].size();
  report.features.resize(d);
  std::vector<double> pred(x_scaled.size());
  std::vector<std::vector<double>> work = x_scaled;
  for (std::size_t j = 0; j < d; ++j) {
    FeatureImportance& fi = report.features[j];
    fi.feature = j < model.feature_names.size() ? model.feature_names[j]
                                                : "f" + std::to_string(j);
    double sum = 0;
    for (int r = 0; r < repeats; ++r) {
      Rng rng = Rng::stream(seed, 0x1395, j, static_cast<std::uint64_t>(r));
      std::vector<std::size_t> perm = rng.permutation(x_scaled.size());
      for (std::size_t i = 0; i < x_scaled.size(); ++i) work[i][j] = x_scaled[perm[i]][j];
      for (std::size_t i = 0; i < x_scaled.size(); ++i) pred[i] = model.predict_scaled(work[i]);
      double drop = report.baseline_r2 - evaluate(y, pred).r2;
      fi.drops.push_back(drop);
      sum += drop;
    }
    for (std::size_t i = 0; i < x_scaled.size(); ++i) work[i][j] = x_scaled[i][j];
    fi.mean_drop = repeats > 0 ? sum / repeats : 0.0;
  }

  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.features[a].mean_drop > report.features[b].mean_drop;
  });
  for (std::size_t pos = 0; pos < d; ++pos)
    report.features[order[pos]].rank = static_cast<int>(pos) + 1;
  return report;
}

}  // namespace covpred
