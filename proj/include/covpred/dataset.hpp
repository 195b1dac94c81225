#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "covpred/common.hpp"
#include "covpred/labeling.hpp"
#include "covpred/metrics/schema.hpp"
#include "covpred/rng.hpp"

namespace covpred {

enum class DatasetVariant { DS1, DS2, DS3, DS4, DS5 };

inline const char* variant_name(DatasetVariant v) {
  switch (v) {
    case DatasetVariant::DS1: return "DS1";
    case DatasetVariant::DS2: return "DS2";
    case DatasetVariant::DS3: return "DS3";
    case DatasetVariant::DS4: return "DS4";
    case DatasetVariant::DS5: return "DS5";
  }
  return "DS1";
}

inline DatasetVariant parse_variant(const std::string& s) {
  if (s == "DS1") return DatasetVariant::DS1;
  if (s == "DS2") return DatasetVariant::DS2;
  if (s == "DS3") return DatasetVariant::DS3;
  if (s == "DS4") return DatasetVariant::DS4;
  if (s == "DS5") return DatasetVariant::DS5;
  throw ValidationError("unknown dataset variant: " + s);
}

/// Column subset of the full schema for a variant. DS2 additionally applies
/// automatic feature selection during the pipeline.
inline std::vector<int> variant_columns(DatasetVariant variant) {
  const auto& schema = MetricSchema::instance();
  std::vector<int> cols;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const FeatureSpec& f = schema.at(i);
    bool keep = true;
    switch (variant) {
      case DatasetVariant::DS1:
      case DatasetVariant::DS2:
        break;
      case DatasetVariant::DS3:
        keep = f.level != FeatureLevel::Package;
        break;
      case DatasetVariant::DS4:
        keep = f.level == FeatureLevel::Class;
        break;
      case DatasetVariant::DS5:
        keep = f.is_base;
        break;
    }
    if (keep) cols.push_back(static_cast<int>(i));
  }
  return cols;
}

constexpr std::array<const char*, 4> kTargetNames = {"target_statement", "target_branch",
                                                     "target_mean", "target_coverageability"};

/// Aligned rows: identifiers, feature matrix, four-column target matrix.
struct Dataset {
  std::vector<std::string> class_names;
  std::vector<std::vector<double>> features;   // row-major, one column per feature_names
  std::vector<std::array<double, 4>> targets;  // statement, branch, mean, coverageability
  std::vector<std::string> feature_names;
  std::vector<int> schema_columns;  // original schema indices, -1 when unknown
  DatasetVariant variant = DatasetVariant::DS1;

  std::size_t rows() const { return class_names.size(); }
  std::size_t cols() const { return feature_names.size(); }

  std::vector<double> target_column(int t) const {
    std::vector<double> y(targets.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = targets[i][t];
    return y;
  }
};

struct RobustScalerStats {
  std::vector<double> median;
  std::vector<double> iqr;
};

// ---------------------------------------------------------------------------
// Trivial-class filtering
// ---------------------------------------------------------------------------

struct FilterDecision {
  bool remove = false;
  const char* reason = "";  // "simple" or "data"
};

/// Simple classes (CSLOC < 5) and Data classes (no NAMM methods but at least
/// one field) are inherently coverable; they leave the training data.
inline FilterDecision classify_trivial(double csloc, double csnomnamm, double csnoia,
                                       double csnosa) {
  if (csloc < 5) return {true, "simple"};
  if (csnomnamm == 0 && csnoia + csnosa > 0) return {true, "data"};
  return {false, ""};
}

// ---------------------------------------------------------------------------
// Local Outlier Factor
// ---------------------------------------------------------------------------

/// LOF scores with k nearest neighbours under Euclidean distance. Neighbour
/// sets include distance ties; densities use a small epsilon so duplicate
/// points score exactly 1.
inline std::vector<double> lof_scores(const std::vector<std::vector<double>>& rows, int k) {
  const std::size_t n = rows.size();
  constexpr double kEps = 1e-10;
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0;
      for (std::size_t c = 0; c < rows[i].size(); ++c) {
        double diff = rows[i][c] - rows[j][c];
        d2 += diff * diff;
      }
      dist[i][j] = dist[j][i] = std::sqrt(d2);
    }

  std::vector<double> k_distance(n, 0.0);
  std::vector<std::vector<std::size_t>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> order;
    order.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (dist[i][a] != dist[i][b]) return dist[i][a] < dist[i][b];
      return a < b;
    });
    std::size_t kk = std::min<std::size_t>(k, order.size());
    k_distance[i] = dist[i][order[kk - 1]];
    for (std::size_t j : order) {
      if (dist[i][j] <= k_distance[i])
        neighbours[i].push_back(j);  // includes ties at the k-distance
      else
        break;
    }
  }

  std::vector<double> lrd(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double reach_sum = 0;
    for (std::size_t j : neighbours[i]) reach_sum += std::max(k_distance[j], dist[i][j]);
    lrd[i] = 1.0 / (reach_sum / static_cast<double>(neighbours[i].size()) + kEps);
  }

  std::vector<double> lof(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0;
    for (std::size_t j : neighbours[i]) sum += lrd[j];
    lof[i] = sum / static_cast<double>(neighbours[i].size()) / lrd[i];
  }
  return lof;
}

// ---------------------------------------------------------------------------
// Split / scale / select
// ---------------------------------------------------------------------------

/// Deterministic random partition; membership is shuffled by seed, row order
/// within each part stays canonical. The train size rounds half-up.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train fraction must be inside (0,1)");
  Rng rng = Rng::stream(seed, 0x5917);
  std::vector<std::size_t> order = rng.permutation(n);
  std::size_t train_count =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 0.5));
  if (n >= 2) train_count = std::clamp<std::size_t>(train_count, 1, n - 1);
  std::vector<std::size_t> train(order.begin(), order.begin() + train_count);
  std::vector<std::size_t> test(order.begin() + train_count, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

/// Quantile with linear interpolation between order statistics.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted[0];
  double pos = p * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

inline RobustScalerStats robust_fit(const std::vector<std::vector<double>>& train_rows,
                                    std::size_t cols) {
  RobustScalerStats stats;
  stats.median.assign(cols, 0.0);
  stats.iqr.assign(cols, 0.0);
  std::vector<double> column(train_rows.size());
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < train_rows.size(); ++r) column[r] = train_rows[r][c];
    std::sort(column.begin(), column.end());
    stats.median[c] = quantile_sorted(column, 0.5);
    stats.iqr[c] = quantile_sorted(column, 0.75) - quantile_sorted(column, 0.25);
  }
  return stats;
}

/// x' = (x - median) / IQR; zero-IQR features pass through centered only.
inline void robust_apply(const RobustScalerStats& stats, std::vector<double>& row) {
  for (std::size_t c = 0; c < row.size(); ++c) {
    row[c] -= stats.median[c];
    if (stats.iqr[c] != 0.0) row[c] /= stats.iqr[c];
  }
}

/// Univariate linear F statistic of one feature against the target.
inline double f_statistic(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 3) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;  // constant column: rank last
  double r2 = (sxy * sxy) / (sxx * syy);
  if (r2 >= 1.0) return std::numeric_limits<double>::infinity();
  return r2 / (1.0 - r2) * static_cast<double>(n - 2);
}

/// Top-k features by F statistic; ties break toward lower column index.
inline std::vector<std::size_t> select_k_best(const std::vector<std::vector<double>>& train_rows,
                                              const std::vector<double>& target, std::size_t k) {
  const std::size_t cols = train_rows.empty() ? 0 : train_rows[0].size();
  if (k > cols) throw ValidationError("select_k_best: k exceeds feature count");
  std::vector<double> scores(cols, 0.0);
  std::vector<double> column(train_rows.size());
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < train_rows.size(); ++r) column[r] = train_rows[r][c];
    scores[c] = f_statistic(column, target);
  }
  std::vector<std::size_t> order(cols);
  for (std::size_t i = 0; i < cols; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  std::vector<std::size_t> mask(order.begin(), order.begin() + k);
  std::sort(mask.begin(), mask.end());
  return mask;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct PipelineOptions {
  DatasetVariant variant = DatasetVariant::DS1;
  std::uint64_t seed = 0;
  double train_fraction = 0.75;
  int lof_k = 20;
  double lof_threshold = 1.5;
  std::size_t select_k = 15;  // DS2 only
};

struct PipelineOutput {
  Dataset train;
  Dataset test;
  RobustScalerStats scaler;              // per retained column
  std::vector<std::string> removal_log;  // "class<TAB>reason"
  bool lof_skipped = false;
  PipelineOptions options;
};

/// Joined, unprocessed rows: full-schema features plus the four targets.
struct JoinedRows {
  std::vector<std::string> class_names;
  std::vector<std::vector<double>> features;  // full schema width
  std::vector<std::array<double, 4>> targets;
  std::vector<std::string> unmatched;  // classes missing on either side
};

inline JoinedRows join_rows(const std::vector<FeatureVector>& vectors,
                            const std::vector<CoverageRecord>& records,
                            const LabelingConfig& config) {
  JoinedRows out;
  std::map<std::string, const CoverageRecord*> by_name;
  for (const auto& r : records) by_name.emplace(r.class_name, &r);
  std::set<std::string> used;
  for (const auto& v : vectors) {
    auto it = by_name.find(v.class_name);
    if (it == by_name.end()) {
      out.unmatched.push_back(v.class_name + "\tno coverage row");
      continue;
    }
    used.insert(v.class_name);
    TargetVector t = build_target_vector(*it->second, config);
    out.class_names.push_back(v.class_name);
    out.features.push_back(v.values);
    out.targets.push_back({t.statement, t.branch, t.mean, t.coverageability});
  }
  for (const auto& r : records)
    if (!used.count(r.class_name)) out.unmatched.push_back(r.class_name + "\tno metrics row");
  return out;
}

/// Fig-3 order: trivial-class filter, LOF outlier removal, split, robust
/// scaling fitted on train, then (DS2) univariate selection fitted on train.
inline PipelineOutput run_pipeline(const JoinedRows& joined, const PipelineOptions& opts) {
  const auto& schema = MetricSchema::instance();
  PipelineOutput out;
  out.options = opts;

  const int csloc = schema.index_of("CSLOC");
  const int csnomnamm = schema.index_of("CSNOMNAMM");
  const int csnoia = schema.index_of("CSNOIA");
  const int csnosa = schema.index_of("CSNOSA");

  // 1. trivial-class filter
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < joined.class_names.size(); ++i) {
    const auto& x = joined.features[i];
    FilterDecision d = classify_trivial(x[csloc], x[csnomnamm], x[csnoia], x[csnosa]);
    if (d.remove)
      out.removal_log.push_back(joined.class_names[i] + "\t" + d.reason);
    else
      kept.push_back(i);
  }

  // 2. LOF outlier removal on the variant's (unscaled) columns
  std::vector<int> columns = variant_columns(opts.variant);
  auto project = [&](std::size_t row) {
    std::vector<double> v(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) v[c] = joined.features[row][columns[c]];
    return v;
  };
  if (kept.size() >= static_cast<std::size_t>(opts.lof_k) + 1) {
    std::vector<std::vector<double>> pts;
    pts.reserve(kept.size());
    for (std::size_t i : kept) pts.push_back(project(i));
    std::vector<double> scores = lof_scores(pts, opts.lof_k);
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (scores[i] > opts.lof_threshold)
        out.removal_log.push_back(joined.class_names[kept[i]] + "\toutlier lof=" +
                                  format_double(scores[i]));
      else
        survivors.push_back(kept[i]);
    }
    kept = std::move(survivors);
  } else {
    out.lof_skipped = true;
  }

  // 3. split
  auto [train_idx, test_idx] = split_indices(kept.size(), opts.train_fraction, opts.seed);

  auto build = [&](const std::vector<std::size_t>& part) {
    Dataset ds;
    ds.variant = opts.variant;
    ds.schema_columns = columns;
    for (int c : columns) ds.feature_names.push_back(schema.at(c).name);
    for (std::size_t local : part) {
      std::size_t row = kept[local];
      ds.class_names.push_back(joined.class_names[row]);
      ds.features.push_back(project(row));
      ds.targets.push_back(joined.targets[row]);
    }
    return ds;
  };
  out.train = build(train_idx);
  out.test = build(test_idx);

  // 4. robust scaling, statistics from training rows only
  out.scaler = robust_fit(out.train.features, columns.size());
  for (auto& r : out.train.features) robust_apply(out.scaler, r);
  for (auto& r : out.test.features) robust_apply(out.scaler, r);

  // 5. univariate selection for DS2, fitted on the training split
  if (opts.variant == DatasetVariant::DS2) {
    std::vector<double> y = out.train.target_column(3);
    std::vector<std::size_t> mask = select_k_best(out.train.features, y, opts.select_k);
    auto apply_mask = [&](Dataset& ds) {
      Dataset reduced;
      reduced.variant = ds.variant;
      reduced.class_names = std::move(ds.class_names);
      reduced.targets = std::move(ds.targets);
      for (std::size_t c : mask) {
        reduced.feature_names.push_back(ds.feature_names[c]);
        reduced.schema_columns.push_back(ds.schema_columns[c]);
      }
      for (auto& row : ds.features) {
        std::vector<double> r(mask.size());
        for (std::size_t c = 0; c < mask.size(); ++c) r[c] = row[mask[c]];
        reduced.features.push_back(std::move(r));
      }
      ds = std::move(reduced);
    };
    RobustScalerStats reduced_stats;
    for (std::size_t c : mask) {
      reduced_stats.median.push_back(out.scaler.median[c]);
      reduced_stats.iqr.push_back(out.scaler.iqr[c]);
    }
    apply_mask(out.train);
    apply_mask(out.test);
    out.scaler = std::move(reduced_stats);
  }
  return out;
}

}  // namespace covpred
