#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "covpred/dataset.hpp"
#include "covpred/inspect/importance.hpp"
#include "covpred/inspect/pearson.hpp"
#include "covpred/io/config.hpp"
#include "covpred/io/csv.hpp"
#include "covpred/labeling.hpp"
#include "covpred/metrics/extract.hpp"
#include "covpred/ml/grid_search.hpp"
#include "covpred/ml/model.hpp"
#include "covpred/project.hpp"

namespace covpred {

/// Raised when a model prediction leaves [0,1] (out-of-distribution input).
class PredictionError : public std::runtime_error {
 public:
  explicit PredictionError(double value)
      : std::runtime_error("Prediction Error (value=" + format_double(value) + ")"),
        value_(value) {}
  double value() const { return value_; }

 private:
  double value_;
};

enum class PredictionSource { RuleSimple, RuleData, Model };

inline const char* prediction_source_name(PredictionSource s) {
  switch (s) {
    case PredictionSource::RuleSimple: return "rule-simple";
    case PredictionSource::RuleData: return "rule-data";
    case PredictionSource::Model: return "model";
  }
  return "model";
}

struct PredictionOutcome {
  std::string class_name;
  double coverageability = 0;
  PredictionSource source = PredictionSource::Model;
};

/// Single-class inference: trivial-class rules answer 1 before the model is
/// consulted; model predictions outside [0,1] raise PredictionError.
inline PredictionOutcome predict_class_coverageability(const FeatureVector& features,
                                                       const TrainedModel& model) {
  const auto& schema = MetricSchema::instance();
  if (!model.schema_version.empty() && model.schema_version != kSchemaVersion)
    throw ValidationError("model schema version mismatch: " + model.schema_version);
  PredictionOutcome out;
  out.class_name = features.class_name;
  double csloc = features.values[schema.index_of("CSLOC")];
  double csnomnamm = features.values[schema.index_of("CSNOMNAMM")];
  double csnoia = features.values[schema.index_of("CSNOIA")];
  double csnosa = features.values[schema.index_of("CSNOSA")];
  if (csloc < 5) {
    out.coverageability = 1.0;
    out.source = PredictionSource::RuleSimple;
    return out;
  }
  if (csnomnamm == 0 && csnoia + csnosa > 0) {
    out.coverageability = 1.0;
    out.source = PredictionSource::RuleData;
    return out;
  }
  double value = model.predict_raw(features.values);
  if (value > 1.0 || value < 0.0) throw PredictionError(value);
  out.coverageability = value;
  out.source = PredictionSource::Model;
  return out;
}

// ---------------------------------------------------------------------------
// Gate
// ---------------------------------------------------------------------------

struct GateReport {
  bool passed = true;
  double threshold = 0.5;
  std::vector<PredictionOutcome> failing;
  std::size_t total = 0;
};

/// CI gate: fails when any class's predicted coverageability is below the
/// threshold. An empty outcome list passes vacuously.
inline GateReport gate_check(const std::vector<PredictionOutcome>& outcomes,
                             double threshold = 0.5) {
  GateReport report;
  report.threshold = threshold;
  report.total = outcomes.size();
  for (const auto& o : outcomes)
    if (o.coverageability < threshold) report.failing.push_back(o);
  report.passed = report.failing.empty();
  return report;
}

// ---------------------------------------------------------------------------
// Distribution report
// ---------------------------------------------------------------------------

struct DistributionReport {
  int bins = 50;
  int budget_b = 1;
  std::vector<std::size_t> coverageability_counts;  // C_mu at the configured b
  std::vector<std::size_t> mean_counts;             // the b = |tau| boundary
};

inline std::size_t histogram_bin(double v, int bins) {
  // values live in (0,1]; v = 1 lands in the last bin
  int idx = static_cast<int>(std::ceil(v * bins)) - 1;
  if (idx < 0) idx = 0;
  if (idx >= bins) idx = bins - 1;
  return static_cast<std::size_t>(idx);
}

inline DistributionReport render_distribution_report(const std::vector<TargetVector>& targets,
                                                     int bins, int budget_b) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  if (targets.empty()) throw ValidationError("distribution report needs at least one target");
  DistributionReport rep;
  rep.bins = bins;
  rep.budget_b = budget_b;
  rep.coverageability_counts.assign(bins, 0);
  rep.mean_counts.assign(bins, 0);
  for (const auto& t : targets) {
    rep.coverageability_counts[histogram_bin(t.coverageability, bins)] += 1;
    rep.mean_counts[histogram_bin(t.mean, bins)] += 1;
  }
  return rep;
}

inline std::string write_distribution_csv(const DistributionReport& rep) {
  std::ostringstream os;
  os << "bin_low,bin_high,coverageability_count,coverageability_log10,meancoverage_count,"
        "meancoverage_log10\n";
  for (int b = 0; b < rep.bins; ++b) {
    double lo = static_cast<double>(b) / rep.bins;
    double hi = static_cast<double>(b + 1) / rep.bins;
    double c1 = static_cast<double>(rep.coverageability_counts[b]);
    double c2 = static_cast<double>(rep.mean_counts[b]);
    os << format_double(lo) << "," << format_double(hi) << "," << c1 << ","
       << format_double(std::log10(1.0 + c1)) << "," << c2 << ","
       << format_double(std::log10(1.0 + c2)) << "\n";
  }
  return os.str();
}

/// Standalone SVG: two log-scaled histogram series over (0,1].
inline std::string write_distribution_svg(const DistributionReport& rep) {
  const int width = 800, height = 360, margin = 40;
  const double plot_w = width - 2.0 * margin, plot_h = height - 2.0 * margin;
  double max_log = 0;
  for (int b = 0; b < rep.bins; ++b) {
    max_log = std::max(max_log, std::log10(1.0 + rep.coverageability_counts[b]));
    max_log = std::max(max_log, std::log10(1.0 + rep.mean_counts[b]));
  }
  if (max_log <= 0) max_log = 1;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  double bar_w = plot_w / rep.bins / 2.0;
  for (int b = 0; b < rep.bins; ++b) {
    auto bar = [&](double count, int series, const char* color) {
      double h = plot_h * std::log10(1.0 + count) / max_log;
      double x = margin + (plot_w / rep.bins) * b + series * bar_w;
      os << "<rect x=\"" << x << "\" y=\"" << height - margin - h << "\" width=\"" << bar_w
         << "\" height=\"" << h << "\" fill=\"" << color << "\"/>\n";
    };
    bar(static_cast<double>(rep.coverageability_counts[b]), 0, "#4472c4");
    bar(static_cast<double>(rep.mean_counts[b]), 1, "#ed7d31");
  }
  os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
     << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << margin << "\" y=\"20\" font-size=\"13\">coverageability (blue, b="
     << rep.budget_b << ") vs mean coverage (orange), log10(1+count)</text>\n";
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Trace / report / provenance rendering
// ---------------------------------------------------------------------------

inline std::string write_cv_trace_csv(const std::vector<TraceRow>& trace) {
  std::size_t folds = 0;
  for (const auto& row : trace) folds = std::max(folds, row.fold_rmse.size());
  std::ostringstream os;
  os << "config_id,configuration";
  for (std::size_t f = 0; f < folds; ++f) os << ",fold" << f + 1 << "_rmse";
  os << ",mean_rmse\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    os << i << ",\"" << trace[i].config_id << "\"";
    for (std::size_t f = 0; f < folds; ++f)
      os << ","
         << (f < trace[i].fold_rmse.size() ? format_double(trace[i].fold_rmse[f]) : "");
    os << "," << format_double(trace[i].mean_rmse) << "\n";
  }
  return os.str();
}

inline std::string write_evaluation_csv(const EvaluationReport& rep, const std::string& label) {
  std::ostringstream os;
  os << "model,MAE,MSE,RMSE,MSLgE,MdAE,R2\n";
  os << label << "," << format_double(rep.mae) << "," << format_double(rep.mse) << ","
     << format_double(rep.rmse) << "," << (rep.mslge ? format_double(*rep.mslge) : "NaN") << ","
     << format_double(rep.mdae) << ","
     << (rep.r2_defined ? format_double(rep.r2) : "-inf") << "\n";
  return os.str();
}

inline std::string write_importance_csv(const ImportanceReport& rep) {
  std::ostringstream os;
  os << "rank,feature,mean_drop";
  for (int r = 0; r < rep.repeats; ++r) os << ",drop" << r + 1;
  os << "\n";
  for (const auto* f : rep.ranked()) {
    os << f->rank << "," << f->feature << "," << format_double(f->mean_drop);
    for (double d : f->drops) os << "," << format_double(d);
    os << "\n";
  }
  return os.str();
}

struct ImpactRow {
  std::string metric;
  double r = 0;
  double p = 1;
  Impact impact = Impact::Unknown;
};

inline std::string write_impact_csv(const std::vector<ImpactRow>& rows) {
  std::ostringstream os;
  os << "metric,correlation,p_value,impact\n";
  for (const auto& row : rows)
    os << row.metric << "," << format_double(row.r) << "," << format_double(row.p) << ","
       << impact_name(row.impact) << "\n";
  return os.str();
}

/// Scaler statistics back out of a provenance sidecar, so models trained
/// from dataset files can still predict on raw feature vectors.
inline RobustScalerStats read_provenance_scaler(std::istream& in) {
  RobustScalerStats stats;
  std::string line;
  auto parse_row = [](const std::string& l) {
    std::vector<double> out;
    std::istringstream is(l.substr(l.find(':') + 1));
    std::string tok;
    while (is >> tok) out.push_back(parse_double(tok));
    return out;
  };
  while (std::getline(in, line)) {
    if (starts_with(line, "scaler_median:")) stats.median = parse_row(line);
    if (starts_with(line, "scaler_iqr:")) stats.iqr = parse_row(line);
  }
  if (stats.median.empty() || stats.median.size() != stats.iqr.size())
    throw ValidationError("provenance file carries no scaler statistics");
  return stats;
}

inline std::string write_provenance(const PipelineOutput& out) {
  std::ostringstream os;
  os << "covpred-provenance/1\n";
  os << "schema: " << kSchemaVersion << "\n";
  os << "variant: " << variant_name(out.options.variant) << "\n";
  os << "seed: " << out.options.seed << "\n";
  os << "train_fraction: " << format_double(out.options.train_fraction) << "\n";
  os << "lof_k: " << out.options.lof_k << "\n";
  os << "lof_threshold: " << format_double(out.options.lof_threshold) << "\n";
  os << "lof_skipped: " << (out.lof_skipped ? "yes" : "no") << "\n";
  os << "train_rows: " << out.train.rows() << "\n";
  os << "test_rows: " << out.test.rows() << "\n";
  os << "columns:";
  for (const auto& n : out.train.feature_names) os << " " << n;
  os << "\n";
  os << "scaler_median:";
  for (double v : out.scaler.median) os << " " << format_double(v);
  os << "\n";
  os << "scaler_iqr:";
  for (double v : out.scaler.iqr) os << " " << format_double(v);
  os << "\n";
  os << "removed:\n";
  for (const auto& r : out.removal_log) os << "  " << r << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

struct PipelineArtifacts {
  std::filesystem::path metrics;
  std::filesystem::path labels;
  std::filesystem::path dataset_train;
  std::filesystem::path dataset_test;
  std::filesystem::path provenance;
  std::filesystem::path cv_trace;
  std::filesystem::path model;
  std::filesystem::path checkpoint;
  std::filesystem::path evaluation;
  std::filesystem::path importance;
  std::filesystem::path impact;
  std::filesystem::path distribution;
  std::filesystem::path manifest;
};

inline PipelineArtifacts pipeline_paths(const std::filesystem::path& out_dir) {
  PipelineArtifacts a;
  a.metrics = out_dir / "metrics.csv";
  a.labels = out_dir / "labels.csv";
  a.dataset_train = out_dir / "dataset_train.csv";
  a.dataset_test = out_dir / "dataset_test.csv";
  a.provenance = out_dir / "provenance.txt";
  a.cv_trace = out_dir / "cv_trace.csv";
  a.model = out_dir / "model.covm";
  a.checkpoint = out_dir / "model.checkpoint.covm";
  a.evaluation = out_dir / "evaluation.csv";
  a.importance = out_dir / "importance.csv";
  a.impact = out_dir / "impact.csv";
  a.distribution = out_dir / "distribution.csv";
  a.manifest = out_dir / "manifest.txt";
  return a;
}

inline std::vector<Hyperparameters> grid_for(const std::string& grid_kind, LearnerKind learner) {
  if (grid_kind == "full") return full_grid(learner);
  if (grid_kind == "reduced" || grid_kind.empty()) return reduced_grid(learner);
  throw ValidationError("unknown grid: " + grid_kind + " (expected reduced or full)");
}

inline int target_column_index(const std::string& target) {
  if (target == "statement") return 0;
  if (target == "branch") return 1;
  if (target == "mean") return 2;
  if (target == "coverageability" || target.empty()) return 3;
  throw ValidationError("unknown target: " + target);
}

/// Run every stage from source tree to reports. Any stage error halts the run
/// with the stage name; the manifest flags partial artifact sets.
inline PipelineArtifacts run_full_pipeline(const Config& config,
                                           const std::filesystem::path& out_dir) {
  PipelineArtifacts paths = pipeline_paths(out_dir);
  std::vector<std::string> done;
  std::string current_stage = "setup";

  auto manifest = [&](const std::string& status) {
    std::ostringstream os;
    os << "status: " << status << "\n";
    for (const auto& d : done) os << "artifact: " << d << "\n";
    atomic_write(paths.manifest, os.str());
  };

  try {
    current_stage = "extract";
    AnalyzedProject project = parse_project(config.require("input.source_root"));
    FeatureExtractor extractor(project);
    atomic_write(paths.metrics, write_metrics_csv(extractor.vectors()));
    done.push_back(paths.metrics.filename().string());

    current_stage = "label";
    LabelingConfig label_cfg;
    label_cfg.b = static_cast<int>(config.get_int("labeling.b", 1));
    auto records = load_coverage_report(config.require("input.coverage_report"));
    atomic_write(paths.labels, write_labels_csv(records, label_cfg));
    done.push_back(paths.labels.filename().string());

    current_stage = "dataset";
    PipelineOptions opts;
    opts.variant = parse_variant(config.get("dataset.variant", "DS1"));
    opts.seed = static_cast<std::uint64_t>(config.get_int("run.seed", -1));
    if (!config.has("run.seed")) throw ValidationError("config is missing required key: run.seed");
    opts.train_fraction = config.get_double("dataset.train_fraction", 0.75);
    opts.lof_k = static_cast<int>(config.get_int("dataset.lof_k", 20));
    opts.lof_threshold = config.get_double("dataset.lof_threshold", 1.5);
    opts.select_k = static_cast<std::size_t>(config.get_int("dataset.select_k", 15));
    JoinedRows joined = join_rows(extractor.vectors(), records, label_cfg);
    PipelineOutput data = run_pipeline(joined, opts);
    atomic_write(paths.dataset_train, write_dataset_csv(data.train));
    atomic_write(paths.dataset_test, write_dataset_csv(data.test));
    atomic_write(paths.provenance, write_provenance(data));
    done.push_back(paths.dataset_train.filename().string());
    done.push_back(paths.dataset_test.filename().string());
    done.push_back(paths.provenance.filename().string());

    current_stage = "train";
    LearnerKind learner = parse_learner(config.get("train.learner", "vor"));
    std::vector<Hyperparameters> grid = grid_for(config.get("train.grid", "reduced"), learner);
    int target_col = target_column_index(config.get("train.target", "coverageability"));
    std::vector<double> y_train = data.train.target_column(target_col);
    CvPlan plan = make_cv_plan(data.train.rows(), opts.seed, 5, opts.train_fraction);
    GridSearchResult search = grid_search(grid, data.train.features, y_train, plan, opts.seed);
    attach_envelope(search.final_model, data.scaler, data.train.feature_names,
                    data.train.schema_columns, data.train.features, opts.seed);
    {
      std::ostringstream os;
      serialize_model(search.final_model, os);
      atomic_write(paths.model, os.str());
    }
    if (search.has_checkpoint) {
      attach_envelope(search.checkpoint, data.scaler, data.train.feature_names,
                      data.train.schema_columns, data.train.features, opts.seed);
      std::ostringstream os;
      serialize_model(search.checkpoint, os);
      atomic_write(paths.checkpoint, os.str());
      done.push_back(paths.checkpoint.filename().string());
    }
    atomic_write(paths.cv_trace, write_cv_trace_csv(search.trace));
    done.push_back(paths.model.filename().string());
    done.push_back(paths.cv_trace.filename().string());

    current_stage = "evaluate";
    std::vector<double> y_test = data.test.target_column(target_col);
    std::vector<double> pred(data.test.rows());
    for (std::size_t i = 0; i < data.test.rows(); ++i)
      pred[i] = search.final_model.predict_scaled(data.test.features[i]);
    EvaluationReport eval = evaluate(y_test, pred);
    atomic_write(paths.evaluation,
                 write_evaluation_csv(eval, std::string(learner_name(learner)) + "/" +
                                                variant_name(opts.variant)));
    done.push_back(paths.evaluation.filename().string());

    current_stage = "inspect";
    int repeats = static_cast<int>(config.get_int("inspect.repeats", 50));
    ImportanceReport importance = permutation_importance(
        search.final_model, data.test.features, y_test, repeats, opts.seed);
    atomic_write(paths.importance, write_importance_csv(importance));
    done.push_back(paths.importance.filename().string());

    int top = static_cast<int>(config.get_int("inspect.top", 15));
    std::vector<ImpactRow> impact_rows;
    std::vector<double> y_cov = data.test.target_column(3);
    for (const auto* fi : importance.ranked()) {
      if (static_cast<int>(impact_rows.size()) >= top) break;
      std::size_t col = 0;
      for (std::size_t c = 0; c < data.test.feature_names.size(); ++c)
        if (data.test.feature_names[c] == fi->feature) col = c;
      std::vector<double> x(data.test.rows());
      for (std::size_t i = 0; i < data.test.rows(); ++i) x[i] = data.test.features[i][col];
      ImpactRow row;
      row.metric = fi->feature;
      try {
        PearsonResult pr = pearson_correlation(x, y_cov);
        row.r = pr.r;
        row.p = pr.p;
        row.impact = classify_impact(pr.r, pr.p);
      } catch (const ValidationError&) {
        row.impact = Impact::Unknown;  // zero-variance column
      }
      impact_rows.push_back(row);
    }
    atomic_write(paths.impact, write_impact_csv(impact_rows));
    done.push_back(paths.impact.filename().string());

    current_stage = "report";
    std::vector<TargetVector> targets;
    for (const auto& r : records) targets.push_back(build_target_vector(r, label_cfg));
    int bins = static_cast<int>(config.get_int("report.bins", 50));
    DistributionReport dist = render_distribution_report(targets, bins, label_cfg.b);
    atomic_write(paths.distribution, write_distribution_csv(dist));
    done.push_back(paths.distribution.filename().string());

    manifest("complete");
  } catch (const std::exception& e) {
    manifest("failed at stage " + current_stage + ": " + e.what());
    throw ValidationError("pipeline stage '" + current_stage + "' failed: " + e.what());
  }
  return paths;
}

}  // namespace covpred
