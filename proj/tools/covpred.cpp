// covpred - coverageability prediction toolkit for Java source trees.
//
// Subcommands: extract, label, dataset, train, evaluate, predict, gate,
// inspect, report, pipeline. All tabular outputs are UTF-8 CSV with '.'
// decimals and LF line endings; every stochastic command requires --seed.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "covpred/pipeline.hpp"

namespace fs = std::filesystem;
using namespace covpred;

namespace {

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file: " + path);
  return parse_model(in);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dataset file: " + path);
  return read_dataset_csv(in);
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::vector<PredictionOutcome> predict_all(const std::string& source, const TrainedModel& model,
                                           std::vector<std::string>* errors) {
  AnalyzedProject project = parse_project(source);
  FeatureExtractor extractor(project);
  std::vector<PredictionOutcome> outcomes;
  for (const auto& fv : extractor.vectors()) {
    try {
      outcomes.push_back(predict_class_coverageability(fv, model));
    } catch (const PredictionError& e) {
      if (errors) errors->push_back(fv.class_name + ": " + e.what());
    }
  }
  return outcomes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coverageability prediction toolkit"};
  app.require_subcommand(1);

  // every command accepts --seed; the deterministic ones record it and
  // ignore it, the stochastic ones mark it required
  std::uint64_t unused_seed = 0;

  // ---- extract ----
  auto* extract = app.add_subcommand("extract", "compute the metrics table for a source tree");
  std::string ex_source, ex_out, ex_dump;
  extract->add_option("--source", ex_source, "Java source root")->required();
  extract->add_option("--out", ex_out, "metrics CSV path")->required();
  extract->add_option("--dump-model", ex_dump, "also write a class-model debug dump");
  extract->add_option("--seed", unused_seed, "accepted; extraction is deterministic");

  // ---- label ----
  auto* label = app.add_subcommand("label", "compute targets from a coverage report");
  std::string lb_coverage, lb_out;
  int lb_b = 1;
  label->add_option("--coverage", lb_coverage, "coverage report CSV")->required();
  label->add_option("--out", lb_out, "labels CSV path")->required();
  label->add_option("--b", lb_b, "influential test case budget (default 1)");
  label->add_option("--seed", unused_seed, "accepted; labeling is deterministic");

  // ---- dataset ----
  auto* dataset = app.add_subcommand("dataset", "join metrics with labels and preprocess");
  std::string ds_metrics, ds_coverage, ds_train, ds_test, ds_prov, ds_variant = "DS1";
  std::uint64_t ds_seed = 0;
  int ds_b = 1, ds_lof_k = 20;
  double ds_fraction = 0.75, ds_lof_threshold = 1.5;
  std::size_t ds_select_k = 15;
  dataset->add_option("--metrics", ds_metrics, "metrics CSV from extract")->required();
  dataset->add_option("--coverage", ds_coverage, "coverage report CSV")->required();
  dataset->add_option("--out-train", ds_train, "train dataset path")->required();
  dataset->add_option("--out-test", ds_test, "test dataset path")->required();
  dataset->add_option("--provenance", ds_prov, "provenance sidecar path")->required();
  dataset->add_option("--variant", ds_variant, "DS1..DS5 (default DS1)");
  dataset->add_option("--seed", ds_seed, "split seed")->required();
  dataset->add_option("--b", ds_b, "labeling budget (default 1)");
  dataset->add_option("--train-fraction", ds_fraction, "train fraction (default 0.75)");
  dataset->add_option("--lof-k", ds_lof_k, "LOF neighbour count (default 20)");
  dataset->add_option("--lof-threshold", ds_lof_threshold, "LOF removal threshold (default 1.5)");
  dataset->add_option("--select-k", ds_select_k, "DS2 feature count (default 15)");

  // ---- train ----
  auto* train = app.add_subcommand("train", "grid search, cross-validate and fit a model");
  std::string tr_dataset, tr_out, tr_trace, tr_checkpoint, tr_learner = "vor";
  std::string tr_grid = "reduced", tr_target = "coverageability", tr_provenance;
  std::uint64_t tr_seed = 0;
  train->add_option("--train", tr_dataset, "training dataset CSV")->required();
  train->add_option("--out", tr_out, "model output path")->required();
  train->add_option("--provenance", tr_provenance,
                    "dataset provenance sidecar; embeds its scaler so the model "
                    "accepts raw feature vectors");
  train->add_option("--learner", tr_learner, "sgdr|mlpr|rfr|hgbr|vor (default vor)");
  train->add_option("--grid", tr_grid, "reduced|full (default reduced)");
  train->add_option("--target", tr_target, "statement|branch|mean|coverageability");
  train->add_option("--seed", tr_seed, "training seed")->required();
  train->add_option("--trace", tr_trace, "cross-validation trace CSV path");
  train->add_option("--checkpoint", tr_checkpoint, "checkpointed best fold model path");

  // ---- evaluate ----
  auto* eval_cmd = app.add_subcommand("evaluate", "score a model on a dataset");
  std::string ev_model, ev_dataset, ev_out, ev_target = "coverageability";
  eval_cmd->add_option("--model", ev_model, "model file")->required();
  eval_cmd->add_option("--dataset", ev_dataset, "dataset CSV")->required();
  eval_cmd->add_option("--out", ev_out, "evaluation CSV path");
  eval_cmd->add_option("--target", ev_target, "target column (default coverageability)");
  eval_cmd->add_option("--seed", unused_seed, "accepted; evaluation is deterministic");

  // ---- predict ----
  auto* predict = app.add_subcommand("predict", "predict one class's coverageability");
  std::string pr_source, pr_class, pr_model;
  predict->add_option("--source", pr_source, "Java source root")->required();
  predict->add_option("--class", pr_class, "qualified class name")->required();
  predict->add_option("--model", pr_model, "model file")->required();
  predict->add_option("--seed", unused_seed, "accepted; inference is deterministic");

  // ---- gate ----
  auto* gate = app.add_subcommand("gate", "fail when any class predicts below the threshold");
  std::string gt_source, gt_model;
  double gt_threshold = 0.5;
  gate->add_option("--source", gt_source, "Java source root")->required();
  gate->add_option("--model", gt_model, "model file")->required();
  gate->add_option("--threshold", gt_threshold, "gate threshold (default 0.50)");
  gate->add_option("--seed", unused_seed, "accepted; gating is deterministic");

  // ---- inspect ----
  auto* inspect = app.add_subcommand("inspect", "permutation importance and impact table");
  std::string in_model, in_dataset, in_out, in_impact;
  int in_repeats = 50, in_top = 15;
  std::uint64_t in_seed = 0;
  inspect->add_option("--model", in_model, "model file")->required();
  inspect->add_option("--dataset", in_dataset, "held-out dataset CSV")->required();
  inspect->add_option("--out", in_out, "importance CSV path")->required();
  inspect->add_option("--impact", in_impact, "impact table CSV path");
  inspect->add_option("--repeats", in_repeats, "shuffles per feature (default 50)");
  inspect->add_option("--top", in_top, "impact table size (default 15)");
  inspect->add_option("--seed", in_seed, "shuffle seed")->required();

  // ---- report ----
  auto* report = app.add_subcommand("report", "coverageability distribution histogram");
  std::string rp_labels, rp_out, rp_svg;
  int rp_bins = 50, rp_b = 1;
  report->add_option("--labels", rp_labels, "labels CSV from label")->required();
  report->add_option("--out", rp_out, "histogram CSV path")->required();
  report->add_option("--svg", rp_svg, "optional standalone SVG path");
  report->add_option("--bins", rp_bins, "bin count (default 50)");
  report->add_option("--b", rp_b, "budget used for the labels (annotation only)");
  report->add_option("--seed", unused_seed, "accepted; reporting is deterministic");

  // ---- pipeline ----
  auto* pipe = app.add_subcommand("pipeline", "run every stage from a config file");
  std::string pl_config, pl_out_dir;
  pipe->add_option("--config", pl_config, "pipeline config file")->required();
  pipe->add_option("--out-dir", pl_out_dir, "output directory (overrides config and env)");
  pipe->add_option("--seed", unused_seed, "accepted; the config run.seed governs the run");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) {
      AnalyzedProject project = parse_project(ex_source);
      FeatureExtractor extractor(project);
      atomic_write(ex_out, write_metrics_csv(extractor.vectors()));
      if (!ex_dump.empty()) {
        std::ostringstream os;
        dump_model(project, os);
        atomic_write(ex_dump, os.str());
      }
      std::cerr << "extract: " << extractor.vectors().size() << " classes, "
                << project.model.skipped.size() << " skipped files\n";
      for (const auto& s : project.model.skipped)
        std::cerr << "  skipped " << s.path << ": " << s.reason << "\n";
      return 0;
    }

    if (*label) {
      LabelingConfig cfg;
      cfg.b = lb_b;
      auto records = load_coverage_report(lb_coverage);
      atomic_write(lb_out, write_labels_csv(records, cfg));
      std::cerr << "label: " << records.size() << " classes\n";
      return 0;
    }

    if (*dataset) {
      std::ifstream metrics_in(ds_metrics, std::ios::binary);
      if (!metrics_in) throw ValidationError("cannot open metrics file: " + ds_metrics);
      auto vectors = read_metrics_csv(metrics_in);
      auto records = load_coverage_report(ds_coverage);
      LabelingConfig label_cfg;
      label_cfg.b = ds_b;
      JoinedRows joined = join_rows(vectors, records, label_cfg);
      PipelineOptions opts;
      opts.variant = parse_variant(ds_variant);
      opts.seed = ds_seed;
      opts.train_fraction = ds_fraction;
      opts.lof_k = ds_lof_k;
      opts.lof_threshold = ds_lof_threshold;
      opts.select_k = ds_select_k;
      PipelineOutput out = run_pipeline(joined, opts);
      atomic_write(ds_train, write_dataset_csv(out.train));
      atomic_write(ds_test, write_dataset_csv(out.test));
      atomic_write(ds_prov, write_provenance(out));
      std::cerr << "dataset: " << out.train.rows() << " train rows, " << out.test.rows()
                << " test rows, " << out.removal_log.size() << " removed"
                << (out.lof_skipped ? " (LOF skipped: too few rows)" : "") << "\n";
      for (const auto& u : joined.unmatched) std::cerr << "  unmatched " << u << "\n";
      return 0;
    }

    if (*train) {
      Dataset ds = load_dataset(tr_dataset);
      LearnerKind learner = parse_learner(tr_learner);
      auto grid = grid_for(tr_grid, learner);
      int target = target_column_index(tr_target);
      std::vector<double> y = ds.target_column(target);
      CvPlan plan = make_cv_plan(ds.rows(), tr_seed);
      GridSearchResult result = grid_search(grid, ds.features, y, plan, tr_seed);
      RobustScalerStats scaler;
      if (!tr_provenance.empty()) {
        std::ifstream prov(tr_provenance, std::ios::binary);
        if (!prov) throw ValidationError("cannot open provenance file: " + tr_provenance);
        scaler = read_provenance_scaler(prov);
        if (scaler.median.size() != ds.cols())
          throw ValidationError("provenance scaler width does not match the dataset");
      } else {
        // dataset files are already scaled; without provenance the model can
        // only score other dataset files, not raw feature vectors
        scaler.median.assign(ds.cols(), 0.0);
        scaler.iqr.assign(ds.cols(), 1.0);
      }
      attach_envelope(result.final_model, scaler, ds.feature_names, ds.schema_columns,
                      ds.features, tr_seed);
      {
        std::ostringstream os;
        serialize_model(result.final_model, os);
        atomic_write(tr_out, os.str());
      }
      if (!tr_trace.empty()) atomic_write(tr_trace, write_cv_trace_csv(result.trace));
      if (!tr_checkpoint.empty() && result.has_checkpoint) {
        attach_envelope(result.checkpoint, scaler, ds.feature_names, ds.schema_columns,
                        ds.features, tr_seed);
        std::ostringstream os;
        serialize_model(result.checkpoint, os);
        atomic_write(tr_checkpoint, os.str());
      }
      std::cerr << "train: best " << result.best.id() << " mean cv rmse "
                << format_double(result.best_score) << "\n";
      return 0;
    }

    if (*eval_cmd) {
      TrainedModel model = load_model(ev_model);
      Dataset ds = load_dataset(ev_dataset);
      int target = target_column_index(ev_target);
      std::vector<double> y = ds.target_column(target);
      std::vector<double> pred(ds.rows());
      for (std::size_t i = 0; i < ds.rows(); ++i) pred[i] = model.predict_scaled(ds.features[i]);
      EvaluationReport rep = evaluate(y, pred);
      std::string csv = write_evaluation_csv(rep, ev_model);
      if (!ev_out.empty()) atomic_write(ev_out, csv);
      std::cout << csv;
      return 0;
    }

    if (*predict) {
      TrainedModel model = load_model(pr_model);
      AnalyzedProject project = parse_project(pr_source);
      FeatureExtractor extractor(project);
      const FeatureVector* fv = extractor.find(pr_class);
      if (!fv) throw ValidationError("class not found in project: " + pr_class);
      PredictionOutcome outcome = predict_class_coverageability(*fv, model);
      std::cout << outcome.class_name << "," << format_double(outcome.coverageability) << ","
                << prediction_source_name(outcome.source) << "\n";
      return 0;
    }

    if (*gate) {
      TrainedModel model = load_model(gt_model);
      std::vector<std::string> errors;
      auto outcomes = predict_all(gt_source, model, &errors);
      for (const auto& e : errors) std::cerr << "prediction failed for " << e << "\n";
      if (!errors.empty()) return 2;
      GateReport rep = gate_check(outcomes, gt_threshold);
      if (outcomes.empty()) {
        std::cout << "gate: no classes to check, passing\n";
        return 0;
      }
      for (const auto& f : rep.failing)
        std::cout << "below-threshold " << f.class_name << " "
                  << format_double(f.coverageability) << "\n";
      std::cout << "gate: " << (rep.passed ? "pass" : "fail") << " (" << rep.failing.size()
                << " of " << rep.total << " below " << format_double(rep.threshold) << ")\n";
      return rep.passed ? 0 : 1;
    }

    if (*inspect) {
      TrainedModel model = load_model(in_model);
      Dataset ds = load_dataset(in_dataset);
      std::vector<double> y = ds.target_column(3);
      ImportanceReport rep = permutation_importance(model, ds.features, y, in_repeats, in_seed);
      atomic_write(in_out, write_importance_csv(rep));
      if (!in_impact.empty()) {
        std::vector<ImpactRow> rows;
        for (const auto* fi : rep.ranked()) {
          if (static_cast<int>(rows.size()) >= in_top) break;
          std::size_t col = 0;
          for (std::size_t c = 0; c < ds.feature_names.size(); ++c)
            if (ds.feature_names[c] == fi->feature) col = c;
          std::vector<double> x(ds.rows());
          for (std::size_t i = 0; i < ds.rows(); ++i) x[i] = ds.features[i][col];
          ImpactRow row;
          row.metric = fi->feature;
          try {
            PearsonResult pr = pearson_correlation(x, y);
            row.r = pr.r;
            row.p = pr.p;
            row.impact = classify_impact(pr.r, pr.p);
          } catch (const ValidationError&) {
            row.impact = Impact::Unknown;
          }
          rows.push_back(row);
        }
        atomic_write(in_impact, write_impact_csv(rows));
      }
      std::cerr << "inspect: baseline R2 " << format_double(rep.baseline_r2) << "\n";
      return 0;
    }

    if (*report) {
      std::ifstream in(rp_labels, std::ios::binary);
      if (!in) throw ValidationError("cannot open labels file: " + rp_labels);
      auto targets = read_labels_csv(in);
      DistributionReport rep = render_distribution_report(targets, rp_bins, rp_b);
      atomic_write(rp_out, write_distribution_csv(rep));
      if (!rp_svg.empty()) atomic_write(rp_svg, write_distribution_svg(rep));
      return 0;
    }

    if (*pipe) {
      std::ifstream in(pl_config, std::ios::binary);
      if (!in) throw ValidationError("cannot open config: " + pl_config);
      Config config = Config::parse(in);
      std::string out_dir = pl_out_dir;
      if (out_dir.empty()) out_dir = env_or("COVPRED_OUT_DIR", config.get("run.output_dir", "covpred-out"));
      run_full_pipeline(config, out_dir);
      std::cerr << "pipeline: artifacts in " << out_dir << "\n";
      return 0;
    }
  } catch (const PredictionError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
