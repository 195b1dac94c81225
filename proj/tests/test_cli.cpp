#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "covpred/io/csv.hpp"
#include "covpred/ml/model.hpp"
#include "covpred/pipeline.hpp"
#include "helpers.hpp"

using namespace covpred;
namespace fs = std::filesystem;

namespace {

const char* kCli = COVPRED_CLI_PATH;

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() /
          ("covpred-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args, std::string* output = nullptr) {
  std::string cmd = std::string(kCli) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
  int status = pclose(pipe);
  if (output) *output = out;
  return WEXITSTATUS(status);
}

std::string corpus() { return (testutil::fixture_dir() / "corpus").string(); }
std::string coverage() { return (testutil::fixture_dir() / "coverage.csv").string(); }

}  // namespace

TEST_CASE("extract emits the schema-wide metrics table with a version comment") {
  Sandbox sb;
  std::string out;
  int rc = run("extract --source " + corpus() + " --out " + sb.p("metrics.csv") +
                   " --dump-model " + sb.p("dump.txt"),
               &out);
  REQUIRE_MESSAGE(rc == 0, out);
  std::ifstream in(sb.p("metrics.csv"));
  std::string first;
  std::getline(in, first);
  CHECK(first == std::string("# schema: ") + kSchemaVersion);
  in.seekg(0);
  auto vectors = read_metrics_csv(in);
  CHECK(vectors.size() == 36);
  CHECK(fs::exists(sb.p("dump.txt")));
}

TEST_CASE("label writes targets and report validates rows") {
  Sandbox sb;
  std::string out;
  int rc = run("label --coverage " + coverage() + " --out " + sb.p("labels.csv"), &out);
  REQUIRE_MESSAGE(rc == 0, out);
  std::ifstream in(sb.p("labels.csv"));
  auto targets = read_labels_csv(in);
  CHECK(targets.size() == 36);
  for (const auto& t : targets) {
    CHECK(t.coverageability > 0);
    CHECK(t.coverageability <= 1);
  }

  // malformed coverage is rejected with a nonzero exit
  std::ofstream bad(sb.p("bad.csv"));
  bad << "p.A,1.4,0.5,3\n";
  bad.close();
  CHECK(run("label --coverage " + sb.p("bad.csv") + " --out " + sb.p("x.csv")) != 0);
}

TEST_CASE("stochastic commands demand a seed") {
  Sandbox sb;
  std::string out;
  int rc = run("dataset --metrics m.csv --coverage c.csv --out-train a --out-test b "
               "--provenance p",
               &out);
  CHECK(rc != 0);
  CHECK(out.find("--seed") != std::string::npos);
}

TEST_CASE("the dataset/train/evaluate/inspect chain runs and reruns byte-identically") {
  Sandbox sb;
  std::string out;
  REQUIRE(run("extract --source " + corpus() + " --out " + sb.p("metrics.csv"), &out) == 0);

  std::string ds_args = "dataset --metrics " + sb.p("metrics.csv") + " --coverage " + coverage() +
                        " --out-train " + sb.p("train.csv") + " --out-test " + sb.p("test.csv") +
                        " --provenance " + sb.p("prov.txt") + " --variant DS3 --seed 42 --lof-k 10";
  REQUIRE_MESSAGE(run(ds_args, &out) == 0, out);

  std::ifstream tin(sb.p("train.csv"));
  Dataset train = read_dataset_csv(tin);
  CHECK(train.cols() == 194);  // DS3 width
  CHECK(train.variant == DatasetVariant::DS3);

  std::string train_args = "train --train " + sb.p("train.csv") + " --learner hgbr --seed 7 --out " +
                           sb.p("model.covm") + " --trace " + sb.p("trace.csv") + " --checkpoint " +
                           sb.p("ckpt.covm");
  REQUIRE_MESSAGE(run(train_args, &out) == 0, out);
  CHECK(fs::exists(sb.p("model.covm")));
  CHECK(fs::exists(sb.p("trace.csv")));
  CHECK(fs::exists(sb.p("ckpt.covm")));

  REQUIRE(run("evaluate --model " + sb.p("model.covm") + " --dataset " + sb.p("test.csv") +
                  " --out " + sb.p("eval.csv"),
              &out) == 0);
  CHECK(out.find("MAE") != std::string::npos);

  REQUIRE(run("inspect --model " + sb.p("model.covm") + " --dataset " + sb.p("test.csv") +
                  " --out " + sb.p("imp.csv") + " --impact " + sb.p("impact.csv") +
                  " --repeats 5 --seed 3",
              &out) == 0);
  CHECK(fs::exists(sb.p("imp.csv")));
  CHECK(fs::exists(sb.p("impact.csv")));

  // determinism: rerun into a second sandbox and compare bytes
  Sandbox sb2;
  REQUIRE(run("extract --source " + corpus() + " --out " + sb2.p("metrics.csv")) == 0);
  REQUIRE(run("dataset --metrics " + sb2.p("metrics.csv") + " --coverage " + coverage() +
              " --out-train " + sb2.p("train.csv") + " --out-test " + sb2.p("test.csv") +
              " --provenance " + sb2.p("prov.txt") + " --variant DS3 --seed 42 --lof-k 10") == 0);
  REQUIRE(run("train --train " + sb2.p("train.csv") + " --learner hgbr --seed 7 --out " +
              sb2.p("model.covm")) == 0);
  CHECK(testutil::slurp(sb.p("metrics.csv")) == testutil::slurp(sb2.p("metrics.csv")));
  CHECK(testutil::slurp(sb.p("train.csv")) == testutil::slurp(sb2.p("train.csv")));
  CHECK(testutil::slurp(sb.p("test.csv")) == testutil::slurp(sb2.p("test.csv")));
  CHECK(testutil::slurp(sb.p("prov.txt")) == testutil::slurp(sb2.p("prov.txt")));
  CHECK(testutil::slurp(sb.p("model.covm")) == testutil::slurp(sb2.p("model.covm")));

  // a different seed moves the split
  REQUIRE(run("dataset --metrics " + sb2.p("metrics.csv") + " --coverage " + coverage() +
              " --out-train " + sb2.p("train2.csv") + " --out-test " + sb2.p("test2.csv") +
              " --provenance " + sb2.p("prov2.txt") + " --variant DS3 --seed 43 --lof-k 10") == 0);
  CHECK(testutil::slurp(sb2.p("train.csv")) != testutil::slurp(sb2.p("train2.csv")));
}

TEST_CASE("DS2 datasets come out fifteen features wide") {
  Sandbox sb;
  std::string out;
  REQUIRE(run("extract --source " + corpus() + " --out " + sb.p("metrics.csv")) == 0);
  REQUIRE_MESSAGE(run("dataset --metrics " + sb.p("metrics.csv") + " --coverage " + coverage() +
                          " --out-train " + sb.p("train.csv") + " --out-test " + sb.p("test.csv") +
                          " --provenance " + sb.p("prov.txt") +
                          " --variant DS2 --seed 5 --lof-k 10",
                      &out) == 0,
                  out);
  std::ifstream in(sb.p("train.csv"));
  Dataset ds = read_dataset_csv(in);
  CHECK(ds.cols() == 15);
}

TEST_CASE("predict walks the trivial rules before the model") {
  Sandbox sb;
  // a handcrafted linear model: zero weights, intercept 0.42
  TrainedModel m;
  m.kind = LearnerKind::Sgdr;
  m.sgd.weights.assign(MetricSchema::instance().size(), 0.0);
  m.sgd.intercept = 0.42;
  RobustScalerStats identity;
  identity.median.assign(MetricSchema::instance().size(), 0.0);
  identity.iqr.assign(MetricSchema::instance().size(), 1.0);
  std::vector<std::string> names = MetricSchema::instance().names();
  std::vector<int> cols(names.size());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = static_cast<int>(i);
  attach_envelope(m, identity, names, cols, {}, 1);
  {
    std::ofstream out(sb.p("model.covm"), std::ios::binary);
    serialize_model(m, out);
  }

  std::string out;
  // Tiny: one line of code, rule-simple
  REQUIRE(run("predict --source " + corpus() + " --class com.fix.data.Tiny --model " +
                  sb.p("model.covm"),
              &out) == 0);
  CHECK(out == "com.fix.data.Tiny,1,rule-simple\n");
  // Point: getters and setters only, rule-data
  REQUIRE(run("predict --source " + corpus() + " --class com.fix.data.Point --model " +
                  sb.p("model.covm"),
              &out) == 0);
  CHECK(out == "com.fix.data.Point,1,rule-data\n");
  // a non-trivial class reaches the model
  REQUIRE(run("predict --source " + corpus() + " --class com.fix.flow.Loopy --model " +
                  sb.p("model.covm"),
              &out) == 0);
  CHECK(out == "com.fix.flow.Loopy,0.42,model\n");
  // unknown class
  CHECK(run("predict --source " + corpus() + " --class no.such.Cls --model " + sb.p("model.covm"),
            &out) != 0);
}

TEST_CASE("out-of-range predictions raise the prediction error") {
  Sandbox sb;
  TrainedModel m;
  m.kind = LearnerKind::Sgdr;
  m.sgd.weights.assign(MetricSchema::instance().size(), 0.0);
  m.sgd.intercept = 1.2;  // forced out of range
  RobustScalerStats identity;
  identity.median.assign(MetricSchema::instance().size(), 0.0);
  identity.iqr.assign(MetricSchema::instance().size(), 1.0);
  std::vector<std::string> names = MetricSchema::instance().names();
  std::vector<int> cols(names.size());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = static_cast<int>(i);
  attach_envelope(m, identity, names, cols, {}, 1);
  {
    std::ofstream out(sb.p("model.covm"), std::ios::binary);
    serialize_model(m, out);
  }
  std::string out;
  int rc = run("predict --source " + corpus() + " --class com.fix.flow.Loopy --model " +
                   sb.p("model.covm"),
               &out);
  CHECK(rc == 3);
  CHECK(out.find("Prediction Error") != std::string::npos);
  CHECK(out.find("1.2") != std::string::npos);

  // trivial classes still answer 1 by rule, the model never runs for them
  REQUIRE(run("predict --source " + corpus() + " --class com.fix.data.Tiny --model " +
                  sb.p("model.covm"),
              &out) == 0);
  CHECK(out == "com.fix.data.Tiny,1,rule-simple\n");
}

TEST_CASE("gate passes and fails by threshold") {
  Sandbox sb;
  TrainedModel m;
  m.kind = LearnerKind::Sgdr;
  m.sgd.weights.assign(MetricSchema::instance().size(), 0.0);
  m.sgd.intercept = 0.42;
  RobustScalerStats identity;
  identity.median.assign(MetricSchema::instance().size(), 0.0);
  identity.iqr.assign(MetricSchema::instance().size(), 1.0);
  std::vector<std::string> names = MetricSchema::instance().names();
  std::vector<int> cols(names.size());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = static_cast<int>(i);
  attach_envelope(m, identity, names, cols, {}, 1);
  {
    std::ofstream out(sb.p("model.covm"), std::ios::binary);
    serialize_model(m, out);
  }
  std::string out;
  // every model-path class predicts 0.42: gate at 0.4 passes
  CHECK(run("gate --source " + corpus() + " --model " + sb.p("model.covm") + " --threshold 0.4",
            &out) == 0);
  CHECK(out.find("gate: pass") != std::string::npos);
  // gate at 0.5 fails and lists offenders
  CHECK(run("gate --source " + corpus() + " --model " + sb.p("model.covm") + " --threshold 0.5",
            &out) == 1);
  CHECK(out.find("gate: fail") != std::string::npos);
  CHECK(out.find("com.fix.flow.Loopy") != std::string::npos);
  CHECK(out.find("0.42") != std::string::npos);
}

TEST_CASE("report renders histograms with a recount oracle and optional svg") {
  Sandbox sb;
  std::string out;
  REQUIRE(run("label --coverage " + coverage() + " --out " + sb.p("labels.csv"), &out) == 0);
  REQUIRE(run("report --labels " + sb.p("labels.csv") + " --out " + sb.p("dist.csv") + " --svg " +
                  sb.p("dist.svg") + " --bins 10",
              &out) == 0);
  // recount with an independent binning routine
  std::ifstream lin(sb.p("labels.csv"));
  auto targets = read_labels_csv(lin);
  std::vector<int> cov_counts(10, 0);
  for (const auto& t : targets) {
    int idx = static_cast<int>(std::ceil(t.coverageability * 10)) - 1;
    idx = std::max(0, std::min(9, idx));
    cov_counts[idx]++;
  }
  std::ifstream din(sb.p("dist.csv"));
  std::string line;
  std::getline(din, line);  // header
  int row = 0, total = 0;
  while (std::getline(din, line)) {
    auto cols2 = split_view(line, ',');
    REQUIRE(cols2.size() == 6);
    CHECK(parse_double(cols2[2]) == cov_counts[row]);
    total += static_cast<int>(parse_double(cols2[2]));
    ++row;
  }
  CHECK(row == 10);
  CHECK(total == static_cast<int>(targets.size()));
  std::string svg = testutil::slurp(sb.p("dist.svg"));
  CHECK(svg.find("<svg") != std::string::npos);

  // single-target edge: one nonzero bin
  std::ofstream one(sb.p("one.csv"));
  one << "class,statement_coverage,branch_coverage,mean_coverage,coverageability,s,r\n";
  one << "p.A,0.2,0.15,0.175,0.175,4,1\n";
  one.close();
  REQUIRE(run("report --labels " + sb.p("one.csv") + " --out " + sb.p("one_dist.csv") +
              " --bins 50") == 0);
  std::ifstream oin(sb.p("one_dist.csv"));
  std::getline(oin, line);
  int nonzero = 0;
  while (std::getline(oin, line)) {
    auto cols2 = split_view(line, ',');
    if (parse_double(cols2[2]) > 0) ++nonzero;
  }
  CHECK(nonzero == 1);
}

TEST_CASE("training with provenance yields models that accept raw feature vectors") {
  Sandbox sb;
  std::string out;
  REQUIRE(run("extract --source " + corpus() + " --out " + sb.p("metrics.csv")) == 0);
  REQUIRE(run("dataset --metrics " + sb.p("metrics.csv") + " --coverage " + coverage() +
              " --out-train " + sb.p("train.csv") + " --out-test " + sb.p("test.csv") +
              " --provenance " + sb.p("prov.txt") + " --variant DS5 --seed 21 --lof-k 10") == 0);
  REQUIRE_MESSAGE(run("train --train " + sb.p("train.csv") + " --learner hgbr --seed 4 --out " +
                          sb.p("model.covm") + " --provenance " + sb.p("prov.txt"),
                      &out) == 0,
                  out);

  // the CLI prediction from raw source must equal the model's dataset-space
  // prediction for the same class
  std::ifstream tin(sb.p("test.csv"));
  Dataset test = read_dataset_csv(tin);
  std::ifstream min(sb.p("model.covm"));
  TrainedModel model = parse_model(min);
  REQUIRE(!test.class_names.empty());
  std::size_t row = 0;  // any non-trivial row works; all survivors are non-trivial
  double expected = model.predict_scaled(test.features[row]);
  REQUIRE(run("predict --source " + corpus() + " --class " + test.class_names[row] + " --model " +
                  sb.p("model.covm"),
              &out) == 0);
  CHECK(out == test.class_names[row] + "," + format_double(expected) + ",model\n");

  // width mismatch between provenance and dataset is rejected
  REQUIRE(run("dataset --metrics " + sb.p("metrics.csv") + " --coverage " + coverage() +
              " --out-train " + sb.p("t3.csv") + " --out-test " + sb.p("s3.csv") +
              " --provenance " + sb.p("p3.txt") + " --variant DS3 --seed 21 --lof-k 10") == 0);
  CHECK(run("train --train " + sb.p("t3.csv") + " --learner hgbr --seed 4 --out " +
                sb.p("m3.covm") + " --provenance " + sb.p("prov.txt"),
            &out) != 0);
}

TEST_CASE("distribution report rejects degenerate inputs") {
  CHECK_THROWS_AS(render_distribution_report({}, 50, 1), ValidationError);
  std::vector<TargetVector> one(1);
  one[0].coverageability = 0.175;
  one[0].mean = 0.35;
  CHECK_THROWS_AS(render_distribution_report(one, 0, 1), ValidationError);
  DistributionReport rep = render_distribution_report(one, 50, 1);
  std::size_t nonzero = 0;
  for (auto c : rep.coverageability_counts)
    if (c > 0) ++nonzero;
  CHECK(nonzero == 1);
  // mass lands in the final bin when everything predicts 1
  std::vector<TargetVector> ones(3);
  for (auto& t : ones) {
    t.coverageability = 1.0;
    t.mean = 1.0;
  }
  DistributionReport top = render_distribution_report(ones, 50, 1);
  CHECK(top.coverageability_counts[49] == 3);
}

TEST_CASE("gating nothing passes vacuously") {
  GateReport rep = gate_check({}, 0.5);
  CHECK(rep.passed);
  CHECK(rep.total == 0);

  // an empty source tree gates clean through the CLI too
  Sandbox sb;
  fs::create_directories(sb.dir / "empty-src");
  TrainedModel m;
  m.kind = LearnerKind::Sgdr;
  m.sgd.weights.assign(MetricSchema::instance().size(), 0.0);
  m.sgd.intercept = 0.9;
  RobustScalerStats identity;
  identity.median.assign(MetricSchema::instance().size(), 0.0);
  identity.iqr.assign(MetricSchema::instance().size(), 1.0);
  std::vector<std::string> names = MetricSchema::instance().names();
  std::vector<int> cols(names.size());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = static_cast<int>(i);
  attach_envelope(m, identity, names, cols, {}, 1);
  {
    std::ofstream out(sb.p("model.covm"), std::ios::binary);
    serialize_model(m, out);
  }
  std::string out;
  CHECK(run("gate --source " + (sb.dir / "empty-src").string() + " --model " + sb.p("model.covm"),
            &out) == 0);
  CHECK(out.find("no classes") != std::string::npos);
}

TEST_CASE("the pipeline command runs end to end from a config and is reproducible") {
  Sandbox sb;
  std::ofstream cfg(sb.p("run.conf"));
  cfg << "[input]\n"
      << "source_root = " << corpus() << "\n"
      << "coverage_report = " << coverage() << "\n"
      << "[labeling]\nb = 1\n"
      << "[dataset]\nvariant = DS5\nlof_k = 10\n"
      << "[train]\nlearner = hgbr\ngrid = reduced\n"
      << "[inspect]\nrepeats = 5\n"
      << "[run]\nseed = 99\n";
  cfg.close();

  std::string out;
  int rc = run("pipeline --config " + sb.p("run.conf") + " --out-dir " + sb.p("out1"), &out);
  REQUIRE_MESSAGE(rc == 0, out);
  for (const char* name : {"metrics.csv", "labels.csv", "dataset_train.csv", "dataset_test.csv",
                           "provenance.txt", "cv_trace.csv", "model.covm", "evaluation.csv",
                           "importance.csv", "impact.csv", "distribution.csv", "manifest.txt"})
    CHECK_MESSAGE(fs::exists(sb.dir / "out1" / name), name);
  std::string manifest = testutil::slurp(sb.dir / "out1" / "manifest.txt");
  CHECK(manifest.find("status: complete") != std::string::npos);

  // byte-identical rerun
  REQUIRE(run("pipeline --config " + sb.p("run.conf") + " --out-dir " + sb.p("out2"), &out) == 0);
  for (const char* name : {"metrics.csv", "dataset_train.csv", "model.covm", "cv_trace.csv",
                           "evaluation.csv", "importance.csv", "impact.csv", "distribution.csv"})
    CHECK_MESSAGE(testutil::slurp(sb.dir / "out1" / name) == testutil::slurp(sb.dir / "out2" / name),
                  name);

  // a missing seed halts the run with the stage name
  std::ofstream bad(sb.p("bad.conf"));
  bad << "[input]\nsource_root = " << corpus() << "\ncoverage_report = " << coverage() << "\n";
  bad.close();
  CHECK(run("pipeline --config " + sb.p("bad.conf") + " --out-dir " + sb.p("out3"), &out) != 0);
  CHECK(out.find("dataset") != std::string::npos);
}
