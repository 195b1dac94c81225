#pragma once

#include <array>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "covpred/common.hpp"
#include "covpred/dataset.hpp"
#include "covpred/ml/forest.hpp"
#include "covpred/ml/hgb.hpp"
#include "covpred/ml/linear_sgd.hpp"
#include "covpred/ml/mlp.hpp"

namespace covpred {

enum class LearnerKind { Sgdr, Mlpr, Rfr, Hgbr, Vor };

inline const char* learner_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::Sgdr: return "sgdr";
    case LearnerKind::Mlpr: return "mlpr";
    case LearnerKind::Rfr: return "rfr";
    case LearnerKind::Hgbr: return "hgbr";
    case LearnerKind::Vor: return "vor";
  }
  return "sgdr";
}

inline LearnerKind parse_learner(const std::string& s) {
  if (s == "sgdr") return LearnerKind::Sgdr;
  if (s == "mlpr") return LearnerKind::Mlpr;
  if (s == "rfr") return LearnerKind::Rfr;
  if (s == "hgbr") return LearnerKind::Hgbr;
  if (s == "vor") return LearnerKind::Vor;
  throw ValidationError("unknown learner: " + s);
}

/// One grid-search point. The voter trains its four base learners with the
/// params carried here and combines them with the weight vector.
struct Hyperparameters {
  LearnerKind kind = LearnerKind::Hgbr;
  SgdrParams sgdr;
  MlprParams mlpr;
  RfrParams rfr;
  HgbrParams hgbr;
  std::array<double, 4> vor_weights = {0.0, 1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0};

  std::string id() const {
    std::ostringstream os;
    os << learner_name(kind) << "(";
    switch (kind) {
      case LearnerKind::Sgdr:
        os << sgdr.loss << ";" << sgdr.penalty << ";" << sgdr.learning_rate << ";"
           << sgdr.max_iter;
        break;
      case LearnerKind::Mlpr: {
        os << "(";
        for (std::size_t i = 0; i < mlpr.hidden_layer_sizes.size(); ++i)
          os << (i ? "," : "") << mlpr.hidden_layer_sizes[i];
        os << ");" << mlpr.activation << ";" << mlpr.learning_rate << ";" << mlpr.epochs;
        break;
      }
      case LearnerKind::Rfr:
        os << rfr.n_estimators << ";" << rfr.criterion << ";" << rfr.max_depth << ";"
           << rfr.min_samples_split;
        break;
      case LearnerKind::Hgbr:
        os << hgbr.loss << ";" << hgbr.max_depth << ";" << hgbr.min_samples_leaf << ";"
           << hgbr.max_iter;
        break;
      case LearnerKind::Vor:
        os << format_double(vor_weights[0]) << "," << format_double(vor_weights[1]) << ","
           << format_double(vor_weights[2]) << "," << format_double(vor_weights[3]);
        break;
    }
    os << ")";
    return os.str();
  }
};

/// A trained learner plus everything prediction needs: fitted scaler, the
/// feature mask, the training distribution summary and the seed.
struct TrainedModel {
  LearnerKind kind = LearnerKind::Hgbr;

  SgdModel sgd;
  MlpModel mlp;
  ForestModel forest;
  HgbModel hgb;
  std::array<double, 4> voter_weights = {0, 0, 0, 0};
  std::vector<TrainedModel> sub_models;  // voter only; SGDR, MLPR, RFR, HGBR order

  RobustScalerStats scaler;
  std::vector<std::string> feature_names;
  std::vector<int> schema_columns;
  std::vector<double> dist_min, dist_max;  // per-feature range of scaled training rows
  std::string schema_version;
  std::uint64_t seed = 0;
  std::string hp_id;

  /// Predict from an already scaled row (pipeline output space).
  double predict_scaled(const std::vector<double>& row) const {
    switch (kind) {
      case LearnerKind::Sgdr: return sgd.predict(row);
      case LearnerKind::Mlpr: return mlp.predict(row);
      case LearnerKind::Rfr: return forest.predict(row);
      case LearnerKind::Hgbr: return hgb.predict(row);
      case LearnerKind::Vor: {
        double wsum = 0, acc = 0;
        for (std::size_t i = 0; i < sub_models.size(); ++i) {
          acc += voter_weights[i] * sub_models[i].predict_scaled(row);
          wsum += voter_weights[i];
        }
        return acc / wsum;
      }
    }
    return 0;
  }

  /// Predict from raw feature values: selects the model's columns when given
  /// a full schema vector, then applies the stored scaler.
  double predict_raw(const std::vector<double>& full_row) const {
    std::vector<double> row;
    if (!schema_columns.empty() && full_row.size() != feature_names.size()) {
      row.reserve(schema_columns.size());
      for (int c : schema_columns) {
        if (c < 0 || static_cast<std::size_t>(c) >= full_row.size())
          throw ValidationError("feature vector does not match the model schema");
        row.push_back(full_row[c]);
      }
    } else if (full_row.size() == feature_names.size()) {
      row = full_row;
    } else {
      throw ValidationError("feature vector width does not match the model");
    }
    robust_apply(scaler, row);
    return predict_scaled(row);
  }
};

/// Train the configured learner on scaled rows. The voter trains its four
/// base learners (seeds split per position) and validates the weights.
inline TrainedModel train_model(const Hyperparameters& hp,
                                const std::vector<std::vector<double>>& x,
                                const std::vector<double>& y, std::uint64_t seed) {
  TrainedModel m;
  m.kind = hp.kind;
  m.seed = seed;
  m.hp_id = hp.id();
  switch (hp.kind) {
    case LearnerKind::Sgdr:
      m.sgd = fit_sgdr(x, y, hp.sgdr, seed);
      break;
    case LearnerKind::Mlpr:
      m.mlp = fit_mlp(x, y, hp.mlpr, seed);
      break;
    case LearnerKind::Rfr:
      m.forest = fit_forest(x, y, hp.rfr, seed);
      break;
    case LearnerKind::Hgbr:
      m.hgb = fit_hgb(x, y, hp.hgbr);
      break;
    case LearnerKind::Vor: {
      double wsum = 0;
      for (double w : hp.vor_weights) {
        if (w < 0) throw ValidationError("voter weights must be nonnegative");
        wsum += w;
      }
      if (wsum <= 0) throw ValidationError("voter weights must not all be zero");
      m.voter_weights = hp.vor_weights;
      std::array<LearnerKind, 4> kinds = {LearnerKind::Sgdr, LearnerKind::Mlpr, LearnerKind::Rfr,
                                          LearnerKind::Hgbr};
      for (std::size_t i = 0; i < kinds.size(); ++i) {
        Hyperparameters sub_hp = hp;
        sub_hp.kind = kinds[i];
        std::uint64_t sub_seed = seed + 0x100 * (i + 1);
        if (hp.vor_weights[i] == 0.0 && kinds[i] == LearnerKind::Sgdr) {
          // zero-weight linear member still participates structurally; train
          // cheaply since its prediction never contributes
          sub_hp.sgdr.max_iter = 1;
        }
        m.sub_models.push_back(train_model(sub_hp, x, y, sub_seed));
      }
      break;
    }
  }
  return m;
}

/// Weighted combination of four already trained models.
inline TrainedModel fit_vor(std::vector<TrainedModel> models, const std::array<double, 4>& weights) {
  if (models.size() != 4) throw ValidationError("voter needs exactly four sub-models");
  double wsum = 0;
  for (double w : weights) {
    if (w < 0) throw ValidationError("voter weights must be nonnegative");
    wsum += w;
  }
  if (wsum <= 0) throw ValidationError("voter weights must not all be zero");
  TrainedModel m;
  m.kind = LearnerKind::Vor;
  m.voter_weights = weights;
  m.sub_models = std::move(models);
  return m;
}

/// Fill the prediction envelope after training.
inline void attach_envelope(TrainedModel& model, const RobustScalerStats& scaler,
                            const std::vector<std::string>& feature_names,
                            const std::vector<int>& schema_columns,
                            const std::vector<std::vector<double>>& scaled_train_rows,
                            std::uint64_t seed) {
  model.scaler = scaler;
  model.feature_names = feature_names;
  model.schema_columns = schema_columns;
  model.schema_version = kSchemaVersion;
  model.seed = seed;
  const std::size_t d = feature_names.size();
  model.dist_min.assign(d, std::numeric_limits<double>::infinity());
  model.dist_max.assign(d, -std::numeric_limits<double>::infinity());
  for (const auto& row : scaled_train_rows)
    for (std::size_t c = 0; c < d; ++c) {
      model.dist_min[c] = std::min(model.dist_min[c], row[c]);
      model.dist_max[c] = std::max(model.dist_max[c], row[c]);
    }
  if (scaled_train_rows.empty()) {
    model.dist_min.assign(d, 0.0);
    model.dist_max.assign(d, 0.0);
  }
}

// ---------------------------------------------------------------------------
// Serialization: versioned text, hex floats for exact round trips
// ---------------------------------------------------------------------------

namespace detail {

inline void write_doubles(std::ostream& os, const char* key, const std::vector<double>& v) {
  os << key << ":";
  for (double d : v) os << " " << format_double_exact(d);
  os << "\n";
}

inline std::vector<double> read_doubles(const std::string& line) {
  std::vector<double> out;
  auto pos = line.find(':');
  std::istringstream is(line.substr(pos + 1));
  std::string tok;
  while (is >> tok) out.push_back(parse_double_exact(tok));
  return out;
}

inline void serialize_payload(const TrainedModel& m, std::ostream& os) {
  os << "kind: " << learner_name(m.kind) << "\n";
  switch (m.kind) {
    case LearnerKind::Sgdr:
      write_doubles(os, "weights", m.sgd.weights);
      write_doubles(os, "intercept", {m.sgd.intercept});
      break;
    case LearnerKind::Mlpr: {
      os << "activation: " << m.mlp.activation << "\n";
      os << "layers:";
      for (int s : m.mlp.layer_sizes) os << " " << s;
      os << "\n";
      for (std::size_t l = 0; l < m.mlp.weights.size(); ++l) {
        write_doubles(os, "w", m.mlp.weights[l]);
        write_doubles(os, "b", m.mlp.biases[l]);
      }
      break;
    }
    case LearnerKind::Rfr: {
      os << "trees: " << m.forest.trees.size() << "\n";
      for (const auto& t : m.forest.trees) {
        os << "tree " << t.nodes.size() << "\n";
        for (const auto& n : t.nodes)
          os << n.feature << " " << format_double_exact(n.threshold) << " " << n.left << " "
             << n.right << " " << format_double_exact(n.value) << "\n";
      }
      break;
    }
    case LearnerKind::Hgbr: {
      write_doubles(os, "init", {m.hgb.init_value});
      write_doubles(os, "learning_rate", {m.hgb.learning_rate});
      os << "bins: " << m.hgb.bin_edges.size() << "\n";
      for (const auto& e : m.hgb.bin_edges) write_doubles(os, "edges", e);
      os << "trees: " << m.hgb.trees.size() << "\n";
      for (const auto& t : m.hgb.trees) {
        os << "tree " << t.nodes.size() << "\n";
        for (const auto& n : t.nodes)
          os << n.feature << " " << n.bin << " " << n.left << " " << n.right << " "
             << format_double_exact(n.value) << "\n";
      }
      break;
    }
    case LearnerKind::Vor: {
      write_doubles(os, "voter_weights",
                    {m.voter_weights[0], m.voter_weights[1], m.voter_weights[2],
                     m.voter_weights[3]});
      for (const auto& sub : m.sub_models) {
        os << "submodel {\n";
        serialize_payload(sub, os);
        os << "}\n";
      }
      break;
    }
  }
}

inline std::string expect_line(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("model file truncated");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline std::string value_after_colon(const std::string& line) {
  auto pos = line.find(':');
  if (pos == std::string::npos) throw ValidationError("malformed model line: " + line);
  return std::string(trim_view(std::string_view(line).substr(pos + 1)));
}

inline TrainedModel parse_payload(std::istream& is) {
  TrainedModel m;
  std::string line = expect_line(is);
  if (!starts_with(line, "kind:")) throw ValidationError("expected kind line");
  m.kind = parse_learner(value_after_colon(line));
  switch (m.kind) {
    case LearnerKind::Sgdr:
      m.sgd.weights = read_doubles(expect_line(is));
      m.sgd.intercept = read_doubles(expect_line(is)).at(0);
      break;
    case LearnerKind::Mlpr: {
      m.mlp.activation = value_after_colon(expect_line(is));
      {
        std::string l = expect_line(is);
        std::istringstream ls(l.substr(l.find(':') + 1));
        int v;
        while (ls >> v) m.mlp.layer_sizes.push_back(v);
      }
      for (std::size_t l = 0; l + 1 < m.mlp.layer_sizes.size(); ++l) {
        m.mlp.weights.push_back(read_doubles(expect_line(is)));
        m.mlp.biases.push_back(read_doubles(expect_line(is)));
      }
      break;
    }
    case LearnerKind::Rfr: {
      int count = std::stoi(value_after_colon(expect_line(is)));
      for (int t = 0; t < count; ++t) {
        std::string header = expect_line(is);
        int nodes = std::stoi(header.substr(header.find(' ') + 1));
        DecisionTree tree;
        for (int k = 0; k < nodes; ++k) {
          std::istringstream ls(expect_line(is));
          TreeNode n;
          std::string thr, val;
          ls >> n.feature >> thr >> n.left >> n.right >> val;
          n.threshold = parse_double_exact(thr);
          n.value = parse_double_exact(val);
          tree.nodes.push_back(n);
        }
        m.forest.trees.push_back(std::move(tree));
      }
      break;
    }
    case LearnerKind::Hgbr: {
      m.hgb.init_value = read_doubles(expect_line(is)).at(0);
      m.hgb.learning_rate = read_doubles(expect_line(is)).at(0);
      int bins = std::stoi(value_after_colon(expect_line(is)));
      for (int b = 0; b < bins; ++b) m.hgb.bin_edges.push_back(read_doubles(expect_line(is)));
      int count = std::stoi(value_after_colon(expect_line(is)));
      for (int t = 0; t < count; ++t) {
        std::string header = expect_line(is);
        int nodes = std::stoi(header.substr(header.find(' ') + 1));
        HgbTree tree;
        for (int k = 0; k < nodes; ++k) {
          std::istringstream ls(expect_line(is));
          HgbNode n;
          std::string val;
          ls >> n.feature >> n.bin >> n.left >> n.right >> val;
          n.value = parse_double_exact(val);
          tree.nodes.push_back(n);
        }
        m.hgb.trees.push_back(std::move(tree));
      }
      break;
    }
    case LearnerKind::Vor: {
      auto w = read_doubles(expect_line(is));
      double wsum = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        m.voter_weights[i] = w.at(i);
        if (m.voter_weights[i] < 0) throw ValidationError("negative voter weight in model file");
        wsum += m.voter_weights[i];
      }
      if (wsum <= 0) throw ValidationError("voter weights in model file sum to zero");
      for (int i = 0; i < 4; ++i) {
        std::string open = expect_line(is);
        if (open != "submodel {") throw ValidationError("expected submodel block");
        m.sub_models.push_back(parse_payload(is));
        std::string close = expect_line(is);
        if (close != "}") throw ValidationError("unterminated submodel block");
      }
      break;
    }
  }
  return m;
}

}  // namespace detail

inline void serialize_model(const TrainedModel& m, std::ostream& os) {
  os << "covpred-model/1\n";
  os << "schema: " << m.schema_version << "\n";
  os << "seed: " << m.seed << "\n";
  os << "hyperparameters: " << m.hp_id << "\n";
  os << "features:";
  for (const auto& n : m.feature_names) os << " " << n;
  os << "\n";
  os << "schema_columns:";
  for (int c : m.schema_columns) os << " " << c;
  os << "\n";
  detail::write_doubles(os, "scaler_median", m.scaler.median);
  detail::write_doubles(os, "scaler_iqr", m.scaler.iqr);
  detail::write_doubles(os, "dist_min", m.dist_min);
  detail::write_doubles(os, "dist_max", m.dist_max);
  detail::serialize_payload(m, os);
  os << "end\n";
}

inline TrainedModel parse_model(std::istream& is) {
  std::string magic = detail::expect_line(is);
  if (magic != "covpred-model/1") throw ValidationError("not a covpred model file");
  std::string schema = detail::value_after_colon(detail::expect_line(is));
  std::uint64_t seed = std::stoull(detail::value_after_colon(detail::expect_line(is)));
  std::string hp = detail::value_after_colon(detail::expect_line(is));

  std::vector<std::string> names;
  {
    std::string l = detail::expect_line(is);
    std::istringstream ls(l.substr(l.find(':') + 1));
    std::string tok;
    while (ls >> tok) names.push_back(tok);
  }
  std::vector<int> cols;
  {
    std::string l = detail::expect_line(is);
    std::istringstream ls(l.substr(l.find(':') + 1));
    int v;
    while (ls >> v) cols.push_back(v);
  }
  RobustScalerStats scaler;
  scaler.median = detail::read_doubles(detail::expect_line(is));
  scaler.iqr = detail::read_doubles(detail::expect_line(is));
  std::vector<double> dmin = detail::read_doubles(detail::expect_line(is));
  std::vector<double> dmax = detail::read_doubles(detail::expect_line(is));

  TrainedModel m = detail::parse_payload(is);
  std::string end = detail::expect_line(is);
  if (end != "end") throw ValidationError("missing model terminator");
  m.schema_version = schema;
  m.seed = seed;
  m.hp_id = hp;
  m.feature_names = std::move(names);
  m.schema_columns = std::move(cols);
  m.scaler = std::move(scaler);
  m.dist_min = std::move(dmin);
  m.dist_max = std::move(dmax);
  return m;
}

}  // namespace covpred
