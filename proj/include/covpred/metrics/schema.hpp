#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "covpred/common.hpp"
#include "covpred/metrics/cc.hpp"

namespace covpred {

inline constexpr const char* kSchemaVersion = "covpred-schema/1";

enum class FeatureLevel { Package, File, Class };
enum class StatOp { None, Sum, Avg, Min, Max, Log, Sd };
enum class MethodFilter { None, All, Namm };

struct FeatureSpec {
  std::string name;
  FeatureLevel level = FeatureLevel::Class;
  std::string base;  // base metric mnemonic
  StatOp op = StatOp::None;
  MethodFilter filter = MethodFilter::None;
  bool has_cc_variant = false;
  CcVariant cc_variant = CcVariant::Standard;
  bool is_base = false;  // survives sub-metric elimination
};

/// Statistical operators over a filtered value list. Empty input yields all
/// zeros; LOG is ln(1 + SUM); SD is the population standard deviation.
struct SubMetricStats {
  double sum = 0, avg = 0, min = 0, max = 0, log = 0, sd = 0;

  double get(StatOp op) const {
    switch (op) {
      case StatOp::Sum: return sum;
      case StatOp::Avg: return avg;
      case StatOp::Min: return min;
      case StatOp::Max: return max;
      case StatOp::Log: return log;
      case StatOp::Sd: return sd;
      case StatOp::None: return sum;
    }
    return sum;
  }
};

inline SubMetricStats submetric_stats(const std::vector<double>& values) {
  SubMetricStats s;
  if (values.empty()) return s;  // all operators yield 0 on the empty set
  s.min = values[0];
  s.max = values[0];
  for (double v : values) {
    s.sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.avg = s.sum / static_cast<double>(values.size());
  double var = 0;
  for (double v : values) var += (v - s.avg) * (v - s.avg);
  s.sd = std::sqrt(var / static_cast<double>(values.size()));
  s.log = std::log1p(s.sum);
  return s;
}

/// The fixed, versioned feature catalog: a package slice, a file-level
/// lexical slice and a class slice, 296 named features in total.
class MetricSchema {
 public:
  static const MetricSchema& instance() {
    static const MetricSchema schema;
    return schema;
  }

  const std::vector<FeatureSpec>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  const FeatureSpec& at(std::size_t i) const { return features_[i]; }

  int index_of(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? -1 : it->second;
  }

  std::size_t package_width() const { return package_width_; }
  std::size_t file_width() const { return file_width_; }
  std::size_t class_width() const { return class_width_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(features_.size());
    for (const auto& f : features_) out.push_back(f.name);
    return out;
  }

  static const std::array<StatOp, 6>& ops() {
    static const std::array<StatOp, 6> kOps = {StatOp::Sum, StatOp::Avg, StatOp::Min,
                                               StatOp::Max, StatOp::Log, StatOp::Sd};
    return kOps;
  }

  static std::string op_suffix(StatOp op) {
    switch (op) {
      case StatOp::Sum: return "_SUM";
      case StatOp::Avg: return "_AVG";
      case StatOp::Min: return "_MIN";
      case StatOp::Max: return "_MAX";
      case StatOp::Log: return "_LOG";
      case StatOp::Sd: return "_SD";
      case StatOp::None: return "";
    }
    return "";
  }

  static const std::array<const char*, 17>& lexical_names() {
    static const std::array<const char*, 17> kNames = {
        "NOTK", "NOTKU", "NOID",   "NOIDU",  "NOKW",    "NOKWU", "NOASS", "NOOP", "NOOPU",
        "NOSC", "NODOT", "NOREPR", "NOCJST", "NOCUJST", "NOEXST", "NONEW", "NOSUPER"};
    return kNames;
  }

  static const std::array<std::pair<CcVariant, const char*>, 4>& cc_variants() {
    static const std::array<std::pair<CcVariant, const char*>, 4> kVariants = {
        std::pair<CcVariant, const char*>{CcVariant::Standard, "CSCC"},
        std::pair<CcVariant, const char*>{CcVariant::Strict, "CSCCS"},
        std::pair<CcVariant, const char*>{CcVariant::Modified, "CSCCM"},
        std::pair<CcVariant, const char*>{CcVariant::Essential, "CSCCE"}};
    return kVariants;
  }

 private:
  MetricSchema() {
    build_package_block();
    package_width_ = features_.size();
    build_file_block();
    file_width_ = features_.size() - package_width_;
    build_class_block();
    class_width_ = features_.size() - package_width_ - file_width_;
    for (std::size_t i = 0; i < features_.size(); ++i)
      by_name_.emplace(features_[i].name, static_cast<int>(i));
  }

  void add(FeatureSpec spec) { features_.push_back(std::move(spec)); }

  void add_plain(FeatureLevel level, const std::string& name, bool is_base = true) {
    FeatureSpec f;
    f.name = name;
    f.level = level;
    f.base = name;
    f.is_base = is_base;
    add(std::move(f));
  }

  // A web over the two method filters and six operators. The ALL+SUM cell
  // carries the bare base name when `absorb` is set (the base metric IS the
  // sum); otherwise it is named BASE_SUM and a separate plain feature exists.
  void add_web(FeatureLevel level, const std::string& base, bool absorb) {
    for (MethodFilter filter : {MethodFilter::All, MethodFilter::Namm}) {
      for (StatOp op : ops()) {
        FeatureSpec f;
        f.level = level;
        f.base = base;
        f.op = op;
        f.filter = filter;
        std::string name = base;
        if (filter == MethodFilter::Namm) name += "_NAMM";
        if (op == StatOp::Sum) {
          if (filter == MethodFilter::All && absorb) f.is_base = true;
          if (!(absorb || filter == MethodFilter::Namm)) name += "_SUM";
          if (!absorb && filter == MethodFilter::Namm) name += "_SUM";
        } else {
          name += op_suffix(op);
        }
        f.name = name;
        add(std::move(f));
      }
    }
  }

  void add_cc_web(FeatureLevel level) {
    for (const auto& [variant, cls_name] : cc_variants()) {
      std::string base = cls_name;
      if (level == FeatureLevel::Package) base = "PK" + std::string(cls_name).substr(2);
      for (MethodFilter filter : {MethodFilter::All, MethodFilter::Namm}) {
        for (StatOp op : ops()) {
          FeatureSpec f;
          f.level = level;
          f.base = base;
          f.op = op;
          f.filter = filter;
          f.has_cc_variant = true;
          f.cc_variant = variant;
          std::string name = base;
          if (filter == MethodFilter::Namm) name += "_NAMM";
          if (op == StatOp::Sum) {
            if (filter == MethodFilter::All && variant == CcVariant::Standard) f.is_base = true;
          } else {
            name += op_suffix(op);
          }
          f.name = name;
          add(std::move(f));
        }
      }
    }
  }

  void build_package_block() {
    // direct package counts
    add_plain(FeatureLevel::Package, "PKNOCS");
    add_plain(FeatureLevel::Package, "PKNOFL");
    add_plain(FeatureLevel::Package, "PKNOI");
    add_plain(FeatureLevel::Package, "PKNOAC");
    // class-count lifts: SUM (bare name) and AVG over member classes
    for (const char* base : {"PKNOSM", "PKNOSA", "PKNOIM", "PKNOIA", "PKNOMNAMM", "PKNODM",
                             "PKNOPM", "PKNOPRM", "PKNOPLM", "PKNOAMM"}) {
      FeatureSpec sum;
      sum.level = FeatureLevel::Package;
      sum.base = base;
      sum.op = StatOp::Sum;
      sum.name = base;
      sum.is_base = true;
      add(std::move(sum));
      FeatureSpec avg;
      avg.level = FeatureLevel::Package;
      avg.base = base;
      avg.op = StatOp::Avg;
      avg.name = std::string(base) + "_AVG";
      add(std::move(avg));
    }
    add_web(FeatureLevel::Package, "PKLOC", /*absorb=*/true);
    add_web(FeatureLevel::Package, "PKNOST", /*absorb=*/true);
    for (StatOp op : ops()) {  // nesting lift has no method filter
      FeatureSpec f;
      f.level = FeatureLevel::Package;
      f.base = "PKNESTING";
      f.op = op;
      f.name = op == StatOp::Sum ? "PKNESTING" : "PKNESTING" + op_suffix(op);
      f.is_base = op == StatOp::Sum;
      add(std::move(f));
    }
    add_cc_web(FeatureLevel::Package);
  }

  void build_file_block() {
    for (const char* n : lexical_names()) add_plain(FeatureLevel::File, n);
  }

  void build_class_block() {
    add_plain(FeatureLevel::Class, "CSLOC");
    add_web(FeatureLevel::Class, "CSLOC", /*absorb=*/false);
    add_plain(FeatureLevel::Class, "CSNOST");
    add_web(FeatureLevel::Class, "CSNOST", /*absorb=*/false);
    for (const char* n : {"CSNOSM", "CSNOSA", "CSNOIM", "CSNOIA", "CSNOM", "CSNOMNAMM", "CSNOCON"})
      add_plain(FeatureLevel::Class, n);
    add_plain(FeatureLevel::Class, "CSNOP");
    add_web(FeatureLevel::Class, "CSNOP", /*absorb=*/false);
    add_cc_web(FeatureLevel::Class);
    add_plain(FeatureLevel::Class, "CSNESTING");
    add_web(FeatureLevel::Class, "CSNESTING", /*absorb=*/false);
    add_web(FeatureLevel::Class, "CSPATH", /*absorb=*/true);
    add_web(FeatureLevel::Class, "CSKNOTS", /*absorb=*/true);
    for (const char* n : {"LOCM", "CBO", "RFC", "FANIN", "FANOUT", "DEPENDS", "DEPENDSBY"})
      add_plain(FeatureLevel::Class, n);
    add_plain(FeatureLevel::Class, "ATFD");
    add_web(FeatureLevel::Class, "ATFD", /*absorb=*/false);
    add_plain(FeatureLevel::Class, "CFNAMM");
    add_plain(FeatureLevel::Class, "DAC");
    add_plain(FeatureLevel::Class, "NOMCALL");
    add_web(FeatureLevel::Class, "NOMCALL", /*absorb=*/false);
    for (const char* n : {"CSNODM", "CSNOPM", "CSNOPRM", "CSNOPLM", "CSNOAMM"})
      add_plain(FeatureLevel::Class, n);
    for (const char* n : {"DIT", "NOC", "NOP", "NIM", "NMO", "NOII"})
      add_plain(FeatureLevel::Class, n);
  }

  std::vector<FeatureSpec> features_;
  std::map<std::string, int> by_name_;
  std::size_t package_width_ = 0;
  std::size_t file_width_ = 0;
  std::size_t class_width_ = 0;
};

/// One class's feature vector aligned to the schema.
struct FeatureVector {
  std::string class_name;
  std::vector<double> values;
};

}  // namespace covpred
