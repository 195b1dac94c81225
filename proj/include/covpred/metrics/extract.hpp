#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "covpred/cfg.hpp"
#include "covpred/metrics/cc.hpp"
#include "covpred/metrics/lexical.hpp"
#include "covpred/metrics/schema.hpp"
#include "covpred/parallel.hpp"
#include "covpred/project.hpp"

namespace covpred {

/// Per-method measures feeding the class-level sub-metric webs.
struct MethodMeasure {
  bool is_ctor = false;
  bool concrete = false;  // has a body
  bool namm = false;
  double loc = 0;
  double nost = 0;
  double nop = 0;
  double nesting = 0;
  double path = 1;
  double knots = 0;
  CcValues cc;
  double call_sites = 0;
  double foreign_calls = 0;
  double atfd = 0;
};

/// Computes every class's 296-value feature vector from an analyzed project.
/// Extraction is a pure function of the immutable model; output order is
/// canonical (classes sorted by qualified name).
class FeatureExtractor {
 public:
  explicit FeatureExtractor(const AnalyzedProject& project) : project_(project) {
    const auto& schema = MetricSchema::instance();
    const auto& model = project.model;

    file_lexical_.resize(model.files.size());
    file_code_lines_.resize(model.files.size());
    for (std::size_t fi = 0; fi < model.files.size(); ++fi) {
      file_lexical_[fi] = compute_lexical_metrics(model.files[fi].tokens);
      for (const Token& t : model.files[fi].tokens.tokens())
        if (t.is_code()) file_code_lines_[fi].insert(t.line);
    }

    class_slices_.resize(model.classes.size());
    method_measures_.resize(model.classes.size());
    parallel_for(model.classes.size(), [&](std::size_t ci) { compute_class_slice(ci); });

    package_slices_.resize(model.packages.size());
    package_of_class_.assign(model.classes.size(), -1);
    for (std::size_t pi = 0; pi < model.packages.size(); ++pi) {
      for (int ci : model.packages[pi].classes) package_of_class_[ci] = static_cast<int>(pi);
      compute_package_slice(pi);
    }

    vectors_.reserve(model.classes.size());
    const std::size_t pw = schema.package_width();
    const std::size_t fw = schema.file_width();
    for (std::size_t ci = 0; ci < model.classes.size(); ++ci) {
      FeatureVector v;
      v.class_name = model.classes[ci].qualified_name;
      v.values.resize(schema.size(), 0.0);
      const auto& pkg = package_slices_[package_of_class_[ci]];
      std::copy(pkg.begin(), pkg.end(), v.values.begin());
      int fi = model.classes[ci].file_index;
      if (fi >= 0)
        std::copy(file_lexical_[fi].begin(), file_lexical_[fi].end(), v.values.begin() + pw);
      std::copy(class_slices_[ci].begin(), class_slices_[ci].end(), v.values.begin() + pw + fw);
      vectors_.push_back(std::move(v));
    }
  }

  const std::vector<FeatureVector>& vectors() const { return vectors_; }

  const FeatureVector* find(const std::string& qualified_name) const {
    for (const auto& v : vectors_)
      if (v.class_name == qualified_name) return &v;
    return nullptr;
  }

  const std::vector<MethodMeasure>& method_measures(int class_idx) const {
    return method_measures_[class_idx];
  }

 private:
  double count_code_lines(int file_idx, std::size_t from, std::size_t to) const {
    if (file_idx < 0 || from == 0 || to < from) return 0;
    const auto& lines = file_code_lines_[file_idx];
    auto lo = lines.lower_bound(from);
    auto hi = lines.upper_bound(to);
    return static_cast<double>(std::distance(lo, hi));
  }

  static std::string method_sig(const MethodDecl& m) {
    return m.name + "/" + std::to_string(m.param_count());
  }

  void compute_class_slice(std::size_t ci) {
    const auto& schema = MetricSchema::instance();
    const auto& model = project_.model;
    const SymbolIndex& index = project_.index;
    const ClassDecl& cls = model.classes[ci];
    const ClassRefs& refs = index.refs(static_cast<int>(ci));
    const auto& links = index.links(static_cast<int>(ci));

    auto& measures = method_measures_[ci];
    measures.resize(cls.methods.size());
    for (std::size_t mi = 0; mi < cls.methods.size(); ++mi) {
      const MethodDecl& m = cls.methods[mi];
      MethodMeasure& mm = measures[mi];
      mm.is_ctor = m.is_constructor;
      mm.concrete = m.has_body();
      mm.namm = m.is_namm();
      mm.nop = static_cast<double>(m.param_count());
      mm.loc = count_code_lines(cls.file_index, m.start_line, m.end_line);
      if (m.has_body()) {
        Cfg cfg = build_cfg(m);
        mm.cc = compute_cc(cfg);
        mm.knots = knot_count(cfg);
        mm.nost = statement_count(m);
        mm.nesting = max_nesting(m);
        mm.path = npath(m);
      }
      const MethodInfo& info = index.refs(static_cast<int>(ci)).methods[mi];
      mm.call_sites = info.call_sites;
      mm.foreign_calls = info.foreign_calls;
      mm.atfd = static_cast<double>(info.foreign_fields.size());
    }

    // web population: concrete non-constructor methods
    std::vector<const MethodMeasure*> population;
    for (const auto& mm : measures)
      if (mm.concrete && !mm.is_ctor) population.push_back(&mm);

    auto web_values = [&](auto getter, MethodFilter filter) {
      std::vector<double> vals;
      for (const auto* mm : population) {
        if (filter == MethodFilter::Namm && !mm->namm) continue;
        vals.push_back(getter(*mm));
      }
      return vals;
    };

    // plain counts
    int nosm = 0, noim = 0, nocon = 0, noamm = 0, nomnamm = 0;
    int nodm = 0, nopm = 0, noprm = 0, noplm = 0;
    double max_params = 0;
    for (const auto& m : cls.methods) {
      if (m.is_constructor) {
        ++nocon;
        max_params = std::max(max_params, static_cast<double>(m.param_count()));
        continue;
      }
      max_params = std::max(max_params, static_cast<double>(m.param_count()));
      if (m.is_static)
        ++nosm;
      else
        ++noim;
      if (!m.is_namm()) ++noamm;
      if (m.is_namm()) ++nomnamm;
      switch (m.visibility) {
        case Visibility::Public: ++nopm; break;
        case Visibility::Protected: ++noprm; break;
        case Visibility::Private: ++noplm; break;
        case Visibility::Default: ++nodm; break;
      }
    }
    int nosa = 0, noia = 0;
    for (const auto& f : cls.fields) (f.is_static ? nosa : noia)++;

    // statements and nesting over every body (methods, ctors, initializers)
    double total_statements = 0;
    double max_nesting_all = 0;
    for (std::size_t mi = 0; mi < cls.methods.size(); ++mi) {
      if (!cls.methods[mi].has_body()) continue;
      total_statements += measures[mi].nost;
      max_nesting_all = std::max(max_nesting_all, measures[mi].nesting);
    }
    for (const auto& b : cls.initializer_blocks) {
      if (!b) continue;
      total_statements += statement_count(*b);
      int best = 0;
      detail::nesting_walk(*b, 0, best);
      max_nesting_all = std::max(max_nesting_all, static_cast<double>(best));
    }

    // cohesion: method pairs sharing no field minus pairs sharing one or more
    double locm = 0;
    {
      std::vector<const std::set<std::string>*> uses;
      for (std::size_t mi = 0; mi < cls.methods.size(); ++mi)
        if (!cls.methods[mi].is_constructor && cls.methods[mi].has_body())
          uses.push_back(&refs.methods[mi].own_fields_used);
      int disjoint = 0, sharing = 0;
      for (std::size_t a = 0; a < uses.size(); ++a)
        for (std::size_t b = a + 1; b < uses.size(); ++b) {
          bool any = false;
          for (const auto& f : *uses[a])
            if (uses[b]->count(f)) {
              any = true;
              break;
            }
          (any ? sharing : disjoint)++;
        }
      locm = std::max(0, disjoint - sharing);
    }

    // RFC: declared methods plus distinct project-local called methods
    double rfc = 0;
    {
      std::set<std::pair<int, std::string>> u;
      for (const auto& m : cls.methods) u.emplace(static_cast<int>(ci), method_sig(m));
      for (const auto& info : refs.methods)
        for (const auto& target : info.called) u.insert(target);
      rfc = static_cast<double>(u.size());
    }

    // inherited / overridden methods along the project-local superclass chain
    double nim = 0, nmo = 0;
    {
      std::set<std::string> declared;
      for (const auto& m : cls.methods)
        if (!m.is_constructor) declared.insert(method_sig(m));
      std::set<std::string> ancestor_sigs;
      int cur = links.super;
      while (cur >= 0) {
        for (const auto& m : model.classes[cur].methods)
          if (!m.is_constructor && !m.is_static && m.visibility != Visibility::Private)
            ancestor_sigs.insert(method_sig(m));
        cur = index.links(cur).super;
      }
      for (const auto& sig : ancestor_sigs)
        if (declared.count(sig))
          ++nmo;
        else
          ++nim;
    }

    double total_call_sites = refs.extra_call_sites;
    for (const auto& info : refs.methods) total_call_sites += info.call_sites;
    double cfnamm = 0;
    for (std::size_t mi = 0; mi < cls.methods.size(); ++mi)
      if (!cls.methods[mi].is_constructor && cls.methods[mi].is_namm())
        cfnamm += refs.methods[mi].foreign_calls;

    std::map<std::string, double> plain;
    plain["CSLOC"] = count_code_lines(cls.file_index, cls.start_line, cls.end_line);
    plain["CSNOST"] = total_statements;
    plain["CSNOSM"] = nosm;
    plain["CSNOSA"] = nosa;
    plain["CSNOIM"] = noim;
    plain["CSNOIA"] = noia;
    plain["CSNOM"] = nosm + noim;
    plain["CSNOMNAMM"] = nomnamm;
    plain["CSNOCON"] = nocon;
    plain["CSNOP"] = max_params;
    plain["CSNESTING"] = max_nesting_all;
    plain["LOCM"] = locm;
    plain["CBO"] = static_cast<double>(refs.cbo.size());
    plain["RFC"] = rfc;
    plain["FANIN"] = static_cast<double>(refs.fanin.size());
    plain["FANOUT"] = static_cast<double>(refs.fanout.size());
    plain["DEPENDS"] = index.depends(static_cast<int>(ci));
    plain["DEPENDSBY"] = index.depends_by(static_cast<int>(ci));
    plain["ATFD"] = static_cast<double>(refs.foreign_fields.size());
    plain["CFNAMM"] = cfnamm;
    plain["DAC"] = refs.dac;
    plain["NOMCALL"] = total_call_sites;
    plain["CSNODM"] = nodm;
    plain["CSNOPM"] = nopm;
    plain["CSNOPRM"] = noprm;
    plain["CSNOPLM"] = noplm;
    plain["CSNOAMM"] = noamm;
    plain["DIT"] = index.dit(static_cast<int>(ci));
    plain["NOC"] = static_cast<double>(links.children.size());
    plain["NOP"] = static_cast<double>(links.parents.size());
    plain["NIM"] = nim;
    plain["NMO"] = nmo;
    plain["NOII"] = static_cast<double>(cls.interfaces.size());

    // fill the class slice by walking the schema's class block
    const std::size_t pw = schema.package_width();
    const std::size_t fw = schema.file_width();
    auto& slice = class_slices_[ci];
    slice.assign(schema.class_width(), 0.0);
    for (std::size_t k = 0; k < schema.class_width(); ++k) {
      const FeatureSpec& spec = schema.at(pw + fw + k);
      double value = 0.0;
      if (spec.op == StatOp::None) {
        value = plain.at(spec.name);
      } else {
        std::vector<double> vals;
        if (spec.has_cc_variant) {
          CcVariant variant = spec.cc_variant;
          vals = web_values(
              [variant](const MethodMeasure& mm) {
                return static_cast<double>(mm.cc.get(variant));
              },
              spec.filter);
        } else if (spec.base == "CSLOC") {
          vals = web_values([](const MethodMeasure& mm) { return mm.loc; }, spec.filter);
        } else if (spec.base == "CSNOST") {
          vals = web_values([](const MethodMeasure& mm) { return mm.nost; }, spec.filter);
        } else if (spec.base == "CSNOP") {
          vals = web_values([](const MethodMeasure& mm) { return mm.nop; }, spec.filter);
        } else if (spec.base == "CSNESTING") {
          vals = web_values([](const MethodMeasure& mm) { return mm.nesting; }, spec.filter);
        } else if (spec.base == "CSPATH") {
          vals = web_values([](const MethodMeasure& mm) { return mm.path; }, spec.filter);
        } else if (spec.base == "CSKNOTS") {
          vals = web_values([](const MethodMeasure& mm) { return mm.knots; }, spec.filter);
        } else if (spec.base == "ATFD") {
          vals = web_values([](const MethodMeasure& mm) { return mm.atfd; }, spec.filter);
        } else if (spec.base == "NOMCALL") {
          vals = web_values([](const MethodMeasure& mm) { return mm.call_sites; }, spec.filter);
        }
        value = submetric_stats(vals).get(spec.op);
      }
      slice[k] = value;
    }
  }

  void compute_package_slice(std::size_t pi) {
    const auto& schema = MetricSchema::instance();
    const auto& model = project_.model;
    const PackageDecl& pkg = model.packages[pi];
    const std::size_t pw = schema.package_width();
    const std::size_t fw = schema.file_width();

    auto class_feature = [&](int ci, const std::string& name) {
      int idx = schema.index_of(name);
      return class_slices_[ci][static_cast<std::size_t>(idx) - pw - fw];
    };
    auto lift = [&](const std::string& class_name) {
      std::vector<double> vals;
      vals.reserve(pkg.classes.size());
      for (int ci : pkg.classes) vals.push_back(class_feature(ci, class_name));
      return vals;
    };

    int interfaces = 0, abstracts = 0;
    for (int ci : pkg.classes) {
      const ClassDecl& c = model.classes[ci];
      if (c.kind == TypeKind::Interface) ++interfaces;
      if (c.kind == TypeKind::Class && c.is_abstract) ++abstracts;
    }

    auto& slice = package_slices_[pi];
    slice.assign(schema.package_width(), 0.0);
    for (std::size_t k = 0; k < schema.package_width(); ++k) {
      const FeatureSpec& spec = schema.at(k);
      double value = 0.0;
      if (spec.name == "PKNOCS") {
        value = static_cast<double>(pkg.classes.size());
      } else if (spec.name == "PKNOFL") {
        value = static_cast<double>(pkg.files.size());
      } else if (spec.name == "PKNOI") {
        value = interfaces;
      } else if (spec.name == "PKNOAC") {
        value = abstracts;
      } else if (spec.has_cc_variant) {
        // lift of the member classes' CC sums for this variant and filter
        std::string cls_name = "CS" + spec.base.substr(2);
        if (spec.filter == MethodFilter::Namm) cls_name += "_NAMM";
        value = submetric_stats(lift(cls_name)).get(spec.op);
      } else if (spec.base == "PKLOC" || spec.base == "PKNOST") {
        std::string cls_base = spec.base == "PKLOC" ? "CSLOC" : "CSNOST";
        std::string cls_name =
            spec.filter == MethodFilter::Namm ? cls_base + "_NAMM_SUM" : cls_base;
        value = submetric_stats(lift(cls_name)).get(spec.op);
      } else if (spec.base == "PKNESTING") {
        value = submetric_stats(lift("CSNESTING")).get(spec.op);
      } else {
        // count lifts: PKNOSM etc. aggregate the matching class count metric
        std::string cls_name = "CS" + spec.base.substr(2);
        value = submetric_stats(lift(cls_name)).get(spec.op);
      }
      slice[k] = value;
    }
  }

  const AnalyzedProject& project_;
  std::vector<std::array<double, 17>> file_lexical_;
  std::vector<std::set<std::size_t>> file_code_lines_;
  std::vector<std::vector<double>> class_slices_;
  std::vector<std::vector<double>> package_slices_;
  std::vector<std::vector<MethodMeasure>> method_measures_;
  std::vector<int> package_of_class_;
  std::vector<FeatureVector> vectors_;
};

}  // namespace covpred
