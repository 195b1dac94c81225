#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "covpred/parallel.hpp"
#include "covpred/parser.hpp"

namespace covpred {

struct SkipEntry {
  std::string path;
  std::string reason;
};

struct PackageDecl {
  std::string name;
  std::vector<int> classes;
  std::vector<int> files;
};

/// Per-method reference products from the resolution pass.
struct MethodInfo {
  int call_sites = 0;     // method invocation expressions
  int foreign_calls = 0;  // call sites whose target is not the declaring class
  std::set<std::pair<int, std::string>> called;  // resolved project-local targets
  std::set<std::string> own_fields_used;         // for cohesion
  std::set<std::pair<int, std::string>> foreign_fields;  // per-method ATFD pairs
};

/// Per-class reference products.
struct ClassRefs {
  std::set<int> cbo;      // field/param types, instantiations, call receivers
  std::set<int> fanout;   // cbo + inheritance targets + return types
  std::set<int> fanin;    // inverse of fanout
  std::set<std::pair<int, std::string>> foreign_fields;  // ATFD pairs
  int dac = 0;            // fields typed by a project-local class
  int extra_call_sites = 0;  // call sites in initializers and field initializers
  std::vector<MethodInfo> methods;  // aligned with ClassDecl::methods
};

class SymbolIndex;

struct ProjectModel {
  std::vector<FileUnit> files;
  std::vector<ClassDecl> classes;
  std::vector<PackageDecl> packages;
  std::vector<SkipEntry> skipped;

  int class_index(const std::string& qualified) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i].qualified_name == qualified) return static_cast<int>(i);
    return -1;
  }
};

/// Resolved links and reference sets over an immutable ProjectModel.
class SymbolIndex {
 public:
  struct Links {
    int super = -1;                  // project-local superclass (or extended interface head)
    std::string super_external;     // opaque name when unresolved
    std::vector<int> parents;       // all direct project-local parents (super + interfaces)
    std::vector<std::string> external_parents;
    std::vector<int> children;      // direct subclasses / subinterfaces
  };

  SymbolIndex() = default;

  void build(const ProjectModel& model) {
    model_ = &model;
    by_qualified_.clear();
    for (std::size_t i = 0; i < model.classes.size(); ++i)
      by_qualified_.emplace(model.classes[i].qualified_name, static_cast<int>(i));
    build_links();
    build_references();
  }

  int lookup(const std::string& qualified) const {
    auto it = by_qualified_.find(qualified);
    return it == by_qualified_.end() ? -1 : it->second;
  }

  const Links& links(int cls) const { return links_[cls]; }
  const ClassRefs& refs(int cls) const { return refs_[cls]; }

  /// Longest project-local inheritance chain including the class itself.
  int dit(int cls) const { return dit_[cls]; }

  /// Classes transitively reachable through fanout (start excluded).
  int depends(int cls) const { return closure_size(cls, /*reverse=*/false); }
  int depends_by(int cls) const { return closure_size(cls, /*reverse=*/true); }

  /// True when inheritance links form no cycle (checked by topological sort).
  bool inheritance_acyclic() const {
    std::vector<int> indeg(links_.size(), 0);
    for (const auto& l : links_)
      for (int c : l.children) ++indeg[c];
    std::vector<int> queue;
    for (std::size_t i = 0; i < links_.size(); ++i)
      if (indeg[i] == 0) queue.push_back(static_cast<int>(i));
    std::size_t seen = 0;
    while (!queue.empty()) {
      int v = queue.back();
      queue.pop_back();
      ++seen;
      for (int c : links_[v].children)
        if (--indeg[c] == 0) queue.push_back(c);
    }
    return seen == links_.size();
  }

  /// Resolve a textual type reference in the context of a class.
  int resolve_type(const std::string& name, int ctx_class) const {
    if (name.empty()) return -1;
    const ClassDecl& ctx = model_->classes[ctx_class];
    const FileUnit* file = ctx.file_index >= 0 ? &model_->files[ctx.file_index] : nullptr;

    if (name.find('.') != std::string::npos) {
      if (int idx = lookup(name); idx >= 0) return idx;
      std::string pkg_qualified = ctx.package_name.empty() ? name : ctx.package_name + "." + name;
      if (int idx = lookup(pkg_qualified); idx >= 0) return idx;
      return -1;
    }

    // own nested classes and enclosing-chain siblings
    {
      std::string base = ctx.name;  // dotted simple name, e.g. Outer.Inner
      while (true) {
        std::string candidate = base + "." + name;
        std::string qualified =
            ctx.package_name.empty() ? candidate : ctx.package_name + "." + candidate;
        if (int idx = lookup(qualified); idx >= 0) return idx;
        auto dot = base.rfind('.');
        if (dot == std::string::npos) break;
        base = base.substr(0, dot);
      }
    }
    // same file
    if (file) {
      for (int ci : file->class_indices) {
        const ClassDecl& c = model_->classes[ci];
        std::string simple = c.name;
        if (auto dot = simple.rfind('.'); dot != std::string::npos) simple = simple.substr(dot + 1);
        if (simple == name) return ci;
      }
    }
    // explicit imports
    if (file) {
      for (const auto& imp : file->imports) {
        if (imp.empty() || imp.back() == '*') continue;
        auto dot = imp.rfind('.');
        std::string simple = dot == std::string::npos ? imp : imp.substr(dot + 1);
        if (simple == name) return lookup(imp);
      }
    }
    // same package
    {
      std::string qualified = ctx.package_name.empty() ? name : ctx.package_name + "." + name;
      if (int idx = lookup(qualified); idx >= 0) return idx;
    }
    // on-demand imports
    if (file) {
      for (const auto& imp : file->imports) {
        if (imp.empty() || imp.back() != '*') continue;
        std::string qualified = imp.substr(0, imp.size() - 1) + name;  // "p.q.*" -> "p.q.name"
        if (int idx = lookup(qualified); idx >= 0) return idx;
      }
    }
    return -1;
  }

 private:
  void build_links() {
    const auto& classes = model_->classes;
    links_.assign(classes.size(), Links{});
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const ClassDecl& c = classes[i];
      if (!c.superclass.empty()) {
        int idx = resolve_type(c.superclass, static_cast<int>(i));
        if (idx >= 0 && idx != static_cast<int>(i)) {
          links_[i].super = idx;
          links_[i].parents.push_back(idx);
        } else {
          links_[i].super_external = c.superclass;
          links_[i].external_parents.push_back(c.superclass);
        }
      }
      for (const auto& iface : c.interfaces) {
        int idx = resolve_type(iface, static_cast<int>(i));
        if (idx >= 0 && idx != static_cast<int>(i)) {
          links_[i].parents.push_back(idx);
          // interfaces extending interfaces form the inheritance chain head
          if (c.kind == TypeKind::Interface && links_[i].super < 0) links_[i].super = idx;
        } else {
          links_[i].external_parents.push_back(iface);
        }
      }
    }
    // inheritance cycles are invalid Java; cut them so chain walks terminate
    for (std::size_t i = 0; i < classes.size(); ++i) {
      std::set<int> seen;
      int cur = static_cast<int>(i);
      while (cur >= 0) {
        if (!seen.insert(cur).second) {
          links_[i].super = -1;
          break;
        }
        cur = links_[cur].super;
      }
    }
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (links_[i].super >= 0) links_[links_[i].super].children.push_back(static_cast<int>(i));
    }
    // depth of inheritance: chain length including the class itself
    dit_.assign(classes.size(), 0);
    for (std::size_t i = 0; i < classes.size(); ++i) {
      int depth = 0;
      int cur = static_cast<int>(i);
      while (cur >= 0 && depth <= static_cast<int>(classes.size())) {
        ++depth;
        cur = links_[cur].super;
      }
      dit_[i] = depth;
    }
  }

  // --- reference extraction -------------------------------------------------

  struct Scope {
    std::map<std::string, std::string> var_types;  // name -> declared type
  };

  void build_references() {
    const auto& classes = model_->classes;
    refs_.assign(classes.size(), ClassRefs{});
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const ClassDecl& c = classes[i];
      ClassRefs& r = refs_[i];
      int self = static_cast<int>(i);

      for (const auto& f : c.fields) {
        int idx = resolve_type(f.type_name, self);
        if (idx >= 0 && idx != self) {
          r.cbo.insert(idx);
          ++r.dac;
        } else if (idx == self) {
          ++r.dac;
        }
      }
      for (int p : links_[self].parents) r.fanout.insert(p);

      r.methods.resize(c.methods.size());
      for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
        const MethodDecl& m = c.methods[mi];
        MethodInfo& info = r.methods[mi];
        Scope scope;
        for (const auto& p : m.params) {
          if (!p.name.empty()) scope.var_types[p.name] = p.type_name;
          int idx = resolve_type(p.type_name, self);
          if (idx >= 0 && idx != self) r.cbo.insert(idx);
        }
        if (!m.return_type.empty()) {
          int idx = resolve_type(m.return_type, self);
          if (idx >= 0 && idx != self) r.fanout.insert(idx);
        }
        if (m.body) {
          collect_scope(*m.body, scope);
          walk_stmt(*m.body, self, scope, &info, r);
        }
      }
      {
        MethodInfo init_info;
        Scope scope;
        for (const auto& b : c.initializer_blocks) {
          if (!b) continue;
          collect_scope(*b, scope);
          walk_stmt(*b, self, scope, &init_info, r);
        }
        for (const auto& e : c.field_initializers)
          if (e) walk_expr(*e, self, scope, &init_info, r, true);
        r.extra_call_sites = init_info.call_sites;
      }
      r.fanout.insert(r.cbo.begin(), r.cbo.end());
      r.fanout.erase(self);
      r.cbo.erase(self);
    }
    for (std::size_t i = 0; i < classes.size(); ++i)
      for (int dep : refs_[i].fanout)
        if (dep != static_cast<int>(i)) refs_[dep].fanin.insert(static_cast<int>(i));
  }

  void collect_scope(const Stmt& s, Scope& scope) const {
    if (s.kind == StmtKind::LocalVar || s.kind == StmtKind::ForEach) {
      for (const auto& n : s.decl_names)
        if (!scope.var_types.count(n)) scope.var_types[n] = s.decl_type;
    }
    if (s.body) collect_scope(*s.body, scope);
    if (s.else_body) collect_scope(*s.else_body, scope);
    for (const auto& c : s.stmts)
      if (c) collect_scope(*c, scope);
    for (const auto& c : s.cases)
      for (const auto& b : c.body)
        if (b) collect_scope(*b, scope);
    for (const auto& c : s.catches) {
      if (c.body) collect_scope(*c.body, scope);
    }
    if (s.finally_body) collect_scope(*s.finally_body, scope);
  }

  void walk_stmt(const Stmt& s, int self, const Scope& scope, MethodInfo* info, ClassRefs& r) const {
    if ((s.kind == StmtKind::LocalVar || s.kind == StmtKind::ForEach) && !s.decl_type.empty()) {
      // declared types of locals feed fanout but not CBO
      int idx = resolve_type(s.decl_type, self);
      if (idx >= 0 && idx != self) r.fanout.insert(idx);
    }
    if (s.expr) walk_expr(*s.expr, self, scope, info, r, true);
    for (const auto& e : s.exprs)
      if (e) walk_expr(*e, self, scope, info, r, true);
    if (s.body) walk_stmt(*s.body, self, scope, info, r);
    if (s.else_body) walk_stmt(*s.else_body, self, scope, info, r);
    for (const auto& c : s.stmts)
      if (c) walk_stmt(*c, self, scope, info, r);
    for (const auto& c : s.cases) {
      for (const auto& l : c.labels)
        if (l) walk_expr(*l, self, scope, info, r, false);
      for (const auto& b : c.body)
        if (b) walk_stmt(*b, self, scope, info, r);
    }
    for (const auto& c : s.catches)
      if (c.body) walk_stmt(*c.body, self, scope, info, r);
    if (s.finally_body) walk_stmt(*s.finally_body, self, scope, info, r);
  }

  // Static type of an expression as a project-local class index, -1 unknown.
  int static_type(const Expr& e, int self, const Scope& scope) const {
    switch (e.kind) {
      case ExprKind::This:
        return self;
      case ExprKind::Super:
        return links_[self].super;
      case ExprKind::New:
      case ExprKind::Cast:
        return resolve_type(e.name, self);
      case ExprKind::Name: {
        auto it = scope.var_types.find(e.name);
        if (it != scope.var_types.end()) return resolve_type(it->second, self);
        for (const auto& f : model_->classes[self].fields)
          if (f.name == e.name) return resolve_type(f.type_name, self);
        return resolve_type(e.name, self);  // may be a class name (static context)
      }
      case ExprKind::FieldAccess: {
        if (e.kids.empty()) return -1;
        int recv = static_type(*e.kids[0], self, scope);
        if (recv < 0) return -1;
        int cur = recv;
        while (cur >= 0) {
          for (const auto& f : model_->classes[cur].fields)
            if (f.name == e.name) return resolve_type(f.type_name, cur);
          cur = links_[cur].super;
        }
        return -1;
      }
      case ExprKind::MethodCall: {
        int target = resolve_call_target(e, self, scope);
        if (target < 0) return -1;
        int cur = target;
        while (cur >= 0) {
          for (const auto& m : model_->classes[cur].methods)
            if (!m.is_constructor && m.name == e.name) return resolve_type(m.return_type, cur);
          cur = links_[cur].super;
        }
        return -1;
      }
      default:
        return -1;
    }
  }

  // Declaring class of a call's target, -1 when external/unknown.
  int resolve_call_target(const Expr& call, int self, const Scope& scope) const {
    if (call.name == "this") return self;
    if (call.name == "super") return links_[self].super;
    if (!call.has_receiver) {
      // own method or inherited
      int cur = self;
      while (cur >= 0) {
        for (const auto& m : model_->classes[cur].methods)
          if (m.name == call.name) return cur;
        cur = links_[cur].super;
      }
      return -1;
    }
    int recv = static_type(*call.kids[0], self, scope);
    if (recv < 0) return -1;
    int cur = recv;
    while (cur >= 0) {
      for (const auto& m : model_->classes[cur].methods)
        if (m.name == call.name) return cur;
      cur = links_[cur].super;
    }
    return recv;  // class known, method not declared there (permissive)
  }

  void walk_expr(const Expr& e, int self, const Scope& scope, MethodInfo* info, ClassRefs& r,
                 bool in_code) const {
    const ClassDecl& cls = model_->classes[self];
    switch (e.kind) {
      case ExprKind::MethodCall: {
        if (info && in_code) ++info->call_sites;
        int target = resolve_call_target(e, self, scope);
        if (target >= 0 && target != self) {
          r.cbo.insert(target);
          if (info) {
            ++info->foreign_calls;
            info->called.emplace(target, e.name + "/" + std::to_string(e.kids.size() -
                                                                        (e.has_receiver ? 1 : 0)));
          }
        } else if (target == self && info) {
          info->called.emplace(self, e.name + "/" + std::to_string(e.kids.size() -
                                                                   (e.has_receiver ? 1 : 0)));
        } else if (target < 0 && info && e.has_receiver) {
          ++info->foreign_calls;  // receiver present but unresolved: foreign
        }
        break;
      }
      case ExprKind::New: {
        int idx = resolve_type(e.name, self);
        if (idx >= 0 && idx != self) r.cbo.insert(idx);
        break;
      }
      case ExprKind::Name: {
        if (info && !scope.var_types.count(e.name) && cls.has_field(e.name))
          info->own_fields_used.insert(e.name);
        break;
      }
      case ExprKind::FieldAccess: {
        if (!e.kids.empty()) {
          if (e.kids[0]->kind == ExprKind::This) {
            if (info && cls.has_field(e.name)) info->own_fields_used.insert(e.name);
          } else {
            int owner = static_type(*e.kids[0], self, scope);
            if (owner >= 0 && owner != self) {
              bool is_field = false;
              int cur = owner;
              while (cur >= 0 && !is_field) {
                is_field = model_->classes[cur].has_field(e.name);
                cur = links_[cur].super;
              }
              if (is_field) {
                r.foreign_fields.emplace(owner, e.name);
                if (info) info->foreign_fields.emplace(owner, e.name);
              }
            }
          }
        }
        break;
      }
      case ExprKind::Cast:
      case ExprKind::InstanceOf: {
        int idx = resolve_type(e.name, self);
        if (idx >= 0 && idx != self) r.fanout.insert(idx);
        break;
      }
      default:
        break;
    }
    for (const auto& k : e.kids)
      if (k) walk_expr(*k, self, scope, info, r, in_code);
    for (const auto& s : e.scoped_stmts) {
      if (s) {
        Scope inner = scope;
        collect_scope(*s, inner);
        walk_stmt(*s, self, inner, info, r);
      }
    }
  }

  int closure_size(int start, bool reverse) const {
    std::vector<bool> seen(refs_.size(), false);
    std::vector<int> stack;
    auto push_deps = [&](int v) {
      const auto& s = reverse ? refs_[v].fanin : refs_[v].fanout;
      for (int w : s)
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
    };
    push_deps(start);
    int count = 0;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      if (v != start) ++count;
      push_deps(v);
    }
    return count;
  }

  const ProjectModel* model_ = nullptr;
  std::map<std::string, int> by_qualified_;
  std::vector<Links> links_;
  std::vector<ClassRefs> refs_;
  std::vector<int> dit_;
};

/// Model plus index, built together and immutable afterwards.
struct AnalyzedProject {
  ProjectModel model;
  SymbolIndex index;
};

namespace detail {

inline void append_parsed(ProjectModel& model, ParsedFile&& pf,
                          std::set<std::string>& seen_names) {
  FileUnit unit = std::move(pf.unit);
  int file_idx = static_cast<int>(model.files.size());
  for (auto& cls : pf.classes) {
    cls.file_index = file_idx;
    if (!seen_names.insert(cls.qualified_name).second) {
      model.skipped.push_back(
          SkipEntry{unit.path, "duplicate qualified name: " + cls.qualified_name});
      continue;
    }
    unit.class_indices.push_back(model.classes.size());
    model.classes.push_back(std::move(cls));
  }
  model.files.push_back(std::move(unit));
}

inline void finalize_model(ProjectModel& model) {
  // canonical order: classes sorted by qualified name
  std::vector<std::size_t> order(model.classes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return model.classes[a].qualified_name < model.classes[b].qualified_name;
  });
  std::vector<int> new_pos(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) new_pos[order[i]] = static_cast<int>(i);
  std::vector<ClassDecl> sorted;
  sorted.reserve(model.classes.size());
  for (std::size_t i : order) sorted.push_back(std::move(model.classes[i]));
  model.classes = std::move(sorted);
  for (auto& f : model.files) {
    for (auto& ci : f.class_indices) ci = new_pos[ci];
    std::sort(f.class_indices.begin(), f.class_indices.end());
  }

  std::map<std::string, PackageDecl> packages;
  for (std::size_t i = 0; i < model.classes.size(); ++i)
    packages[model.classes[i].package_name].classes.push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < model.files.size(); ++i) {
    if (model.files[i].class_indices.empty()) continue;
    packages[model.files[i].package_name].files.push_back(static_cast<int>(i));
  }
  model.packages.clear();
  for (auto& [name, pkg] : packages) {
    pkg.name = name;
    model.packages.push_back(std::move(pkg));
  }
}

}  // namespace detail

/// Parse every .java file under root (sorted traversal, deterministic).
/// Files that fail to lex/parse land in the skip list, never dropped silently.
inline AnalyzedProject parse_project(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::exists(root) || !fs::is_directory(root))
    throw ValidationError("source root is not a readable directory: " + root.string());

  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".java")
      paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());

  // files lex/parse concurrently; assembly is a single-threaded merge in
  // path order, so the worker count never changes the model
  struct Slot {
    std::optional<ParsedFile> parsed;
    std::string error;
  };
  std::vector<Slot> slots(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) {
    std::ifstream in(paths[i], std::ios::binary);
    if (!in) {
      slots[i].error = "unreadable";
      return;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      slots[i].parsed = parse_file(buf.str(), paths[i].string());
    } catch (const ParseError& e) {
      slots[i].error = e.what();
    }
  });

  AnalyzedProject out;
  std::set<std::string> seen_names;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (slots[i].parsed)
      detail::append_parsed(out.model, std::move(*slots[i].parsed), seen_names);
    else
      out.model.skipped.push_back(SkipEntry{paths[i].string(), slots[i].error});
  }
  detail::finalize_model(out.model);
  out.index.build(out.model);
  return out;
}

/// Build a model from in-memory sources (path -> contents); used by tests.
inline AnalyzedProject parse_sources(const std::vector<std::pair<std::string, std::string>>& sources) {
  AnalyzedProject out;
  std::set<std::string> seen_names;
  for (const auto& [path, text] : sources) {
    try {
      ParsedFile pf = parse_file(text, path);
      detail::append_parsed(out.model, std::move(pf), seen_names);
    } catch (const ParseError& e) {
      out.model.skipped.push_back(SkipEntry{path, e.what()});
    }
  }
  detail::finalize_model(out.model);
  out.index.build(out.model);
  return out;
}

/// Debug dump: one record per class.
inline void dump_model(const AnalyzedProject& project, std::ostream& os) {
  const auto& model = project.model;
  for (std::size_t i = 0; i < model.classes.size(); ++i) {
    const ClassDecl& c = model.classes[i];
    os << "class " << c.qualified_name << "\n";
    os << "  kind: "
       << (c.kind == TypeKind::Class ? "class" : c.kind == TypeKind::Interface ? "interface" : "enum")
       << "\n";
    os << "  file: " << (c.file_index >= 0 ? model.files[c.file_index].path : "?") << "\n";
    os << "  lines: " << c.start_line << ".." << c.end_line << "\n";
    const auto& l = project.index.links(static_cast<int>(i));
    if (l.super >= 0) os << "  super: " << model.classes[l.super].qualified_name << "\n";
    if (!l.super_external.empty()) os << "  super-external: " << l.super_external << "\n";
    os << "  fields: " << c.fields.size() << "\n";
    os << "  methods:";
    for (const auto& m : c.methods) {
      os << " " << m.name << "/" << m.param_count();
      if (m.is_constructor) os << "[ctor]";
      if (m.is_accessor) os << "[get]";
      if (m.is_mutator) os << "[set]";
    }
    os << "\n";
  }
  for (const auto& s : model.skipped) os << "skipped " << s.path << ": " << s.reason << "\n";
}

}  // namespace covpred
