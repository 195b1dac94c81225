#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "covpred/ast.hpp"

namespace covpred {

/// Decision-point tally for one method body (anonymous-class and lambda
/// bodies fold into the enclosing method).
struct DecisionCounts {
  int ifs = 0;
  int loops = 0;
  int case_labels = 0;
  int catches = 0;
  int ternaries = 0;
  int sc_and = 0;  // '&&' occurrences inside condition expressions
  int sc_or = 0;   // '||' occurrences inside condition expressions
  int switch_stmts = 0;
  int switches_with_labels = 0;
};

struct CfgEdge {
  int from = 0;
  int to = 0;
  bool unstructured = false;  // break/continue or early return/throw
};

struct JumpRecord {
  std::size_t from_line = 0;
  std::size_t to_line = 0;
};

struct Cfg {
  int node_count = 0;  // includes entry and exit
  int entry = 0;
  int exit = 1;
  std::vector<CfgEdge> edges;
  std::vector<std::string> labels;
  DecisionCounts decisions;
  std::vector<JumpRecord> jumps;
  int unstructured_exit_edges = 0;

  int cyclomatic_number() const {
    return static_cast<int>(edges.size()) - node_count + 2;
  }
};

namespace detail {

// ---------------------------------------------------------------------------
// Decision counting (tree walk; includes folded scopes)
// ---------------------------------------------------------------------------

class DecisionWalker {
 public:
  DecisionCounts counts;

  void walk_stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::If:
        ++counts.ifs;
        walk_expr(s.expr.get(), true);
        break;
      case StmtKind::While:
      case StmtKind::DoWhile:
        ++counts.loops;
        walk_expr(s.expr.get(), true);
        break;
      case StmtKind::For:
        ++counts.loops;
        walk_expr(s.expr.get(), true);
        break;
      case StmtKind::ForEach:
        ++counts.loops;
        walk_expr(s.expr.get(), false);
        break;
      case StmtKind::Switch: {
        ++counts.switch_stmts;
        int labels = 0;
        for (const auto& c : s.cases) labels += c.label_count;
        counts.case_labels += labels;
        if (labels > 0) ++counts.switches_with_labels;
        walk_expr(s.expr.get(), false);
        break;
      }
      case StmtKind::Try:
        counts.catches += static_cast<int>(s.catches.size());
        break;
      default:
        walk_expr(s.expr.get(), false);
        break;
    }
    for (const auto& e : s.exprs) walk_expr(e.get(), false);
    if (s.body) walk_stmt(*s.body);
    if (s.else_body) walk_stmt(*s.else_body);
    for (const auto& child : s.stmts)
      if (child) walk_stmt(*child);
    for (const auto& c : s.cases) {
      for (const auto& l : c.labels) walk_expr(l.get(), false);
      for (const auto& b : c.body)
        if (b) walk_stmt(*b);
    }
    for (const auto& c : s.catches)
      if (c.body) walk_stmt(*c.body);
    if (s.finally_body) walk_stmt(*s.finally_body);
  }

  void walk_expr(const Expr* e, bool in_condition) {
    if (!e) return;
    if (e->kind == ExprKind::Ternary) {
      ++counts.ternaries;
      if (!e->kids.empty()) walk_expr(e->kids[0].get(), true);
      for (std::size_t i = 1; i < e->kids.size(); ++i) walk_expr(e->kids[i].get(), in_condition);
    } else {
      if (e->kind == ExprKind::Binary && in_condition) {
        if (e->name == "&&") ++counts.sc_and;
        if (e->name == "||") ++counts.sc_or;
      }
      for (const auto& k : e->kids) walk_expr(k.get(), in_condition);
    }
    for (const auto& s : e->scoped_stmts)
      if (s) walk_stmt(*s);
  }
};

// ---------------------------------------------------------------------------
// Graph construction
// ---------------------------------------------------------------------------

struct FrontierEdge {
  int node;
  bool unstructured;
};
using Frontier = std::vector<FrontierEdge>;

class CfgBuilder {
 public:
  explicit CfgBuilder(const MethodDecl& method) : method_(method) {
    cfg_.labels = {"entry", "exit"};
    cfg_.node_count = 2;
  }

  Cfg build() {
    Frontier f{{cfg_.entry, false}};
    if (method_.body) {
      f = process_block_children(method_.body->stmts, f, /*method_top=*/true);
    }
    connect(f, cfg_.exit);
    DecisionWalker walker;
    if (method_.body) walker.walk_stmt(*method_.body);
    cfg_.decisions = walker.counts;
    for (const auto& e : cfg_.edges)
      if (e.unstructured) ++cfg_.unstructured_exit_edges;
    return std::move(cfg_);
  }

 private:
  struct LoopCtx {
    std::string label;
    const Stmt* stmt;
    Frontier breaks;
    std::vector<int> continues;
    bool is_loop;
  };

  int add_node(const char* label) {
    cfg_.labels.emplace_back(label);
    return cfg_.node_count++;
  }

  void connect(const Frontier& f, int to) {
    for (const auto& fe : f) cfg_.edges.push_back(CfgEdge{fe.node, to, fe.unstructured});
  }

  Frontier process_block_children(const std::vector<StmtPtr>& stmts, Frontier f, bool method_top) {
    for (std::size_t i = 0; i < stmts.size(); ++i) {
      if (!stmts[i]) continue;
      bool tail = method_top && i + 1 == stmts.size();
      if (f.empty() && last_node_ >= 0) f.push_back({last_node_, false});  // dead code, keep connected
      f = process(*stmts[i], std::move(f), tail);
    }
    return f;
  }

  Frontier process(const Stmt& s, Frontier f, bool tail = false) {
    switch (s.kind) {
      case StmtKind::Block:
        return process_block_children(s.stmts, std::move(f), false);

      case StmtKind::If: {
        int cond = add_node("if");
        connect(f, cond);
        last_node_ = cond;
        Frontier out = s.body ? process(*s.body, Frontier{{cond, false}}) : Frontier{{cond, false}};
        if (s.else_body) {
          Frontier other = process(*s.else_body, Frontier{{cond, false}});
          out.insert(out.end(), other.begin(), other.end());
        } else {
          out.push_back({cond, false});
        }
        return out;
      }

      case StmtKind::While:
      case StmtKind::ForEach: {
        int head = add_node("loop");
        connect(f, head);
        last_node_ = head;
        loops_.push_back(LoopCtx{current_label_, &s, {}, {}, true});
        current_label_.clear();
        Frontier body_out = s.body ? process(*s.body, Frontier{{head, false}}) : Frontier{{head, false}};
        LoopCtx ctx = std::move(loops_.back());
        loops_.pop_back();
        connect(body_out, head);
        for (int c : ctx.continues) cfg_.edges.push_back(CfgEdge{c, head, true});
        Frontier out{{head, false}};
        out.insert(out.end(), ctx.breaks.begin(), ctx.breaks.end());
        return out;
      }

      case StmtKind::DoWhile: {
        int head = add_node("do");
        connect(f, head);
        last_node_ = head;
        loops_.push_back(LoopCtx{current_label_, &s, {}, {}, true});
        current_label_.clear();
        Frontier body_out = s.body ? process(*s.body, Frontier{{head, false}}) : Frontier{{head, false}};
        LoopCtx ctx = std::move(loops_.back());
        loops_.pop_back();
        int cond = add_node("do-cond");
        connect(body_out, cond);
        for (int c : ctx.continues) cfg_.edges.push_back(CfgEdge{c, cond, true});
        cfg_.edges.push_back(CfgEdge{cond, head, false});  // back edge
        last_node_ = cond;
        Frontier out{{cond, false}};
        out.insert(out.end(), ctx.breaks.begin(), ctx.breaks.end());
        return out;
      }

      case StmtKind::For: {
        if (!s.stmts.empty() || !s.exprs.empty()) {
          int init = add_node("for-init");
          connect(f, init);
          f = Frontier{{init, false}};
        }
        int head = add_node("for");
        connect(f, head);
        last_node_ = head;
        loops_.push_back(LoopCtx{current_label_, &s, {}, {}, true});
        current_label_.clear();
        Frontier body_out = s.body ? process(*s.body, Frontier{{head, false}}) : Frontier{{head, false}};
        LoopCtx ctx = std::move(loops_.back());
        loops_.pop_back();
        int update = add_node("for-update");
        connect(body_out, update);
        for (int c : ctx.continues) cfg_.edges.push_back(CfgEdge{c, update, true});
        cfg_.edges.push_back(CfgEdge{update, head, false});
        last_node_ = update;
        Frontier out{{head, false}};  // condition may exit even when absent
        out.insert(out.end(), ctx.breaks.begin(), ctx.breaks.end());
        return out;
      }

      case StmtKind::Switch: {
        int sel = add_node("switch");
        connect(f, sel);
        last_node_ = sel;
        loops_.push_back(LoopCtx{current_label_, &s, {}, {}, false});
        current_label_.clear();
        Frontier fall;  // fallthrough from previous group
        bool has_default = false;
        for (const auto& grp : s.cases) {
          if (grp.has_default) has_default = true;
          Frontier entry = fall;
          int fan = std::max(1, grp.label_count + (grp.has_default ? 1 : 0));
          for (int k = 0; k < fan; ++k) entry.push_back({sel, false});
          int first = add_node("case");
          connect(entry, first);
          last_node_ = first;
          fall = process_block_children(grp.body, Frontier{{first, false}}, false);
        }
        LoopCtx ctx = std::move(loops_.back());
        loops_.pop_back();
        Frontier out = std::move(fall);
        if (!has_default) out.push_back({sel, false});
        out.insert(out.end(), ctx.breaks.begin(), ctx.breaks.end());
        return out;
      }

      case StmtKind::Try: {
        int entry = add_node("try");
        connect(f, entry);
        last_node_ = entry;
        Frontier out = s.body ? process(*s.body, Frontier{{entry, false}}) : Frontier{{entry, false}};
        for (const auto& c : s.catches) {
          int handler = add_node("catch");
          cfg_.edges.push_back(CfgEdge{entry, handler, false});
          last_node_ = handler;
          Frontier h = c.body ? process(*c.body, Frontier{{handler, false}}) : Frontier{{handler, false}};
          out.insert(out.end(), h.begin(), h.end());
        }
        if (s.finally_body) {
          int fin = add_node("finally");
          connect(out, fin);
          last_node_ = fin;
          out = process(*s.finally_body, Frontier{{fin, false}});
        }
        return out;
      }

      case StmtKind::Return:
      case StmtKind::Throw: {
        int node = add_node(s.kind == StmtKind::Return ? "return" : "throw");
        connect(f, node);
        last_node_ = node;
        bool unstructured = !tail;
        cfg_.edges.push_back(CfgEdge{node, cfg_.exit, unstructured});
        if (unstructured) cfg_.jumps.push_back(JumpRecord{s.line, method_.end_line});
        return {};
      }

      case StmtKind::Break: {
        int node = add_node("break");
        connect(f, node);
        last_node_ = node;
        LoopCtx* target = find_target(s.label, /*continue_target=*/false);
        if (target) {
          target->breaks.push_back({node, true});
          cfg_.jumps.push_back(JumpRecord{s.line, target->stmt->end_line});
        } else {
          cfg_.edges.push_back(CfgEdge{node, cfg_.exit, true});
          cfg_.jumps.push_back(JumpRecord{s.line, method_.end_line});
        }
        return {};
      }

      case StmtKind::Continue: {
        int node = add_node("continue");
        connect(f, node);
        last_node_ = node;
        LoopCtx* target = find_target(s.label, /*continue_target=*/true);
        if (target) {
          target->continues.push_back(node);
          cfg_.jumps.push_back(JumpRecord{s.line, target->stmt->line});
        } else {
          cfg_.edges.push_back(CfgEdge{node, cfg_.exit, true});
          cfg_.jumps.push_back(JumpRecord{s.line, method_.end_line});
        }
        return {};
      }

      case StmtKind::Labeled: {
        current_label_ = s.label;
        // a labeled non-loop statement is a break target for its label
        if (s.body && (s.body->kind == StmtKind::While || s.body->kind == StmtKind::DoWhile ||
                       s.body->kind == StmtKind::For || s.body->kind == StmtKind::ForEach ||
                       s.body->kind == StmtKind::Switch)) {
          return process(*s.body, std::move(f));
        }
        loops_.push_back(LoopCtx{s.label, &s, {}, {}, false});
        current_label_.clear();
        Frontier out = s.body ? process(*s.body, std::move(f)) : std::move(f);
        LoopCtx ctx = std::move(loops_.back());
        loops_.pop_back();
        out.insert(out.end(), ctx.breaks.begin(), ctx.breaks.end());
        return out;
      }

      case StmtKind::Synchronized: {
        int node = add_node("sync");
        connect(f, node);
        last_node_ = node;
        return s.body ? process(*s.body, Frontier{{node, false}}) : Frontier{{node, false}};
      }

      default: {  // straight-line statements
        int node = add_node("stmt");
        connect(f, node);
        last_node_ = node;
        return Frontier{{node, false}};
      }
    }
  }

  LoopCtx* find_target(const std::string& label, bool continue_target) {
    for (auto it = loops_.rbegin(); it != loops_.rend(); ++it) {
      if (continue_target && !it->is_loop) continue;
      if (label.empty()) {
        if (continue_target || it->is_loop || it->stmt->kind == StmtKind::Switch) return &*it;
      } else if (it->label == label) {
        return &*it;
      }
    }
    return nullptr;
  }

  const MethodDecl& method_;
  Cfg cfg_;
  std::vector<LoopCtx> loops_;
  std::string current_label_;
  int last_node_ = -1;
};

}  // namespace detail

/// Build the control-flow graph of one method body.
inline Cfg build_cfg(const MethodDecl& method) { return detail::CfgBuilder(method).build(); }

/// Nodes reachable from entry (index into 0..node_count-1).
inline std::vector<bool> reachable_from_entry(const Cfg& cfg) {
  std::vector<std::vector<int>> adj(cfg.node_count);
  for (const auto& e : cfg.edges) adj[e.from].push_back(e.to);
  std::vector<bool> seen(cfg.node_count, false);
  std::vector<int> stack{cfg.entry};
  seen[cfg.entry] = true;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
  }
  return seen;
}

/// Essential complexity: cyclomatic number after iteratively reducing
/// structured subgraphs (sequences, if joins, self loops, parallel decision
/// arms). Fully structured bodies reduce to 1.
inline int essential_complexity(const Cfg& cfg) {
  struct Edge {
    int from, to;
    bool alive = true;
  };
  std::vector<Edge> edges;
  edges.reserve(cfg.edges.size());
  for (const auto& e : cfg.edges) edges.push_back({e.from, e.to, true});
  std::vector<bool> node_alive(cfg.node_count, true);

  auto out_deg = [&](int v) {
    int d = 0;
    for (const auto& e : edges)
      if (e.alive && e.from == v) ++d;
    return d;
  };
  auto in_deg = [&](int v) {
    int d = 0;
    for (const auto& e : edges)
      if (e.alive && e.to == v) ++d;
    return d;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    // R1: drop self loops
    for (auto& e : edges) {
      if (e.alive && e.from == e.to) {
        e.alive = false;
        changed = true;
      }
    }
    // R2: deduplicate parallel edges
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (!edges[i].alive) continue;
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        if (edges[j].alive && edges[j].from == edges[i].from && edges[j].to == edges[i].to) {
          edges[j].alive = false;
          changed = true;
        }
      }
    }
    // R3a: splice pass-through nodes (single in, single out) — branch arms
    for (int v = 0; v < cfg.node_count; ++v) {
      if (!node_alive[v] || v == cfg.entry || v == cfg.exit) continue;
      if (in_deg(v) != 1 || out_deg(v) != 1) continue;
      Edge* in_e = nullptr;
      Edge* out_e = nullptr;
      for (auto& e : edges) {
        if (!e.alive) continue;
        if (e.to == v) in_e = &e;
        if (e.from == v) out_e = &e;
      }
      if (!in_e || !out_e || in_e->from == v || out_e->to == v) continue;
      int p = in_e->from, s = out_e->to;
      in_e->alive = false;
      out_e->alive = false;
      node_alive[v] = false;
      edges.push_back({p, s, true});
      changed = true;
    }
    // R3b: contract sequence edges u->w (u's only successor, w's only
    // predecessor); w merges into u and may surface a self loop for R1
    for (std::size_t i = 0; i < edges.size(); ++i) {
      Edge& e = edges[i];
      if (!e.alive || e.from == e.to) continue;
      int u = e.from, w = e.to;
      if (!node_alive[u] || !node_alive[w]) continue;
      if (out_deg(u) != 1 || in_deg(w) != 1) continue;
      e.alive = false;
      node_alive[w] = false;
      int merged = (w == cfg.exit || w == cfg.entry) ? w : u;
      int gone = (merged == u) ? w : u;
      node_alive[merged] = true;
      node_alive[gone] = false;
      for (auto& other : edges) {
        if (!other.alive) continue;
        if (other.from == gone) other.from = merged;
        if (other.to == gone) other.to = merged;
      }
      changed = true;
    }
  }

  int n = 0, m = 0;
  for (int v = 0; v < cfg.node_count; ++v)
    if (node_alive[v]) ++n;
  for (const auto& e : edges)
    if (e.alive) ++m;
  return std::max(1, m - n + 2);
}

// ---------------------------------------------------------------------------
// Tree-derived method measures
// ---------------------------------------------------------------------------

namespace detail {

constexpr double kNpathCap = 1e9;

inline double npath_sat_mul(double a, double b) { return std::min(kNpathCap, a * b); }
inline double npath_sat_add(double a, double b) { return std::min(kNpathCap, a + b); }

inline double npath_stmt(const Stmt& s);

inline double npath_seq(const std::vector<StmtPtr>& stmts) {
  double p = 1.0;
  for (const auto& s : stmts)
    if (s) p = npath_sat_mul(p, npath_stmt(*s));
  return p;
}

inline double npath_stmt(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::Block:
      return npath_seq(s.stmts);
    case StmtKind::If: {
      double t = s.body ? npath_stmt(*s.body) : 1.0;
      double e = s.else_body ? npath_stmt(*s.else_body) : 1.0;
      return npath_sat_add(t, e);
    }
    case StmtKind::While:
    case StmtKind::DoWhile:
    case StmtKind::For:
    case StmtKind::ForEach:
      return npath_sat_add(s.body ? npath_stmt(*s.body) : 1.0, 1.0);
    case StmtKind::Switch: {
      double sum = 0.0;
      bool has_default = false;
      for (const auto& c : s.cases) {
        if (c.has_default) has_default = true;
        sum = npath_sat_add(sum, npath_seq(c.body));
      }
      if (!has_default) sum = npath_sat_add(sum, 1.0);
      return std::max(1.0, sum);
    }
    case StmtKind::Try: {
      double p = s.body ? npath_stmt(*s.body) : 1.0;
      for (const auto& c : s.catches)
        p = npath_sat_add(p, c.body ? npath_stmt(*c.body) : 1.0);
      if (s.finally_body) p = npath_sat_mul(p, npath_stmt(*s.finally_body));
      return p;
    }
    case StmtKind::Labeled:
    case StmtKind::Synchronized:
      return s.body ? npath_stmt(*s.body) : 1.0;
    default:
      return 1.0;
  }
}

inline void nesting_walk(const Stmt& s, int depth, int& best) {
  best = std::max(best, depth);
  auto enter = [&](const Stmt* child, int d) {
    if (child) nesting_walk(*child, d, best);
  };
  switch (s.kind) {
    case StmtKind::Block:
      for (const auto& c : s.stmts) enter(c.get(), depth);
      break;
    case StmtKind::If:
      enter(s.body.get(), depth + 1);
      enter(s.else_body.get(), depth + 1);
      break;
    case StmtKind::While:
    case StmtKind::DoWhile:
    case StmtKind::For:
    case StmtKind::ForEach:
      enter(s.body.get(), depth + 1);
      break;
    case StmtKind::Switch:
      for (const auto& c : s.cases)
        for (const auto& b : c.body) enter(b.get(), depth + 1);
      break;
    case StmtKind::Try:
      enter(s.body.get(), depth + 1);
      for (const auto& c : s.catches) enter(c.body.get(), depth + 1);
      enter(s.finally_body.get(), depth + 1);
      break;
    case StmtKind::Labeled:
    case StmtKind::Synchronized:
      enter(s.body.get(), depth);
      break;
    default:
      break;
  }
}

inline void count_statements_expr(const Expr* e, int& count);

inline void count_statements(const Stmt& s, int& count) {
  if (s.kind != StmtKind::Block) ++count;
  count_statements_expr(s.expr.get(), count);
  for (const auto& e : s.exprs) count_statements_expr(e.get(), count);
  if (s.body) count_statements(*s.body, count);
  if (s.else_body) count_statements(*s.else_body, count);
  for (const auto& c : s.stmts)
    if (c) count_statements(*c, count);
  for (const auto& c : s.cases)
    for (const auto& b : c.body)
      if (b) count_statements(*b, count);
  for (const auto& c : s.catches)
    if (c.body) count_statements(*c.body, count);
  if (s.finally_body) count_statements(*s.finally_body, count);
}

inline void count_statements_expr(const Expr* e, int& count) {
  if (!e) return;
  for (const auto& k : e->kids) count_statements_expr(k.get(), count);
  for (const auto& s : e->scoped_stmts)
    if (s) count_statements(*s, count);
}

}  // namespace detail

/// NPATH-style acyclic path count, saturating at 1e9.
inline double npath(const MethodDecl& m) {
  return m.body ? detail::npath_seq(m.body->stmts) : 1.0;
}

/// Maximum nesting depth of control statements; flat bodies are 0.
inline int max_nesting(const MethodDecl& m) {
  int best = 0;
  if (m.body) detail::nesting_walk(*m.body, 0, best);
  return best;
}

/// Statement count (blocks themselves not counted; folded scopes included).
inline int statement_count(const MethodDecl& m) {
  int count = 0;
  if (m.body) detail::count_statements(*m.body, count);
  return count;
}

inline int statement_count(const Stmt& s) {
  int count = 0;
  detail::count_statements(s, count);
  return count;
}

/// Knots: pairs of jump edges whose source/target line intervals cross.
inline int knot_count(const Cfg& cfg) {
  const auto& js = cfg.jumps;
  int knots = 0;
  for (std::size_t i = 0; i < js.size(); ++i) {
    auto a = std::minmax(js[i].from_line, js[i].to_line);
    for (std::size_t j = i + 1; j < js.size(); ++j) {
      auto b = std::minmax(js[j].from_line, js[j].to_line);
      bool cross = (a.first < b.first && b.first < a.second && a.second < b.second) ||
                   (b.first < a.first && a.first < b.second && b.second < a.second);
      if (cross) ++knots;
    }
  }
  return knots;
}

}  // namespace covpred
