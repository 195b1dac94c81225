#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "covpred/lexer.hpp"

namespace covpred {

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class ExprKind {
  Name,         // single identifier; name holds it
  FieldAccess,  // kids[0] = receiver, name = member
  MethodCall,   // kids[0] = receiver when has_receiver, then args; name = method
  New,          // name = type name; kids = constructor args
  This,
  Super,
  LiteralVal,  // name = lexeme
  Binary,      // name = operator; kids = {lhs, rhs}
  Unary,       // name = operator; kids = {operand}
  Assign,      // name = operator (=, +=, ...); kids = {target, value}
  Ternary,     // kids = {cond, then, else}
  Cast,        // name = target type; kids = {operand}
  ArrayAccess, // kids = {array, index}
  InstanceOf,  // name = type; kids = {operand}
  Lambda,      // kids = captured body expression (if expression-bodied)
  ArrayInit,   // kids = elements
  Opaque,      // unparsed fragment
};

struct Expr {
  ExprKind kind = ExprKind::Opaque;
  std::string name;
  std::vector<ExprPtr> kids;
  bool has_receiver = false;  // MethodCall: kids[0] is the receiver
  std::size_t line = 0;

  // Lambda block bodies and anonymous class bodies hang here; control flow
  // inside them is self-contained but their counts fold into the enclosing
  // method.
  std::vector<std::unique_ptr<struct Stmt>> scoped_stmts;
};

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

enum class StmtKind {
  Block,
  LocalVar,
  ExprStmt,
  If,
  While,
  DoWhile,
  For,
  ForEach,
  Switch,
  Try,
  Return,
  Throw,
  Break,
  Continue,
  Synchronized,
  Labeled,
  Assert,
  Empty,
  Yield,
  LocalType,  // local class declaration; counts fold into the method
};

struct SwitchCase {
  int label_count = 0;  // number of `case` labels (default not counted)
  bool has_default = false;
  std::vector<ExprPtr> labels;
  std::vector<StmtPtr> body;
};

struct CatchClause {
  std::string type_name;   // first alternative of a multi-catch
  std::string param_name;
  StmtPtr body;
  std::size_t line = 0;
};

struct Stmt {
  StmtKind kind = StmtKind::Empty;
  std::size_t line = 0;
  std::size_t end_line = 0;

  ExprPtr expr;                 // condition / selector / returned / thrown / expression
  std::vector<ExprPtr> exprs;   // for-init+update, initializers, resources
  StmtPtr body;                 // then / loop body / labeled stmt / synchronized body
  StmtPtr else_body;
  std::vector<StmtPtr> stmts;   // Block children; For init-statements
  std::vector<SwitchCase> cases;
  std::vector<CatchClause> catches;
  StmtPtr finally_body;
  std::string label;            // Labeled name; Break/Continue target label
  std::string decl_type;        // LocalVar / ForEach declared type
  std::vector<std::string> decl_names;
};

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

enum class Visibility { Public, Protected, Private, Default };

struct Param {
  std::string type_name;
  std::string name;
};

struct MethodDecl {
  std::string name;
  std::vector<Param> params;
  Visibility visibility = Visibility::Default;
  bool is_static = false;
  bool is_abstract = false;
  bool is_final = false;
  bool is_constructor = false;
  std::string return_type;  // "" for constructors
  StmtPtr body;             // null for abstract / interface methods
  std::size_t start_line = 0;
  std::size_t end_line = 0;

  bool is_accessor = false;
  bool is_mutator = false;

  std::size_t param_count() const { return params.size(); }
  bool has_body() const { return body != nullptr; }
  /// Not-accessor-or-mutator-method filter.
  bool is_namm() const { return !is_accessor && !is_mutator; }
};

struct FieldDecl {
  std::string type_name;
  std::string name;
  Visibility visibility = Visibility::Default;
  bool is_static = false;
  bool has_initializer = false;
  std::size_t line = 0;
};

enum class TypeKind { Class, Interface, Enum };

struct ClassDecl {
  TypeKind kind = TypeKind::Class;
  std::string name;            // simple name ("Outer.Inner" style for nested)
  std::string qualified_name;  // package.Outer.Inner
  std::string package_name;    // "" for the default package
  Visibility visibility = Visibility::Default;
  bool is_abstract = false;
  bool is_static = false;
  bool is_final = false;

  std::string superclass;                 // as written; "" when absent
  std::vector<std::string> interfaces;    // implements (class) / extends (interface)

  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;        // constructors included, flagged
  std::vector<StmtPtr> initializer_blocks;
  std::vector<ExprPtr> field_initializers;

  std::size_t start_line = 0;
  std::size_t end_line = 0;
  int file_index = -1;

  bool has_field(const std::string& n) const {
    for (const auto& f : fields)
      if (f.name == n) return true;
    return false;
  }
};

struct FileUnit {
  std::string path;
  std::string package_name;
  std::vector<std::string> imports;          // qualified names, ".*" kept for on-demand
  std::vector<std::size_t> class_indices;    // into ProjectModel::classes
  TokenStream tokens;
};

}  // namespace covpred
