#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "covpred/ast.hpp"
#include "covpred/common.hpp"
#include "covpred/lexer.hpp"

namespace covpred {

/// Result of parsing one file. Classes are appended flat; nested classes are
/// separate entries with dotted simple names.
struct ParsedFile {
  FileUnit unit;
  std::vector<ClassDecl> classes;
};

namespace detail {

class Parser {
 public:
  Parser(const TokenStream& stream, std::string path) : stream_(stream), path_(std::move(path)) {
    for (std::size_t i = 0; i < stream.tokens().size(); ++i)
      if (stream.tokens()[i].is_code()) code_.push_back(i);
  }

  ParsedFile parse() {
    ParsedFile out;
    out.unit.path = path_;

    if (at_keyword("package")) {
      advance();
      out.unit.package_name = parse_qualified_name();
      expect_semicolon();
    }
    while (at_keyword("import")) {
      advance();
      if (at_keyword("static")) advance();
      std::string q = parse_qualified_name();
      if (at_operator("*")) {
        q += "*";
        advance();
      }
      out.unit.imports.push_back(q);
      expect_semicolon();
    }
    package_ = out.unit.package_name;

    while (!at_end()) {
      if (at_semicolon()) {
        advance();
        continue;
      }
      std::size_t before = pos_;
      parse_type_decl(out.classes, /*enclosing=*/"");
      if (pos_ == before) advance();  // guarantee progress on junk
    }
    return out;
  }

 private:
  // --- token cursor -------------------------------------------------------
  const Token& tok(std::size_t off = 0) const {
    static const Token eof{TokenKind::Punctuation, std::string_view(""), 0};
    std::size_t i = pos_ + off;
    return i < code_.size() ? stream_.tokens()[code_[i]] : eof;
  }
  bool at_end() const { return pos_ >= code_.size(); }
  std::size_t line() const { return at_end() ? last_line_ : tok().line; }
  void advance() {
    if (!at_end()) {
      last_line_ = tok().line;
      ++pos_;
    }
  }
  bool at_keyword(std::string_view kw) const {
    return tok().kind == TokenKind::Keyword && tok().lexeme == kw;
  }
  bool at_ident() const { return tok().kind == TokenKind::Identifier; }
  bool at_operator(std::string_view op) const {
    return tok().kind == TokenKind::Operator && tok().lexeme == op;
  }
  bool at_assign(std::string_view op = "=") const {
    return tok().kind == TokenKind::AssignmentOp && tok().lexeme == op;
  }
  bool at_punct(std::string_view p) const {
    return tok().kind == TokenKind::Punctuation && tok().lexeme == p;
  }
  bool at_semicolon() const { return tok().kind == TokenKind::Semicolon; }
  bool at_dot() const { return tok().kind == TokenKind::Dot; }
  void expect_semicolon() {
    if (at_semicolon())
      advance();
    // permissive: missing semicolons never abort the file
  }
  bool eat_punct(std::string_view p) {
    if (at_punct(p)) {
      advance();
      return true;
    }
    return false;
  }

  // Skip one balanced group starting at the current '(' / '{' / '['.
  void skip_balanced() {
    if (!(at_punct("(") || at_punct("{") || at_punct("["))) return;
    int depth = 0;
    while (!at_end()) {
      if (at_punct("(") || at_punct("{") || at_punct("["))
        ++depth;
      else if (at_punct(")") || at_punct("}") || at_punct("]")) {
        --depth;
        if (depth == 0) {
          advance();
          return;
        }
      }
      advance();
    }
  }

  // Skip generic argument list at '<'. Handles '>>' and '>>>' closers.
  void skip_generics() {
    if (!at_operator("<")) return;
    int depth = 0;
    std::size_t guard = pos_;
    while (!at_end()) {
      if (at_operator("<"))
        ++depth;
      else if (at_operator(">"))
        --depth;
      else if (at_operator(">>"))
        depth -= 2;
      else if (at_operator(">>>"))
        depth -= 3;
      else if (at_semicolon() || at_punct("{")) {
        pos_ = guard;  // not generics after all (e.g. comparison); bail out
        return;
      }
      advance();
      if (depth <= 0) return;
    }
    pos_ = guard;
  }

  void skip_annotations() {
    while (at_punct("@")) {
      advance();
      if (at_keyword("interface")) return;  // @interface declaration, caller handles
      parse_qualified_name();
      if (at_punct("(")) skip_balanced();
    }
  }

  std::string parse_qualified_name() {
    std::string q;
    while (at_ident() || (tok().kind == TokenKind::Keyword)) {
      if (!at_ident() && !at_keyword("this")) break;
      q += std::string(tok().lexeme);
      advance();
      if (at_dot() && (tok(1).kind == TokenKind::Identifier || tok(1).lexeme == "*")) {
        q += ".";
        advance();
        if (at_operator("*")) break;  // on-demand import; caller consumes '*'
      } else {
        break;
      }
    }
    return q;
  }

  static bool is_primitive(std::string_view s) {
    return s == "int" || s == "long" || s == "short" || s == "byte" || s == "char" ||
           s == "float" || s == "double" || s == "boolean" || s == "void";
  }

  // Parse a type reference; returns base name without generics or dims,
  // empty string if the cursor is not at a type.
  std::string parse_type() {
    skip_annotations();
    std::string base;
    if (tok().kind == TokenKind::Keyword && is_primitive(tok().lexeme)) {
      base = std::string(tok().lexeme);
      advance();
    } else if (at_ident()) {
      base = parse_qualified_name();
    } else {
      return "";
    }
    if (at_operator("<")) skip_generics();
    // qualified generic tails like Outer<T>.Inner
    while (at_dot() && tok(1).kind == TokenKind::Identifier) {
      advance();
      base += "." + std::string(tok().lexeme);
      advance();
      if (at_operator("<")) skip_generics();
    }
    while (at_punct("[") && tok(1).lexeme == "]") {
      advance();
      advance();
    }
    if (at_punct("...")) advance();  // varargs marker belongs to the type
    return base;
  }

  struct Modifiers {
    Visibility visibility = Visibility::Default;
    bool is_static = false, is_abstract = false, is_final = false;
  };

  Modifiers parse_modifiers() {
    Modifiers m;
    while (true) {
      if (at_punct("@") && !(tok(1).kind == TokenKind::Keyword && tok(1).lexeme == "interface")) {
        skip_annotations();
        continue;
      }
      if (tok().kind != TokenKind::Keyword) break;
      std::string_view kw = tok().lexeme;
      if (kw == "public")
        m.visibility = Visibility::Public;
      else if (kw == "protected")
        m.visibility = Visibility::Protected;
      else if (kw == "private")
        m.visibility = Visibility::Private;
      else if (kw == "static")
        m.is_static = true;
      else if (kw == "abstract")
        m.is_abstract = true;
      else if (kw == "final")
        m.is_final = true;
      else if (kw == "synchronized" || kw == "native" || kw == "strictfp" || kw == "transient" ||
               kw == "volatile" || kw == "default") {
        // consumed, not modeled
      } else {
        break;
      }
      advance();
    }
    return m;
  }

  // --- type declarations ---------------------------------------------------

  void parse_type_decl(std::vector<ClassDecl>& sink, const std::string& enclosing) {
    Modifiers mods = parse_modifiers();
    bool is_annotation_decl = false;
    if (at_punct("@") && tok(1).kind == TokenKind::Keyword && tok(1).lexeme == "interface") {
      advance();  // '@'
      is_annotation_decl = true;
    }

    TypeKind kind;
    if (at_keyword("class"))
      kind = TypeKind::Class;
    else if (at_keyword("interface"))
      kind = TypeKind::Interface;
    else if (at_keyword("enum"))
      kind = TypeKind::Enum;
    else {
      // not a type declaration; skip one token so the caller makes progress
      if (!at_end()) advance();
      return;
    }
    advance();

    ClassDecl decl;
    decl.kind = is_annotation_decl ? TypeKind::Interface : kind;
    decl.visibility = mods.visibility;
    decl.is_abstract = mods.is_abstract;
    decl.is_static = mods.is_static;
    decl.is_final = mods.is_final;
    decl.start_line = line();
    if (at_ident()) {
      decl.name = enclosing.empty() ? std::string(tok().lexeme)
                                    : enclosing + "." + std::string(tok().lexeme);
      advance();
    } else {
      decl.name = enclosing.empty() ? "$anon" : enclosing + ".$anon";
    }
    decl.package_name = package_;
    decl.qualified_name = package_.empty() ? decl.name : package_ + "." + decl.name;

    if (at_operator("<")) skip_generics();

    if (at_keyword("extends")) {
      advance();
      if (kind == TypeKind::Interface) {
        // interfaces may extend several interfaces; keep them with implements
        decl.interfaces.push_back(parse_type());
        while (eat_comma()) decl.interfaces.push_back(parse_type());
      } else {
        decl.superclass = parse_type();
      }
    }
    if (at_keyword("implements")) {
      advance();
      decl.interfaces.push_back(parse_type());
      while (eat_comma()) decl.interfaces.push_back(parse_type());
    }
    while (at_ident() && tok().lexeme == "permits") {
      advance();
      parse_type();
      while (eat_comma()) parse_type();
    }

    if (!at_punct("{")) {
      // hopeless declaration; skip to next member boundary
      while (!at_end() && !at_punct("{") && !at_semicolon()) advance();
      if (at_semicolon()) {
        advance();
        sink.push_back(std::move(decl));
        return;
      }
    }
    if (at_punct("{")) {
      advance();
      if (kind == TypeKind::Enum) parse_enum_constants(decl);
      parse_class_body(decl, sink);
    }
    decl.end_line = last_line_;
    finalize_accessor_flags(decl);
    sink.push_back(std::move(decl));
  }

  bool eat_comma() {
    if (at_punct(",")) {
      advance();
      return true;
    }
    return false;
  }

  void parse_enum_constants(ClassDecl& decl) {
    // CONSTANT [ '(' args ')' ] [ '{' body '}' ] {',' ...} [';']
    while (!at_end() && !at_punct("}")) {
      skip_annotations();
      if (at_semicolon()) {
        advance();
        return;  // member section follows
      }
      if (!at_ident()) break;
      FieldDecl constant;
      constant.name = std::string(tok().lexeme);
      constant.type_name = decl.name;
      constant.is_static = true;
      constant.visibility = Visibility::Public;
      constant.line = line();
      advance();
      if (at_punct("(")) skip_balanced();
      if (at_punct("{")) skip_balanced();  // constant body folds away
      decl.fields.push_back(std::move(constant));
      if (!eat_comma()) {
        if (at_semicolon()) advance();
        return;
      }
    }
  }

  void parse_class_body(ClassDecl& decl, std::vector<ClassDecl>& sink) {
    while (!at_end() && !at_punct("}")) {
      std::size_t before = pos_;
      parse_member(decl, sink);
      if (pos_ == before) advance();
    }
    if (at_punct("}")) advance();
  }

  void parse_member(ClassDecl& decl, std::vector<ClassDecl>& sink) {
    if (at_semicolon()) {
      advance();
      return;
    }
    std::size_t member_line = line();
    Modifiers mods = parse_modifiers();

    if (at_keyword("class") || at_keyword("interface") || at_keyword("enum") ||
        (at_punct("@") && tok(1).kind == TokenKind::Keyword && tok(1).lexeme == "interface")) {
      parse_nested_type(decl, sink, mods);
      return;
    }

    if (at_punct("{")) {  // instance/static initializer block
      StmtPtr block = parse_block();
      decl.initializer_blocks.push_back(std::move(block));
      return;
    }

    if (at_operator("<")) skip_generics();  // method type parameters

    // Constructor: simple name of the class followed by '('.
    std::string simple = decl.name;
    if (auto p = simple.rfind('.'); p != std::string::npos) simple = simple.substr(p + 1);
    if (at_ident() && tok().lexeme == simple && tok(1).lexeme == "(") {
      MethodDecl m;
      m.name = simple;
      m.is_constructor = true;
      m.visibility = mods.visibility;
      m.is_static = false;
      m.start_line = member_line;
      parse_method_rest(m);
      decl.methods.push_back(std::move(m));
      return;
    }

    std::string type = parse_type();
    if (type.empty()) {
      // unparseable member; resync at ';' or '{...}'
      while (!at_end() && !at_semicolon() && !at_punct("{") && !at_punct("}")) advance();
      if (at_semicolon())
        advance();
      else if (at_punct("{"))
        skip_balanced();
      return;
    }

    if (!at_ident()) {
      while (!at_end() && !at_semicolon() && !at_punct("}")) advance();
      expect_semicolon();
      return;
    }
    std::string name(tok().lexeme);
    advance();

    if (at_punct("(")) {
      MethodDecl m;
      m.name = name;
      m.return_type = type;
      m.visibility = mods.visibility;
      m.is_static = mods.is_static;
      m.is_abstract = mods.is_abstract;
      m.is_final = mods.is_final;
      m.start_line = member_line;
      parse_method_rest(m);
      if (decl.kind == TypeKind::Interface && !m.has_body()) m.is_abstract = true;
      decl.methods.push_back(std::move(m));
      return;
    }

    // Field declaration, possibly a list.
    while (true) {
      FieldDecl f;
      f.type_name = type;
      f.name = name;
      f.visibility = mods.visibility;
      f.is_static = mods.is_static || decl.kind == TypeKind::Interface;
      f.line = member_line;
      while (at_punct("[") && tok(1).lexeme == "]") {
        advance();
        advance();
      }
      if (at_assign("=")) {
        advance();
        f.has_initializer = true;
        ExprPtr init = parse_expression_no_comma();
        decl.field_initializers.push_back(std::move(init));
      }
      decl.fields.push_back(std::move(f));
      if (eat_comma() && at_ident()) {
        name = std::string(tok().lexeme);
        advance();
        continue;
      }
      break;
    }
    expect_semicolon();
  }

  void parse_nested_type(ClassDecl& decl, std::vector<ClassDecl>& sink, const Modifiers& mods) {
    bool is_annotation_decl = false;
    if (at_punct("@")) {
      advance();
      is_annotation_decl = true;
    }
    TypeKind kind = TypeKind::Class;
    if (at_keyword("interface"))
      kind = TypeKind::Interface;
    else if (at_keyword("enum"))
      kind = TypeKind::Enum;
    advance();

    ClassDecl nested;
    nested.kind = is_annotation_decl ? TypeKind::Interface : kind;
    nested.visibility = mods.visibility;
    nested.is_static = mods.is_static;
    nested.is_abstract = mods.is_abstract;
    nested.is_final = mods.is_final;
    nested.start_line = line();
    if (at_ident()) {
      nested.name = decl.name + "." + std::string(tok().lexeme);
      advance();
    } else {
      nested.name = decl.name + ".$anon";
    }
    nested.package_name = package_;
    nested.qualified_name = package_.empty() ? nested.name : package_ + "." + nested.name;
    if (at_operator("<")) skip_generics();
    if (at_keyword("extends")) {
      advance();
      if (kind == TypeKind::Interface) {
        nested.interfaces.push_back(parse_type());
        while (eat_comma()) nested.interfaces.push_back(parse_type());
      } else {
        nested.superclass = parse_type();
      }
    }
    if (at_keyword("implements")) {
      advance();
      nested.interfaces.push_back(parse_type());
      while (eat_comma()) nested.interfaces.push_back(parse_type());
    }
    if (at_punct("{")) {
      advance();
      if (kind == TypeKind::Enum) parse_enum_constants(nested);
      parse_class_body(nested, sink);
    } else {
      expect_semicolon();
    }
    nested.end_line = last_line_;
    finalize_accessor_flags(nested);
    sink.push_back(std::move(nested));
  }

  void parse_method_rest(MethodDecl& m) {
    // at '('
    advance();
    while (!at_end() && !at_punct(")")) {
      skip_annotations();
      if (at_keyword("final")) advance();
      skip_annotations();
      std::string ptype = parse_type();
      if (ptype.empty()) {
        advance();
        continue;
      }
      std::string pname;
      if (at_ident()) {
        pname = std::string(tok().lexeme);
        advance();
      } else if (at_keyword("this")) {
        advance();  // receiver parameter
      }
      while (at_punct("[") && tok(1).lexeme == "]") {
        advance();
        advance();
      }
      m.params.push_back(Param{ptype, pname});
      if (!eat_comma()) break;
    }
    eat_punct(")");
    if (at_keyword("throws")) {
      advance();
      parse_type();
      while (eat_comma()) parse_type();
    }
    if (at_keyword("default")) {  // annotation type member default value
      advance();
      parse_expression_no_comma();
    }
    if (at_punct("{")) {
      m.body = parse_block();
      m.end_line = m.body->end_line;
    } else {
      if (at_semicolon()) advance();
      m.is_abstract = true;
      m.end_line = last_line_;
    }
  }

 public:
  // --- statements ----------------------------------------------------------

  StmtPtr parse_block() {
    auto block = std::make_unique<Stmt>();
    block->kind = StmtKind::Block;
    block->line = line();
    if (at_punct("{")) advance();
    while (!at_end() && !at_punct("}")) {
      std::size_t before = pos_;
      StmtPtr s = parse_statement();
      if (s) block->stmts.push_back(std::move(s));
      if (pos_ == before) advance();
    }
    if (at_punct("}")) {
      block->end_line = line();
      advance();
    } else {
      block->end_line = last_line_;
    }
    return block;
  }

  StmtPtr parse_statement() {
    std::size_t start_line = line();
    auto make = [&](StmtKind k) {
      auto s = std::make_unique<Stmt>();
      s->kind = k;
      s->line = start_line;
      return s;
    };

    if (at_punct("{")) return parse_block();
    if (at_semicolon()) {
      advance();
      auto s = make(StmtKind::Empty);
      s->end_line = start_line;
      return s;
    }

    skip_annotations();

    if (at_keyword("if")) {
      advance();
      auto s = make(StmtKind::If);
      s->expr = parse_paren_expr();
      s->body = parse_statement();
      if (at_keyword("else")) {
        advance();
        s->else_body = parse_statement();
      }
      s->end_line = last_line_;
      return s;
    }
    if (at_keyword("while")) {
      advance();
      auto s = make(StmtKind::While);
      s->expr = parse_paren_expr();
      s->body = parse_statement();
      s->end_line = last_line_;
      return s;
    }
    if (at_keyword("do")) {
      advance();
      auto s = make(StmtKind::DoWhile);
      s->body = parse_statement();
      if (at_keyword("while")) {
        advance();
        s->expr = parse_paren_expr();
      }
      expect_semicolon();
      s->end_line = last_line_;
      return s;
    }
    if (at_keyword("for")) {
      advance();
      return parse_for(start_line);
    }
    if (at_keyword("switch")) {
      advance();
      return parse_switch(start_line);
    }
    if (at_keyword("try")) {
      advance();
      return parse_try(start_line);
    }
    if (at_keyword("return")) {
      advance();
      auto s = make(StmtKind::Return);
      if (!at_semicolon()) s->expr = parse_expression();
      expect_semicolon();
      s->end_line = last_line_;
      return s;
    }
    if (at_keyword("throw")) {
      advance();
      auto s = make(StmtKind::Throw);
      s->expr = parse_expression();
      expect_semicolon();
      s->end_line = last_line_;
      return s;
    }
    if (at_keyword("break")) {
      advance();
      auto s = make(StmtKind::Break);
      if (at_ident()) {
        s->label = std::string(tok().lexeme);
        advance();
      }
      expect_semicolon();
      s->end_line = start_line;
      return s;
    }
    if (at_keyword("continue")) {
      advance();
      auto s = make(StmtKind::Continue);
      if (at_ident()) {
        s->label = std::string(tok().lexeme);
        advance();
      }
      expect_semicolon();
      s->end_line = start_line;
      return s;
    }
    if (at_keyword("synchronized") && tok(1).lexeme == "(") {
      advance();
      auto s = make(StmtKind::Synchronized);
      s->expr = parse_paren_expr();
      s->body = parse_statement();
      s->end_line = last_line_;
      return s;
    }
    if (at_keyword("assert")) {
      advance();
      auto s = make(StmtKind::Assert);
      s->expr = parse_expression_no_comma();
      if (at_operator(":")) {
        advance();
        s->exprs.push_back(parse_expression_no_comma());
      }
      expect_semicolon();
      s->end_line = last_line_;
      return s;
    }
    if (at_keyword("class") || at_keyword("interface") || at_keyword("enum") ||
        ((at_keyword("final") || at_keyword("abstract") || at_keyword("static")) &&
         (tok(1).lexeme == "class" || tok(1).lexeme == "interface" || tok(1).lexeme == "enum"))) {
      // Local class: counts fold into the method; parse and keep statements
      // reachable through a LocalType node holding its bodies.
      auto s = make(StmtKind::LocalType);
      std::vector<ClassDecl> locals;
      parse_type_decl(locals, "$local");
      for (auto& lc : locals) {
        for (auto& m : lc.methods)
          if (m.body) s->stmts.push_back(std::move(m.body));
        for (auto& ib : lc.initializer_blocks) s->stmts.push_back(std::move(ib));
      }
      s->end_line = last_line_;
      return s;
    }
    if (at_ident() && tok().lexeme == "yield") {
      advance();
      auto s = make(StmtKind::Yield);
      s->expr = parse_expression();
      expect_semicolon();
      s->end_line = last_line_;
      return s;
    }
    // Labeled statement: ident ':' (but not '::' or ternary)
    if (at_ident() && tok(1).kind == TokenKind::Operator && tok(1).lexeme == ":") {
      auto s = make(StmtKind::Labeled);
      s->label = std::string(tok().lexeme);
      advance();
      advance();
      s->body = parse_statement();
      s->end_line = last_line_;
      return s;
    }

    // Local variable declaration vs expression statement: try-parse a type
    // followed by an identifier.
    {
      std::size_t save = pos_;
      std::string type = try_parse_type();
      if (!type.empty() && at_ident()) {
        std::string vname(tok().lexeme);
        std::size_t after_name = pos_;
        advance();
        while (at_punct("[") && tok(1).lexeme == "]") {
          advance();
          advance();
        }
        if (at_assign("=") || at_semicolon() || at_punct(",")) {
          auto s = make(StmtKind::LocalVar);
          s->decl_type = type;
          s->decl_names.push_back(vname);
          if (at_assign("=")) {
            advance();
            s->exprs.push_back(parse_expression_no_comma());
          }
          while (eat_comma()) {
            if (!at_ident()) break;
            s->decl_names.push_back(std::string(tok().lexeme));
            advance();
            while (at_punct("[") && tok(1).lexeme == "]") {
              advance();
              advance();
            }
            if (at_assign("=")) {
              advance();
              s->exprs.push_back(parse_expression_no_comma());
            }
          }
          expect_semicolon();
          s->end_line = last_line_;
          return s;
        }
        pos_ = after_name;  // not a declaration
      }
      pos_ = save;
    }

    auto s = make(StmtKind::ExprStmt);
    s->expr = parse_expression();
    expect_semicolon();
    s->end_line = last_line_;
    return s;
  }

 private:
  StmtPtr parse_for(std::size_t start_line) {
    auto mk = [&](StmtKind k) {
      auto s = std::make_unique<Stmt>();
      s->kind = k;
      s->line = start_line;
      return s;
    };
    eat_punct("(");

    // Enhanced for: [final] Type name ':' expr
    {
      std::size_t save = pos_;
      if (at_keyword("final")) advance();
      skip_annotations();
      std::string type = try_parse_type();
      if (!type.empty() && at_ident() && tok(1).kind == TokenKind::Operator &&
          tok(1).lexeme == ":") {
        auto s = mk(StmtKind::ForEach);
        s->decl_type = type;
        s->decl_names.push_back(std::string(tok().lexeme));
        advance();
        advance();  // ':'
        s->expr = parse_expression();
        eat_punct(")");
        s->body = parse_statement();
        s->end_line = last_line_;
        return s;
      }
      pos_ = save;
    }

    auto s = mk(StmtKind::For);
    // init: declaration or expression list or empty
    if (!at_semicolon()) {
      std::size_t save = pos_;
      std::string type = try_parse_type();
      if (!type.empty() && at_ident()) {
        auto init = std::make_unique<Stmt>();
        init->kind = StmtKind::LocalVar;
        init->line = line();
        init->decl_type = type;
        init->decl_names.push_back(std::string(tok().lexeme));
        advance();
        if (at_assign("=")) {
          advance();
          init->exprs.push_back(parse_expression_no_comma());
        }
        while (eat_comma()) {
          if (!at_ident()) break;
          init->decl_names.push_back(std::string(tok().lexeme));
          advance();
          if (at_assign("=")) {
            advance();
            init->exprs.push_back(parse_expression_no_comma());
          }
        }
        init->end_line = last_line_;
        s->stmts.push_back(std::move(init));
      } else {
        pos_ = save;
        s->exprs.push_back(parse_expression_no_comma());
        while (eat_comma()) s->exprs.push_back(parse_expression_no_comma());
      }
    }
    expect_semicolon();
    if (!at_semicolon()) s->expr = parse_expression();  // condition
    expect_semicolon();
    while (!at_end() && !at_punct(")")) {
      s->exprs.push_back(parse_expression_no_comma());
      if (!eat_comma()) break;
    }
    eat_punct(")");
    s->body = parse_statement();
    s->end_line = last_line_;
    return s;
  }

  StmtPtr parse_switch(std::size_t start_line) {
    auto s = std::make_unique<Stmt>();
    s->kind = StmtKind::Switch;
    s->line = start_line;
    s->expr = parse_paren_expr();
    if (!at_punct("{")) {
      s->end_line = last_line_;
      return s;
    }
    advance();
    SwitchCase current;
    bool have_group = false;
    auto flush = [&]() {
      if (have_group) {
        s->cases.push_back(std::move(current));
        current = SwitchCase{};
        have_group = false;
      }
    };
    while (!at_end() && !at_punct("}")) {
      if (at_keyword("case")) {
        if (have_group && !current.body.empty()) flush();
        advance();
        have_group = true;
        ++current.label_count;
        current.labels.push_back(parse_case_label_expr());
        while (eat_comma()) {  // multi-label case (newer Java)
          ++current.label_count;
          current.labels.push_back(parse_case_label_expr());
        }
        if (at_operator(":"))
          advance();
        else if (at_operator("->")) {
          advance();
          current.body.push_back(parse_statement());
          flush();
        }
        continue;
      }
      if (at_keyword("default")) {
        if (have_group && !current.body.empty()) flush();
        advance();
        have_group = true;
        current.has_default = true;
        if (at_operator(":"))
          advance();
        else if (at_operator("->")) {
          advance();
          current.body.push_back(parse_statement());
          flush();
        }
        continue;
      }
      if (!have_group) {  // stray statements before any label
        have_group = true;
      }
      std::size_t before = pos_;
      current.body.push_back(parse_statement());
      if (pos_ == before) advance();
    }
    flush();
    if (at_punct("}")) {
      s->end_line = line();
      advance();
    } else {
      s->end_line = last_line_;
    }
    return s;
  }

  ExprPtr parse_case_label_expr() {
    // case labels are constants; parse a restricted expression (no ':')
    auto e = std::make_unique<Expr>();
    e->kind = ExprKind::Opaque;
    e->line = line();
    std::string text;
    while (!at_end() && !at_operator(":") && !at_operator("->") && !at_punct(",") &&
           !at_punct("}") && !at_semicolon()) {
      text += std::string(tok().lexeme);
      advance();
    }
    e->name = text;
    return e;
  }

  StmtPtr parse_try(std::size_t start_line) {
    auto s = std::make_unique<Stmt>();
    s->kind = StmtKind::Try;
    s->line = start_line;
    if (at_punct("(")) {  // try-with-resources
      advance();
      while (!at_end() && !at_punct(")")) {
        std::size_t save = pos_;
        if (at_keyword("final")) advance();
        std::string type = try_parse_type();
        if (!type.empty() && at_ident()) {
          advance();
          if (at_assign("=")) {
            advance();
            s->exprs.push_back(parse_expression_no_comma());
          }
        } else {
          pos_ = save;
          s->exprs.push_back(parse_expression_no_comma());
        }
        if (!at_semicolon()) break;
        advance();
      }
      eat_punct(")");
    }
    s->body = at_punct("{") ? parse_block() : parse_statement();
    while (at_keyword("catch")) {
      advance();
      CatchClause cc;
      cc.line = line();
      eat_punct("(");
      if (at_keyword("final")) advance();
      cc.type_name = parse_type();
      while (at_operator("|")) {  // multi-catch; keep first type
        advance();
        parse_type();
      }
      if (at_ident()) {
        cc.param_name = std::string(tok().lexeme);
        advance();
      }
      eat_punct(")");
      cc.body = at_punct("{") ? parse_block() : parse_statement();
      s->catches.push_back(std::move(cc));
    }
    if (at_keyword("finally")) {
      advance();
      s->finally_body = at_punct("{") ? parse_block() : parse_statement();
    }
    s->end_line = last_line_;
    return s;
  }

  ExprPtr parse_paren_expr() {
    eat_punct("(");
    ExprPtr e = at_punct(")") ? opaque_here() : parse_expression();
    eat_punct(")");
    return e;
  }

  ExprPtr opaque_here() {
    auto e = std::make_unique<Expr>();
    e->kind = ExprKind::Opaque;
    e->line = line();
    return e;
  }

  std::string try_parse_type() {
    std::size_t save = pos_;
    if (!(at_ident() || (tok().kind == TokenKind::Keyword && is_primitive(tok().lexeme)))) {
      return "";
    }
    std::string t = parse_type();
    if (t.empty()) pos_ = save;
    return t;
  }

 public:
  // --- expressions ---------------------------------------------------------

  ExprPtr parse_expression() { return parse_assignment(); }
  ExprPtr parse_expression_no_comma() { return parse_assignment(); }

 private:
  ExprPtr parse_assignment() {
    ExprPtr lhs = parse_ternary();
    if (tok().kind == TokenKind::AssignmentOp) {
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Assign;
      e->name = std::string(tok().lexeme);
      e->line = line();
      advance();
      ExprPtr rhs = parse_assignment();
      e->kids.push_back(std::move(lhs));
      e->kids.push_back(std::move(rhs));
      return e;
    }
    return lhs;
  }

  ExprPtr parse_ternary() {
    ExprPtr cond = parse_binary(0);
    if (at_operator("?")) {
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Ternary;
      e->line = line();
      advance();
      ExprPtr then = parse_assignment();
      if (at_operator(":")) advance();
      ExprPtr other = parse_assignment();
      e->kids.push_back(std::move(cond));
      e->kids.push_back(std::move(then));
      e->kids.push_back(std::move(other));
      return e;
    }
    return cond;
  }

  static int binary_precedence(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
    if (op == "<<" || op == ">>" || op == ">>>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return -1;
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    while (true) {
      if (at_keyword("instanceof")) {
        advance();
        auto e = std::make_unique<Expr>();
        e->kind = ExprKind::InstanceOf;
        e->line = line();
        e->name = parse_type();
        if (at_ident()) advance();  // pattern variable
        e->kids.push_back(std::move(lhs));
        lhs = std::move(e);
        continue;
      }
      if (tok().kind != TokenKind::Operator) break;
      int prec = binary_precedence(tok().lexeme);
      if (prec < 0 || prec < min_prec) break;
      std::string op(tok().lexeme);
      std::size_t op_line = line();
      advance();
      ExprPtr rhs = parse_binary(prec + 1);
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Binary;
      e->name = op;
      e->line = op_line;
      e->kids.push_back(std::move(lhs));
      e->kids.push_back(std::move(rhs));
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (at_operator("!") || at_operator("~") || at_operator("+") || at_operator("-") ||
        at_operator("++") || at_operator("--")) {
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Unary;
      e->name = std::string(tok().lexeme);
      e->line = line();
      advance();
      e->kids.push_back(parse_unary());
      return e;
    }
    // Cast: '(' Type ')' followed by a term
    if (at_punct("(")) {
      std::size_t save = pos_;
      advance();
      std::string type = try_parse_type();
      if (!type.empty() && at_punct(")")) {
        advance();
        bool cast_follows =
            at_ident() || tok().kind == TokenKind::Literal || at_punct("(") ||
            at_keyword("this") || at_keyword("super") || at_keyword("new") || at_operator("!") ||
            at_operator("~") ||
            (tok().kind == TokenKind::Keyword && is_primitive(tok().lexeme));
        if (cast_follows) {
          auto e = std::make_unique<Expr>();
          e->kind = ExprKind::Cast;
          e->name = type;
          e->line = line();
          e->kids.push_back(parse_unary());
          return e;
        }
      }
      pos_ = save;
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (true) {
      if (at_dot()) {
        advance();
        if (at_operator("<")) skip_generics();  // explicit type args
        if (at_keyword("new")) {
          // qualified inner-class creation: expr.new Inner(...)
          advance();
          auto n = std::make_unique<Expr>();
          n->kind = ExprKind::New;
          n->line = line();
          n->name = parse_type();
          if (at_punct("(")) parse_arguments(n->kids);
          if (at_punct("{")) parse_anonymous_body(*n);
          e = std::move(n);
          continue;
        }
        if (at_keyword("this") || at_keyword("super") || at_keyword("class")) {
          auto fa = std::make_unique<Expr>();
          fa->kind = ExprKind::FieldAccess;
          fa->name = std::string(tok().lexeme);
          fa->line = line();
          advance();
          fa->kids.push_back(std::move(e));
          e = std::move(fa);
          continue;
        }
        if (!at_ident()) break;
        std::string member(tok().lexeme);
        std::size_t member_line = line();
        advance();
        if (at_punct("(")) {
          auto call = std::make_unique<Expr>();
          call->kind = ExprKind::MethodCall;
          call->name = member;
          call->line = member_line;
          call->has_receiver = true;
          call->kids.push_back(std::move(e));
          parse_arguments(call->kids);
          e = std::move(call);
        } else {
          auto fa = std::make_unique<Expr>();
          fa->kind = ExprKind::FieldAccess;
          fa->name = member;
          fa->line = member_line;
          fa->kids.push_back(std::move(e));
          e = std::move(fa);
        }
        continue;
      }
      if (at_punct("[")) {
        advance();
        auto idx = std::make_unique<Expr>();
        idx->kind = ExprKind::ArrayAccess;
        idx->line = line();
        idx->kids.push_back(std::move(e));
        if (!at_punct("]")) idx->kids.push_back(parse_expression());
        eat_punct("]");
        e = std::move(idx);
        continue;
      }
      if (at_operator("++") || at_operator("--")) {
        auto u = std::make_unique<Expr>();
        u->kind = ExprKind::Unary;
        u->name = std::string(tok().lexeme);
        u->line = line();
        advance();
        u->kids.push_back(std::move(e));
        e = std::move(u);
        continue;
      }
      if (at_operator("::")) {  // method reference; fold into opaque member
        advance();
        if (at_ident() || at_keyword("new")) advance();
        continue;
      }
      break;
    }
    return e;
  }

  void parse_arguments(std::vector<ExprPtr>& sink) {
    eat_punct("(");
    while (!at_end() && !at_punct(")")) {
      sink.push_back(parse_expression_no_comma());
      if (!eat_comma()) break;
    }
    eat_punct(")");
  }

  void parse_anonymous_body(Expr& host) {
    // Anonymous class body: method bodies fold into the enclosing method.
    std::vector<ClassDecl> anon_sink;
    ClassDecl shell;
    shell.name = "$anon";
    advance();  // '{'
    while (!at_end() && !at_punct("}")) {
      std::size_t before = pos_;
      parse_member(shell, anon_sink);
      if (pos_ == before) advance();
    }
    if (at_punct("}")) advance();
    for (auto& m : shell.methods)
      if (m.body) host.scoped_stmts.push_back(std::move(m.body));
    for (auto& ib : shell.initializer_blocks) host.scoped_stmts.push_back(std::move(ib));
  }

  bool lambda_ahead() {
    if (at_ident() && tok(1).kind == TokenKind::Operator && tok(1).lexeme == "->") return true;
    if (!at_punct("(")) return false;
    std::size_t save = pos_;
    int depth = 0;
    bool found = false;
    while (!at_end()) {
      if (at_punct("("))
        ++depth;
      else if (at_punct(")")) {
        --depth;
        if (depth == 0) {
          advance();
          found = at_operator("->");
          break;
        }
      }
      advance();
    }
    pos_ = save;
    return found;
  }

  ExprPtr parse_primary() {
    std::size_t start_line = line();

    if (lambda_ahead()) {
      auto lam = std::make_unique<Expr>();
      lam->kind = ExprKind::Lambda;
      lam->line = start_line;
      if (at_punct("("))
        skip_balanced();
      else
        advance();            // single parameter
      if (at_operator("->")) advance();
      if (at_punct("{")) {
        StmtPtr body = parse_block();
        lam->scoped_stmts.push_back(std::move(body));
      } else {
        lam->kids.push_back(parse_expression_no_comma());
      }
      return lam;
    }

    if (tok().kind == TokenKind::Literal) {
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::LiteralVal;
      e->name = std::string(tok().lexeme);
      e->line = start_line;
      advance();
      return e;
    }
    if (at_keyword("this")) {
      advance();
      if (at_punct("(")) {  // this(...) constructor call
        auto call = std::make_unique<Expr>();
        call->kind = ExprKind::MethodCall;
        call->name = "this";
        call->line = start_line;
        parse_arguments(call->kids);
        return call;
      }
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::This;
      e->line = start_line;
      return e;
    }
    if (at_keyword("super")) {
      advance();
      if (at_punct("(")) {
        auto call = std::make_unique<Expr>();
        call->kind = ExprKind::MethodCall;
        call->name = "super";
        call->line = start_line;
        parse_arguments(call->kids);
        return call;
      }
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Super;
      e->line = start_line;
      return e;
    }
    if (at_keyword("new")) {
      advance();
      auto n = std::make_unique<Expr>();
      n->kind = ExprKind::New;
      n->line = start_line;
      n->name = parse_type();
      if (at_punct("[")) {  // array creation
        while (at_punct("[")) {
          advance();
          if (!at_punct("]")) n->kids.push_back(parse_expression());
          eat_punct("]");
        }
        if (at_punct("{")) n->kids.push_back(parse_array_init());
        n->kind = ExprKind::ArrayInit;  // array creation is not a constructor call
        return n;
      }
      if (at_punct("(")) parse_arguments(n->kids);
      if (at_punct("{")) parse_anonymous_body(*n);
      return n;
    }
    if (at_punct("(")) {
      advance();
      ExprPtr inner = at_punct(")") ? opaque_here() : parse_expression();
      eat_punct(")");
      return inner;
    }
    if (at_punct("{")) return parse_array_init();
    if (at_ident()) {
      std::string name(tok().lexeme);
      advance();
      if (at_punct("(")) {
        auto call = std::make_unique<Expr>();
        call->kind = ExprKind::MethodCall;
        call->name = name;
        call->line = start_line;
        parse_arguments(call->kids);
        return call;
      }
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Name;
      e->name = name;
      e->line = start_line;
      return e;
    }
    if (tok().kind == TokenKind::Keyword && is_primitive(tok().lexeme)) {
      // primitive class literal: int.class etc.
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Name;
      e->name = std::string(tok().lexeme);
      e->line = start_line;
      advance();
      return e;
    }

    // Unknown token: consume one and return opaque (guarantees progress).
    auto e = opaque_here();
    if (!at_end()) {
      e->name = std::string(tok().lexeme);
      advance();
    }
    return e;
  }

  ExprPtr parse_array_init() {
    auto e = std::make_unique<Expr>();
    e->kind = ExprKind::ArrayInit;
    e->line = line();
    advance();  // '{'
    while (!at_end() && !at_punct("}")) {
      if (at_punct("{"))
        e->kids.push_back(parse_array_init());
      else
        e->kids.push_back(parse_expression_no_comma());
      if (!eat_comma()) break;
    }
    eat_punct("}");
    return e;
  }

  // --- accessor / mutator flags -------------------------------------------

  static bool is_own_field_ref(const Expr& e, const ClassDecl& cls, std::string* field_out) {
    if (e.kind == ExprKind::Name && cls.has_field(e.name)) {
      if (field_out) *field_out = e.name;
      return true;
    }
    if (e.kind == ExprKind::FieldAccess && e.kids.size() == 1 &&
        e.kids[0]->kind == ExprKind::This && cls.has_field(e.name)) {
      if (field_out) *field_out = e.name;
      return true;
    }
    return false;
  }

  void finalize_accessor_flags(ClassDecl& cls) {
    for (auto& m : cls.methods) {
      if (m.is_constructor || !m.body) continue;
      const auto& body = m.body->stmts;
      // Accessor: no parameters, body is exactly `return <own field>;`
      if (m.params.empty() && body.size() == 1 && body[0]->kind == StmtKind::Return &&
          body[0]->expr && is_own_field_ref(*body[0]->expr, cls, nullptr)) {
        m.is_accessor = true;
        continue;
      }
      // Mutator: one parameter, body is `<own field> = <param>;` optionally
      // followed by a bare return.
      if (m.params.size() == 1 && !body.empty() && body.size() <= 2) {
        bool tail_ok = body.size() == 1 ||
                       (body[1]->kind == StmtKind::Return && !body[1]->expr);
        const Stmt& first = *body[0];
        if (tail_ok && first.kind == StmtKind::ExprStmt && first.expr &&
            first.expr->kind == ExprKind::Assign && first.expr->name == "=" &&
            first.expr->kids.size() == 2 &&
            is_own_field_ref(*first.expr->kids[0], cls, nullptr) &&
            first.expr->kids[1]->kind == ExprKind::Name &&
            first.expr->kids[1]->name == m.params[0].name) {
          m.is_mutator = true;
        }
      }
    }
  }

  const TokenStream& stream_;
  std::string path_;
  std::vector<std::size_t> code_;
  std::size_t pos_ = 0;
  std::size_t last_line_ = 1;
  std::string package_;
};

}  // namespace detail

/// Parse one Java file into declarations. Throws ParseError on lexing
/// failures; structural oddities degrade to opaque nodes instead of failing.
inline ParsedFile parse_file(std::string source, std::string path) {
  TokenStream stream = tokenize(std::move(source));
  detail::Parser parser(stream, path);
  ParsedFile out = parser.parse();
  out.unit.tokens = std::move(stream);
  return out;
}

}  // namespace covpred
