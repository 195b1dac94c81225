#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "covpred/common.hpp"

namespace covpred {

enum class TokenKind {
  Identifier,
  Keyword,
  Operator,
  AssignmentOp,
  Semicolon,
  Dot,
  Literal,
  Punctuation,
  Comment,
  Whitespace,
};

struct Token {
  TokenKind kind;
  std::string_view lexeme;  // view into the source buffer
  std::size_t line = 1;     // 1-based line of the first character

  bool is_code() const { return kind != TokenKind::Comment && kind != TokenKind::Whitespace; }
};

/// Lossless token stream: concatenating all lexemes reproduces the source
/// byte-for-byte. The stream keeps a copy of the source so views stay valid.
class TokenStream {
 public:
  TokenStream() = default;
  explicit TokenStream(std::string source) : source_(std::move(source)) {}

  const std::string& source() const { return source_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  std::vector<Token>& tokens() { return tokens_; }

  std::string joined() const {
    std::string out;
    out.reserve(source_.size());
    for (const auto& t : tokens_) out.append(t.lexeme);
    return out;
  }

 private:
  std::string source_;
  std::vector<Token> tokens_;
};

namespace detail {

inline const std::unordered_set<std::string_view>& java_keywords() {
  static const std::unordered_set<std::string_view> kw = {
      "abstract", "assert",   "boolean",    "break",   "byte",    "case",     "catch",
      "char",     "class",    "const",      "continue", "default", "do",      "double",
      "else",     "enum",     "extends",    "final",   "finally", "float",    "for",
      "goto",     "if",       "implements", "import",  "instanceof", "int",   "interface",
      "long",     "native",   "new",        "package", "private", "protected", "public",
      "return",   "short",    "static",     "strictfp", "super",  "switch",   "synchronized",
      "this",     "throw",    "throws",     "transient", "try",   "void",     "volatile",
      "while"};
  return kw;
}

inline bool is_ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c >= 0x80;
}
inline bool is_ident_part(unsigned char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == 0x0b;
}

}  // namespace detail

/// Tokenize Java source. Throws ParseError for unterminated string, character
/// or block-comment constructs; everything else lexes permissively.
inline TokenStream tokenize(std::string source) {
  TokenStream stream(std::move(source));
  const std::string& src = stream.source();
  auto& out = stream.tokens();
  std::size_t i = 0;
  std::size_t line = 1;
  const std::size_t n = src.size();

  auto view = [&](std::size_t begin, std::size_t end) {
    return std::string_view(src).substr(begin, end - begin);
  };
  auto count_lines = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k)
      if (src[k] == '\n') ++line;
  };
  auto emit = [&](TokenKind kind, std::size_t begin, std::size_t end, std::size_t tok_line) {
    out.push_back(Token{kind, view(begin, end), tok_line});
  };

  while (i < n) {
    const std::size_t start = i;
    const std::size_t start_line = line;
    const unsigned char c = static_cast<unsigned char>(src[i]);

    if (detail::is_space(c)) {
      while (i < n && detail::is_space(static_cast<unsigned char>(src[i]))) ++i;
      count_lines(start, i);
      emit(TokenKind::Whitespace, start, i, start_line);
      continue;
    }

    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      emit(TokenKind::Comment, start, i, start_line);
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      i += 2;
      bool closed = false;
      while (i + 1 < n) {
        if (src[i] == '*' && src[i + 1] == '/') {
          i += 2;
          closed = true;
          break;
        }
        ++i;
      }
      if (!closed) throw ParseError("unterminated block comment", start_line);
      count_lines(start, i);
      emit(TokenKind::Comment, start, i, start_line);
      continue;
    }

    if (c == '"') {
      // Text block: """ ... """
      if (i + 2 < n && src[i + 1] == '"' && src[i + 2] == '"') {
        i += 3;
        bool closed = false;
        while (i + 2 <= n) {
          if (i + 2 < n && src[i] == '"' && src[i + 1] == '"' && src[i + 2] == '"') {
            i += 3;
            closed = true;
            break;
          }
          if (i < n && src[i] == '\\') ++i;
          ++i;
        }
        if (!closed) throw ParseError("unterminated text block", start_line);
        count_lines(start, i);
        emit(TokenKind::Literal, start, i, start_line);
        continue;
      }
      ++i;
      bool closed = false;
      while (i < n) {
        if (src[i] == '\\' && i + 1 < n) {
          i += 2;
          continue;
        }
        if (src[i] == '"') {
          ++i;
          closed = true;
          break;
        }
        if (src[i] == '\n') break;
        ++i;
      }
      if (!closed) throw ParseError("unterminated string literal", start_line);
      emit(TokenKind::Literal, start, i, start_line);
      continue;
    }

    if (c == '\'') {
      ++i;
      bool closed = false;
      while (i < n) {
        if (src[i] == '\\' && i + 1 < n) {
          i += 2;
          continue;
        }
        if (src[i] == '\'') {
          ++i;
          closed = true;
          break;
        }
        if (src[i] == '\n') break;
        ++i;
      }
      if (!closed) throw ParseError("unterminated character literal", start_line);
      emit(TokenKind::Literal, start, i, start_line);
      continue;
    }

    if (detail::is_digit(c) || (c == '.' && i + 1 < n && detail::is_digit(static_cast<unsigned char>(src[i + 1])))) {
      ++i;
      bool is_hex = false;
      if (c == '0' && i < n && (src[i] == 'x' || src[i] == 'X')) {
        is_hex = true;
        ++i;
      } else if (c == '0' && i < n && (src[i] == 'b' || src[i] == 'B')) {
        ++i;
      }
      auto is_hex_digit = [](unsigned char d) {
        return (d >= '0' && d <= '9') || (d >= 'a' && d <= 'f') || (d >= 'A' && d <= 'F');
      };
      while (i < n) {
        const unsigned char d = static_cast<unsigned char>(src[i]);
        if (detail::is_digit(d) || d == '_' || (is_hex && is_hex_digit(d))) {
          ++i;
        } else if ((!is_hex && (d == 'e' || d == 'E')) || (is_hex && (d == 'p' || d == 'P'))) {
          ++i;
          if (i < n && (src[i] == '+' || src[i] == '-')) ++i;
        } else if (d == '.' && !(i + 1 < n && src[i + 1] == '.')) {
          ++i;  // decimal point (possibly trailing, as in "1.")
        } else if (d == 'l' || d == 'L' || d == 'f' || d == 'F' || d == 'd' || d == 'D') {
          ++i;
          break;
        } else {
          break;
        }
      }
      emit(TokenKind::Literal, start, i, start_line);
      continue;
    }

    if (detail::is_ident_start(c)) {
      ++i;
      while (i < n && detail::is_ident_part(static_cast<unsigned char>(src[i]))) ++i;
      std::string_view word = view(start, i);
      TokenKind kind;
      if (word == "true" || word == "false" || word == "null")
        kind = TokenKind::Literal;
      else if (detail::java_keywords().count(word))
        kind = TokenKind::Keyword;
      else
        kind = TokenKind::Identifier;
      emit(kind, start, i, start_line);
      continue;
    }

    if (c == ';') {
      ++i;
      emit(TokenKind::Semicolon, start, i, start_line);
      continue;
    }
    if (c == '.') {
      if (i + 2 < n && src[i + 1] == '.' && src[i + 2] == '.') {
        i += 3;
        emit(TokenKind::Punctuation, start, i, start_line);  // varargs ellipsis
      } else {
        ++i;
        emit(TokenKind::Dot, start, i, start_line);
      }
      continue;
    }

    // Multi-character operators, longest match first.
    static constexpr std::array<std::string_view, 12> assign_ops = {
        ">>>=", "<<=", ">>=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "="};
    static constexpr std::array<std::string_view, 22> plain_ops = {
        ">>>", "<<", ">>", "==", "!=", "<=", ">=", "&&", "||", "++", "--",
        "->",  "::", "+",  "-",  "*",  "/",  "%",  "&",  "|",  "^",  "!"};

    std::string_view rest = std::string_view(src).substr(i);
    bool matched = false;
    for (auto op : assign_ops) {
      if (starts_with(rest, op)) {
        // "==" must not match "=": assign list is ordered longest-first and
        // "=" is checked after "==" below via the plain list ordering.
        if (op == "=" && starts_with(rest, "==")) break;
        i += op.size();
        emit(TokenKind::AssignmentOp, start, i, start_line);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (auto op : plain_ops) {
      if (starts_with(rest, op)) {
        i += op.size();
        emit(TokenKind::Operator, start, i, start_line);
        matched = true;
        break;
      }
    }
    if (matched) continue;

    switch (c) {
      case '<':
      case '>':
      case '~':
      case '?':
      case ':':
        ++i;
        emit(TokenKind::Operator, start, i, start_line);
        continue;
      case '(':
      case ')':
      case '{':
      case '}':
      case '[':
      case ']':
      case ',':
      case '@':
        ++i;
        emit(TokenKind::Punctuation, start, i, start_line);
        continue;
      default:
        // Unknown byte: keep losslessness, classify as punctuation.
        ++i;
        emit(TokenKind::Punctuation, start, i, start_line);
        continue;
    }
  }

  return stream;
}

}  // namespace covpred
