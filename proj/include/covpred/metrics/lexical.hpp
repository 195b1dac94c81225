#pragma once

#include <array>
#include <set>
#include <string_view>

#include "covpred/lexer.hpp"

namespace covpred {

/// The 17 file-level lexical metrics, aligned with
/// MetricSchema::lexical_names(): NOTK NOTKU NOID NOIDU NOKW NOKWU NOASS
/// NOOP NOOPU NOSC NODOT NOREPR NOCJST NOCUJST NOEXST NONEW NOSUPER.
inline std::array<double, 17> compute_lexical_metrics(const TokenStream& stream) {
  std::array<double, 17> out{};
  std::set<std::string_view> unique_code, unique_ids, unique_kws, unique_ops;

  for (const Token& t : stream.tokens()) {
    if (!t.is_code()) continue;
    out[0] += 1;  // NOTK
    unique_code.insert(t.lexeme);
    switch (t.kind) {
      case TokenKind::Identifier:
        out[2] += 1;  // NOID
        unique_ids.insert(t.lexeme);
        if (t.lexeme == "print" || t.lexeme == "println" || t.lexeme == "printf")
          out[11] += 1;  // NOREPR (print-style calls)
        break;
      case TokenKind::Keyword: {
        out[4] += 1;  // NOKW
        unique_kws.insert(t.lexeme);
        std::string_view kw = t.lexeme;
        if (kw == "return") out[11] += 1;                                    // NOREPR
        if (kw == "if" || kw == "switch" || kw == "case") out[12] += 1;      // NOCJST
        if (kw == "break" || kw == "continue" || kw == "goto") out[13] += 1;  // NOCUJST
        if (kw == "try" || kw == "catch" || kw == "finally" || kw == "throw" || kw == "throws")
          out[14] += 1;                    // NOEXST
        if (kw == "new") out[15] += 1;     // NONEW
        if (kw == "super") out[16] += 1;   // NOSUPER
        break;
      }
      case TokenKind::AssignmentOp:
        out[6] += 1;  // NOASS
        break;
      case TokenKind::Operator:
        out[7] += 1;  // NOOP
        unique_ops.insert(t.lexeme);
        break;
      case TokenKind::Semicolon:
        out[9] += 1;  // NOSC
        break;
      case TokenKind::Dot:
        out[10] += 1;  // NODOT
        break;
      default:
        break;
    }
  }
  out[1] = static_cast<double>(unique_code.size());  // NOTKU
  out[3] = static_cast<double>(unique_ids.size());   // NOIDU
  out[5] = static_cast<double>(unique_kws.size());   // NOKWU
  out[8] = static_cast<double>(unique_ops.size());   // NOOPU
  return out;
}

}  // namespace covpred
