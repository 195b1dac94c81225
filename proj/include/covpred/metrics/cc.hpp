#pragma once

#include <algorithm>

#include "covpred/cfg.hpp"

namespace covpred {

enum class CcVariant { Standard, Strict, Modified, Essential };

struct CcValues {
  int standard = 1;
  int strict = 1;
  int modified = 1;
  int essential = 1;

  int get(CcVariant v) const {
    switch (v) {
      case CcVariant::Standard: return standard;
      case CcVariant::Strict: return strict;
      case CcVariant::Modified: return modified;
      case CcVariant::Essential: return essential;
    }
    return standard;
  }
};

/// The four cyclomatic complexity variants of one method.
///   standard:  1 + if + loop + case-label + catch + ternary
///   strict:    standard + '&&' + '||' in conditions
///   modified:  like standard but each labeled switch counts once
///   essential: cyclomatic number of the structurally reduced CFG
inline CcValues compute_cc(const Cfg& cfg) {
  const DecisionCounts& d = cfg.decisions;
  CcValues out;
  out.standard = 1 + d.ifs + d.loops + d.case_labels + d.catches + d.ternaries;
  out.strict = out.standard + d.sc_and + d.sc_or;
  out.modified =
      1 + d.ifs + d.loops + d.catches + d.ternaries + d.switches_with_labels;
  out.essential = std::min(essential_complexity(cfg), out.standard);
  return out;
}

inline int compute_cc(const Cfg& cfg, CcVariant v) { return compute_cc(cfg).get(v); }

}  // namespace covpred
