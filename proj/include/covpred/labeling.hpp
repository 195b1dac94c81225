#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "covpred/common.hpp"

namespace covpred {

/// Per-class coverage as ingested from a report (averaged over repeat runs).
struct CoverageRecord {
  std::string class_name;
  double statement = 0;   // in [0,1]
  double branch = 0;      // in [0,1]
  int suite_size = 1;     // |tau| >= 1
  int repetitions = 1;
};

struct LabelingConfig {
  int b = 1;  // budgeted influential test cases, 1 <= b (clamped to |tau| at use)
};

/// The four regression targets for one class.
struct TargetVector {
  double statement = 0;
  double branch = 0;
  double mean = 0;            // arithmetic mean of statement and branch
  double coverageability = 0; // mean * b / suite size
};

inline double mean_coverage(double statement, double branch) {
  return (statement + branch) / 2.0;
}

/// Mean coverage scaled by the test budget against the suite size; lands in
/// (0,1] whenever the mean coverage is positive. b larger than the suite
/// clamps with a warning flag rather than failing batch runs.
inline double coverageability(double mean, int b, int suite_size, bool* clamped = nullptr) {
  if (b < 1) throw ValidationError("b must be >= 1");
  if (suite_size < 1) throw ValidationError("suite size must be >= 1");
  if (b > suite_size) {
    if (clamped) *clamped = true;
    b = suite_size;
  }
  if (b == suite_size) return mean;  // boundary identity holds exactly
  return mean * static_cast<double>(b) / static_cast<double>(suite_size);
}

inline double module_coverageability(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("module coverageability of an empty class list");
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

inline TargetVector build_target_vector(const CoverageRecord& record, const LabelingConfig& config,
                                        bool* clamped = nullptr) {
  TargetVector t;
  t.statement = record.statement;
  t.branch = record.branch;
  t.mean = mean_coverage(record.statement, record.branch);
  t.coverageability = coverageability(t.mean, config.b, record.suite_size, clamped);
  return t;
}

/// Coverage report format: UTF-8 CSV, header
///   class,statement_coverage,branch_coverage,test_suite_size[,mutation_score]
/// one row per class per generation run. Repeat rows average per criterion;
/// suite sizes average and round half-up. A mutation_score column is accepted
/// and ignored.
inline std::vector<CoverageRecord> load_coverage_report(std::istream& in) {
  struct Accum {
    double statement = 0, branch = 0, suite = 0;
    int runs = 0;
    std::size_t first_seen = 0;
  };
  std::map<std::string, Accum> acc;
  std::size_t order = 0;

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim_view(line);
    if (sv.empty() || sv.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (starts_with(sv, "class,")) continue;  // header row
    }
    auto cols = split_view(sv, ',');
    if (cols.size() < 4 || cols.size() > 5)
      throw ParseError("coverage row needs 4 or 5 columns", line_no);
    std::string name(trim_view(cols[0]));
    if (name.empty()) throw ParseError("empty class name", line_no);
    double st = 0, br = 0, suite = 0;
    try {
      st = parse_double(trim_view(cols[1]));
      br = parse_double(trim_view(cols[2]));
      suite = parse_double(trim_view(cols[3]));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (st < 0 || st > 1) throw ParseError("statement coverage outside [0,1]", line_no);
    if (br < 0 || br > 1) throw ParseError("branch coverage outside [0,1]", line_no);
    if (!(suite >= 1) || suite != std::floor(suite))
      throw ParseError("test suite size must be a positive integer", line_no);
    Accum& a = acc[name];
    if (a.runs == 0) a.first_seen = order++;
    a.statement += st;
    a.branch += br;
    a.suite += suite;
    ++a.runs;
  }

  std::vector<CoverageRecord> out(acc.size());
  for (const auto& [name, a] : acc) {
    CoverageRecord r;
    r.class_name = name;
    r.statement = a.statement / a.runs;
    r.branch = a.branch / a.runs;
    r.suite_size = static_cast<int>(std::floor(a.suite / a.runs + 0.5));  // half-up
    r.repetitions = a.runs;
    out[a.first_seen] = std::move(r);
  }
  return out;
}

inline std::vector<CoverageRecord> load_coverage_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open coverage report: " + path);
  return load_coverage_report(in);
}

}  // namespace covpred
