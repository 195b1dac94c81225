#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "covpred/common.hpp"
#include "covpred/dataset.hpp"
#include "covpred/metrics/schema.hpp"

namespace covpred {

/// Write-temp-then-rename so readers never observe partial artifacts.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write: " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// Metrics table: one row per class, schema order, version comment first.
// ---------------------------------------------------------------------------

inline std::string write_metrics_csv(const std::vector<FeatureVector>& vectors) {
  const auto& schema = MetricSchema::instance();
  std::ostringstream os;
  os << "# schema: " << kSchemaVersion << "\n";
  os << "class";
  for (const auto& f : schema.features()) os << "," << f.name;
  os << "\n";
  for (const auto& v : vectors) {
    os << v.class_name;
    for (double x : v.values) os << "," << format_double(x);
    os << "\n";
  }
  return os.str();
}

inline std::vector<FeatureVector> read_metrics_csv(std::istream& in) {
  const auto& schema = MetricSchema::instance();
  std::vector<FeatureVector> out;
  std::string line;
  bool header_checked = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim_view(line);
    if (sv.empty() || sv.front() == '#') continue;
    auto cols = split_view(sv, ',');
    if (!header_checked) {
      header_checked = true;
      if (cols.size() != schema.size() + 1)
        throw ParseError("metrics header width does not match the schema", line_no);
      for (std::size_t i = 0; i < schema.size(); ++i)
        if (std::string(cols[i + 1]) != schema.at(i).name)
          throw ParseError("metrics header mismatch at column " + std::to_string(i + 1), line_no);
      continue;
    }
    if (cols.size() != schema.size() + 1)
      throw ParseError("metrics row width does not match the schema", line_no);
    FeatureVector v;
    v.class_name = std::string(cols[0]);
    v.values.reserve(schema.size());
    for (std::size_t i = 1; i < cols.size(); ++i) v.values.push_back(parse_double(cols[i]));
    out.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset files
// ---------------------------------------------------------------------------

inline std::string write_dataset_csv(const Dataset& ds) {
  std::ostringstream os;
  os << "# schema: " << kSchemaVersion << " variant: " << variant_name(ds.variant) << "\n";
  os << "class";
  for (const auto& n : ds.feature_names) os << "," << n;
  for (const auto& t : kTargetNames) os << "," << t;
  os << "\n";
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    os << ds.class_names[r];
    for (double x : ds.features[r]) os << "," << format_double(x);
    for (double t : ds.targets[r]) os << "," << format_double(t);
    os << "\n";
  }
  return os.str();
}

inline Dataset read_dataset_csv(std::istream& in) {
  const auto& schema = MetricSchema::instance();
  Dataset ds;
  std::string line;
  bool header_done = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim_view(line);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      auto pos = sv.find("variant: ");
      if (pos != std::string_view::npos)
        ds.variant = parse_variant(std::string(sv.substr(pos + 9)));
      continue;
    }
    auto cols = split_view(sv, ',');
    if (!header_done) {
      header_done = true;
      if (cols.size() < 6) throw ParseError("dataset header too narrow", line_no);
      for (std::size_t i = 1; i + 4 < cols.size(); ++i) {
        ds.feature_names.emplace_back(cols[i]);
        ds.schema_columns.push_back(schema.index_of(ds.feature_names.back()));
      }
      for (std::size_t k = 0; k < 4; ++k)
        if (std::string(cols[cols.size() - 4 + k]) != kTargetNames[k])
          throw ParseError("dataset target header mismatch", line_no);
      continue;
    }
    if (cols.size() != ds.feature_names.size() + 5)
      throw ParseError("dataset row width mismatch", line_no);
    ds.class_names.emplace_back(cols[0]);
    std::vector<double> row;
    row.reserve(ds.feature_names.size());
    for (std::size_t i = 1; i <= ds.feature_names.size(); ++i)
      row.push_back(parse_double(cols[i]));
    ds.features.push_back(std::move(row));
    std::array<double, 4> t{};
    for (std::size_t k = 0; k < 4; ++k)
      t[k] = parse_double(cols[ds.feature_names.size() + 1 + k]);
    ds.targets.push_back(t);
  }
  if (!header_done) throw ValidationError("empty dataset file");
  return ds;
}

// ---------------------------------------------------------------------------
// Label table
// ---------------------------------------------------------------------------

inline std::vector<TargetVector> read_labels_csv(std::istream& in) {
  std::vector<TargetVector> out;
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim_view(line);
    if (sv.empty() || sv.front() == '#') continue;
    if (header) {
      header = false;
      if (starts_with(sv, "class,")) continue;
    }
    auto cols = split_view(sv, ',');
    if (cols.size() < 5) throw ParseError("label row needs at least 5 columns", line_no);
    TargetVector t;
    t.statement = parse_double(cols[1]);
    t.branch = parse_double(cols[2]);
    t.mean = parse_double(cols[3]);
    t.coverageability = parse_double(cols[4]);
    out.push_back(t);
  }
  return out;
}

inline std::string write_labels_csv(const std::vector<CoverageRecord>& records,
                                    const LabelingConfig& config) {
  std::ostringstream os;
  os << "class,statement_coverage,branch_coverage,mean_coverage,coverageability,test_suite_size,"
        "repetitions\n";
  for (const auto& r : records) {
    TargetVector t = build_target_vector(r, config);
    os << r.class_name << "," << format_double(t.statement) << "," << format_double(t.branch)
       << "," << format_double(t.mean) << "," << format_double(t.coverageability) << ","
       << r.suite_size << "," << r.repetitions << "\n";
  }
  return os.str();
}

}  // namespace covpred
