#pragma once

#include <istream>
#include <map>
#include <string>

#include "covpred/common.hpp"

namespace covpred {

/// Flat key-value config with [section] headers, '#' or ';' comments.
class Config {
 public:
  static Config parse(std::istream& in) {
    Config c;
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view sv = trim_view(line);
      if (sv.empty() || sv.front() == '#' || sv.front() == ';') continue;
      if (sv.front() == '[') {
        if (sv.back() != ']') throw ParseError("unterminated section header", line_no);
        section = std::string(sv.substr(1, sv.size() - 2));
        continue;
      }
      auto eq = sv.find('=');
      if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
      std::string key(trim_view(sv.substr(0, eq)));
      std::string value(trim_view(sv.substr(eq + 1)));
      c.values_[section + "." + key] = value;
    }
    return c;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("config is missing required key: " + key);
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(it->second);
  }

  long get_int(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stol(it->second);
  }

  const std::map<std::string, std::string>& all() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace covpred
