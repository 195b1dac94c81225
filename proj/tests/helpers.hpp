#pragma once

// Test-only helpers: fixture paths, a random Java method-body generator and
// independent numeric oracles. Oracles here must stay independent of the
// library implementations they check.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "covpred/rng.hpp"

namespace testutil {

inline std::filesystem::path fixture_dir() { return std::filesystem::path(COVPRED_FIXTURE_DIR); }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// Random Java method-body generator (syntactically valid snippets)
// ---------------------------------------------------------------------------

class BodyGen {
 public:
  explicit BodyGen(std::uint64_t seed) : rng_(seed) {}

  std::string method_body() {
    std::string out = "{\n";
    int stmts = 1 + static_cast<int>(rng_.next_below(4));
    for (int i = 0; i < stmts; ++i) out += stmt(2, false);
    out += "}";
    return out;
  }

 private:
  std::string cond() {
    std::string c = var();
    int extra = static_cast<int>(rng_.next_below(3));
    for (int i = 0; i < extra; ++i)
      c += (rng_.next_below(2) ? " && " : " || ") + var() + (rng_.next_below(2) ? " > 0" : " < 9");
    return c;
  }

  std::string var() {
    static const char* names[] = {"a", "b", "c", "d"};
    return names[rng_.next_below(4)];
  }

  std::string simple() {
    switch (rng_.next_below(4)) {
      case 0: return "a = a + 1;\n";
      case 1: return "b = a * 2;\n";
      case 2: return "c = a > 0 ? b : a;\n";
      default: return "d = d - 1;\n";
    }
  }

  std::string stmt(int depth, bool in_loop) {
    if (depth <= 0) return simple();
    switch (rng_.next_below(in_loop ? 8 : 6)) {
      case 0:
        return "if (" + cond() + ") {\n" + stmt(depth - 1, in_loop) + "}\n";
      case 1:
        return "if (" + cond() + ") {\n" + stmt(depth - 1, in_loop) + "} else {\n" +
               stmt(depth - 1, in_loop) + "}\n";
      case 2:
        return "while (" + cond() + ") {\n" + stmt(depth - 1, true) + "}\n";
      case 3:
        return "for (int i = 0; i < b; i++) {\n" + stmt(depth - 1, true) + "}\n";
      case 4: {
        int cases = static_cast<int>(rng_.next_below(4));
        std::string s = "switch (a) {\n";
        for (int k = 0; k < cases; ++k)
          s += "case " + std::to_string(k) + ": " + simple() + (rng_.next_below(2) ? "break;\n" : "\n");
        if (rng_.next_below(2)) s += "default: " + simple();
        s += "}\n";
        return s;
      }
      case 5:
        return "try {\n" + stmt(depth - 1, in_loop) + "} catch (Exception e) {\n" + simple() +
               "}\n";
      case 6:
        return "if (" + cond() + ") break;\n";
      default:
        return "if (" + cond() + ") continue;\n";
    }
  }

  covpred::Rng rng_;
};

// ---------------------------------------------------------------------------
// Closed-form least squares (normal equations) for small problems
// ---------------------------------------------------------------------------

inline std::vector<double> least_squares_fit(const std::vector<std::vector<double>>& x,
                                             const std::vector<double>& y) {
  // augment with intercept column; solve (A^T A) w = A^T y by Gauss elimination
  const std::size_t n = x.size();
  const std::size_t d = x[0].size() + 1;
  std::vector<std::vector<double>> ata(d, std::vector<double>(d, 0.0));
  std::vector<double> aty(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row = x[i];
    row.push_back(1.0);
    for (std::size_t a = 0; a < d; ++a) {
      aty[a] += row[a] * y[i];
      for (std::size_t b = 0; b < d; ++b) ata[a][b] += row[a] * row[b];
    }
  }
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r)
      if (std::abs(ata[r][col]) > std::abs(ata[pivot][col])) pivot = r;
    std::swap(ata[col], ata[pivot]);
    std::swap(aty[col], aty[pivot]);
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col || ata[col][col] == 0.0) continue;
      double f = ata[r][col] / ata[col][col];
      for (std::size_t c2 = 0; c2 < d; ++c2) ata[r][c2] -= f * ata[col][c2];
      aty[r] -= f * aty[col];
    }
  }
  std::vector<double> w(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    if (ata[i][i] != 0.0) w[i] = aty[i] / ata[i][i];
  return w;  // weights then intercept
}

// ---------------------------------------------------------------------------
// Direct LOF formula (independent of the library implementation)
// ---------------------------------------------------------------------------

inline std::vector<double> lof_oracle(const std::vector<std::vector<double>>& pts, int k) {
  const std::size_t n = pts.size();
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t c = 0; c < pts[i].size(); ++c) {
      double d = pts[i][c] - pts[j][c];
      s += d * d;
    }
    return std::sqrt(s);
  };
  std::vector<std::vector<std::size_t>> nb(n);
  std::vector<double> kdist(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> ds;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) ds.emplace_back(dist(i, j), j);
    std::sort(ds.begin(), ds.end());
    kdist[i] = ds[k - 1].first;
    for (const auto& [d, j] : ds) {
      if (d <= kdist[i])
        nb[i].push_back(j);
      else
        break;
    }
  }
  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (auto j : nb[i]) s += std::max(kdist[j], dist(i, j));
    lrd[i] = 1.0 / (s / nb[i].size() + 1e-10);
  }
  std::vector<double> lof(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (auto j : nb[i]) s += lrd[j];
    lof[i] = s / nb[i].size() / lrd[i];
  }
  return lof;
}

// ---------------------------------------------------------------------------
// Student-t two-sided tail by numerical integration (Simpson)
// ---------------------------------------------------------------------------

inline double t_two_sided_p_by_quadrature(double t, double nu) {
  // integrate the t pdf from -|t| to |t| with Simpson's rule, p = 1 - mass
  double a = -std::abs(t), b = std::abs(t);
  const int steps = 200000;  // even
  double h = (b - a) / steps;
  auto pdf = [nu](double x) {
    double log_c = std::lgamma((nu + 1) / 2.0) - std::lgamma(nu / 2.0) -
                   0.5 * std::log(nu * std::acos(-1.0));
    return std::exp(log_c - (nu + 1) / 2.0 * std::log1p(x * x / nu));
  };
  double sum = pdf(a) + pdf(b);
  for (int i = 1; i < steps; ++i) sum += pdf(a + i * h) * (i % 2 ? 4.0 : 2.0);
  double mass = sum * h / 3.0;
  return std::max(0.0, 1.0 - mass);
}

}  // namespace testutil
