#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "covpred/common.hpp"

namespace covpred {

namespace detail {

/// Regularized incomplete beta by Lentz continued fraction, 1e-12 tolerance.
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-14;
  constexpr double kFpMin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_beta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  double front = std::exp(ln_beta + a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - std::exp(ln_beta + b * std::log(1.0 - x) + a * std::log(x)) * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

/// Two-sided p of a t statistic with nu degrees of freedom.
inline double student_t_two_sided_p(double t, double nu) {
  double x = nu / (nu + t * t);
  return detail::incomplete_beta(nu / 2.0, 0.5, x);
}

struct PearsonResult {
  double r = 0;
  double p = 1;
};

/// Product-moment correlation with a two-sided p from the t statistic
/// t = r sqrt((n-2)/(1-r^2)). Requires n >= 3 and nonzero variance.
inline PearsonResult pearson_correlation(const std::vector<double>& x,
                                         const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw ValidationError("pearson: need at least 3 samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("pearson: zero variance input");
  PearsonResult res;
  res.r = sxy / std::sqrt(sxx * syy);
  res.r = std::clamp(res.r, -1.0, 1.0);
  if (std::abs(res.r) >= 1.0) {
    res.p = 0.0;
    return res;
  }
  double nu = static_cast<double>(n - 2);
  double t = res.r * std::sqrt(nu / (1.0 - res.r * res.r));
  res.p = student_t_two_sided_p(t, nu);
  return res;
}

enum class Impact { Positive, Negative, Unknown };

inline const char* impact_name(Impact i) {
  switch (i) {
    case Impact::Positive: return "Positive";
    case Impact::Negative: return "Negative";
    case Impact::Unknown: return "Unknown";
  }
  return "Unknown";
}

/// p above 0.05 is not statistically significant: Unknown. Otherwise the
/// correlation sign decides. A zero r with significant p cannot occur for
/// n >= 3; direct callers passing such a pair get Unknown.
inline Impact classify_impact(double r, double p) {
  if (p > 0.05) return Impact::Unknown;
  if (r > 0) return Impact::Positive;
  if (r < 0) return Impact::Negative;
  return Impact::Unknown;
}

}  // namespace covpred
