#pragma once

// Two-sample Kolmogorov-Smirnov test and helpers for correlated series.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "jcmp/error.hpp"

namespace jcmp::stats {

struct KsResult {
  double statistic;   // sup |F_a - F_b|
  double critical;    // 5% critical value, asymptotic
  double p_value;     // asymptotic Kolmogorov distribution
  bool rejects() const { return statistic > critical; }
};

/// Q_KS(lambda) = 2 sum_k (-1)^(k-1) exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  return {d, 1.358 / sq, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

/// Every `stride`-th element starting at `offset`.
inline std::vector<double> thin(const std::vector<double>& v, std::size_t stride, std::size_t offset = 0) {
  if (stride == 0) throw DomainError("thin: stride must be positive");
  std::vector<double> out;
  for (std::size_t k = offset; k < v.size(); k += stride) out.push_back(v[k]);
  return out;
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw DomainError("mean: empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Lag at which the sample autocorrelation first drops below `level`.
inline std::size_t decorrelation_lag(const std::vector<double>& v, double level = 0.1, std::size_t max_lag = 100000) {
  const double m = mean(v);
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  if (var == 0.0) return 1;
  for (std::size_t lag = 1; lag < std::min(max_lag, v.size()); ++lag) {
    double c = 0.0;
    for (std::size_t k = 0; k + lag < v.size(); ++k) c += (v[k] - m) * (v[k + lag] - m);
    if (c / var < level) return lag;
  }
  return std::min(max_lag, v.size());
}

}  // namespace jcmp::stats
