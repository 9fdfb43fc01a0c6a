#pragma once

// Explicit embedded Runge-Kutta integration with step-size control.
//
// Two tableaux are provided: Dormand-Prince 5(4) for the master equation and
// the rate equations, and Cash-Karp 5(4) for the deterministic part of the
// stochastic trajectories.  The integrator only ever lands exactly on the
// requested output times, so no dense output is needed.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jcmp/error.hpp"

namespace jcmp::ode {

struct Tolerances {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;
  long max_steps = 50'000'000;
};

/// Butcher tableau of an embedded pair with up to seven stages.  b is the
/// propagating solution, b_err = b - b_hat the error estimator weights.
struct Tableau {
  int stages;
  int order;  // order of the propagating solution
  std::array<double, 7> c;
  std::array<std::array<double, 7>, 7> a;
  std::array<double, 7> b;
  std::array<double, 7> b_err;
};

inline constexpr Tableau dormand_prince54() {
  Tableau t{};
  t.stages = 7;
  t.order = 5;
  t.c = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  t.a[1] = {1.0 / 5};
  t.a[2] = {3.0 / 40, 9.0 / 40};
  t.a[3] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
  t.a[4] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
  t.a[5] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656};
  t.a[6] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};
  t.b = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
  const std::array<double, 7> b_hat = {5179.0 / 57600,    0.0,           7571.0 / 16695, 393.0 / 640,
                                       -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
  for (int i = 0; i < 7; ++i) t.b_err[i] = t.b[i] - b_hat[i];
  return t;
}

inline constexpr Tableau cash_karp45() {
  Tableau t{};
  t.stages = 6;
  t.order = 5;
  t.c = {0.0, 1.0 / 5, 3.0 / 10, 3.0 / 5, 1.0, 7.0 / 8, 0.0};
  t.a[1] = {1.0 / 5};
  t.a[2] = {3.0 / 40, 9.0 / 40};
  t.a[3] = {3.0 / 10, -9.0 / 10, 6.0 / 5};
  t.a[4] = {-11.0 / 54, 5.0 / 2, -70.0 / 27, 35.0 / 27};
  t.a[5] = {1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592, 253.0 / 4096};
  t.b = {37.0 / 378, 0.0, 250.0 / 621, 125.0 / 594, 0.0, 512.0 / 1771, 0.0};
  const std::array<double, 7> b_hat = {2825.0 / 27648, 0.0,           18575.0 / 48384, 13525.0 / 55296,
                                       277.0 / 14336,  1.0 / 4, 0.0};
  for (int i = 0; i < 7; ++i) t.b_err[i] = t.b[i] - b_hat[i];
  return t;
}

/// Adaptive integrator for y' = f(t, y) over an Eigen vector type.  The
/// right-hand side is called as f(t, y, dydt) and must write into dydt.
/// The last accepted step size is kept between advance() calls.
template <class Vec>
class EmbeddedRK {
 public:
  explicit EmbeddedRK(Tableau tableau, Tolerances tol = {}) : tab_(tableau), tol_(tol) {}

  const Tolerances& tolerances() const noexcept { return tol_; }
  long accepted_steps() const noexcept { return accepted_; }
  long rejected_steps() const noexcept { return rejected_; }
  double last_step() const noexcept { return h_; }

  /// Integrates from t to t_end in place.  Throws StepFailure when the step
  /// size underflows or the step budget runs out.
  template <class F>
  void advance(F&& f, double& t, Vec& y, double t_end) {
    if (t_end <= t) return;
    ensure_workspace(y);
    if (h_ <= 0.0) h_ = initial_step(f, t, y, t_end);
    long steps = 0;
    while (t < t_end) {
      if (++steps > tol_.max_steps) {
        throw StepFailure("integrator step budget exhausted", t);
      }
      double h = std::min({h_, tol_.max_step, t_end - t});
      // Avoid leaving a sliver shorter than the rounding noise in t.
      const bool last = (t + h >= t_end) || (t_end - (t + h) < 1e-12 * std::max(1.0, std::abs(t_end)));
      if (last) h = t_end - t;
      const double err = try_step(f, t, y, h);
      if (!std::isfinite(err)) {
        h_ = 0.25 * h;
        ++rejected_;
      } else if (err <= 1.0) {
        t = last ? t_end : t + h;
        y.swap(y_new_);
        ++accepted_;
        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -1.0 / tab_.order), 0.2, 5.0);
        // A step clipped to the output time says nothing about the natural size.
        if (!(last && h < h_)) h_ = h * grow;
      } else {
        ++rejected_;
        h_ = h * std::clamp(0.9 * std::pow(err, -1.0 / tab_.order), 0.2, 1.0);
      }
      if (h_ < tol_.min_step) {
        throw StepFailure("integrator step size underflow", t);
      }
    }
  }

 private:
  void ensure_workspace(const Vec& y) {
    if (k_[0].size() == y.size()) return;
    for (auto& k : k_) k.resize(y.size());
    y_new_.resize(y.size());
    stage_.resize(y.size());
  }

  template <class F>
  double initial_step(F& f, double t, const Vec& y, double t_end) {
    // Hairer-Norsett-Wanner heuristic based on |y| and |f(y)|.
    f(t, y, k_[0]);
    const double d0 = scaled_norm(y, y);
    const double d1 = scaled_norm(k_[0], y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, t_end - t, tol_.max_step});
    return std::max(h0, 10.0 * tol_.min_step);
  }

  double scaled_norm(const Vec& v, const Vec& ref) const {
    double m = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      m = std::max(m, std::abs(v[i]) / (tol_.atol + tol_.rtol * std::abs(ref[i])));
    }
    return m;
  }

  template <class F>
  double try_step(F& f, double t, const Vec& y, double h) {
    const int s = tab_.stages;
    f(t, y, k_[0]);
    for (int i = 1; i < s; ++i) {
      stage_ = y;
      for (int j = 0; j < i; ++j) {
        if (tab_.a[i][j] != 0.0) stage_ += (h * tab_.a[i][j]) * k_[j];
      }
      f(t + tab_.c[i] * h, stage_, k_[i]);
    }
    y_new_ = y;
    for (int i = 0; i < s; ++i) {
      if (tab_.b[i] != 0.0) y_new_ += (h * tab_.b[i]) * k_[i];
    }
    double err = 0.0;
    for (Eigen::Index n = 0; n < y.size(); ++n) {
      typename Vec::Scalar e{};
      for (int i = 0; i < s; ++i) e += (h * tab_.b_err[i]) * k_[i][n];
      const double scale = tol_.atol + tol_.rtol * std::max(std::abs(y[n]), std::abs(y_new_[n]));
      err = std::max(err, std::abs(e) / scale);
    }
    return err;
  }

  Tableau tab_;
  Tolerances tol_;
  double h_ = 0.0;
  long accepted_ = 0;
  long rejected_ = 0;
  std::array<Vec, 7> k_;
  Vec y_new_;
  Vec stage_;
};

}  // namespace jcmp::ode
