#pragma once

// Wigner quasi-probability of the cavity field, alpha = x + i y.
//
// wigner_numeric works on any Fock-basis density matrix through the
// displaced-parity sum, evaluated with the Laguerre recurrence for the
// matrix elements of the displaced parity operator.  The closed forms of the
// secular model are evaluated directly from their coefficients.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jcmp/dressed.hpp"
#include "jcmp/error.hpp"
#include "jcmp/hilbert.hpp"
#include "jcmp/parallel.hpp"

namespace jcmp {

struct PhaseSpaceGrid {
  double x_min = -3.0, x_max = 3.0;
  double y_min = -3.0, y_max = 3.0;
  int nx = 241, ny = 241;

  void validate() const {
    if (nx < 2 || ny < 2) throw DomainError("PhaseSpaceGrid: need at least 2 samples per axis");
    for (double v : {x_min, x_max, y_min, y_max}) {
      if (!std::isfinite(v)) throw DomainError("PhaseSpaceGrid: range not finite");
    }
    if (!(x_max > x_min) || !(y_max > y_min)) throw DomainError("PhaseSpaceGrid: empty range");
  }
  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dy() const { return (y_max - y_min) / (ny - 1); }
  double x(int i) const { return i == nx - 1 ? x_max : x_min + i * dx(); }
  double y(int j) const { return j == ny - 1 ? y_max : y_min + j * dy(); }

  static PhaseSpaceGrid square(double half_width, int n) {
    return PhaseSpaceGrid{-half_width, half_width, -half_width, half_width, n, n};
  }
};

/// Samples W(x_i, y_j) stored as values(i, j).
struct WignerField {
  PhaseSpaceGrid grid;
  Eigen::MatrixXd values;
  std::optional<std::string> warning;

  double min() const { return values.minCoeff(); }
  double max() const { return values.maxCoeff(); }

  /// Trapezoidal estimate of the integral over the grid rectangle.
  double integral() const {
    double sum = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
      const double wi = (i == 0 || i == grid.nx - 1) ? 0.5 : 1.0;
      for (int j = 0; j < grid.ny; ++j) {
        const double wj = (j == 0 || j == grid.ny - 1) ? 0.5 : 1.0;
        sum += wi * wj * values(i, j);
      }
    }
    return sum * grid.dx() * grid.dy();
  }

  /// Bilinear interpolation; NaN outside the grid.
  double interpolate(double x, double y) const {
    const double fx = (x - grid.x_min) / grid.dx();
    const double fy = (y - grid.y_min) / grid.dy();
    if (fx < 0.0 || fy < 0.0 || fx > grid.nx - 1 || fy > grid.ny - 1) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    const int i = std::min(static_cast<int>(fx), grid.nx - 2);
    const int j = std::min(static_cast<int>(fy), grid.ny - 2);
    const double u = fx - i, v = fy - j;
    return (1 - u) * (1 - v) * values(i, j) + u * (1 - v) * values(i + 1, j) + (1 - u) * v * values(i, j + 1) +
           u * v * values(i + 1, j + 1);
  }
};

/// L_n(x) by the three-term recurrence.
inline double laguerre(int n, double x) {
  if (n < 0) throw DomainError("laguerre: negative degree");
  if (n == 0) return 1.0;
  double prev = 1.0, cur = 1.0 - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace detail {

/// Displaced-parity sum at one point.  `scratch` must hold rho.rows() entries.
inline double wigner_point(const Matrix& rho, Complex alpha, std::vector<Complex>& scratch) {
  const int n_max = static_cast<int>(rho.rows());
  auto& wl = scratch;
  const Complex a2 = 2.0 * alpha;
  const Complex a2c = std::conj(a2);
  wl[0] = std::exp(-2.0 * std::norm(alpha)) / std::numbers::pi;
  double w = rho(0, 0).real() * wl[0].real();
  for (int n = 1; n < n_max; ++n) {
    wl[n] = a2 * wl[n - 1] / std::sqrt(double(n));
    w += 2.0 * (rho(0, n) * wl[n]).real();
  }
  for (int m = 1; m < n_max; ++m) {
    const double sm = std::sqrt(double(m));
    Complex temp = wl[m];
    wl[m] = (a2c * temp - sm * wl[m - 1]) / sm;
    w += (rho(m, m) * wl[m]).real();
    for (int n = m + 1; n < n_max; ++n) {
      const Complex next = (a2 * wl[n - 1] - sm * temp) / std::sqrt(double(n));
      temp = wl[n];
      wl[n] = next;
      w += 2.0 * (rho(m, n) * wl[n]).real();
    }
  }
  return 2.0 * w;
}

template <class PointFn>
WignerField fill_field(const PhaseSpaceGrid& grid, unsigned threads, PointFn&& fn) {
  grid.validate();
  WignerField f{grid, Eigen::MatrixXd(grid.nx, grid.ny), std::nullopt};
  parallel_for(static_cast<std::size_t>(grid.nx), threads, [&](std::size_t i) {
    const int ii = static_cast<int>(i);
    for (int j = 0; j < grid.ny; ++j) f.values(ii, j) = fn(grid.x(ii), grid.y(j));
  });
  return f;
}

}  // namespace detail

/// W at a single phase-space point.
inline double wigner_at(const FieldDensityMatrix& rho, Complex alpha) {
  std::vector<Complex> scratch(static_cast<std::size_t>(rho.fock_cutoff()));
  return detail::wigner_point(rho.matrix(), alpha, scratch);
}

inline WignerField wigner_numeric(const FieldDensityMatrix& rho, const PhaseSpaceGrid& grid = {},
                                  unsigned threads = 1) {
  const Matrix& m = rho.matrix();
  const std::size_t n = static_cast<std::size_t>(rho.fock_cutoff());
  grid.validate();
  WignerField f{grid, Eigen::MatrixXd(grid.nx, grid.ny), std::nullopt};
  parallel_for(static_cast<std::size_t>(grid.nx), threads, [&](std::size_t i) {
    std::vector<Complex> scratch(n);
    const int ii = static_cast<int>(i);
    for (int j = 0; j < grid.ny; ++j) f.values(ii, j) = detail::wigner_point(m, {grid.x(ii), grid.y(j)}, scratch);
  });
  f.warning = truncation_warning(rho);
  return f;
}

// --- closed forms of the secular model -------------------------------------

/// Fock-basis coefficients of the field state of the six-level model.
struct TransientCoeffs {
  double c0 = 1.0, c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
};

inline TransientCoeffs transient_coeffs(const SixLevelState& s) {
  TransientCoeffs c;
  const double r12 = s.rho12.real();
  const double r34 = s.rho34.real();
  c.c0 = s.rho00 + 0.5 * (s.rho11 + s.rho22) - r12;
  c.c1 = 0.5 * (s.rho11 + s.rho22 + s.rho33 + s.rho44) + r12 - r34;
  c.c2 = 0.5 * (s.rho33 + s.rho44 + s.rho55) + r34;
  c.c3 = 0.5 * s.rho55;
  c.c4 = s.D / std::sqrt(2.0);
  return c;
}

/// W from the transient coefficients; the c4 term carries i (8/sqrt6)(alpha^3 - alpha*^3).
inline double wigner_transient_at(const TransientCoeffs& c, double x, double y) {
  const double r2 = x * x + y * y;
  const double u = 4.0 * r2;
  const Complex a3 = std::pow(Complex(x, y), 3);
  const double cubic = -2.0 * a3.imag();  // i (a^3 - a*^3)
  return 2.0 / std::numbers::pi * std::exp(-2.0 * r2) *
         (c.c0 - c.c1 * laguerre(1, u) + c.c2 * laguerre(2, u) - c.c3 * laguerre(3, u) +
          c.c4 * (8.0 / std::sqrt(6.0)) * cubic);
}

inline WignerField wigner_transient(const TransientCoeffs& c, const PhaseSpaceGrid& grid = {}) {
  return detail::fill_field(grid, 1, [&](double x, double y) { return wigner_transient_at(c, x, y); });
}

inline void check_p5(double p5, const char* who) {
  if (!(p5 >= 0.0 && p5 <= 2.0 / 13.0 + 1e-15)) throw DomainError(std::string(who) + ": p5 must lie in [0, 2/13]");
}

/// Steady-state W of the matched six-level model in terms of p5.
inline WignerField wigner_ss_analytic(double p5, const PhaseSpaceGrid& grid = {}) {
  check_p5(p5, "wigner_ss_analytic");
  const double asym = (2.0 / std::sqrt(3.0)) * std::sqrt(std::max(0.0, p5 * (4.0 - 26.0 * p5)));
  return detail::fill_field(grid, 1, [&](double x, double y) {
    const double r2 = x * x + y * y;
    const double u = 4.0 * r2;
    const double cubic = -2.0 * std::pow(Complex(x, y), 3).imag();
    return 2.0 / std::numbers::pi * std::exp(-2.0 * r2) *
           ((1.0 - 4.0 * p5) - 2.25 * p5 * laguerre(1, u) + 1.25 * p5 * laguerre(2, u) -
            0.5 * p5 * laguerre(3, u) + asym * cubic);
  });
}

/// Cavity state of the six-level model in the Fock basis |0>..|N-1>.  The
/// drive coherence rho_05 = i D puts i D / sqrt2 on <0|rho_c|3>.
inline FieldDensityMatrix field_density_matrix(const SixLevelState& s, int fock_cutoff) {
  if (fock_cutoff < 4) throw DomainError("field_density_matrix: need at least 4 Fock levels");
  const TransientCoeffs c = transient_coeffs(s);
  Matrix m = Matrix::Zero(fock_cutoff, fock_cutoff);
  m(0, 0) = c.c0;
  m(1, 1) = c.c1;
  m(2, 2) = c.c2;
  m(3, 3) = c.c3;
  m(0, 3) = Complex(0.0, c.c4);
  m(3, 0) = Complex(0.0, -c.c4);
  return FieldDensityMatrix(std::move(m));
}

/// Steady cavity state of the matched model: populations 1-4p5, 9p5/4,
/// 5p5/4, p5/2 and <0|rho_c|3> = i D / sqrt2 with D = sqrt(p5 (4 - 26 p5)) / 2.
inline FieldDensityMatrix steady_field_density_matrix(double p5, int fock_cutoff = 4) {
  check_p5(p5, "steady_field_density_matrix");
  SixLevelState s;
  // Any split of the couplets with the right sums gives the same field state.
  s.rho55 = p5;
  s.rho33 = 0.75 * p5;
  s.rho44 = 0.75 * p5;
  s.rho11 = 1.5 * p5;
  s.rho22 = 1.5 * p5;
  s.rho00 = 1.0 - 5.5 * p5;
  s.D = 0.5 * std::sqrt(std::max(0.0, p5 * (4.0 - 26.0 * p5)));
  return field_density_matrix(s, fock_cutoff);
}

/// (2/pi) sum_m (-1)^m <m|rho_c|m> for the two-photon four-level model
/// evolved from its conditional state.
inline std::vector<double> wigner_origin_2photon(const std::vector<double>& tau_grid, const DressedParams& p) {
  const auto states = four_level_evolve(conditional_state_2photon(), p, tau_grid);
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) {
    const double r12 = s.rho12.real();
    const double f0 = s.rho00 - r12 + 0.5 * (s.rho11 + s.rho22);
    const double f1 = 0.5 * (s.rho11 + s.rho22 + s.rho33) + r12;
    const double f2 = 0.5 * s.rho33;
    out.push_back(2.0 / std::numbers::pi * (f0 - f1 + f2));
  }
  return out;
}

/// Same parity sum for the six-level model, over Fock levels 0..3.
inline std::vector<double> wigner_origin_3photon(const std::vector<double>& tau_grid, const DressedParams& p) {
  const auto states = rate_evolve(conditional_state().initial, p, tau_grid);
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) {
    const TransientCoeffs c = transient_coeffs(s);
    out.push_back(2.0 / std::numbers::pi * (c.c0 - c.c1 + c.c2 - c.c3));
  }
  return out;
}

// --- field analysis --------------------------------------------------------

struct Peak {
  double x, y, radius, angle, value;
};

/// Interior grid maxima that dominate their eight neighbours and reach at
/// least `min_fraction` of the global maximum.  Plateaus report once.
inline std::vector<Peak> local_maxima(const WignerField& f, double min_fraction = 0.5) {
  std::vector<Peak> out;
  const double floor = min_fraction * f.max();
  const auto& v = f.values;
  for (int i = 1; i < f.grid.nx - 1; ++i) {
    for (int j = 1; j < f.grid.ny - 1; ++j) {
      const double c = v(i, j);
      if (c < floor) continue;
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const double nb = v(i + di, j + dj);
          const bool earlier = di < 0 || (di == 0 && dj < 0);
          if (nb > c || (earlier && nb == c)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) {
        const double x = f.grid.x(i), y = f.grid.y(j);
        out.push_back({x, y, std::hypot(x, y), std::atan2(y, x), c});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });
  return out;
}

/// (max - min) / max of W sampled on the circle |alpha| = radius.
inline double azimuthal_modulation(const WignerField& f, double radius, int n_angles = 720) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int k = 0; k < n_angles; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n_angles;
    const double w = f.interpolate(radius * std::cos(th), radius * std::sin(th));
    if (std::isnan(w)) throw DomainError("azimuthal_modulation: circle leaves the grid");
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  return (hi - lo) / hi;
}

}  // namespace jcmp
