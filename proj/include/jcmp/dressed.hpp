#pragma once

// Secular six-level model of the three-photon resonance and its four-level
// two-photon counterpart: drive-induced level shifts, effective Rabi
// frequencies, dressed-state decay rates, rate equations, the state
// prepared by a photon detection, and the resulting intensity correlations.
//
// Dressed levels are labelled 0..5 as in jcmp::dressed_state().  All
// frequencies and rates share the unit of g, kappa and gamma.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jcmp/error.hpp"
#include "jcmp/ode.hpp"

namespace jcmp {

namespace detail {
inline const double kSqrt2 = std::sqrt(2.0);
inline const double kSqrt3 = std::sqrt(3.0);
inline const double kSqrt6 = std::sqrt(6.0);
}  // namespace detail

// --- perturbative quantities -----------------------------------------------

/// Second-order shifts of levels 0..5 at the bare three-photon resonance.
struct Shifts {
  std::array<double, 6> delta{};
  double operator[](int k) const { return delta.at(static_cast<std::size_t>(k)); }
};

/// Shift coefficients in units of eps_d^2 / g.
inline std::array<double, 6> shift_coefficients() {
  using detail::kSqrt2;
  using detail::kSqrt3;
  using detail::kSqrt6;
  const double p21 = std::pow((kSqrt2 + 1.0) / 2.0, 2);
  const double m21 = std::pow((kSqrt2 - 1.0) / 2.0, 2);
  const double p32 = std::pow((kSqrt3 + kSqrt2) / 2.0, 2);
  const double m32 = std::pow((kSqrt3 - kSqrt2) / 2.0, 2);
  const double d1 = 0.5 * kSqrt3 / (1.0 - kSqrt3) + p21 * kSqrt3 / (kSqrt6 - kSqrt3 - 1.0) -
                    m21 * kSqrt3 / (kSqrt3 + 1.0 + kSqrt6);
  const double d2 = 0.5 * kSqrt3 / (1.0 + kSqrt3) + m21 * kSqrt3 / (kSqrt6 + kSqrt3 - 1.0) +
                    p21 * kSqrt3 / (kSqrt3 - 1.0 - kSqrt6);
  const double d3 = p32 * kSqrt3 / (2.0 - kSqrt6) - m32 * kSqrt3 / (4.0 + kSqrt6) +
                    p21 * kSqrt3 / (1.0 + kSqrt3 - kSqrt6) + m21 * kSqrt3 / (1.0 - kSqrt3 - kSqrt6);
  const double d4 = m32 * kSqrt3 / (2.0 + kSqrt6) + p32 * kSqrt3 / (kSqrt6 - 4.0) +
                    p21 * kSqrt3 / (1.0 + kSqrt6 - kSqrt3) + m21 * kSqrt3 / (1.0 + kSqrt3 + kSqrt6);
  return {kSqrt3 / 2.0, d1, d2, d3, d4, -kSqrt3};
}

inline Shifts perturbative_shifts(double eps_d, double g) {
  if (!(g > 0.0)) throw DomainError("perturbative_shifts: g must be > 0");
  const auto c = shift_coefficients();
  Shifts s;
  for (int k = 0; k < 6; ++k) s.delta[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k)] * eps_d * eps_d / g;
  return s;
}

/// Omega / (eps_d^3 / g^2) from the four third-order de-excitation paths.
inline double three_photon_rabi_coefficient() {
  using detail::kSqrt2;
  using detail::kSqrt3;
  using detail::kSqrt6;
  return 3.0 / (4.0 * kSqrt2) *
         ((kSqrt3 - kSqrt2) * (1.0 + kSqrt2) / ((2.0 + kSqrt6) * (1.0 + kSqrt3)) +
          (kSqrt3 - kSqrt2) * (kSqrt2 - 1.0) / ((2.0 + kSqrt6) * (1.0 - kSqrt3)) +
          (kSqrt3 + kSqrt2) * (kSqrt2 + 1.0) / ((2.0 - kSqrt6) * (1.0 - kSqrt3)) +
          (kSqrt3 + kSqrt2) * (kSqrt2 - 1.0) / ((2.0 - kSqrt6) * (1.0 + kSqrt3)));
}

inline double three_photon_rabi(double eps_d, double g) {
  if (eps_d < 0.0) throw DomainError("three_photon_rabi: eps_d must be >= 0");
  if (!(g > 0.0)) throw DomainError("three_photon_rabi: g must be > 0");
  return three_photon_rabi_coefficient() * eps_d * eps_d * eps_d / (g * g);
}

inline double two_photon_rabi(double eps_d, double g) {
  if (eps_d < 0.0) throw DomainError("two_photon_rabi: eps_d must be >= 0");
  if (!(g > 0.0)) throw DomainError("two_photon_rabi: g must be > 0");
  return 2.0 * detail::kSqrt2 * eps_d * eps_d / g;
}

/// Drive detuning of the shifted n-photon resonance, n in {2, 3}.
inline double resonance_detuning(int n_photon, double eps_d, double g) {
  const double r = eps_d * eps_d / g;
  switch (n_photon) {
    case 2: return -g / detail::kSqrt2 - detail::kSqrt2 * r;
    case 3: return -g / detail::kSqrt3 - 0.5 * detail::kSqrt3 * r;
    default:
      throw DomainError("resonance_detuning: only 2- and 3-photon resonances are supported, got " +
                        std::to_string(n_photon));
  }
}

/// Second-order shifts of the JC ladder states at an arbitrary drive
/// detuning, by direct summation over the neighbouring manifolds.
/// Element [0] is |0,->; elements [2n-1], [2n] are |n,-> and |n,+>.
inline std::vector<double> ladder_shifts(double eps_d, double g, double delta_omega_d, int max_n) {
  if (max_n < 1) throw DomainError("ladder_shifts: max_n must be >= 1");
  auto energy = [&](int n, int sigma) { return -delta_omega_d * n + sigma * std::sqrt(double(n)) * g; };
  // <m, s'| (a + a^dag) |n, s> for m = n - 1 (and its transpose).
  auto down = [](int n, int sigma, int sigma_p) {
    if (n == 1) return 1.0 / detail::kSqrt2;
    return 0.5 * (std::sqrt(double(n)) + sigma * sigma_p * std::sqrt(double(n - 1)));
  };
  const int top = max_n + 1;  // neighbours of the highest requested manifold
  auto shift = [&](int n, int s) {
    const double e = energy(n, s);
    double sum = 0.0;
    auto add = [&](int m, int sp, double elem) {
      if (m < 0 || m > top) return;
      const double em = m == 0 ? 0.0 : energy(m, sp);
      sum += elem * elem / (e - em);
    };
    if (n == 0) {
      for (int sp : {-1, 1}) add(1, sp, down(1, sp, -1));
    } else {
      if (n - 1 == 0) {
        add(0, -1, down(1, s, -1));
      } else {
        for (int sp : {-1, 1}) add(n - 1, sp, down(n, s, sp));
      }
      for (int sp : {-1, 1}) add(n + 1, sp, down(n + 1, sp, s));
    }
    return eps_d * eps_d * sum;
  };
  std::vector<double> out;
  out.push_back(shift(0, -1));
  for (int n = 1; n <= max_n; ++n) {
    out.push_back(shift(n, -1));
    out.push_back(shift(n, +1));
  }
  return out;
}

// --- rates -----------------------------------------------------------------

struct SecularRates {
  double G10, G20, G31, G32, G41, G42, G53, G54;
};

inline SecularRates secular_rates(double gamma, double kappa) {
  if (gamma < 0.0 || kappa < 0.0) throw DomainError("secular_rates: rates must be >= 0");
  using detail::kSqrt2;
  using detail::kSqrt3;
  const double g4 = gamma / 4.0;
  const double k2 = kappa / 2.0;
  SecularRates r{};
  r.G10 = r.G20 = gamma / 2.0 + kappa;
  r.G31 = r.G42 = g4 + k2 * std::pow(kSqrt2 + 1.0, 2);
  r.G32 = r.G41 = g4 + k2 * std::pow(kSqrt2 - 1.0, 2);
  r.G53 = g4 + k2 * std::pow(kSqrt3 + kSqrt2, 2);
  r.G54 = g4 + k2 * std::pow(kSqrt3 - kSqrt2, 2);
  return r;
}

/// Parameters of the secular model plus every derived quantity.
struct DressedParams {
  double g = 500.0;
  double kappa = 0.5;
  double gamma = 1.0;
  double eps_d = 0.0;

  double Omega3 = 0.0;
  double OmegaPrime = 0.0;
  Shifts shifts;
  SecularRates rates{};
  double nu1 = 0.0;  // 2g + delta_2 - delta_1
  double nu2 = 0.0;  // 2 sqrt2 g + delta_4 - delta_3
  double nu1_two_photon = 0.0;  // first-couplet splitting at the two-photon detuning

  static DressedParams make(double g, double kappa, double gamma, double eps_d) {
    if (!(g > 0.0)) throw DomainError("DressedParams: g must be > 0");
    if (!(gamma > 0.0)) throw DomainError("DressedParams: gamma must be > 0");
    if (kappa < 0.0) throw DomainError("DressedParams: kappa must be >= 0");
    if (eps_d < 0.0) throw DomainError("DressedParams: eps_d must be >= 0");
    DressedParams p;
    p.g = g;
    p.kappa = kappa;
    p.gamma = gamma;
    p.eps_d = eps_d;
    p.Omega3 = three_photon_rabi(eps_d, g);
    p.OmegaPrime = two_photon_rabi(eps_d, g);
    p.shifts = perturbative_shifts(eps_d, g);
    p.rates = secular_rates(gamma, kappa);
    p.nu1 = 2.0 * g + p.shifts[2] - p.shifts[1];
    p.nu2 = 2.0 * detail::kSqrt2 * g + p.shifts[4] - p.shifts[3];
    const auto two = ladder_shifts(eps_d, g, -g / detail::kSqrt2, 2);
    p.nu1_two_photon = 2.0 * g + two[2] - two[1];
    return p;
  }

  /// Drive strength whose three-photon Rabi frequency Omega gives p5.
  static DressedParams for_p5(double p5, double g, double gamma) {
    if (!(p5 > 0.0 && p5 < 2.0 / 13.0)) throw DomainError("for_p5: p5 must lie in (0, 2/13)");
    const double omega = 3.0 * gamma * std::sqrt(p5 / (4.0 - 26.0 * p5));
    return for_omega3(omega, g, gamma);
  }
  static DressedParams for_omega3(double omega, double g, double gamma) {
    const double eps = std::cbrt(omega * g * g / three_photon_rabi_coefficient());
    return make(g, gamma / 2.0, gamma, eps);
  }

  /// Drive strength whose two-photon Rabi frequency gives p3.
  static DressedParams for_p3(double p3, double g, double gamma) {
    if (!(p3 > 0.0 && p3 < 0.25)) throw DomainError("for_p3: p3 must lie in (0, 1/4)");
    const double omega_p = gamma * std::sqrt(p3 / (1.0 - 4.0 * p3));
    return for_omega_prime(omega_p, g, gamma);
  }
  static DressedParams for_omega_prime(double omega_p, double g, double gamma) {
    const double eps = std::sqrt(omega_p * g / (2.0 * detail::kSqrt2));
    return make(g, gamma / 2.0, gamma, eps);
  }

  bool matched() const { return std::abs(gamma - 2.0 * kappa) <= 1e-12 * gamma; }
};

// --- steady state ----------------------------------------------------------

inline double p5_steady(double omega, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("p5_steady: gamma must be > 0");
  return 4.0 * omega * omega / (26.0 * omega * omega + 9.0 * gamma * gamma);
}

inline double p3_steady(double omega_prime, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("p3_steady: gamma must be > 0");
  return omega_prime * omega_prime / (4.0 * omega_prime * omega_prime + gamma * gamma);
}

/// Populations p0..p5 fixed by detailed balance given p5.
inline std::array<double, 6> detailed_balance_populations(double p5, const SecularRates& r) {
  if (!(p5 >= 0.0 && p5 <= 2.0 / 13.0)) {
    throw DomainError("detailed_balance_populations: p5 must lie in [0, 2/13]");
  }
  std::array<double, 6> p{};
  p[5] = p5;
  p[3] = r.G53 * p5 / (r.G31 + r.G32);
  p[4] = r.G54 * p5 / (r.G41 + r.G42);
  p[1] = (r.G31 * p[3] + r.G41 * p[4]) / r.G10;
  p[2] = (r.G32 * p[3] + r.G42 * p[4]) / r.G20;
  p[0] = 1.0 - (p[1] + p[2] + p[3] + p[4] + p[5]);
  return p;
}

/// <a^dag a> = (p1 + p2)/2 + 3(p3 + p4)/2 + 5 p5/2 for diagonal populations.
inline double mean_photon_number(const std::array<double, 6>& p) {
  return 0.5 * (p[1] + p[2]) + 1.5 * (p[3] + p[4]) + 2.5 * p[5];
}

// --- dynamics: six-level model ---------------------------------------------

struct SixLevelState {
  double rho00 = 1.0, rho11 = 0.0, rho22 = 0.0, rho33 = 0.0, rho44 = 0.0, rho55 = 0.0;
  double D = 0.0;  // Im rho_05 in the drive frame
  std::complex<double> rho12{}, rho34{};

  double population_sum() const { return rho00 + rho11 + rho22 + rho33 + rho44 + rho55; }

  /// <a^dag a> with the dressed-basis form of the number operator.
  double mean_photon_number() const {
    return 0.5 * (rho11 + rho22 + 2.0 * rho12.real() + 2.0 * rho34.real()) + 1.5 * (rho33 + rho44) +
           2.5 * rho55;
  }

  void validate(double pop_tol = 1e-10, double sum_tol = 1e-8) const {
    for (double p : {rho00, rho11, rho22, rho33, rho44, rho55}) {
      if (p < -pop_tol) throw DomainError("SixLevelState: negative population");
    }
    if (std::abs(population_sum() - 1.0) > sum_tol) throw DomainError("SixLevelState: populations do not sum to 1");
    if (std::abs(rho12) > std::sqrt(std::max(0.0, rho11 * rho22)) + 1e-8 ||
        std::abs(rho34) > std::sqrt(std::max(0.0, rho33 * rho44)) + 1e-8) {
      throw DomainError("SixLevelState: coherence violates Cauchy-Schwarz");
    }
  }
};

/// Amplitudes of the superpositions left behind by a photon detection from
/// level 3 (over levels 1, 2) and level 5 (over levels 3, 4).
struct ConditionalState {
  double w_vac = 6.0 / 25.0;
  double w_super1 = 9.0 / 25.0;
  double w_super2 = 10.0 / 25.0;
  std::array<double, 2> super1{};  // on |xi_1>, |xi_2>
  std::array<double, 2> super2{};  // on |xi_3>, |xi_4>
  SixLevelState initial;
};

inline ConditionalState conditional_state() {
  using detail::kSqrt2;
  using detail::kSqrt3;
  ConditionalState c;
  const double n1 = std::sqrt(2.0 / 3.0);
  const double n2 = std::sqrt(2.0 / 5.0);
  c.super1 = {n1 * (kSqrt2 + 1.0) / 2.0, n1 * (kSqrt2 - 1.0) / 2.0};
  c.super2 = {n2 * (kSqrt3 + kSqrt2) / 2.0, n2 * (kSqrt3 - kSqrt2) / 2.0};
  SixLevelState& s = c.initial;
  s.rho00 = c.w_vac;
  s.rho11 = c.w_super1 * c.super1[0] * c.super1[0];
  s.rho22 = c.w_super1 * c.super1[1] * c.super1[1];
  s.rho33 = c.w_super2 * c.super2[0] * c.super2[0];
  s.rho44 = c.w_super2 * c.super2[1] * c.super2[1];
  s.rho55 = 0.0;
  s.D = 0.0;
  s.rho12 = c.w_super1 * c.super1[0] * c.super1[1];
  s.rho34 = c.w_super2 * c.super2[0] * c.super2[1];
  return c;
}

enum class RateForm {
  general,  // separate rates for every dressed transition
  matched,  // gamma = 2 kappa, aggregated couplet populations
};

namespace detail {

using Vec7 = Eigen::Matrix<double, 7, 1>;

// Packing: rho00, rho11, rho22, rho33, rho44, rho55, D.
inline void six_level_rhs_general(const DressedParams& p, const Vec7& y, Vec7& dy) {
  const SecularRates& r = p.rates;
  const double om = p.Omega3;
  dy(0) = r.G10 * y(1) + r.G20 * y(2) - 2.0 * om * y(6);
  dy(1) = -r.G10 * y(1) + r.G31 * y(3) + r.G41 * y(4);
  dy(2) = -r.G20 * y(2) + r.G32 * y(3) + r.G42 * y(4);
  dy(3) = -(r.G31 + r.G32) * y(3) + r.G53 * y(5);
  dy(4) = -(r.G42 + r.G41) * y(4) + r.G54 * y(5);
  dy(5) = -(r.G53 + r.G54) * y(5) + 2.0 * om * y(6);
  dy(6) = -om * (y(5) - y(0)) - 0.5 * (r.G53 + r.G54) * y(6);
}

// Packing: rho00, S12 = rho11 + rho22, S34 = rho33 + rho44, rho55, D,
// rho11, rho33.  The first five are the closed aggregated system; the last
// two are slaved to it and only serve to split the couplets.
inline void six_level_rhs_matched(const DressedParams& p, const Vec7& y, Vec7& dy) {
  const double gm = p.gamma;
  const double om = p.Omega3;
  const SecularRates& r = p.rates;
  dy(0) = gm * y(1) - 2.0 * om * y(4);
  dy(1) = -gm * y(1) + 2.0 * gm * y(2);
  dy(2) = -2.0 * gm * y(2) + 3.0 * gm * y(3);
  dy(3) = -3.0 * gm * y(3) + 2.0 * om * y(4);
  dy(4) = -om * (y(3) - y(0)) - 1.5 * gm * y(4);
  const double rho44 = y(2) - y(6);
  dy(5) = -gm * y(5) + r.G31 * y(6) + r.G41 * rho44;
  dy(6) = -2.0 * gm * y(6) + r.G53 * y(3);
}

}  // namespace detail

/// Integrates the six-level rate equations from `init` over tau_grid.  The
/// beat coherences follow their closed-form exponentials.
inline std::vector<SixLevelState> rate_evolve(const SixLevelState& init, const DressedParams& p,
                                              const std::vector<double>& tau_grid,
                                              RateForm form = RateForm::matched,
                                              const ode::Tolerances& tol = {}) {
  if (form == RateForm::matched && !p.matched()) {
    throw DomainError("rate_evolve: the matched form requires gamma = 2 kappa");
  }
  detail::Vec7 y;
  if (form == RateForm::general) {
    y << init.rho00, init.rho11, init.rho22, init.rho33, init.rho44, init.rho55, init.D;
  } else {
    y << init.rho00, init.rho11 + init.rho22, init.rho33 + init.rho44, init.rho55, init.D, init.rho11, init.rho33;
  }
  const double decay12 = 0.5 * (p.rates.G10 + p.rates.G20);
  const double decay34 = 0.5 * (p.rates.G31 + p.rates.G41 + p.rates.G32 + p.rates.G42);
  ode::EmbeddedRK<detail::Vec7> rk(ode::dormand_prince54(), tol);
  auto rhs = [&](double, const detail::Vec7& s, detail::Vec7& ds) {
    if (form == RateForm::general) {
      detail::six_level_rhs_general(p, s, ds);
    } else {
      detail::six_level_rhs_matched(p, s, ds);
    }
  };
  std::vector<SixLevelState> out;
  out.reserve(tau_grid.size());
  double t = 0.0;
  for (double tau : tau_grid) {
    if (tau < t) throw DomainError("rate_evolve: tau grid must be ascending and non-negative");
    rk.advance(rhs, t, y, tau);
    SixLevelState s;
    if (form == RateForm::general) {
      s.rho00 = y(0); s.rho11 = y(1); s.rho22 = y(2); s.rho33 = y(3); s.rho44 = y(4); s.rho55 = y(5); s.D = y(6);
    } else {
      s.rho00 = y(0); s.rho11 = y(5); s.rho22 = y(1) - y(5); s.rho33 = y(6); s.rho44 = y(2) - y(6);
      s.rho55 = y(3); s.D = y(4);
    }
    s.rho12 = init.rho12 * std::exp(std::complex<double>(-decay12 * tau, p.nu1 * tau));
    s.rho34 = init.rho34 * std::exp(std::complex<double>(-decay34 * tau, p.nu2 * tau));
    out.push_back(s);
  }
  return out;
}

/// Time derivatives of the general rate equations at `s` (drive frame).
inline std::array<double, 7> rate_derivative(const SixLevelState& s, const DressedParams& p) {
  detail::Vec7 y, dy;
  y << s.rho00, s.rho11, s.rho22, s.rho33, s.rho44, s.rho55, s.D;
  detail::six_level_rhs_general(p, y, dy);
  return {dy(0), dy(1), dy(2), dy(3), dy(4), dy(5), dy(6)};
}

/// Steady SixLevelState of the matched model: detailed-balance populations
/// plus the stationary drive coherence D = 3 gamma p5 / (2 Omega).
inline SixLevelState six_level_steady(const DressedParams& p) {
  const double p5 = p5_steady(p.Omega3, p.gamma);
  const auto pops = detailed_balance_populations(p5, p.rates);
  SixLevelState s;
  s.rho00 = pops[0]; s.rho11 = pops[1]; s.rho22 = pops[2]; s.rho33 = pops[3]; s.rho44 = pops[4]; s.rho55 = pops[5];
  s.D = p.Omega3 > 0.0 ? (p.rates.G53 + p.rates.G54) * p5 / (2.0 * p.Omega3) : 0.0;
  return s;
}

struct G2Options {
  bool include_beats = true;
  RateForm form = RateForm::matched;
};

/// g2(tau) of the three-photon secular model started from the conditional state.
inline std::vector<double> g2_analytic_3photon(const DressedParams& p, const std::vector<double>& tau_grid,
                                               G2Options opt = {}) {
  if (!p.matched()) throw DomainError("g2_analytic_3photon: requires gamma = 2 kappa");
  const double p5 = p5_steady(p.Omega3, p.gamma);
  if (p5 < 1e-12) throw ZeroIntensity("g2_analytic_3photon: p5 below 1e-12");
  const double mean_n = 25.0 / 4.0 * p5;
  SixLevelState init = conditional_state().initial;
  if (!opt.include_beats) {
    init.rho12 = 0.0;
    init.rho34 = 0.0;
  }
  const auto states = rate_evolve(init, p, tau_grid, opt.form);
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.mean_photon_number() / mean_n);
  return out;
}

inline double g2_zero_3photon(double p5) {
  if (p5 < 1e-12) throw ZeroIntensity("g2_zero_3photon: p5 below 1e-12");
  return 22.0 / 25.0 * 4.0 / (25.0 * p5);
}

// --- dynamics: two-photon four-level model ---------------------------------

struct FourLevelState {
  double rho00 = 1.0, rho11 = 0.0, rho22 = 0.0, rho33 = 0.0;
  double D = 0.0;  // Im rho_03 in the drive frame
  std::complex<double> rho12{};

  double population_sum() const { return rho00 + rho11 + rho22 + rho33; }
  double mean_photon_number() const { return 0.5 * (rho11 + rho22 + 2.0 * rho12.real()) + 1.5 * rho33; }
};

/// State prepared by a photon detection at the two-photon resonance:
/// 2/5 vacuum and 3/5 of the level-3 superposition over levels 1, 2.
inline FourLevelState conditional_state_2photon() {
  const ConditionalState c = conditional_state();
  FourLevelState s;
  s.rho00 = 2.0 / 5.0;
  s.rho11 = 3.0 / 5.0 * c.super1[0] * c.super1[0];
  s.rho22 = 3.0 / 5.0 * c.super1[1] * c.super1[1];
  s.rho12 = 3.0 / 5.0 * c.super1[0] * c.super1[1];
  return s;
}

/// Four-level rate equations with the two-photon drive Omega' on (0, 3).
inline std::vector<FourLevelState> four_level_evolve(const FourLevelState& init, const DressedParams& p,
                                                     const std::vector<double>& tau_grid,
                                                     const ode::Tolerances& tol = {}) {
  using Vec5 = Eigen::Matrix<double, 5, 1>;
  const SecularRates& r = p.rates;
  const double om = p.OmegaPrime;
  const double out3 = r.G31 + r.G32;
  auto rhs = [&](double, const Vec5& y, Vec5& dy) {
    dy(0) = r.G10 * y(1) + r.G20 * y(2) - 2.0 * om * y(4);
    dy(1) = -r.G10 * y(1) + r.G31 * y(3);
    dy(2) = -r.G20 * y(2) + r.G32 * y(3);
    dy(3) = -out3 * y(3) + 2.0 * om * y(4);
    dy(4) = -om * (y(3) - y(0)) - 0.5 * out3 * y(4);
  };
  Vec5 y;
  y << init.rho00, init.rho11, init.rho22, init.rho33, init.D;
  const double decay12 = 0.5 * (r.G10 + r.G20);
  ode::EmbeddedRK<Vec5> rk(ode::dormand_prince54(), tol);
  std::vector<FourLevelState> out;
  out.reserve(tau_grid.size());
  double t = 0.0;
  for (double tau : tau_grid) {
    if (tau < t) throw DomainError("four_level_evolve: tau grid must be ascending and non-negative");
    rk.advance(rhs, t, y, tau);
    FourLevelState s;
    s.rho00 = y(0); s.rho11 = y(1); s.rho22 = y(2); s.rho33 = y(3); s.D = y(4);
    s.rho12 = init.rho12 * std::exp(std::complex<double>(-decay12 * tau, p.nu1_two_photon * tau));
    out.push_back(s);
  }
  return out;
}

inline double g2_zero_2photon(double p3) {
  if (p3 < 1e-12) throw ZeroIntensity("g2_zero_2photon: p3 below 1e-12");
  return 4.0 / (25.0 * p3);
}

/// g2(tau) of the two-photon four-level model; <a^dag a>_ss = 5 p3 / 2.
inline std::vector<double> g2_analytic_2photon(const DressedParams& p, const std::vector<double>& tau_grid,
                                               bool include_beat = true) {
  if (!p.matched()) throw DomainError("g2_analytic_2photon: requires gamma = 2 kappa");
  const double p3 = p3_steady(p.OmegaPrime, p.gamma);
  if (p3 < 1e-12) throw ZeroIntensity("g2_analytic_2photon: p3 below 1e-12");
  const double mean_n = 2.5 * p3;
  FourLevelState init = conditional_state_2photon();
  if (!include_beat) init.rho12 = 0.0;
  const auto states = four_level_evolve(init, p, tau_grid);
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.mean_photon_number() / mean_n);
  return out;
}

// --- validity --------------------------------------------------------------

struct ValidityReport {
  double isolation_ratio = 0.0;     // (4 - 2 sqrt3) g / (sqrt3 max(kappa, gamma/2))
  double shift_rabi_ratio = 0.0;    // (delta_5 - delta_0) / Omega
  double rabi_over_gamma = 0.0;     // Omega / gamma
  double drive_ratio = 0.0;         // eps_d / g
  bool isolated = false;
  bool shift_rabi_ok = false;
  bool rabi_ok = false;
  bool perturbative_ok = true;
  bool no_drive = false;
  std::vector<std::string> warnings;
};

inline constexpr double kIsolationMin = 10.0;
inline constexpr double kRatioLow = 0.1;
inline constexpr double kRatioHigh = 10.0;
inline constexpr double kPerturbativeDriveMax = 0.15;

inline ValidityReport validity_report(const DressedParams& p) {
  ValidityReport v;
  const double loss = std::max(p.kappa, p.gamma / 2.0);
  v.isolation_ratio = loss > 0.0 ? (4.0 - 2.0 * detail::kSqrt3) * p.g / (detail::kSqrt3 * loss)
                                 : std::numeric_limits<double>::infinity();
  v.isolated = v.isolation_ratio >= kIsolationMin;
  if (!v.isolated) v.warnings.push_back("four-photon level not isolated: ratio " + std::to_string(v.isolation_ratio));
  v.drive_ratio = p.eps_d / p.g;
  if (p.eps_d == 0.0) {
    v.no_drive = true;
    v.warnings.emplace_back("no drive");
    return v;
  }
  v.shift_rabi_ratio = (p.shifts[5] - p.shifts[0]) / p.Omega3;
  v.rabi_over_gamma = p.Omega3 / p.gamma;
  const double sr = std::abs(v.shift_rabi_ratio);
  v.shift_rabi_ok = sr >= kRatioLow && sr <= kRatioHigh;
  v.rabi_ok = v.rabi_over_gamma >= kRatioLow && v.rabi_over_gamma <= kRatioHigh;
  if (!v.shift_rabi_ok) v.warnings.push_back("shift/Rabi ratio far from 1: " + std::to_string(v.shift_rabi_ratio));
  if (!v.rabi_ok) v.warnings.push_back("Omega/gamma far from 1: " + std::to_string(v.rabi_over_gamma));
  if (v.drive_ratio >= kPerturbativeDriveMax) {
    v.perturbative_ok = false;
    v.warnings.push_back("eps_d/g = " + std::to_string(v.drive_ratio) + " beyond the perturbative range");
  }
  return v;
}

}  // namespace jcmp
