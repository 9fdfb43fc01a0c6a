#pragma once

// Driven, damped Kerr oscillator in the frame of the drive:
//   d rho/dt = i dw [n, rho] - i chi [a^dag^2 a^2, rho]
//              + [eps a^dag - eps* a, rho] + kappa (2 a rho a^dag - n rho - rho n).
// The drive term enters without a factor -i, exactly as written above.

#include <cmath>
#include <complex>

#include "jcmp/error.hpp"
#include "jcmp/hilbert.hpp"
#include "jcmp/liouville.hpp"
#include "jcmp/wigner.hpp"

namespace jcmp {

struct KerrParams {
  double chi = 1.0;
  double delta_omega_dK = 2.0;
  Complex eps_dK{0.04, 0.0};
  double kappa_K = 1e-5;
  int fock_cutoff = 35;

  void validate() const {
    if (!(chi > 0.0)) throw DomainError("KerrParams: chi must be > 0");
    if (!(kappa_K > 0.0)) throw DomainError("KerrParams: kappa_K must be > 0");
    if (fock_cutoff < 2) throw DomainError("KerrParams: fock_cutoff must be >= 2");
    if (!std::isfinite(delta_omega_dK) || !std::isfinite(std::abs(eps_dK))) {
      throw DomainError("KerrParams: parameters must be finite");
    }
  }
};

/// Cavity annihilation operator on |0>..|N-1>.
inline Matrix fock_annihilation(int n) {
  Matrix a = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
  return a;
}

/// The generator above written as -i[H, .] + 2 kappa D[a] with the
/// Hermitian H = -dw n + chi a^dag^2 a^2 + i (eps a^dag - eps* a).
inline Superoperator build_kerr_liouvillian(const KerrParams& p) {
  p.validate();
  const int n = p.fock_cutoff;
  const Matrix a = fock_annihilation(n);
  const Matrix ad = a.adjoint();
  const Complex i(0.0, 1.0);
  const Matrix h = -p.delta_omega_dK * (ad * a) + p.chi * (ad * ad * a * a) +
                   i * (p.eps_dK * ad - std::conj(p.eps_dK) * a);
  return Superoperator(n, lindblad_matrix(h, {{2.0 * p.kappa_K, a}}));
}

inline FieldDensityMatrix kerr_steady_state(const KerrParams& p, const SteadyStateOptions& opt = {}) {
  return FieldDensityMatrix(steady_state_matrix(build_kerr_liouvillian(p), opt));
}

inline WignerField kerr_steady_wigner(const KerrParams& p, const PhaseSpaceGrid& grid = {}, unsigned threads = 1) {
  return wigner_numeric(kerr_steady_state(p), grid, threads);
}

}  // namespace jcmp
