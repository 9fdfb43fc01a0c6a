#pragma once

// Lindblad Liouvillian of the driven, damped Jaynes-Cummings system in the
// frame rotating at the drive frequency, plus steady-state solves, time
// propagation and intensity correlations via the regression theorem.
//
// Vectorization is column stacking: vec(X)[i + d*j] = X(i, j), so the map
// X -> A X B becomes kron(B^T, A).

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include "jcmp/error.hpp"
#include "jcmp/hilbert.hpp"
#include "jcmp/ode.hpp"
#include "jcmp/parallel.hpp"

namespace jcmp {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

/// Rates share one unit, usually gamma.  kappa is the cavity field decay
/// rate (photons leave at 2 kappa).
struct SystemParams {
  double g = 500.0;
  double kappa = 0.5;
  double gamma = 1.0;
  double eps_d = 0.0;
  double delta_omega_d = 0.0;

  void validate() const {
    if (!(g > 0.0)) throw DomainError("SystemParams: g must be > 0");
    if (kappa < 0.0 || gamma < 0.0) throw DomainError("SystemParams: rates must be >= 0");
    if (kappa == 0.0 && gamma == 0.0) {
      throw DomainError("SystemParams: kappa and gamma cannot both vanish");
    }
    if (eps_d < 0.0) throw DomainError("SystemParams: eps_d must be >= 0");
    if (!std::isfinite(delta_omega_d)) throw DomainError("SystemParams: detuning not finite");
  }
};

/// Generator acting on column-stacked d x d matrices.  The Hilbert space is
/// absent for cavity-only models.
class Superoperator {
 public:
  Superoperator(int d, SparseMatrix elements, std::optional<HilbertSpace> space = std::nullopt)
      : d_(d), elements_(std::move(elements)), space_(std::move(space)) {
    if (elements_.rows() != static_cast<Eigen::Index>(d) * d || elements_.cols() != elements_.rows()) {
      throw DimensionMismatch("Superoperator: shape must be d^2 x d^2");
    }
    elements_.makeCompressed();
  }

  int dim() const noexcept { return d_; }
  const SparseMatrix& matrix() const noexcept { return elements_; }
  const std::optional<HilbertSpace>& space() const noexcept { return space_; }

  Vector apply(const Vector& x) const { return elements_ * x; }

  double max_abs() const {
    double m = 0.0;
    for (Eigen::Index k = 0; k < elements_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(elements_, k); it; ++it) m = std::max(m, std::abs(it.value()));
    }
    return m;
  }

  /// max_j |sum_i L(ii, j)|: how far tr(L[X]) is from vanishing on the basis.
  double trace_defect() const {
    double worst = 0.0;
    for (Eigen::Index col = 0; col < elements_.outerSize(); ++col) {
      Complex sum = 0.0;
      for (SparseMatrix::InnerIterator it(elements_, col); it; ++it) {
        if (it.row() % (d_ + 1) == 0) sum += it.value();
      }
      worst = std::max(worst, std::abs(sum));
    }
    return worst;
  }

 private:
  int d_;
  SparseMatrix elements_;
  std::optional<HilbertSpace> space_;
};

inline Vector vectorize(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvectorize(const Vector& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * d) {
    throw DimensionMismatch("unvectorize: length is not d^2");
  }
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

/// Row vector r with r . vec(X) = tr(A X).
inline Vector trace_functional(const Matrix& a) { return vectorize(a.transpose()); }

namespace detail {

inline SparseMatrix to_sparse(const Matrix& m) {
  return m.sparseView(Complex(1.0), 1e-300);
}

inline SparseMatrix sparse_identity(int d) {
  SparseMatrix id(d, d);
  id.setIdentity();
  return id;
}

inline SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out = Eigen::kroneckerProduct(a, b).eval();
  out.prune(Complex(0.0), 0.0);
  return out;
}

}  // namespace detail

/// Jump operator J with rate c contributing c (J rho J^dag - {J^dag J, rho}/2).
struct Jump {
  double rate;
  Matrix op;
};

/// -i[H, .] plus the dissipators of `jumps`, vectorized.
inline SparseMatrix lindblad_matrix(const Matrix& h, const std::vector<Jump>& jumps) {
  const int d = static_cast<int>(h.rows());
  const SparseMatrix id = detail::sparse_identity(d);
  const Complex minus_i(0.0, -1.0);
  SparseMatrix l = minus_i * (detail::kron(id, detail::to_sparse(h)) -
                              detail::kron(detail::to_sparse(h.transpose()), id));
  for (const auto& [rate, j] : jumps) {
    if (rate == 0.0) continue;
    const Matrix jdj = j.adjoint() * j;
    l += rate * detail::kron(detail::to_sparse(j.conjugate()), detail::to_sparse(j));
    l -= (0.5 * rate) * detail::kron(id, detail::to_sparse(jdj));
    l -= (0.5 * rate) * detail::kron(detail::to_sparse(jdj.transpose()), id);
  }
  l.prune(Complex(0.0), 0.0);
  return l;
}

/// H = -dw (a^dag a + s+ s-) + g (a s+ + a^dag s-) + eps_d (a + a^dag), rotating frame.
inline Operator build_hamiltonian(const SystemParams& p, const HilbertSpace& space) {
  p.validate();
  const Operator a = cavity_annihilation(space);
  const Operator ad = a.adjoint();
  const Operator sm = atom_lowering(space);
  const Operator sp = sm.adjoint();
  return (-p.delta_omega_d) * (ad * a + sp * sm) + p.g * (a * sp + ad * sm) + p.eps_d * (a + ad);
}

inline Superoperator build_liouvillian(const SystemParams& p, const HilbertSpace& space) {
  const Operator h = build_hamiltonian(p, space);
  std::vector<Jump> jumps{{2.0 * p.kappa, cavity_annihilation(space).matrix()},
                          {p.gamma, atom_lowering(space).matrix()}};
  return Superoperator(space.dim(), lindblad_matrix(h.matrix(), jumps), space);
}

// --- steady state ----------------------------------------------------------

enum class SteadyStateMethod {
  automatic,   // sparse LU with trace row, SVD fallback on small problems
  sparse_lu,   // sparse LU only
  null_space,  // smallest right singular vector of the dense Liouvillian
};

struct SteadyStateOptions {
  SteadyStateMethod method = SteadyStateMethod::automatic;
  double residual_tol = 1e-8;     // relative to max |L_ij|
  double degeneracy_tol = 1e-10;  // second-smallest singular value relative to largest
  int svd_fallback_max = 2500;    // largest d^2 for which the dense fallback is attempted
};

namespace detail {

inline Matrix hermitize_normalize(Matrix rho) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-300) throw DegenerateKernel("steady state has vanishing trace");
  rho /= tr.real();
  return rho;
}

inline Matrix steady_state_null_space(const Superoperator& l, double degeneracy_tol) {
  const Matrix dense = Matrix(l.matrix());
  Eigen::BDCSVD<Matrix> svd(dense, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();  // descending
  const Eigen::Index n = s.size();
  if (n >= 2 && s(n - 2) <= degeneracy_tol * s(0)) {
    throw DegenerateKernel("Liouvillian kernel is at least two-dimensional (sigma_{n-1}/sigma_max = " +
                           std::to_string(s(n - 2) / s(0)) + ")");
  }
  const Vector x = svd.matrixV().col(n - 1);
  return hermitize_normalize(unvectorize(x, l.dim()));
}

inline std::optional<Matrix> steady_state_lu(const Superoperator& l, double residual_tol) {
  const int d = l.dim();
  const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<std::size_t>(l.matrix().nonZeros()) + d);
  for (Eigen::Index col = 0; col < l.matrix().outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(l.matrix(), col); it; ++it) {
      if (it.row() != 0) trips.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int i = 0; i < d; ++i) trips.emplace_back(0, static_cast<Eigen::Index>(i) * (d + 1), 1.0);
  SparseMatrix m(d2, d2);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) return std::nullopt;
  Vector rhs = Vector::Zero(d2);
  rhs(0) = 1.0;
  const Vector x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) return std::nullopt;
  Matrix rho = hermitize_normalize(unvectorize(x, d));
  const double residual = (l.matrix() * vectorize(rho)).cwiseAbs().maxCoeff();
  if (residual >= residual_tol * l.max_abs()) return std::nullopt;
  return rho;
}

}  // namespace detail

/// Kernel of L as a trace-one Hermitian matrix.
inline Matrix steady_state_matrix(const Superoperator& l, const SteadyStateOptions& opt = {}) {
  const long d2 = static_cast<long>(l.dim()) * l.dim();
  switch (opt.method) {
    case SteadyStateMethod::null_space:
      return detail::steady_state_null_space(l, opt.degeneracy_tol);
    case SteadyStateMethod::sparse_lu:
      if (auto rho = detail::steady_state_lu(l, opt.residual_tol)) return *rho;
      throw DegenerateKernel("sparse LU steady-state solve failed the residual check");
    case SteadyStateMethod::automatic:
      if (auto rho = detail::steady_state_lu(l, opt.residual_tol)) return *rho;
      if (d2 <= opt.svd_fallback_max) return detail::steady_state_null_space(l, opt.degeneracy_tol);
      throw DegenerateKernel("sparse LU steady-state solve failed and the problem is too large for SVD");
  }
  throw DomainError("steady_state: unknown method");
}

inline DensityMatrix steady_state(const Superoperator& l, const SteadyStateOptions& opt = {}) {
  if (!l.space()) throw DimensionMismatch("steady_state: superoperator carries no Hilbert space");
  return DensityMatrix(*l.space(), steady_state_matrix(l, opt));
}

// --- propagation -----------------------------------------------------------

namespace detail {

inline void check_grid(const std::vector<double>& grid, const char* who) {
  if (grid.empty()) throw DomainError(std::string(who) + ": empty time grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0 || (i > 0 && grid[i] < grid[i - 1])) {
      throw DomainError(std::string(who) + ": time grid must be finite, non-negative and ascending");
    }
  }
}

}  // namespace detail

/// Integrates x' = L x from t = 0 and calls observer(k, t_k, x(t_k)) at every
/// grid time.  Grid times equal to 0 receive x0 untouched.
template <class Observer>
void propagate_vectorized(const Superoperator& l, Vector x0, const std::vector<double>& t_grid,
                          Observer&& observer, const ode::Tolerances& tol = {}) {
  detail::check_grid(t_grid, "propagate");
  if (x0.size() != l.matrix().rows()) throw DimensionMismatch("propagate: state length mismatch");
  ode::EmbeddedRK<Vector> rk(ode::dormand_prince54(), tol);
  const SparseMatrix& m = l.matrix();
  auto rhs = [&m](double, const Vector& x, Vector& dx) { dx.noalias() = m * x; };
  double t = 0.0;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    rk.advance(rhs, t, x0, t_grid[k]);
    observer(k, t_grid[k], static_cast<const Vector&>(x0));
  }
}

inline std::vector<DensityMatrix> propagate(const Superoperator& l, const DensityMatrix& rho0,
                                            const std::vector<double>& t_grid,
                                            const ode::Tolerances& tol = {}) {
  if (!l.space() || !(*l.space() == rho0.space())) {
    throw DimensionMismatch("propagate: state and Liouvillian live on different spaces");
  }
  std::vector<DensityMatrix> out;
  out.reserve(t_grid.size());
  propagate_vectorized(
      l, vectorize(rho0.matrix()), t_grid,
      [&](std::size_t, double t, const Vector& x) {
        if (t == 0.0) {
          out.push_back(rho0);
        } else {
          out.emplace_back(rho0.space(), unvectorize(x, l.dim()));
        }
      },
      tol);
  return out;
}

// --- correlations ----------------------------------------------------------

/// <a^dag a^dag a a> / <a^dag a>^2 straight from a state.
inline double g2_zero(const DensityMatrix& rho) {
  const Operator a = cavity_annihilation(rho.space());
  const Operator n = a.adjoint() * a;
  const double mean_n = expectation(n, rho).real();
  if (mean_n < 1e-12) throw ZeroIntensity("g2: mean photon number below 1e-12");
  const Operator ad2a2 = a.adjoint() * a.adjoint() * a * a;
  return expectation(ad2a2, rho).real() / (mean_n * mean_n);
}

/// tr{a^dag a e^{L tau}[a rho_ss a^dag]} / <a^dag a>^2 on tau_grid.
inline std::vector<double> g2_forward(const Superoperator& l, const DensityMatrix& rho_ss,
                                      const std::vector<double>& tau_grid,
                                      const ode::Tolerances& tol = {}) {
  const Operator a = cavity_annihilation(rho_ss.space());
  const Operator n = a.adjoint() * a;
  const double mean_n = expectation(n, rho_ss).real();
  if (mean_n < 1e-12) throw ZeroIntensity("g2: mean photon number below 1e-12");
  const Matrix conditioned = a.matrix() * rho_ss.matrix() * a.matrix().adjoint();
  const Vector obs = trace_functional(n.matrix());
  std::vector<double> out(tau_grid.size());
  propagate_vectorized(
      l, vectorize(conditioned), tau_grid,
      [&](std::size_t k, double, const Vector& x) {
        out[k] = (obs.transpose() * x).value().real() / (mean_n * mean_n);
      },
      tol);
  return out;
}

inline std::vector<double> g2_forward(const SystemParams& p, const HilbertSpace& space,
                                      const std::vector<double>& tau_grid,
                                      const ode::Tolerances& tol = {}) {
  const Superoperator l = build_liouvillian(p, space);
  return g2_forward(l, steady_state(l), tau_grid, tol);
}

struct SweepPoint {
  double delta_omega_d;
  double mean_n;
  double g2_zero;  // NaN when <n> vanishes or the solve failed
  double fock_tail;
  std::optional<std::string> error;
};

/// One steady-state solve per detuning; failures are recorded per point.
inline std::vector<SweepPoint> sweep_detuning(SystemParams p, const HilbertSpace& space,
                                              const std::vector<double>& detunings,
                                              unsigned threads = 1) {
  if (detunings.empty()) throw DomainError("sweep_detuning: empty detuning grid");
  p.validate();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<SweepPoint> out(detunings.size());
  parallel_for(detunings.size(), threads, [&](std::size_t i) {
    SystemParams q = p;
    q.delta_omega_d = detunings[i];
    SweepPoint pt{detunings[i], nan, nan, nan, std::nullopt};
    try {
      const DensityMatrix rho = steady_state(build_liouvillian(q, space));
      pt.mean_n = expectation(photon_number(space), rho).real();
      pt.fock_tail = rho.fock_tail();
      pt.g2_zero = pt.mean_n < 1e-12 ? nan : g2_zero(rho);
    } catch (const Error& e) {
      pt.error = e.what();
    }
    out[i] = std::move(pt);
  });
  return out;
}

}  // namespace jcmp
