// Hilbert-space primitives, the Liouvillian and its solvers, and the Kerr model.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "jcmp/hilbert.hpp"
#include "jcmp/kerr.hpp"
#include "jcmp/liouville.hpp"
#include "jcmp/dressed.hpp"
#include "oracles.hpp"

using namespace jcmp;

namespace {

Matrix random_matrix(int d, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

// Random full-rank density matrix.
Matrix random_density(int d, std::uint32_t seed) {
  Matrix a = random_matrix(d, seed);
  Matrix rho = a * a.adjoint();
  return rho / rho.trace();
}

SystemParams three_photon_point(double eps_over_g, double g = 500.0) {
  SystemParams p;
  p.g = g;
  p.eps_d = eps_over_g * g;
  p.delta_omega_d = resonance_detuning(3, p.eps_d, g);
  return p;
}

// Off-resonant, strongly damped point where everything relaxes within a few 1/kappa.
SystemParams generic_params() {
  SystemParams p;
  p.g = 3.0;
  p.eps_d = 0.7;
  p.delta_omega_d = -1.2;
  p.kappa = 0.4;
  p.gamma = 0.9;
  return p;
}

}  // namespace

// --- hilbert ---------------------------------------------------------------

TEST(HilbertSpace, RejectsTooFewFockLevels) {
  EXPECT_THROW(HilbertSpace(3), DomainError);
  const HilbertSpace s(4);
  EXPECT_EQ(s.dim(), 8);
  EXPECT_EQ(s.index(2, Atom::upper), 5);
}

TEST(Operators, LadderOperatorsAreExactAdjoints) {
  for (int n : {4, 9, 35}) {
    const HilbertSpace s(n);
    const Matrix a = cavity_annihilation(s).matrix();
    const Matrix ad = cavity_creation(s).matrix();
    EXPECT_EQ((a.adjoint() - ad).cwiseAbs().maxCoeff(), 0.0);
    const Matrix sm = atom_lowering(s).matrix();
    EXPECT_EQ((sm.adjoint() - atom_raising(s).matrix()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Operators, CommutatorIsIdentityBelowTheCutoff) {
  const HilbertSpace s(8);
  const Operator a = cavity_annihilation(s);
  const Matrix c = (a * a.adjoint() - a.adjoint() * a).matrix();
  for (int n = 0; n < 7; ++n) {
    for (Atom at : {Atom::lower, Atom::upper}) {
      const int i = s.index(n, at);
      EXPECT_NEAR(std::abs(c(i, i) - 1.0), 0.0, 1e-14);
    }
  }
}

TEST(Operators, PhotonNumberIsDiagonal) {
  const HilbertSpace s(6);
  const Matrix n = photon_number(s).matrix();
  for (int k = 0; k < 6; ++k) EXPECT_DOUBLE_EQ(n(s.index(k, Atom::upper), s.index(k, Atom::upper)).real(), k);
}

TEST(Operators, MixingSpacesThrows) {
  EXPECT_THROW(cavity_annihilation(HilbertSpace(4)) + cavity_annihilation(HilbertSpace(5)), DimensionMismatch);
  EXPECT_THROW(Operator(HilbertSpace(4), Matrix::Zero(3, 3)), DimensionMismatch);
}

TEST(DressedStates, OrthonormalForAnyCutoff) {
  for (int n : {4, 7, 20}) {
    const HilbertSpace s(n);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        const Complex ip = dressed_state(i, s).inner(dressed_state(j, s));
        EXPECT_NEAR(std::abs(ip - (i == j ? 1.0 : 0.0)), 0.0, 1e-15) << i << "," << j;
      }
    }
  }
  EXPECT_THROW(dressed_state(6, HilbertSpace(4)), DomainError);
}

TEST(DressedStates, QuadratureMatrixElements) {
  const HilbertSpace s(6);
  const Operator x = cavity_annihilation(s) + cavity_creation(s);
  auto elem = [&](int i, int j) { return std::abs(dressed_state(i, s).inner(x * dressed_state(j, s))); };
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0);
  EXPECT_NEAR(elem(0, 1), 1.0 / r2, 1e-15);
  EXPECT_NEAR(elem(0, 2), 1.0 / r2, 1e-15);
  EXPECT_NEAR(elem(1, 3), (r2 + 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(elem(1, 4), (r2 - 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(elem(2, 3), (r2 - 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(elem(2, 4), (r2 + 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(elem(3, 5), (r3 + r2) / 2.0, 1e-15);
  EXPECT_NEAR(elem(4, 5), (r3 - r2) / 2.0, 1e-15);
  // Same-manifold and two-manifold elements vanish.
  EXPECT_NEAR(elem(1, 2), 0.0, 1e-15);
  EXPECT_NEAR(elem(0, 3), 0.0, 1e-15);
}

TEST(PartialTrace, LinearAndTracePreserving) {
  const Matrix a = random_matrix(10, 1), b = random_matrix(10, 2);
  const Complex c(0.3, -1.7);
  const Matrix lhs = partial_trace_atom(Matrix(a + c * b));
  const Matrix rhs = partial_trace_atom(a) + c * partial_trace_atom(b);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_NEAR(std::abs(partial_trace_atom(a).trace() - a.trace()), 0.0, 1e-13);
  EXPECT_THROW(partial_trace_atom(Matrix(Matrix::Zero(3, 3))), DimensionMismatch);
}

TEST(DensityMatrix, ValidationAndTruncationWarning) {
  const HilbertSpace s(5);
  EXPECT_NO_THROW(DensityMatrix::ground(s).validate());
  Matrix bad = Matrix::Zero(10, 10);
  bad(0, 1) = 0.5;
  bad(0, 0) = 1.0;
  EXPECT_THROW(DensityMatrix(s, bad).validate(), DomainError);

  EXPECT_FALSE(truncation_warning(DensityMatrix::ground(s)).has_value());
  Matrix tail = Matrix::Zero(10, 10);
  tail(0, 0) = 1.0 - 1e-5;
  tail(s.index(4, Atom::lower), s.index(4, Atom::lower)) = 1e-5;
  EXPECT_TRUE(truncation_warning(DensityMatrix(s, tail)).has_value());
}

// --- liouville ---------------------------------------------------------------

TEST(Liouvillian, MatchesDirectMasterEquation) {
  const HilbertSpace s(5);
  const SystemParams p = generic_params();
  const Superoperator l = build_liouvillian(p, s);
  const Matrix rho = random_density(s.dim(), 7);
  const Matrix h = build_hamiltonian(p, s).matrix();
  const Matrix a = cavity_annihilation(s).matrix(), sm = atom_lowering(s).matrix();
  auto diss = [](const Matrix& c, const Matrix& r) {
    return Matrix(c * r * c.adjoint() - 0.5 * (c.adjoint() * c * r + r * c.adjoint() * c));
  };
  const Complex i(0.0, 1.0);
  const Matrix direct = -i * (h * rho - rho * h) + 2.0 * p.kappa * diss(a, rho) + p.gamma * diss(sm, rho);
  const Matrix via_l = unvectorize(l.apply(vectorize(rho)), s.dim());
  EXPECT_LT((direct - via_l).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Liouvillian, ColumnStackingConvention) {
  // X -> A X B corresponds to kron(B^T, A) on column-stacked vectors.
  const Matrix a = random_matrix(3, 11), b = random_matrix(3, 12), x = random_matrix(3, 13);
  const SparseMatrix k = jcmp::detail::kron(jcmp::detail::to_sparse(b.transpose()), jcmp::detail::to_sparse(a));
  const Vector lhs = k * vectorize(x);
  EXPECT_LT((unvectorize(lhs, 3) - a * x * b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Liouvillian, SpectrumIsDissipative) {
  const HilbertSpace s(5);
  const Superoperator l = build_liouvillian(three_photon_point(0.07, 20.0), s);
  const Eigen::VectorXcd ev = oracle::general_spectrum(Matrix(l.matrix()));
  int zeros = 0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    EXPECT_LE(ev(k).real(), 1e-9);
    if (std::abs(ev(k)) < 1e-8) ++zeros;
  }
  EXPECT_EQ(zeros, 1);
  EXPECT_LT(l.trace_defect(), 1e-12);
}

TEST(SteadyState, IndependentOfSolverPath) {
  const HilbertSpace s(8);
  const Superoperator l = build_liouvillian(generic_params(), s);
  SteadyStateOptions lu, svd;
  lu.method = SteadyStateMethod::sparse_lu;
  svd.method = SteadyStateMethod::null_space;
  const Matrix a = steady_state_matrix(l, lu), b = steady_state_matrix(l, svd);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);

  const auto late = propagate(l, DensityMatrix::ground(s), {0.0, 60.0});
  EXPECT_LT((late.back().matrix() - a).cwiseAbs().maxCoeff(), 1e-6);

  const DensityMatrix rho = steady_state(l);
  EXPECT_NO_THROW(rho.validate());
}

TEST(SteadyState, DegenerateKernelIsReported) {
  // Unitary dynamics alone leave every eigenprojector stationary.
  const HilbertSpace s(4);
  SystemParams p;
  p.g = 1.0;
  const Matrix h = build_hamiltonian(p, s).matrix();
  const Superoperator l(s.dim(), lindblad_matrix(h, {}), s);
  EXPECT_THROW(steady_state(l), DegenerateKernel);
}

TEST(SteadyState, TruncationConvergence) {
  // Agreement between N = 15 and N = 20 at the weakest drive used in the examples.
  const SystemParams p = three_photon_point(0.05);
  const double n15 = expectation(photon_number(HilbertSpace(15)), steady_state(build_liouvillian(p, HilbertSpace(15)))).real();
  const double n20 = expectation(photon_number(HilbertSpace(20)), steady_state(build_liouvillian(p, HilbertSpace(20)))).real();
  EXPECT_LT(std::abs(n15 - n20), 1e-4);
}

TEST(Propagate, PreservesTraceHermiticityPositivity) {
  const HilbertSpace s(8);
  const Superoperator l = build_liouvillian(three_photon_point(0.07, 20.0), s);
  const DensityMatrix rho0(s, random_density(s.dim(), 5));
  const std::vector<double> grid{0.0, 0.1, 0.5, 1.0, 2.0, 4.0};
  const auto states = propagate(l, rho0, grid);
  ASSERT_EQ(states.size(), grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_LT(std::abs(states[k].trace() - 1.0), 1e-7 * (1.0 + grid[k]));
    EXPECT_LT(states[k].hermiticity_error(), 1e-9);
    EXPECT_GT(states[k].min_eigenvalue(), -1e-8);
  }
  EXPECT_EQ((states[0].matrix() - rho0.matrix()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Propagate, RejectsBadGrids) {
  const HilbertSpace s(4);
  const Superoperator l = build_liouvillian(three_photon_point(0.05, 20.0), s);
  EXPECT_THROW(propagate(l, DensityMatrix::ground(s), {}), DomainError);
  EXPECT_THROW(propagate(l, DensityMatrix::ground(s), {1.0, 0.5}), DomainError);
  EXPECT_THROW(propagate(l, DensityMatrix::ground(s), {-1.0}), DomainError);
}

TEST(Correlations, RegressionAtZeroDelayMatchesMoments) {
  const HilbertSpace s(10);
  const SystemParams p = three_photon_point(0.09, 20.0);
  const Superoperator l = build_liouvillian(p, s);
  const DensityMatrix rho = steady_state(l);
  const Matrix a = cavity_annihilation(s).matrix();
  const Matrix ad = a.adjoint();
  const double n = (ad * a * rho.matrix()).trace().real();
  const double nn = (ad * ad * a * a * rho.matrix()).trace().real();
  const auto g2 = g2_forward(l, rho, {0.0, 0.5});
  EXPECT_NEAR(g2[0], nn / (n * n), 1e-6 * nn / (n * n));
  EXPECT_NEAR(g2_zero(rho), nn / (n * n), 1e-10);
}

TEST(Correlations, ZeroIntensityThrows) {
  const HilbertSpace s(4);
  EXPECT_THROW(g2_zero(DensityMatrix::ground(s)), ZeroIntensity);
}

TEST(Sweep, RecordsEveryPointAndRejectsEmptyGrid) {
  const HilbertSpace s(6);
  SystemParams p = three_photon_point(0.07, 20.0);
  EXPECT_THROW(sweep_detuning(p, s, {}), DomainError);
  const auto pts = sweep_detuning(p, s, {-15.0, -11.55, -8.0}, 2);
  ASSERT_EQ(pts.size(), 3u);
  for (const auto& pt : pts) {
    EXPECT_FALSE(pt.error.has_value());
    EXPECT_GT(pt.mean_n, 0.0);
    EXPECT_TRUE(std::isfinite(pt.g2_zero));
  }
}

TEST(SystemParams, Validation) {
  SystemParams p;
  p.eps_d = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
  p.eps_d = 0.0;
  p.kappa = 0.0;
  p.gamma = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
}

// --- kerr ------------------------------------------------------------------

TEST(Kerr, AnnihilationOperator) {
  const Matrix a = fock_annihilation(5);
  EXPECT_DOUBLE_EQ(a(2, 3).real(), std::sqrt(3.0));
  EXPECT_EQ(a(3, 2), Complex(0.0));
}

TEST(Kerr, PropagationConservesTraceAndHermiticity) {
  KerrParams p;
  p.fock_cutoff = 12;
  p.kappa_K = 0.05;
  p.eps_dK = {0.3, 0.1};
  const Superoperator l = build_kerr_liouvillian(p);
  Matrix rho0 = Matrix::Zero(12, 12);
  rho0(0, 0) = 1.0;
  std::vector<Matrix> states;
  propagate_vectorized(l, vectorize(rho0), {0.0, 1.0, 5.0},
                       [&](std::size_t, double, const Vector& x) { states.push_back(unvectorize(x, 12)); });
  ASSERT_EQ(states.size(), 3u);
  for (const auto& r : states) {
    EXPECT_LT(std::abs(r.trace() - 1.0), 1e-7 * 6.0);
    EXPECT_LT(jcmp::detail::hermiticity_error(r), 1e-9);
  }
}

TEST(Kerr, DrivePhaseRotatesTheWignerField) {
  KerrParams p;
  const double phi = 2.0 * std::numbers::pi / 3.0;
  const WignerField w0 = kerr_steady_wigner(p);
  p.eps_dK *= std::polar(1.0, phi);
  const WignerField w1 = kerr_steady_wigner(p);
  double worst = 0.0;
  const auto& g = w0.grid;
  for (int i = 0; i < g.nx; i += 4) {
    for (int j = 0; j < g.ny; j += 4) {
      const double x = g.x(i), y = g.y(j);
      if (std::hypot(x, y) > 2.9) continue;
      const double xr = x * std::cos(phi) - y * std::sin(phi), yr = x * std::sin(phi) + y * std::cos(phi);
      worst = std::max(worst, std::abs(w1.interpolate(xr, yr) - w0.values(i, j)));
    }
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(Kerr, Validation) {
  KerrParams p;
  p.kappa_K = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
  p.kappa_K = 1e-5;
  p.fock_cutoff = 1;
  EXPECT_THROW(build_kerr_liouvillian(p), DomainError);
}
