#pragma once

// Truncated cavity (x) two-level-atom Hilbert space, with the operators and
// states the rest of the library is written in terms of.
//
// Basis ordering is fixed: |n, s> sits at index 2*n + s with s = 0 for the
// lower atomic level |-> and s = 1 for the upper level |+>.  All matrices are
// dense; the largest space used in practice has dimension 70.

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "jcmp/error.hpp"

namespace jcmp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class Atom : int { lower = 0, upper = 1 };

/// Fock population of the last retained level above which a state is
/// reported as truncation-limited.
inline constexpr double kTruncationThreshold = 1e-6;

class HilbertSpace {
 public:
  /// Keeps Fock states |0>..|fock_cutoff-1>.  Three-photon analytics need |3>,
  /// so at least four levels are required.
  explicit HilbertSpace(int fock_cutoff) : fock_cutoff_(fock_cutoff) {
    if (fock_cutoff < 4) {
      throw DomainError("HilbertSpace: fock_cutoff must be >= 4, got " +
                        std::to_string(fock_cutoff));
    }
  }

  int fock_cutoff() const noexcept { return fock_cutoff_; }
  static constexpr int atom_dim() noexcept { return 2; }
  int dim() const noexcept { return 2 * fock_cutoff_; }
  int index(int n, Atom s) const noexcept { return 2 * n + static_cast<int>(s); }

  friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

 private:
  int fock_cutoff_;
};

namespace detail {

inline void require_same_space(const HilbertSpace& a, const HilbertSpace& b,
                               const char* where) {
  if (!(a == b)) {
    throw DimensionMismatch(std::string(where) + ": spaces differ (N=" +
                            std::to_string(a.fock_cutoff()) + " vs N=" +
                            std::to_string(b.fock_cutoff()) + ")");
  }
}

inline double hermiticity_error(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace detail

class DensityMatrix;

class Operator {
 public:
  explicit Operator(const HilbertSpace& space)
      : space_(space), elements_(Matrix::Zero(space.dim(), space.dim())) {}

  Operator(const HilbertSpace& space, Matrix elements)
      : space_(space), elements_(std::move(elements)) {
    if (elements_.rows() != space.dim() || elements_.cols() != space.dim()) {
      throw DimensionMismatch("Operator: matrix shape does not match space");
    }
  }

  static Operator identity(const HilbertSpace& space) {
    return Operator(space, Matrix::Identity(space.dim(), space.dim()));
  }

  const HilbertSpace& space() const noexcept { return space_; }
  const Matrix& matrix() const noexcept { return elements_; }
  Complex operator()(int row, int col) const { return elements_(row, col); }

  Operator adjoint() const { return Operator(space_, elements_.adjoint()); }

  bool is_hermitian(double tol = 1e-12) const {
    return detail::hermiticity_error(elements_) < tol;
  }

  Operator& operator+=(const Operator& rhs) {
    detail::require_same_space(space_, rhs.space_, "Operator::+=");
    elements_ += rhs.elements_;
    return *this;
  }
  Operator& operator-=(const Operator& rhs) {
    detail::require_same_space(space_, rhs.space_, "Operator::-=");
    elements_ -= rhs.elements_;
    return *this;
  }
  Operator& operator*=(Complex s) {
    elements_ *= s;
    return *this;
  }

  friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
  friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
  friend Operator operator*(Operator op, Complex s) { return op *= s; }
  friend Operator operator*(Complex s, Operator op) { return op *= s; }
  friend Operator operator*(double s, Operator op) { return op *= Complex(s, 0.0); }
  friend Operator operator*(const Operator& lhs, const Operator& rhs) {
    detail::require_same_space(lhs.space_, rhs.space_, "Operator::*");
    return Operator(lhs.space_, lhs.elements_ * rhs.elements_);
  }

 private:
  HilbertSpace space_;
  Matrix elements_;
};

class StateVector {
 public:
  StateVector(const HilbertSpace& space, Vector amplitudes)
      : space_(space), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != space.dim()) {
      throw DimensionMismatch("StateVector: length does not match space");
    }
  }

  /// The product basis state |n, s>.
  static StateVector basis(const HilbertSpace& space, int n, Atom s) {
    if (n < 0 || n >= space.fock_cutoff()) {
      throw DomainError("StateVector::basis: Fock index out of range");
    }
    Vector v = Vector::Zero(space.dim());
    v(space.index(n, s)) = 1.0;
    return StateVector(space, std::move(v));
  }

  const HilbertSpace& space() const noexcept { return space_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }
  Complex amplitude(int n, Atom s) const { return amplitudes_(space_.index(n, s)); }

  double norm() const { return amplitudes_.norm(); }
  bool is_normalized(double tol = 1e-10) const { return std::abs(norm() - 1.0) < tol; }
  StateVector normalized() const { return StateVector(space_, amplitudes_ / norm()); }

  /// <this|other>
  Complex inner(const StateVector& other) const {
    detail::require_same_space(space_, other.space_, "StateVector::inner");
    return amplitudes_.dot(other.amplitudes_);
  }

  Complex expectation(const Operator& op) const {
    detail::require_same_space(space_, op.space(), "StateVector::expectation");
    return amplitudes_.dot(op.matrix() * amplitudes_);
  }

  DensityMatrix projector() const;

  friend StateVector operator*(const Operator& op, const StateVector& psi) {
    detail::require_same_space(op.space(), psi.space_, "Operator*StateVector");
    return StateVector(psi.space_, op.matrix() * psi.amplitudes_);
  }

 private:
  HilbertSpace space_;
  Vector amplitudes_;
};

/// System state.  Construction does not enforce the physical invariants
/// because intermediate objects such as a*rho*a^dagger share the type; call
/// validate() where a physical state is required.
class DensityMatrix {
 public:
  DensityMatrix(const HilbertSpace& space, Matrix elements)
      : space_(space), elements_(std::move(elements)) {
    if (elements_.rows() != space.dim() || elements_.cols() != space.dim()) {
      throw DimensionMismatch("DensityMatrix: matrix shape does not match space");
    }
  }

  static DensityMatrix ground(const HilbertSpace& space) {
    return StateVector::basis(space, 0, Atom::lower).projector();
  }

  const HilbertSpace& space() const noexcept { return space_; }
  const Matrix& matrix() const noexcept { return elements_; }
  Complex operator()(int row, int col) const { return elements_(row, col); }

  Complex trace() const { return elements_.trace(); }
  double hermiticity_error() const { return detail::hermiticity_error(elements_); }
  double min_eigenvalue() const {
    Matrix h = 0.5 * (elements_ + elements_.adjoint());
    return Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly)
        .eigenvalues()
        .minCoeff();
  }

  /// Checks trace, Hermiticity and positivity; throws DomainError naming the
  /// first violated invariant.
  void validate(double trace_tol = 1e-8, double herm_tol = 1e-10,
                double eig_tol = 1e-8) const {
    if (std::abs(trace() - 1.0) > trace_tol) {
      throw DomainError("DensityMatrix: trace differs from 1");
    }
    if (hermiticity_error() > herm_tol) {
      throw DomainError("DensityMatrix: not Hermitian");
    }
    if (min_eigenvalue() < -eig_tol) {
      throw DomainError("DensityMatrix: negative eigenvalue");
    }
  }

  /// Population of the highest retained Fock level, summed over the atom.
  double fock_tail() const {
    const int n = space_.fock_cutoff() - 1;
    return std::real(elements_(space_.index(n, Atom::lower), space_.index(n, Atom::lower)) +
                     elements_(space_.index(n, Atom::upper), space_.index(n, Atom::upper)));
  }

 private:
  HilbertSpace space_;
  Matrix elements_;
};

inline DensityMatrix StateVector::projector() const {
  return DensityMatrix(space_, amplitudes_ * amplitudes_.adjoint());
}

/// Reduced state of the cavity mode alone.
class FieldDensityMatrix {
 public:
  explicit FieldDensityMatrix(Matrix elements) : elements_(std::move(elements)) {
    if (elements_.rows() != elements_.cols() || elements_.rows() < 1) {
      throw DimensionMismatch("FieldDensityMatrix: matrix must be square");
    }
  }

  static FieldDensityMatrix fock(int fock_cutoff, int n) {
    if (n < 0 || n >= fock_cutoff) throw DomainError("FieldDensityMatrix::fock: n out of range");
    Matrix m = Matrix::Zero(fock_cutoff, fock_cutoff);
    m(n, n) = 1.0;
    return FieldDensityMatrix(std::move(m));
  }

  int fock_cutoff() const noexcept { return static_cast<int>(elements_.rows()); }
  const Matrix& matrix() const noexcept { return elements_; }
  Complex operator()(int row, int col) const { return elements_(row, col); }
  Complex trace() const { return elements_.trace(); }
  double hermiticity_error() const { return detail::hermiticity_error(elements_); }
  double fock_tail() const {
    return std::real(elements_(fock_cutoff() - 1, fock_cutoff() - 1));
  }

  void validate(double trace_tol = 1e-8, double herm_tol = 1e-10) const {
    if (std::abs(trace() - 1.0) > trace_tol) {
      throw DomainError("FieldDensityMatrix: trace differs from 1");
    }
    if (hermiticity_error() > herm_tol) {
      throw DomainError("FieldDensityMatrix: not Hermitian");
    }
  }

 private:
  Matrix elements_;
};

// --- operators -------------------------------------------------------------

/// a (x) 1_atom with <n-1|a|n> = sqrt(n).
inline Operator cavity_annihilation(const HilbertSpace& space) {
  Operator a(space);
  Matrix m = Matrix::Zero(space.dim(), space.dim());
  for (int n = 1; n < space.fock_cutoff(); ++n) {
    for (Atom s : {Atom::lower, Atom::upper}) {
      m(space.index(n - 1, s), space.index(n, s)) = std::sqrt(static_cast<double>(n));
    }
  }
  return Operator(space, std::move(m));
}

inline Operator cavity_creation(const HilbertSpace& space) {
  return cavity_annihilation(space).adjoint();
}

/// 1_cavity (x) sigma_minus, sigma_minus|+> = |->.
inline Operator atom_lowering(const HilbertSpace& space) {
  Matrix m = Matrix::Zero(space.dim(), space.dim());
  for (int n = 0; n < space.fock_cutoff(); ++n) {
    m(space.index(n, Atom::lower), space.index(n, Atom::upper)) = 1.0;
  }
  return Operator(space, std::move(m));
}

inline Operator atom_raising(const HilbertSpace& space) { return atom_lowering(space).adjoint(); }

inline Operator photon_number(const HilbertSpace& space) {
  const Operator a = cavity_annihilation(space);
  return a.adjoint() * a;
}

// --- dressed states --------------------------------------------------------

/// JC ladder eigenstate (|n,-> + sign |n-1,+>)/sqrt(2) for n >= 1, or the
/// ground state |0,-> for n = 0 (sign ignored).
inline StateVector jc_ladder_state(const HilbertSpace& space, int n, int sign) {
  if (n == 0) return StateVector::basis(space, 0, Atom::lower);
  if (n < 0 || n >= space.fock_cutoff()) {
    throw DomainError("jc_ladder_state: excitation number out of range");
  }
  Vector v = Vector::Zero(space.dim());
  v(space.index(n, Atom::lower)) = M_SQRT1_2;
  v(space.index(n - 1, Atom::upper)) = sign >= 0 ? M_SQRT1_2 : -M_SQRT1_2;
  return StateVector(space, std::move(v));
}

/// The six lowest dressed states |xi_0>..|xi_5>:
///   xi_0 = |0,->,  xi_{1,2} = (|1,-> -+ |0,+>)/sqrt2,
///   xi_{3,4} = (|2,-> -+ |1,+>)/sqrt2,  xi_5 = (|3,-> - |2,+>)/sqrt2.
inline StateVector dressed_state(int k, const HilbertSpace& space) {
  switch (k) {
    case 0: return jc_ladder_state(space, 0, -1);
    case 1: return jc_ladder_state(space, 1, -1);
    case 2: return jc_ladder_state(space, 1, +1);
    case 3: return jc_ladder_state(space, 2, -1);
    case 4: return jc_ladder_state(space, 2, +1);
    case 5: return jc_ladder_state(space, 3, -1);
    default:
      throw DomainError("dressed_state: index must be in 0..5, got " + std::to_string(k));
  }
}

// --- reductions ------------------------------------------------------------

/// rho_c = <+|rho|+> + <-|rho|-> on an arbitrary 2N x 2N matrix.
inline Matrix partial_trace_atom(const Matrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() % 2 != 0) {
    throw DimensionMismatch("partial_trace_atom: expected a square matrix of even size");
  }
  const Eigen::Index n = rho.rows() / 2;
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = rho(2 * i, 2 * j) + rho(2 * i + 1, 2 * j + 1);
    }
  }
  return out;
}

inline FieldDensityMatrix partial_trace_atom(const DensityMatrix& rho) {
  return FieldDensityMatrix(partial_trace_atom(rho.matrix()));
}

/// tr(op rho).
inline Complex expectation(const Operator& op, const DensityMatrix& rho) {
  detail::require_same_space(op.space(), rho.space(), "expectation");
  // tr(AB) = sum_ij A_ij B_ji
  return (op.matrix().transpose().cwiseProduct(rho.matrix())).sum();
}

inline std::optional<std::string> truncation_warning(double tail_population, int fock_cutoff) {
  if (tail_population > kTruncationThreshold) {
    return "Fock level " + std::to_string(fock_cutoff - 1) + " holds population " +
           std::to_string(tail_population) + "; increase the truncation";
  }
  return std::nullopt;
}

inline std::optional<std::string> truncation_warning(const DensityMatrix& rho) {
  return truncation_warning(rho.fock_tail(), rho.space().fock_cutoff());
}

inline std::optional<std::string> truncation_warning(const FieldDensityMatrix& rho) {
  return truncation_warning(rho.fock_tail(), rho.fock_cutoff());
}

}  // namespace jcmp
