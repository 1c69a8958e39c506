#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qimetro/types.hpp"

namespace qimetro {

inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kNegativeEigenvalueTol = 1e-10;

template <typename Derived>
using RealOf = typename Eigen::NumTraits<typename Derived::Scalar>::Real;

/// Largest entrywise |M - M^dagger|.
template <typename Derived>
RealOf<Derived> hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0) return RealOf<Derived>(0);
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Real>
struct HermitianEigen {
  RVector<Real> values;   // descending
  CMatrix<Real> vectors;  // columns are eigenvectors, unitary
};

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted in descending order.
template <typename Derived>
HermitianEigen<RealOf<Derived>> hermitian_eig(const Eigen::MatrixBase<Derived>& op,
                                              double hermiticity_tol = kHermiticityTol) {
  using Real = RealOf<Derived>;
  if (op.rows() != op.cols()) throw PreconditionError("hermitian_eig: matrix is not square");
  const CMatrix<Real> m = op.template cast<Complex<Real>>();
  const Real defect = hermiticity_defect(m);
  if (!(defect < Real(hermiticity_tol)))
    throw PreconditionError("hermitian_eig: input is not Hermitian (defect " + std::to_string(double(defect)) + ")");

  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("hermitian_eig: eigensolver did not converge");

  // Eigen sorts ascending.
  HermitianEigen<Real> out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

/// V f(diag) V^dagger for a real function f of the spectrum.
template <typename Real, typename F>
CMatrix<Real> apply_spectral(const HermitianEigen<Real>& eig, F&& f) {
  CVector<Real> fv(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) fv(i) = f(eig.values(i));
  return eig.vectors * fv.asDiagonal() * eig.vectors.adjoint();
}

/// exp(i t H) from a precomputed eigendecomposition of H.
template <typename Real>
CMatrix<Real> exp_i(const HermitianEigen<Real>& eig, Real t) {
  CVector<Real> phases(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) phases(i) = std::polar(Real(1), t * eig.values(i));
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

template <typename Real>
Real clamp_eigenvalue(Real lambda) {
  if (lambda < -Real(kNegativeEigenvalueTol))
    throw NumericalError("eigenvalue " + std::to_string(double(lambda)) + " below -1e-10: matrix is not PSD");
  return std::max(lambda, Real(0));
}

/// Square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues in [-1e-10, 0) are treated as roundoff and clamped to zero.
template <typename Derived>
CMatrix<RealOf<Derived>> psd_sqrt(const Eigen::MatrixBase<Derived>& rho) {
  using Real = RealOf<Derived>;
  const auto eig = hermitian_eig(rho);
  return apply_spectral(eig, [](Real x) { return std::sqrt(clamp_eigenvalue(x)); });
}

/// Tr sqrt(sqrt(r1) r2 sqrt(r1)), evaluated as the trace norm of sqrt(r1) sqrt(r2).
///
/// Both forms are equal; the trace norm sums singular values directly instead of taking
/// square roots of the near-zero eigenvalues of the sandwiched product, so the result
/// keeps absolute accuracy near 1.
template <typename D1, typename D2>
RealOf<D1> root_fidelity(const Eigen::MatrixBase<D1>& rho1, const Eigen::MatrixBase<D2>& rho2) {
  using Real = RealOf<D1>;
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols())
    throw PreconditionError("uhlmann_fidelity: dimension mismatch");
  const CMatrix<Real> product = psd_sqrt(rho1) * psd_sqrt(rho2);
  Eigen::BDCSVD<CMatrix<Real>> svd(product);
  return svd.singularValues().sum();
}

/// Uhlmann fidelity F = (Tr sqrt(sqrt(r1) r2 sqrt(r1)))^2, clamped to [0, 1].
template <typename D1, typename D2>
RealOf<D1> uhlmann_fidelity(const Eigen::MatrixBase<D1>& rho1, const Eigen::MatrixBase<D2>& rho2) {
  using Real = RealOf<D1>;
  const Real root = root_fidelity(rho1, rho2);
  return std::clamp(root * root, Real(0), Real(1));
}

}  // namespace qimetro
