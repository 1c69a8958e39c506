#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "qimetro/linalg.hpp"
#include "qimetro/types.hpp"

namespace qimetro {

/// A square complex matrix together with the layout of the basis it acts on.
template <typename Real = double>
class FockOperator {
public:
  FockOperator(CMatrix<Real> entries, ModeStructure modes) : entries_(std::move(entries)), modes_(modes) {
    if (entries_.rows() != entries_.cols()) throw PreconditionError("FockOperator: matrix is not square");
    if (entries_.rows() == 0) throw PreconditionError("FockOperator: empty matrix");
    if (modes_.is_fock() && modes_.dim() != entries_.rows())
      throw PreconditionError("FockOperator: dimension " + std::to_string(entries_.rows()) +
                              " does not match mode structure (" + std::to_string(modes_.dim()) + ")");
  }

  // Finite-dimensional operator without photon-number structure.
  explicit FockOperator(CMatrix<Real> entries) : FockOperator(std::move(entries), ModeStructure::generic()) {}

  const CMatrix<Real>& matrix() const { return entries_; }
  const ModeStructure& modes() const { return modes_; }
  Eigen::Index dim() const { return entries_.rows(); }
  Complex<Real> operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  FockOperator adjoint() const { return FockOperator(entries_.adjoint(), modes_); }

private:
  CMatrix<Real> entries_;
  ModeStructure modes_;
};

inline constexpr double kDensityHermiticityTol = 1e-12;
inline constexpr double kDensityTraceTol = 1e-10;

/// A validated density matrix.
///
/// Construction checks Hermiticity (entrywise 1e-12) and unit trace (1e-10). With
/// Check::full the spectrum is also checked (eigenvalues >= -1e-10), which costs an
/// eigendecomposition; `positivity_verified()` records whether that happened.
template <typename Real = double>
class DensityMatrix {
public:
  enum class Check { full, structural };

  explicit DensityMatrix(FockOperator<Real> op, Real truncation_deficit = 0, Check check = Check::full)
      : op_(std::move(op)), deficit_(truncation_deficit) {
    const Real herm = hermiticity_defect(op_.matrix());
    if (!(herm <= Real(kDensityHermiticityTol)))
      throw NumericalError("DensityMatrix: not Hermitian (defect " + std::to_string(double(herm)) + ")");
    const Real tr = op_.matrix().trace().real();
    if (!(std::abs(tr - Real(1)) <= Real(kDensityTraceTol)))
      throw NumericalError("DensityMatrix: trace " + std::to_string(double(tr)) + " differs from 1");
    if (check == Check::full) {
      const auto eig = hermitian_eig(op_.matrix());
      if (eig.values(eig.values.size() - 1) < -Real(kNegativeEigenvalueTol))
        throw NumericalError("DensityMatrix: negative eigenvalue " +
                             std::to_string(double(eig.values(eig.values.size() - 1))));
      verified_ = true;
    }
  }

  const FockOperator<Real>& op() const { return op_; }
  const CMatrix<Real>& matrix() const { return op_.matrix(); }
  const ModeStructure& modes() const { return op_.modes(); }
  Eigen::Index dim() const { return op_.dim(); }
  Complex<Real> operator()(Eigen::Index i, Eigen::Index j) const { return op_(i, j); }

  // Probability weight lost to the Fock cutoff before renormalization.
  Real truncation_deficit() const { return deficit_; }
  bool positivity_verified() const { return verified_; }

private:
  FockOperator<Real> op_;
  Real deficit_ = 0;
  bool verified_ = false;
};

// Symmetrize away roundoff asymmetry and rescale to unit trace.
template <typename Real>
CMatrix<Real> hermitize_normalized(const CMatrix<Real>& m) {
  CMatrix<Real> h = (m + m.adjoint()) * Real(0.5);
  return h / h.trace().real();
}

/// Parameters of a displaced thermal mode.
///
/// `delta` is the displacement amplitude, `phase` its argument. The thermal occupation
/// n_bar relates to the quadrature variance by sigma^2 = n_bar + 1/2 (vacuum 1/2).
template <typename Real = double>
struct GaussianModeParams {
  Real delta = 0;
  Real phase = 0;
  Real n_bar = 0;

  static GaussianModeParams from_occupation(Real delta, Real phase, Real n_bar) {
    GaussianModeParams p{delta, phase, n_bar};
    p.validate();
    return p;
  }
  static GaussianModeParams from_variance(Real delta, Real phase, Real sigma_sq) {
    if (!(sigma_sq >= Real(0.5))) throw PreconditionError("GaussianModeParams: sigma^2 must be >= 1/2");
    return from_occupation(delta, phase, sigma_sq - Real(0.5));
  }

  Real sigma_sq() const { return n_bar + Real(0.5); }
  Complex<Real> amplitude() const { return std::polar(delta, phase); }

  void validate() const {
    if (!(delta >= 0) || !std::isfinite(delta)) throw PreconditionError("GaussianModeParams: delta must be >= 0");
    if (!(n_bar >= 0) || !std::isfinite(n_bar)) throw PreconditionError("GaussianModeParams: n_bar must be >= 0");
    if (!std::isfinite(phase)) throw PreconditionError("GaussianModeParams: phase must be finite");
  }
};

// ---------------------------------------------------------------------------
// Ladder operators

template <typename Real = double>
FockOperator<Real> annihilation_op(Cutoff cutoff) {
  CMatrix<Real> a = CMatrix<Real>::Zero(cutoff.dim(), cutoff.dim());
  for (int n = 1; n <= cutoff.n_max(); ++n) a(n - 1, n) = std::sqrt(Real(n));
  return FockOperator<Real>(std::move(a), ModeStructure::single_mode(cutoff));
}

template <typename Real = double>
FockOperator<Real> number_op(Cutoff cutoff) {
  CMatrix<Real> n = CMatrix<Real>::Zero(cutoff.dim(), cutoff.dim());
  for (int k = 0; k <= cutoff.n_max(); ++k) n(k, k) = Real(k);
  return FockOperator<Real>(std::move(n), ModeStructure::single_mode(cutoff));
}

/// Tensor product of two single-mode operators with the same cutoff, up mode first.
template <typename Real>
FockOperator<Real> tensor(const FockOperator<Real>& up, const FockOperator<Real>& down) {
  if (up.modes().kind() != ModeStructure::Kind::single_mode || !(up.modes() == down.modes()))
    throw PreconditionError("tensor: both factors must be single-mode with the same cutoff");
  CMatrix<Real> k = Eigen::kroneckerProduct(up.matrix(), down.matrix());
  return FockOperator<Real>(std::move(k), ModeStructure::two_mode(Cutoff(up.modes().n_max())));
}

template <typename Real>
DensityMatrix<Real> tensor(const DensityMatrix<Real>& up, const DensityMatrix<Real>& down) {
  const Real deficit = 1 - (1 - up.truncation_deficit()) * (1 - down.truncation_deficit());
  return DensityMatrix<Real>(tensor(up.op(), down.op()), deficit, DensityMatrix<Real>::Check::structural);
}

/// S = a_up a_down^dagger + a_up^dagger a_down on the two-mode truncated space.
template <typename Real = double>
FockOperator<Real> beamsplitter_generator(Cutoff cutoff) {
  const CMatrix<Real> a = annihilation_op<Real>(cutoff).matrix();
  const CMatrix<Real> id = CMatrix<Real>::Identity(cutoff.dim(), cutoff.dim());
  const CMatrix<Real> a_up = Eigen::kroneckerProduct(a, id);
  const CMatrix<Real> a_down = Eigen::kroneckerProduct(id, a);
  CMatrix<Real> s = a_up * a_down.adjoint() + a_up.adjoint() * a_down;
  return FockOperator<Real>(std::move(s), ModeStructure::two_mode(cutoff));
}

// ---------------------------------------------------------------------------
// Gaussian states in the Fock basis

inline constexpr double kMaxTruncationDeficit = 1e-8;
inline constexpr double kReportableDeficit = 1e-12;

/// Geometric weights n^k / (1+n)^(k+1), k = 0..n_max, before renormalization.
template <typename Real>
RVector<Real> thermal_weights(Real n_bar, Cutoff cutoff) {
  if (!(n_bar >= 0) || !std::isfinite(n_bar)) throw PreconditionError("thermal_state: n_bar must be >= 0");
  RVector<Real> p(cutoff.dim());
  const Real ratio = n_bar / (1 + n_bar);
  Real w = 1 / (1 + n_bar);
  for (int k = 0; k <= cutoff.n_max(); ++k) {
    p(k) = w;
    w *= ratio;
  }
  return p;
}

/// Thermal state renormalized over the truncated basis. The deficit is recorded only
/// when it exceeds 1e-12.
template <typename Real = double>
DensityMatrix<Real> thermal_state(Real n_bar, Cutoff cutoff) {
  RVector<Real> p = thermal_weights(n_bar, cutoff);
  const Real total = p.sum();
  const Real deficit = 1 - total;
  p /= total;
  CMatrix<Real> rho = p.template cast<Complex<Real>>().asDiagonal();
  return DensityMatrix<Real>(FockOperator<Real>(std::move(rho), ModeStructure::single_mode(cutoff)),
                             deficit > Real(kReportableDeficit) ? deficit : Real(0),
                             DensityMatrix<Real>::Check::structural);
}

/// Generalized Laguerre polynomials L_n^(alpha)(x) for n = 0..n_max by upward recurrence.
template <typename Real>
std::vector<Real> laguerre_sequence(int n_max, Real alpha, Real x) {
  std::vector<Real> l(std::size_t(n_max) + 1);
  l[0] = 1;
  if (n_max >= 1) l[1] = 1 + alpha - x;
  for (int k = 1; k < n_max; ++k)
    l[std::size_t(k) + 1] = ((2 * k + 1 + alpha - x) * l[std::size_t(k)] - (k + alpha) * l[std::size_t(k) - 1]) / (k + 1);
  return l;
}

/// Matrix elements <m|D(z)|n> of the displacement operator for m, n <= n_max.
///
/// For m >= n: sqrt(n!/m!) z^(m-n) e^{-|z|^2/2} L_n^(m-n)(|z|^2); the m < n entries follow
/// from <m|D(z)|n> = conj(<n|D(-z)|m>).
template <typename Real = double>
CMatrix<Real> displacement_matrix(Complex<Real> z, Cutoff cutoff) {
  const int n_max = cutoff.n_max();
  const Real x = std::norm(z);
  const Real r = std::abs(z);
  const Real arg = std::arg(z);
  const Real gauss = std::exp(-x / 2);
  CMatrix<Real> d(cutoff.dim(), cutoff.dim());
  for (int k = 0; k <= n_max; ++k) {
    // k = m - n >= 0 along the k-th subdiagonal.
    const auto lag = laguerre_sequence<Real>(n_max - k, Real(k), x);
    for (int n = 0; n + k <= n_max; ++n) {
      const int m = n + k;
      Real mag;
      if (k == 0) {
        mag = 1;
      } else if (r == 0) {
        mag = 0;
      } else {
        mag = std::exp(Real(0.5) * (std::lgamma(Real(n + 1)) - std::lgamma(Real(m + 1))) + k * std::log(r));
      }
      const Real value = mag * gauss * lag[std::size_t(n)];
      d(m, n) = std::polar(Real(1), k * arg) * value;
      // <n|D(z)|m> = conj(<m|D(-z)|n>) and (-z)^k = (-1)^k z^k.
      if (k > 0) d(n, m) = std::conj(d(m, n)) * Real((k % 2) ? -1 : 1);
    }
  }
  return d;
}

/// Displaced thermal state D(z) rho_th(n_bar) D(z)^dagger on one truncated mode.
///
/// Throws TruncationError when the truncated trace falls below 1 - max_deficit;
/// otherwise the state is renormalized and the lost weight recorded.
template <typename Real = double>
DensityMatrix<Real> displaced_thermal(const GaussianModeParams<Real>& params, Cutoff cutoff,
                                      Real max_deficit = Real(kMaxTruncationDeficit)) {
  params.validate();
  const CMatrix<Real> d = displacement_matrix<Real>(params.amplitude(), cutoff);
  const RVector<Real> p = thermal_weights(params.n_bar, cutoff);
  const CMatrix<Real> rho = d * p.template cast<Complex<Real>>().asDiagonal() * d.adjoint();
  const Real tr = rho.trace().real();
  const Real deficit = 1 - tr;
  if (deficit > max_deficit)
    throw TruncationError("displaced_thermal: cutoff n_max=" + std::to_string(cutoff.n_max()) +
                          " loses weight " + std::to_string(double(deficit)));
  return DensityMatrix<Real>(FockOperator<Real>(hermitize_normalized(rho), ModeStructure::single_mode(cutoff)),
                             deficit > Real(kReportableDeficit) ? deficit : Real(0),
                             DensityMatrix<Real>::Check::structural);
}

// ---------------------------------------------------------------------------
// Global dephasing

/// e^{i n xi} rho e^{-i n xi} with n the total photon number.
template <typename Real>
CMatrix<Real> phase_rotate(const CMatrix<Real>& rho, const ModeStructure& modes, Real xi) {
  CMatrix<Real> out(rho.rows(), rho.cols());
  for (Eigen::Index j = 0; j < rho.cols(); ++j)
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
      out(i, j) = rho(i, j) * std::polar(Real(1), xi * Real(modes.total_photons(i) - modes.total_photons(j)));
  return out;
}

/// Exact uniform average over a global phase: keeps only entries between basis states
/// of equal total photon number.
template <typename Real>
DensityMatrix<Real> phase_average(const DensityMatrix<Real>& rho) {
  const ModeStructure& modes = rho.modes();
  if (!modes.is_fock()) throw PreconditionError("phase_average: operator has no photon-number structure");
  CMatrix<Real> out = rho.matrix();
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      if (modes.total_photons(i) != modes.total_photons(j)) out(i, j) = 0;
  return DensityMatrix<Real>(FockOperator<Real>(std::move(out), modes), rho.truncation_deficit(),
                             DensityMatrix<Real>::Check::structural);
}

/// Smallest node count for which the trapezoidal rule integrates every entry exactly.
inline int min_quadrature_nodes(const ModeStructure& modes) { return 2 * (2 * modes.max_total_photons()) + 1; }

/// (1/2pi) Integral over xi in [-pi, pi) of builder(xi), by the uniform trapezoidal rule.
///
/// Exact when every entry of builder(xi) is a trigonometric polynomial of degree at most
/// twice the largest total photon number; the node count is checked against that bound.
template <typename Real, typename Builder>
DensityMatrix<Real> phase_average_quadrature(Builder&& builder, int nodes) {
  const Real pi = std::numbers::pi_v<Real>;
  DensityMatrix<Real> first = builder(-pi);
  const ModeStructure modes = first.modes();
  if (!modes.is_fock()) throw PreconditionError("phase_average_quadrature: builder output has no Fock structure");
  if (nodes < min_quadrature_nodes(modes))
    throw PreconditionError("phase_average_quadrature: " + std::to_string(nodes) + " nodes, need at least " +
                            std::to_string(min_quadrature_nodes(modes)));
  CMatrix<Real> acc = first.matrix();
  Real deficit = first.truncation_deficit();
  for (int k = 1; k < nodes; ++k) {
    const Real xi = -pi + 2 * pi * Real(k) / Real(nodes);
    const DensityMatrix<Real> rho = builder(xi);
    acc += rho.matrix();
    deficit = std::max(deficit, rho.truncation_deficit());
  }
  acc /= Real(nodes);
  return DensityMatrix<Real>(FockOperator<Real>(hermitize_normalized(acc), modes), deficit,
                             DensityMatrix<Real>::Check::structural);
}

// ---------------------------------------------------------------------------
// Overloads on the domain types

template <typename Real>
HermitianEigen<Real> hermitian_eig(const FockOperator<Real>& op) {
  return hermitian_eig(op.matrix());
}

template <typename Real>
HermitianEigen<Real> hermitian_eig(const DensityMatrix<Real>& rho) {
  return hermitian_eig(rho.matrix());
}

template <typename Real>
FockOperator<Real> psd_sqrt(const DensityMatrix<Real>& rho) {
  return FockOperator<Real>(psd_sqrt(rho.matrix()), rho.modes());
}

template <typename Real>
Real uhlmann_fidelity(const DensityMatrix<Real>& rho1, const DensityMatrix<Real>& rho2) {
  return uhlmann_fidelity(rho1.matrix(), rho2.matrix());
}

template <typename Real>
Real expectation(const DensityMatrix<Real>& rho, const FockOperator<Real>& op) {
  return (rho.matrix() * op.matrix()).trace().real();
}

}  // namespace qimetro
