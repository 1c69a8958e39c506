#pragma once

#include <random>
#include <vector>

#include "qimetro/fock.hpp"
#include "qimetro/qfi.hpp"

namespace qimetro {

// Ginibre matrix with i.i.d. standard complex normal entries.
template <typename Real = double, typename Rng>
CMatrix<Real> random_ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<Real> n(0, 1);
  CMatrix<Real> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex<Real>(n(rng), n(rng));
  return m;
}

template <typename Real = double, typename Rng>
CMatrix<Real> random_hermitian(Eigen::Index n, Rng& rng) {
  const CMatrix<Real> g = random_ginibre<Real>(n, n, rng);
  return (g + g.adjoint()) * Real(0.5);
}

template <typename Real = double, typename Rng>
CMatrix<Real> random_unitary(Eigen::Index n, Rng& rng) {
  Eigen::HouseholderQR<CMatrix<Real>> qr(random_ginibre<Real>(n, n, rng));
  return qr.householderQ();
}

/// Full-rank density matrix G G^dagger / Tr, with G square Ginibre.
template <typename Real = double, typename Rng>
DensityMatrix<Real> random_density_matrix(Eigen::Index n, Rng& rng) {
  const CMatrix<Real> g = random_ginibre<Real>(n, n, rng);
  CMatrix<Real> rho = g * g.adjoint();
  return DensityMatrix<Real>(FockOperator<Real>(hermitize_normalized(rho)));
}

/// POVM E_k = S^{-1/2} G_k^dagger G_k S^{-1/2} with S = sum_k G_k^dagger G_k.
template <typename Real = double, typename Rng>
Povm<Real> random_povm(Eigen::Index n, int outcomes, Rng& rng) {
  std::vector<CMatrix<Real>> parts;
  CMatrix<Real> s = CMatrix<Real>::Zero(n, n);
  for (int k = 0; k < outcomes; ++k) {
    const CMatrix<Real> g = random_ginibre<Real>(n, n, rng);
    parts.push_back(g.adjoint() * g);
    s += parts.back();
  }
  const auto eig = hermitian_eig(CMatrix<Real>((s + s.adjoint()) * Real(0.5)));
  const CMatrix<Real> inv_sqrt = apply_spectral(eig, [](Real x) { return 1 / std::sqrt(x); });
  std::vector<FockOperator<Real>> elements;
  for (const auto& p : parts) {
    CMatrix<Real> e = inv_sqrt * p * inv_sqrt;
    elements.emplace_back(CMatrix<Real>((e + e.adjoint()) * Real(0.5)));
  }
  return Povm<Real>(std::move(elements));
}

}  // namespace qimetro
