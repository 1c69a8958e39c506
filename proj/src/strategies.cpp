#include "qimetro/strategies.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qimetro {

namespace {

constexpr Eigen::Index kFullCheckMaxDim = 64;

DensityMatrix<> checked_state(MatrixXc rho) {
  const auto check = rho.rows() <= kFullCheckMaxDim ? DensityMatrix<>::Check::full : DensityMatrix<>::Check::structural;
  return DensityMatrix<>(FockOperator<>(hermitize_normalized(rho)), 0.0, check);
}

// Mixture (1 - eta)/n I + eta |psi><psi|.
MatrixXc noisy_pure_state(const VectorXc& psi, double eta) {
  const Eigen::Index n = psi.size();
  MatrixXc rho = MatrixXc::Identity(n, n) * ((1 - eta) / double(n));
  rho += eta * psi * psi.adjoint();
  return rho;
}

// d/dtheta of eta |psi(theta)><psi(theta)| given psi and its derivative.
FockOperator<> pure_derivative(const VectorXc& psi, const VectorXc& dpsi, double eta) {
  MatrixXc d = eta * (dpsi * psi.adjoint() + psi * dpsi.adjoint());
  return FockOperator<>(std::move(d));
}

}  // namespace

void ChannelParams::validate() const {
  if (!(transmissivity >= 0 && transmissivity <= 1))
    throw PreconditionError("transmissivity must lie in [0, 1], got " + std::to_string(transmissivity));
  if (!(noise_per_mode >= 0) || !std::isfinite(noise_per_mode))
    throw PreconditionError("noise per mode must be >= 0, got " + std::to_string(noise_per_mode));
  if (modes < 2 || modes % 2 != 0) throw PreconditionError("mode count must be even and >= 2, got " + std::to_string(modes));
}

DerivedChannel derive_channel(const ChannelParams& params) {
  params.validate();
  const double t = params.transmissivity;
  const double p = t + params.noise_per_mode * params.modes * (1 - t);
  if (!(p > 0)) throw PreconditionError("degenerate channel: T = 0 and b = 0 give no detections");
  return DerivedChannel{t / p, p};
}

double case1_per_photon(double eta, int d) { return eta * eta * d / (4 * (1 - eta) + 2 * eta * d); }

double case2_per_pair(double eta, int d) {
  const double d2 = double(d) * double(d);
  return d2 * eta * eta / (4 * (1 - eta) + 2 * eta * d2);
}

QfiResult<> case1_closed(const ChannelParams& params, Convention convention) {
  const DerivedChannel ch = derive_channel(params);
  QfiResult<> r;
  r.value = ch.detect_prob * case1_per_photon(ch.eta, params.modes);
  r.strategy = Strategy::separable;
  r.convention = Convention::paper;
  return r.in(convention);
}

QfiResult<> case2_closed(const ChannelParams& params, Convention convention) {
  const DerivedChannel ch = derive_channel(params);
  QfiResult<> r;
  r.value = ch.detect_prob * case2_per_pair(ch.eta, params.modes);
  r.strategy = Strategy::entangled;
  r.convention = Convention::paper;
  return r.in(convention);
}

double case1_boxed(const ChannelParams& params) {
  params.validate();
  const double t = params.transmissivity;
  return t * t / (2 * (t - (1 - t) * params.noise_per_mode));
}

double case2_boxed(const ChannelParams& params) {
  params.validate();
  const double t = params.transmissivity;
  return t * t / (2 * (t - (1 - t) * params.noise_per_mode / params.modes));
}

// ---------------------------------------------------------------------------
// Case 1

DensityMatrix<> case1_rho(double theta, const ChannelParams& params) {
  const DerivedChannel ch = derive_channel(params);
  VectorXc psi = VectorXc::Zero(params.modes);
  psi(0) = std::cos(theta / 2);
  psi(1) = Complex<double>(0, std::sin(theta / 2));
  return checked_state(noisy_pure_state(psi, ch.eta));
}

FockOperator<> case1_rho_prime(const ChannelParams& params) {
  const DerivedChannel ch = derive_channel(params);
  VectorXc psi = VectorXc::Zero(params.modes);
  VectorXc dpsi = VectorXc::Zero(params.modes);
  psi(0) = 1;
  dpsi(1) = Complex<double>(0, 0.5);
  return pure_derivative(psi, dpsi, ch.eta);
}

// ---------------------------------------------------------------------------
// Case 2

bool entangled_label_in_plus_arm(int j) { return j % 2 == 0; }

namespace {

void check_entangled_index(EntangledBasisIndex idx, int d) {
  if (d < 2 || d % 2 != 0) throw PreconditionError("entangled basis: d must be even and >= 2");
  if (idx.k < 1 || idx.k > d || idx.m < 1 || idx.m > d)
    throw PreconditionError("entangled basis index (" + std::to_string(idx.k) + "," + std::to_string(idx.m) +
                            ") out of range for d=" + std::to_string(d));
}

void check_explicit_size(int d) {
  if (d > kMaxExplicitEntangledModes)
    throw PreconditionError("case2_rho: explicit pair matrices are limited to d <= " +
                            std::to_string(kMaxExplicitEntangledModes) + "; use case2_closed");
}

// i/2 for the +theta/2 arm, -i/2 for the other, on the pair space.
VectorXc arm_phase_rates(int d) {
  VectorXc r(Eigen::Index(d) * d);
  for (int s = 0; s < d; ++s)
    for (int a = 0; a < d; ++a)
      r(Eigen::Index(s) * d + a) = Complex<double>(0, entangled_label_in_plus_arm(s + 1) ? 0.5 : -0.5);
  return r;
}

}  // namespace

VectorXc entangled_basis(EntangledBasisIndex idx, int d) {
  check_entangled_index(idx, d);
  VectorXc v = VectorXc::Zero(Eigen::Index(d) * d);
  const double norm = 1 / std::sqrt(double(d));
  for (int j = 1; j <= d; ++j) {
    const int s = j - 1;
    const int a = (j + idx.m - 1) % d;  // ancilla label j + m, wrapped to 1..d, stored 0-based
    const double angle = 2 * std::numbers::pi * double(j) * double(idx.k) / double(d);
    v(Eigen::Index(s) * d + a) = std::polar(norm, angle);
  }
  return v;
}

MatrixXc entangled_phase_unitary(double theta, int d) {
  if (d < 2 || d % 2 != 0) throw PreconditionError("entangled_phase_unitary: d must be even and >= 2");
  const VectorXc rates = arm_phase_rates(d);
  VectorXc diag(rates.size());
  for (Eigen::Index i = 0; i < rates.size(); ++i) diag(i) = std::exp(rates(i) * theta);
  return diag.asDiagonal();
}

DensityMatrix<> case2_rho(double theta, const ChannelParams& params, EntangledBasisIndex idx) {
  const DerivedChannel ch = derive_channel(params);
  check_explicit_size(params.modes);
  const VectorXc psi = entangled_phase_unitary(theta, params.modes) * entangled_basis(idx, params.modes);
  return checked_state(noisy_pure_state(psi, ch.eta));
}

FockOperator<> case2_rho_prime(const ChannelParams& params, EntangledBasisIndex idx) {
  const DerivedChannel ch = derive_channel(params);
  check_explicit_size(params.modes);
  const VectorXc psi = entangled_basis(idx, params.modes);
  const VectorXc dpsi = arm_phase_rates(params.modes).cwiseProduct(psi);
  return pure_derivative(psi, dpsi, ch.eta);
}

}  // namespace qimetro
