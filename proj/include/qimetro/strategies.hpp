#pragma once

#include <vector>

#include "qimetro/fock.hpp"
#include "qimetro/qfi.hpp"
#include "qimetro/types.hpp"

namespace qimetro {

/// Lossy, noisy channel: transmissivity T, mean noise photons b per mode, d signal modes.
struct ChannelParams {
  double transmissivity = 1;
  double noise_per_mode = 0;
  int modes = 2;

  void validate() const;
};

/// Signal fraction eta and detection probability p, with eta * p = T.
struct DerivedChannel {
  double eta = 1;
  double detect_prob = 1;
};

DerivedChannel derive_channel(const ChannelParams& params);

// ---------------------------------------------------------------------------
// Closed forms (per trial, from the per-detection QFI times the detection probability)

/// Per-detected-photon QFI of the separable probe, eta^2 d / (4(1-eta) + 2 eta d), `paper` convention.
double case1_per_photon(double eta, int d);
/// Per-detected-pair QFI of the entangled probe, d^2 eta^2 / (4(1-eta) + 2 eta d^2), `paper` convention.
double case2_per_pair(double eta, int d);

QfiResult<> case1_closed(const ChannelParams& params, Convention convention = Convention::paper);
QfiResult<> case2_closed(const ChannelParams& params, Convention convention = Convention::paper);

// Alternative simplified per-trial expressions T^2 / (2(T - (1-T) b)) and T^2 / (2(T - (1-T) b / d)),
// `paper` convention. They disagree with the closed forms above and are kept as diagnostics only.
double case1_boxed(const ChannelParams& params);
double case2_boxed(const ChannelParams& params);

// ---------------------------------------------------------------------------
// Case 1: separable single photon. Basis {up, down, d-2 fill states}.

DensityMatrix<> case1_rho(double theta, const ChannelParams& params);
FockOperator<> case1_rho_prime(const ChannelParams& params);

// ---------------------------------------------------------------------------
// Case 2: single photon entangled with a d-mode ancilla. Basis index = s * d + a for
// signal mode s (label j = s + 1) and ancilla mode a.

struct EntangledBasisIndex {
  int k = 1;
  int m = 1;
};

inline constexpr int kMaxExplicitEntangledModes = 8;

/// Signal labels j = 1..d alternate between the two arms; true when label j sits in the
/// arm that picks up +theta/2.
bool entangled_label_in_plus_arm(int j);

/// |k,m> = d^{-1/2} sum_j e^{2 pi i j k / d} |phi_j>_S |chi_{j+m}>_A (ancilla label mod d).
VectorXc entangled_basis(EntangledBasisIndex idx, int d);

/// Explicit diagonal U_S(theta) tensor identity on the d^2-dimensional pair space.
MatrixXc entangled_phase_unitary(double theta, int d);

DensityMatrix<> case2_rho(double theta, const ChannelParams& params, EntangledBasisIndex idx = {});
FockOperator<> case2_rho_prime(const ChannelParams& params, EntangledBasisIndex idx = {});

// ---------------------------------------------------------------------------
// Case 3: coherent-state probe with common dephasing.

inline constexpr int kDefaultCutoff = 24;
inline constexpr int kMaxCutoff = 48;
inline constexpr double kCutoffRelTol = 1e-8;

/// Scale of the two-mode beam-splitter generator that produces theta: U_S(theta) = exp(i theta S / 2).
inline constexpr double kPhaseGeneratorScale = 0.5;

struct CutoffPolicy {
  Cutoff start{kDefaultCutoff};
  double rel_tol = kCutoffRelTol;
  int max_n = kMaxCutoff;
};

/// Per-mode thermal occupation after coupling, (1 - T) b.
double case3_occupation(const ChannelParams& params);

/// Lambda = phase_average(displaced_thermal(sqrt(T) e^{i phase}, n)) (x) thermal(n); diagonal.
DensityMatrix<> case3_lambda(const ChannelParams& params, Cutoff cutoff, double probe_phase = 0);

/// Intermediate matrices of the perturbative square-root expansion.
struct Appendix3Terms {
  Eigen::VectorXd lambda;
  MatrixXc p;
  MatrixXc a;
  Eigen::VectorXd q_diag;
  Eigen::VectorXd b_diag;
  double trace_a = 0;
  double trace_b = 0;
};

/// Expansion of sqrt(sqrt(L) rho(e) sqrt(L)) = L + e A + e^2 B for rho(e) = e^{i e G} L e^{-i e G}
/// with L = diag(lambda). Divisions by lambda_i + lambda_j are skipped below
/// support_tol * max(lambda). QFI (standard convention) = -8 Tr B.
Appendix3Terms appendix3_terms(const Eigen::VectorXd& lambda, const MatrixXc& generator, double support_tol);

/// -8 Tr B at a fixed cutoff, computed blockwise over total photon number.
double case3_qfi_appendix3_at(const ChannelParams& params, Cutoff cutoff, double support_tol = kSupportTol,
                              double probe_phase = 0);

/// -8 Tr B with a cutoff-convergence certificate (standard convention).
QfiResult<> case3_qfi_appendix3(const ChannelParams& params, const CutoffPolicy& policy = {},
                                double support_tol = kSupportTol);

/// Bures-limit QFI of rho(e) = e^{i e G} Lambda e^{-i e G}, G = S/2, at a fixed cutoff.
/// The convergence certificate comes from the square-root expansion at cutoff vs 2*cutoff.
QfiResult<> case3_qfi_fidelity(const ChannelParams& params, Cutoff cutoff,
                               const std::vector<double>& eps_schedule = kDefaultEpsSchedule,
                               double probe_phase = 0);

/// Output state for relative phase theta from the +/- mode integral, expressed in the
/// up/down basis. `nodes` must reach the trapezoidal exactness bound.
DensityMatrix<> case3_rho_theta(double theta, const ChannelParams& params, Cutoff cutoff, int nodes);

/// Smallest admissible node count for case3_rho_theta at this cutoff.
int case3_min_nodes(Cutoff cutoff);

/// bures_qfi over the case3_rho_theta family at theta = 0.
QfiResult<> case3_qfi_quadrature(const ChannelParams& params, Cutoff cutoff, int nodes,
                                 const std::vector<double>& eps_schedule = kDefaultEpsSchedule);

/// Unitary taking two-mode Fock states in the +/- mode labels to the up/down labels
/// (a_up = (a_+ + a_-)/sqrt2, a_down = (a_+ - a_-)/sqrt2), restricted to the cutoff box.
MatrixXc plus_minus_to_up_down(Cutoff cutoff);

}  // namespace qimetro
