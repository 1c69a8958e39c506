#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "qimetro/fock.hpp"
#include "qimetro/linalg.hpp"
#include "qimetro/types.hpp"

namespace qimetro {

/// Normalization of the Fisher information.
///
/// `standard` is the Bures/SLD normalization, 2 sum |r'_ij|^2 / (b_i + b_j), for which the
/// pure-state QFI is 4 Var(G). `paper` drops the factor 2 and is exactly half of it.
enum class Convention { paper, standard };

inline std::string_view to_string(Convention c) { return c == Convention::paper ? "paper" : "standard"; }

inline Convention parse_convention(std::string_view s) {
  if (s == "paper") return Convention::paper;
  if (s == "standard") return Convention::standard;
  throw PreconditionError("unknown convention '" + std::string(s) + "' (expected paper|standard)");
}

// Multiplier taking a standard-convention value to `c`.
inline double convention_factor(Convention c) { return c == Convention::paper ? 0.5 : 1.0; }

enum class Strategy { generic, separable, entangled, coherent };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::separable: return "separable";
    case Strategy::entangled: return "entangled";
    case Strategy::coherent: return "coherent";
    default: return "generic";
  }
}

/// A per-trial Fisher information value with its provenance.
template <typename Real = double>
struct QfiResult {
  Real value = 0;
  Strategy strategy = Strategy::generic;
  Convention convention = Convention::standard;
  std::optional<Cutoff> cutoff_used;
  bool converged = true;
  // Cutoff certificate |f(2N) - f(N)| / |f(2N)|, or the extrapolation spread when no cutoff applies.
  Real relative_change = 0;
  // Relative spread between the last two Richardson orders (fidelity-based routes only).
  Real extrapolation_spread = 0;

  QfiResult in(Convention c) const {
    QfiResult r = *this;
    r.value = value * Real(convention_factor(c) / convention_factor(convention));
    r.convention = c;
    return r;
  }
};

/// A generalized measurement. Elements must be PSD and sum to the identity within 1e-10.
template <typename Real = double>
class Povm {
public:
  explicit Povm(std::vector<FockOperator<Real>> elements) : elements_(std::move(elements)) {
    if (elements_.empty()) throw PreconditionError("Povm: no elements");
    const Eigen::Index n = elements_.front().dim();
    CMatrix<Real> sum = CMatrix<Real>::Zero(n, n);
    for (const auto& e : elements_) {
      if (e.dim() != n) throw PreconditionError("Povm: elements have different dimensions");
      const auto eig = hermitian_eig(e.matrix());
      if (eig.values(n - 1) < -Real(kNegativeEigenvalueTol)) throw PreconditionError("Povm: element is not PSD");
      sum += e.matrix();
    }
    const Real err = (sum - CMatrix<Real>::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(err <= Real(1e-10))) throw PreconditionError("Povm: elements do not sum to identity");
  }

  const std::vector<FockOperator<Real>>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  Eigen::Index dim() const { return elements_.front().dim(); }

  std::vector<Real> probabilities(const DensityMatrix<Real>& rho) const {
    if (rho.dim() != dim()) throw PreconditionError("Povm: state/POVM dimension mismatch");
    std::vector<Real> p;
    p.reserve(elements_.size());
    for (const auto& e : elements_) p.push_back((rho.matrix() * e.matrix()).trace().real());
    return p;
  }

private:
  std::vector<FockOperator<Real>> elements_;
};

// ---------------------------------------------------------------------------
// SLD quantum Fisher information

inline constexpr double kSupportTol = 1e-12;

/// QFI from a state and its derivative via the SLD superoperator.
///
/// In the eigenbasis of rho0 (eigenvalues b_i) the `paper` convention is
/// sum_ij |r'_ij|^2 / (b_i + b_j); the standard convention is twice that. Pairs with
/// b_i + b_j below support_tol * max(b) are dropped.
template <typename Real>
QfiResult<Real> sld_qfi(const DensityMatrix<Real>& rho0, const FockOperator<Real>& rho_prime, Convention convention,
                        Real support_tol = Real(kSupportTol)) {
  if (rho0.dim() != rho_prime.dim()) throw PreconditionError("sld_qfi: dimension mismatch");
  if (!(hermiticity_defect(rho_prime.matrix()) < Real(kHermiticityTol)))
    throw PreconditionError("sld_qfi: derivative is not Hermitian");
  const auto eig = hermitian_eig(rho0.matrix());
  const Eigen::Index n = rho0.dim();
  RVector<Real> beta(n);
  for (Eigen::Index i = 0; i < n; ++i) beta(i) = clamp_eigenvalue(eig.values(i));
  const Real beta_max = beta.maxCoeff();
  if (!(beta_max > 0)) throw NumericalError("sld_qfi: state has empty support");

  const CMatrix<Real> d = eig.vectors.adjoint() * rho_prime.matrix() * eig.vectors;
  const Real floor = support_tol * beta_max;
  Real sum = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const Real denom = beta(i) + beta(j);
      if (denom >= floor && denom > 0) sum += std::norm(d(i, j)) / denom;
    }
  QfiResult<Real> r;
  r.value = sum * Real(convention == Convention::paper ? 1 : 2);
  r.convention = convention;
  return r;
}

/// Central finite difference (rho(t+h) - rho(t-h)) / 2h.
template <typename Real, typename Family>
FockOperator<Real> central_difference(Family&& rho_at, Real theta, Real step) {
  const DensityMatrix<Real> plus = rho_at(theta + step);
  const DensityMatrix<Real> minus = rho_at(theta - step);
  CMatrix<Real> d = (plus.matrix() - minus.matrix()) / (2 * step);
  d = (d + d.adjoint()).eval() * Real(0.5);
  return FockOperator<Real>(std::move(d), plus.modes());
}

// ---------------------------------------------------------------------------
// Fidelity-based QFI

inline const std::vector<double> kDefaultEpsSchedule{4e-2, 2e-2, 1e-2};

struct BuresOptions {
  // Non-monotone quotient steps larger than this (relative to max |q|, plus abs_floor) are errors.
  double monotone_tol = 1e-6;
  double abs_floor = 1e-9;
  // Relative spread between the last two extrapolation orders accepted as converged.
  double spread_tol = 1e-4;
};

/// Polynomial extrapolation to h = 0 of samples (h_i, q_i); returns the Neville tableau
/// diagonal, so back() is the highest-order estimate.
template <typename Real>
std::vector<Real> richardson_diagonal(const std::vector<Real>& h, const std::vector<Real>& q) {
  const std::size_t n = h.size();
  std::vector<std::vector<Real>> t(n, std::vector<Real>(n));
  for (std::size_t i = 0; i < n; ++i) {
    t[i][0] = q[i];
    for (std::size_t j = 1; j <= i; ++j) {
      // Neville step for P(0) with nodes h_{i-j}..h_i.
      t[i][j] = (h[i - j] * t[i][j - 1] - h[i] * t[i - 1][j - 1]) / (h[i - j] - h[i]);
    }
  }
  std::vector<Real> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = t[i][i];
  return diag;
}

/// QFI at theta0 from the Bures limit 8 (1 - Tr sqrt(sqrt(r0) r(e) sqrt(r0))) / e^2.
///
/// The quotient is evaluated at +e and -e and averaged so that only even powers of e
/// remain, then extrapolated to e -> 0 in powers of e^2. The result is in the standard
/// convention.
template <typename Real, typename Family>
QfiResult<Real> bures_qfi(Family&& rho_at, Real theta0, const std::vector<Real>& eps_schedule,
                          const BuresOptions& opts = {}) {
  if (eps_schedule.size() < 3) throw PreconditionError("bures_qfi: need at least 3 step sizes");
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    const Real e = eps_schedule[i];
    if (!(e > 0 && e <= Real(0.1))) throw PreconditionError("bures_qfi: step sizes must lie in (0, 0.1]");
    if (i > 0 && !(e < eps_schedule[i - 1])) throw PreconditionError("bures_qfi: step sizes must decrease");
  }

  const DensityMatrix<Real> rho0 = rho_at(theta0);
  const CMatrix<Real> sqrt0 = psd_sqrt(rho0.matrix());
  auto root_fid = [&](Real theta) {
    const DensityMatrix<Real> rho = rho_at(theta);
    if (rho.dim() != rho0.dim()) throw PreconditionError("bures_qfi: family changes dimension");
    const CMatrix<Real> product = sqrt0 * psd_sqrt(rho.matrix());
    Eigen::BDCSVD<CMatrix<Real>> svd(product);
    return Real(svd.singularValues().sum());
  };

  std::vector<Real> h, q;
  for (Real e : eps_schedule) {
    const Real rf = (root_fid(theta0 + e) + root_fid(theta0 - e)) / 2;
    h.push_back(e * e);
    q.push_back(8 * (1 - rf) / (e * e));
  }

  Real q_scale = 0;
  for (Real v : q) q_scale = std::max(q_scale, std::abs(v));
  const Real mono_tol = Real(opts.monotone_tol) * q_scale + Real(opts.abs_floor);
  int direction = 0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    const Real step = q[i] - q[i - 1];
    if (std::abs(step) <= mono_tol) continue;
    const int s = step > 0 ? 1 : -1;
    if (direction != 0 && s != direction)
      throw NumericalError("bures_qfi: quotient sequence is not monotone (truncation or roundoff breakdown)");
    direction = s;
  }

  const auto diag = richardson_diagonal(h, q);
  Real value = diag.back();
  const Real spread = std::abs(diag.back() - diag[diag.size() - 2]);
  if (value < 0) {
    if (value < -Real(opts.abs_floor)) throw NumericalError("bures_qfi: negative extrapolated QFI");
    value = 0;
  }
  const Real rel_spread = value > 0 ? spread / value : spread;

  QfiResult<Real> r;
  r.value = value;
  r.convention = Convention::standard;
  r.extrapolation_spread = rel_spread;
  r.relative_change = rel_spread;
  r.converged = rel_spread < Real(opts.spread_tol) || spread <= Real(opts.abs_floor);
  return r;
}

// ---------------------------------------------------------------------------
// Classical Fisher information and Cramer-Rao verification

inline constexpr double kMinOutcomeProbability = 1e-12;

template <typename Real, typename Family>
Real classical_fisher(const Povm<Real>& povm, Family&& rho_at, Real theta0, Real step) {
  if (!(step >= Real(1e-7) && step <= Real(1e-2))) throw PreconditionError("classical_fisher: step must lie in [1e-7, 1e-2]");
  const auto p0 = povm.probabilities(rho_at(theta0));
  const auto pp = povm.probabilities(rho_at(theta0 + step));
  const auto pm = povm.probabilities(rho_at(theta0 - step));
  Real cfi = 0;
  for (std::size_t o = 0; o < p0.size(); ++o) {
    if (p0[o] < Real(kMinOutcomeProbability)) continue;
    const Real dp = (pp[o] - pm[o]) / (2 * step);
    cfi += dp * dp / p0[o];
  }
  return cfi;
}

struct MonteCarloOptions {
  int repetitions = 2000;  // independent experiments of `trials` shots each
  int grid_points = 512;
  double theta_min = -std::numbers::pi / 2;
  double theta_max = std::numbers::pi / 2;
  double fisher_step = 1e-5;
};

template <typename Real = double>
struct CrbEstimate {
  Real estimate_variance = 0;
  Real predicted_bound = 0;  // 1 / (trials * CFI)
  Real mean_estimate = 0;
  Real fisher_information = 0;
  int repetitions = 0;
};

// SplitMix64 finalizer; derives independent per-repetition seeds from the master seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Monte-Carlo check of the Cramer-Rao bound for a maximum-likelihood estimator.
///
/// Each repetition draws multinomial outcome counts for `trials` shots at theta_true,
/// maximizes the log-likelihood on a uniform grid and refines the best cell by golden
/// section search. Returns the empirical variance of the estimates (two-pass) and the
/// bound 1/(trials * CFI). Deterministic for a given seed.
template <typename Real, typename Family>
CrbEstimate<Real> crb_montecarlo(const Povm<Real>& povm, Family&& rho_at, Real theta_true, long trials,
                                 std::uint64_t seed, const MonteCarloOptions& opts = {}) {
  if (trials < 1000) throw PreconditionError("crb_montecarlo: need at least 1000 trials");
  if (opts.repetitions < 2 || opts.grid_points < 3) throw PreconditionError("crb_montecarlo: bad options");

  const std::size_t outcomes = povm.size();
  auto probs_at = [&](Real theta) { return povm.probabilities(rho_at(theta)); };

  const int g = opts.grid_points;
  std::vector<Real> grid(static_cast<std::size_t>(g));
  std::vector<std::vector<Real>> grid_probs(static_cast<std::size_t>(g));
  for (int i = 0; i < g; ++i) {
    grid[std::size_t(i)] = Real(opts.theta_min) + (Real(opts.theta_max) - Real(opts.theta_min)) * Real(i) / Real(g - 1);
    grid_probs[std::size_t(i)] = probs_at(grid[std::size_t(i)]);
  }
  Real variation = 0;
  for (std::size_t o = 0; o < outcomes; ++o) {
    Real lo = std::numeric_limits<Real>::infinity(), hi = -lo;
    for (const auto& p : grid_probs) {
      lo = std::min(lo, p[o]);
      hi = std::max(hi, p[o]);
    }
    variation = std::max(variation, hi - lo);
  }
  if (variation < Real(kMinOutcomeProbability)) throw NumericalError("crb_montecarlo: degenerate likelihood");

  const Real cfi = classical_fisher(povm, rho_at, theta_true, Real(opts.fisher_step));
  if (!(cfi > 0)) throw NumericalError("crb_montecarlo: degenerate likelihood (zero Fisher information at theta_true)");

  const auto p_true = probs_at(theta_true);
  auto log_likelihood = [&](const std::vector<long>& counts, const std::vector<Real>& p) {
    Real ll = 0;
    for (std::size_t o = 0; o < outcomes; ++o) {
      if (counts[o] == 0) continue;
      if (p[o] <= 0) return -std::numeric_limits<Real>::infinity();
      ll += Real(counts[o]) * std::log(p[o]);
    }
    return ll;
  };

  std::vector<Real> estimates;
  estimates.reserve(std::size_t(opts.repetitions));
  std::vector<long> counts(outcomes);
  for (int rep = 0; rep < opts.repetitions; ++rep) {
    std::mt19937_64 rng(mix_seed(seed + std::uint64_t(rep)));
    // Multinomial draw as a chain of conditional binomials.
    long remaining = trials;
    Real mass_left = 1;
    for (std::size_t o = 0; o < outcomes; ++o) {
      if (o + 1 == outcomes || remaining == 0) {
        counts[o] = remaining;
        remaining = 0;
        continue;
      }
      const double q = std::clamp(double(std::max(p_true[o], Real(0)) / mass_left), 0.0, 1.0);
      std::binomial_distribution<long> draw(remaining, q);
      counts[o] = draw(rng);
      remaining -= counts[o];
      mass_left = std::max(mass_left - std::max(p_true[o], Real(0)), Real(0));
      if (mass_left <= 0) mass_left = std::numeric_limits<Real>::min();
    }

    int best = 0;
    Real best_ll = -std::numeric_limits<Real>::infinity();
    for (int i = 0; i < g; ++i) {
      const Real ll = log_likelihood(counts, grid_probs[std::size_t(i)]);
      if (ll > best_ll) {
        best_ll = ll;
        best = i;
      }
    }
    Real a = grid[std::size_t(std::max(best - 1, 0))];
    Real b = grid[std::size_t(std::min(best + 1, g - 1))];
    const Real inv_phi = (std::sqrt(Real(5)) - 1) / 2;
    Real c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    Real fc = log_likelihood(counts, probs_at(c)), fd = log_likelihood(counts, probs_at(d));
    for (int it = 0; it < 80 && (b - a) > Real(1e-12); ++it) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = log_likelihood(counts, probs_at(c));
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = log_likelihood(counts, probs_at(d));
      }
    }
    estimates.push_back((a + b) / 2);
  }

  Real mean = 0;
  for (Real e : estimates) mean += e;
  mean /= Real(estimates.size());
  Real ss = 0;
  for (Real e : estimates) ss += (e - mean) * (e - mean);

  CrbEstimate<Real> out;
  out.estimate_variance = ss / Real(estimates.size() - 1);
  out.mean_estimate = mean;
  out.fisher_information = cfi;
  out.predicted_bound = 1 / (Real(trials) * cfi);
  out.repetitions = opts.repetitions;
  return out;
}

// ---------------------------------------------------------------------------
// Cutoff convergence

template <typename Real = double>
struct CutoffConvergence {
  Real value = 0;
  Cutoff cutoff_used{1};
  bool converged = false;
  Real relative_change = std::numeric_limits<Real>::infinity();
};

/// Doubles n_max from `start` until |f(2N) - f(N)| / |f(2N)| < rel_tol, or until the next
/// doubling would exceed max_n. Exhausting the budget is reported, not thrown.
template <typename Real = double, typename Compute>
CutoffConvergence<Real> converge_cutoff(Compute&& compute, Cutoff start, Real rel_tol, int max_n) {
  if (!(rel_tol > 0)) throw PreconditionError("converge_cutoff: rel_tol must be > 0");
  CutoffConvergence<Real> out;
  Cutoff n = start;
  Real f = compute(n);
  out.value = f;
  out.cutoff_used = n;
  while (2 * n.n_max() <= max_n) {
    const Cutoff next = n.doubled();
    const Real f_next = compute(next);
    const Real diff = std::abs(f_next - f);
    Real rel;
    if (f_next != 0) rel = diff / std::abs(f_next);
    else rel = diff == 0 ? Real(0) : std::numeric_limits<Real>::infinity();
    out.value = f_next;
    out.cutoff_used = next;
    out.relative_change = rel;
    if (rel < rel_tol) {
      out.converged = true;
      return out;
    }
    n = next;
    f = f_next;
  }
  return out;
}

}  // namespace qimetro
