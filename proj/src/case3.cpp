#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qimetro/strategies.hpp"

namespace qimetro {

namespace {

// Photon-number distribution of the dephased up mode and thermal down mode.
struct ModeWeights {
  Eigen::VectorXd up;
  Eigen::VectorXd down;
};

ModeWeights case3_mode_weights(const ChannelParams& params, Cutoff cutoff, double probe_phase) {
  params.validate();
  const double n_bar = case3_occupation(params);
  const auto mode = GaussianModeParams<>::from_occupation(std::sqrt(params.transmissivity), probe_phase, n_bar);
  const DensityMatrix<> up = phase_average(displaced_thermal(mode, cutoff));
  const DensityMatrix<> down = thermal_state(n_bar, cutoff);
  return {up.matrix().diagonal().real(), down.matrix().diagonal().real()};
}

// Square-root expansion with an absolute floor for the divisions.
Appendix3Terms appendix3_with_floor(const Eigen::VectorXd& lambda, const MatrixXc& g, double floor) {
  const Eigen::Index n = lambda.size();
  if (g.rows() != n || g.cols() != n) throw PreconditionError("appendix3_terms: generator/state dimension mismatch");

  Appendix3Terms t;
  t.lambda = lambda;
  Eigen::VectorXd root(n);
  for (Eigen::Index i = 0; i < n; ++i) root(i) = std::sqrt(clamp_eigenvalue(lambda(i)));

  // P = i sqrt(L) (G L - L G) sqrt(L), elementwise since L is diagonal.
  t.p.resize(n, n);
  t.a = MatrixXc::Zero(n, n);
  const Complex<double> i_unit(0, 1);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      t.p(i, j) = i_unit * root(i) * g(i, j) * (lambda(j) - lambda(i)) * root(j);
      const double denom = lambda(i) + lambda(j);
      if (denom >= floor && denom > 0) t.a(i, j) = t.p(i, j) / denom;
    }

  // Q_ii = 1/2 sqrt(l_i) (2 G L G - G^2 L - L G^2)_ii sqrt(l_i) = l_i sum_k G_ik G_ki (l_k - l_i).
  t.q_diag.resize(n);
  t.b_diag = Eigen::VectorXd::Zero(n);
  Complex<double> trace_a = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex<double> q = 0;
    Complex<double> aa = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      q += g(i, k) * g(k, i) * (lambda(k) - lambda(i));
      aa += t.a(i, k) * t.a(k, i);
    }
    t.q_diag(i) = lambda(i) * q.real();
    trace_a += t.a(i, i);
    const double denom = 2 * lambda(i);
    if (denom >= floor && denom > 0) t.b_diag(i) = (t.q_diag(i) - aa.real()) / denom;
  }
  t.trace_a = std::abs(trace_a);
  t.trace_b = t.b_diag.sum();
  return t;
}

double checked_qfi_from_trace_b(double trace_b) {
  const double qfi = -8 * trace_b;
  if (qfi < -1e-10) throw NumericalError("square-root expansion produced negative QFI " + std::to_string(qfi));
  return std::max(qfi, 0.0);
}

void check_support_tol(double support_tol) {
  if (!(support_tol > 0 && support_tol <= 1e-6)) throw PreconditionError("support_tol must lie in (0, 1e-6]");
}

}  // namespace

double case3_occupation(const ChannelParams& params) {
  return (1 - params.transmissivity) * params.noise_per_mode;
}

DensityMatrix<> case3_lambda(const ChannelParams& params, Cutoff cutoff, double probe_phase) {
  params.validate();
  const double n_bar = case3_occupation(params);
  const auto mode = GaussianModeParams<>::from_occupation(std::sqrt(params.transmissivity), probe_phase, n_bar);
  return tensor(phase_average(displaced_thermal(mode, cutoff)), thermal_state(n_bar, cutoff));
}

Appendix3Terms appendix3_terms(const Eigen::VectorXd& lambda, const MatrixXc& generator, double support_tol) {
  check_support_tol(support_tol);
  if (lambda.size() == 0 || !(lambda.maxCoeff() > 0)) throw NumericalError("appendix3_terms: empty support");
  return appendix3_with_floor(lambda, generator, support_tol * lambda.maxCoeff());
}

double case3_qfi_appendix3_at(const ChannelParams& params, Cutoff cutoff, double support_tol, double probe_phase) {
  check_support_tol(support_tol);
  const ModeWeights w = case3_mode_weights(params, cutoff, probe_phase);
  const int n_max = cutoff.n_max();
  const double lambda_max = w.up.maxCoeff() * w.down.maxCoeff();
  if (!(lambda_max > 0)) throw NumericalError("case3: empty support");
  const double floor = support_tol * lambda_max;

  // S conserves total photon number, so every term is block diagonal in M = n_up + n_down.
  double trace_b = 0;
  for (int total = 0; total <= 2 * n_max; ++total) {
    const int lo = std::max(0, total - n_max);
    const int hi = std::min(total, n_max);
    const int size = hi - lo + 1;
    Eigen::VectorXd lambda(size);
    MatrixXc g = MatrixXc::Zero(size, size);
    for (int idx = 0; idx < size; ++idx) {
      const int up = lo + idx;
      const int down = total - up;
      lambda(idx) = w.up(up) * w.down(down);
      // <up-1, down+1| S |up, down> = sqrt(up) sqrt(down+1), inside the cutoff box only.
      if (idx > 0) {
        const double s = std::sqrt(double(up)) * std::sqrt(double(down + 1));
        g(idx - 1, idx) = kPhaseGeneratorScale * s;
        g(idx, idx - 1) = kPhaseGeneratorScale * s;
      }
    }
    trace_b += appendix3_with_floor(lambda, g, floor).trace_b;
  }
  return checked_qfi_from_trace_b(trace_b);
}

QfiResult<> case3_qfi_appendix3(const ChannelParams& params, const CutoffPolicy& policy, double support_tol) {
  const auto conv = converge_cutoff<double>(
      [&](Cutoff c) { return case3_qfi_appendix3_at(params, c, support_tol); }, policy.start, policy.rel_tol,
      policy.max_n);
  QfiResult<> r;
  r.value = conv.value;
  r.strategy = Strategy::coherent;
  r.convention = Convention::standard;
  r.cutoff_used = conv.cutoff_used;
  r.converged = conv.converged;
  r.relative_change = conv.relative_change;
  return r;
}

namespace {

// Truncation certificate for a fixed cutoff: expansion value at cutoff vs 2 * cutoff.
double cutoff_relative_change(const ChannelParams& params, Cutoff cutoff) {
  const double f = case3_qfi_appendix3_at(params, cutoff);
  const double f2 = case3_qfi_appendix3_at(params, cutoff.doubled());
  if (f2 == 0) return f == 0 ? 0.0 : 1.0;
  return std::abs(f2 - f) / std::abs(f2);
}

QfiResult<> with_certificate(QfiResult<> r, const ChannelParams& params, Cutoff cutoff) {
  const double rel = cutoff_relative_change(params, cutoff);
  r.strategy = Strategy::coherent;
  r.cutoff_used = cutoff;
  r.relative_change = rel;
  r.converged = r.converged && rel < kCutoffRelTol;
  return r;
}

}  // namespace

QfiResult<> case3_qfi_fidelity(const ChannelParams& params, Cutoff cutoff, const std::vector<double>& eps_schedule,
                               double probe_phase) {
  const DensityMatrix<> lambda = case3_lambda(params, cutoff, probe_phase);
  const MatrixXc g = kPhaseGeneratorScale * beamsplitter_generator(cutoff).matrix();
  const auto eig = hermitian_eig(g);
  auto family = [&](double eps) {
    const MatrixXc u = exp_i(eig, eps);
    MatrixXc rho = u * lambda.matrix() * u.adjoint();
    return DensityMatrix<>(FockOperator<>(hermitize_normalized(rho), lambda.modes()), lambda.truncation_deficit(),
                           DensityMatrix<>::Check::structural);
  };
  return with_certificate(bures_qfi(family, 0.0, eps_schedule), params, cutoff);
}

// ---------------------------------------------------------------------------
// Quadrature route

MatrixXc plus_minus_to_up_down(Cutoff cutoff) {
  const int n_max = cutoff.n_max();
  const int dim = cutoff.dim();
  MatrixXc u = MatrixXc::Zero(Eigen::Index(dim) * dim, Eigen::Index(dim) * dim);
  const double inv_sqrt2 = 1 / std::sqrt(2.0);

  // Amplitudes over p = n_up in the block of total M = n_plus + n_minus (n_down = M - p).
  using Block = std::vector<double>;
  auto create = [&](const Block& c, int sign) {
    // (a_up^dagger + sign * a_down^dagger) / sqrt2 applied to a block-M vector.
    const int m = int(c.size()) - 1;
    Block out(c.size() + 1, 0.0);
    for (int p = 0; p <= m; ++p) {
      out[std::size_t(p) + 1] += c[std::size_t(p)] * std::sqrt(double(p + 1)) * inv_sqrt2;
      out[std::size_t(p)] += sign * c[std::size_t(p)] * std::sqrt(double(m - p + 1)) * inv_sqrt2;
    }
    return out;
  };

  std::vector<Block> minus_column(std::size_t(n_max) + 1);
  minus_column[0] = Block{1.0};
  for (int nm = 1; nm <= n_max; ++nm) {
    Block b = create(minus_column[std::size_t(nm) - 1], -1);
    for (double& x : b) x /= std::sqrt(double(nm));
    minus_column[std::size_t(nm)] = std::move(b);
  }
  for (int nm = 0; nm <= n_max; ++nm) {
    Block c = minus_column[std::size_t(nm)];
    for (int np = 0; np <= n_max; ++np) {
      if (np > 0) {
        c = create(c, +1);
        for (double& x : c) x /= std::sqrt(double(np));
      }
      const int total = np + nm;
      const Eigen::Index col = Eigen::Index(np) * dim + nm;
      for (int p = std::max(0, total - n_max); p <= std::min(total, n_max); ++p)
        u(Eigen::Index(p) * dim + (total - p), col) = c[std::size_t(p)];
    }
  }
  return u;
}

int case3_min_nodes(Cutoff cutoff) { return min_quadrature_nodes(ModeStructure::two_mode(cutoff)); }

namespace {

DensityMatrix<> case3_rho_theta_with(double theta, const DensityMatrix<>& arm, const MatrixXc& basis_change,
                                     Cutoff cutoff, int nodes) {
  const ModeStructure single = ModeStructure::single_mode(cutoff);
  const ModeStructure pair = ModeStructure::two_mode(cutoff);
  auto builder = [&](double xi) {
    MatrixXc plus = phase_rotate(arm.matrix(), single, xi + theta / 2);
    MatrixXc minus = phase_rotate(arm.matrix(), single, xi - theta / 2);
    MatrixXc k = Eigen::kroneckerProduct(plus, minus);
    return DensityMatrix<>(FockOperator<>(std::move(k), pair), arm.truncation_deficit(),
                           DensityMatrix<>::Check::structural);
  };
  const DensityMatrix<> pm = phase_average_quadrature<double>(builder, nodes);
  const MatrixXc rho = basis_change * pm.matrix() * basis_change.adjoint();
  const double tr = rho.trace().real();
  const double deficit = std::max(pm.truncation_deficit(), 1 - tr);
  if (deficit > kMaxTruncationDeficit)
    throw TruncationError("case3_rho_theta: cutoff n_max=" + std::to_string(cutoff.n_max()) + " loses weight " +
                          std::to_string(deficit));
  return DensityMatrix<>(FockOperator<>(hermitize_normalized(rho), pair), deficit, DensityMatrix<>::Check::structural);
}

DensityMatrix<> case3_arm_state(const ChannelParams& params, Cutoff cutoff) {
  params.validate();
  // Each arm carries |alpha|^2 = 1/2 before loss, so delta = sqrt(T / 2).
  const auto mode =
      GaussianModeParams<>::from_occupation(std::sqrt(params.transmissivity / 2), 0.0, case3_occupation(params));
  return displaced_thermal(mode, cutoff);
}

}  // namespace

DensityMatrix<> case3_rho_theta(double theta, const ChannelParams& params, Cutoff cutoff, int nodes) {
  return case3_rho_theta_with(theta, case3_arm_state(params, cutoff), plus_minus_to_up_down(cutoff), cutoff, nodes);
}

QfiResult<> case3_qfi_quadrature(const ChannelParams& params, Cutoff cutoff, int nodes,
                                 const std::vector<double>& eps_schedule) {
  const DensityMatrix<> arm = case3_arm_state(params, cutoff);
  const MatrixXc basis_change = plus_minus_to_up_down(cutoff);
  auto family = [&](double theta) { return case3_rho_theta_with(theta, arm, basis_change, cutoff, nodes); };
  return with_certificate(bures_qfi(family, 0.0, eps_schedule), params, cutoff);
}

}  // namespace qimetro
