#include <doctest.h>

#include "qimetro/strategies.hpp"

using namespace qimetro;

namespace {

double max_abs(const MatrixXc& m) { return m.cwiseAbs().maxCoeff(); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("coherent-probe reference state") {
  const Cutoff c(10);
  const ChannelParams dark{0, 1e-4, 2};
  const auto th = thermal_state(1e-4, c);
  CHECK(max_abs(case3_lambda(dark, c).matrix() - tensor(th, th).matrix()) < 1e-15);

  const auto clean_a = case3_lambda({1, 0, 2}, Cutoff(14));
  const auto clean_b = case3_lambda({1, 0.5, 2}, Cutoff(14));
  CHECK(max_abs(clean_a.matrix() - clean_b.matrix()) == 0);

  const auto lam = case3_lambda({0.3, 1e-3, 2}, c);
  CHECK(std::abs(lam.matrix().trace() - 1.0) < 1e-12);
  CHECK(max_abs(MatrixXc(lam.matrix().diagonal().asDiagonal()) - lam.matrix()) == 0);
  CHECK(case3_occupation({0.3, 1e-3, 2}) == doctest::Approx(0.7e-3).epsilon(1e-14));
}

TEST_CASE("perturbative square-root expansion") {
  const Cutoff c(6);
  const auto lam = case3_lambda({0.2, 1e-3, 2}, c);
  const Eigen::VectorXd l = lam.matrix().diagonal().real();
  const MatrixXc g = beamsplitter_generator(c).matrix() * kPhaseGeneratorScale;
  const auto terms = appendix3_terms(l, g, kSupportTol);
  CHECK(terms.a.diagonal().cwiseAbs().maxCoeff() == 0);
  CHECK(std::abs(terms.trace_a) < 1e-15);
  CHECK(-8 * terms.trace_b == doctest::Approx(case3_qfi_appendix3_at({0.2, 1e-3, 2}, c)).epsilon(1e-12));
  CHECK_THROWS_AS(appendix3_terms(l, MatrixXc::Zero(3, 3), kSupportTol), PreconditionError);
}

TEST_CASE("square-root expansion QFI") {
  CHECK(case3_qfi_appendix3({0, 1e-4, 2}).value == 0);

  const auto r = case3_qfi_appendix3({0.1, 1e-4, 2});
  CHECK(r.converged);
  CHECK(r.relative_change < kCutoffRelTol);
  CHECK(r.cutoff_used->n_max() <= kMaxCutoff);
  CHECK(r.convention == Convention::standard);
  CHECK(r.strategy == Strategy::coherent);
  CHECK(r.value == doctest::Approx(0.0998024).epsilon(1e-6));
  CHECK(case3_qfi_appendix3({0.01, 1e-4, 2}).value == doctest::Approx(0.00980396).epsilon(1e-6));
  CHECK(case3_qfi_appendix3({0.001, 1e-4, 2}).value == doctest::Approx(0.000833336).epsilon(1e-5));

  // Lossless: a Poisson mixture of |n,0>, each block contributing n.
  CHECK(case3_qfi_appendix3({1, 0, 2}).value == doctest::Approx(1).epsilon(1e-10));

  for (double t : {1e-3, 1e-2, 1e-1}) {
    const ChannelParams p{t, 1e-4, 2};
    const double base = case3_qfi_appendix3_at(p, Cutoff(24), 1e-12);
    for (double tol : {1e-14, 1e-10}) CHECK(rel(case3_qfi_appendix3_at(p, Cutoff(24), tol), base) < 1e-6);
  }
  CHECK_THROWS_AS(case3_qfi_appendix3_at({0.1, 1e-4, 2}, Cutoff(24), 1e-5), PreconditionError);
  CHECK_THROWS_AS(case3_qfi_appendix3_at({0.1, 1e-4, 2}, Cutoff(24), 0.0), PreconditionError);
}

TEST_CASE("fidelity-limit QFI") {
  const Cutoff c(12);
  CHECK(std::abs(case3_qfi_fidelity({0, 1e-4, 2}, c).value) < 1e-10);
  const ChannelParams p{0.01, 1e-4, 2};
  const auto fid = case3_qfi_fidelity(p, c);
  CHECK(fid.converged);
  CHECK(rel(fid.value, case3_qfi_appendix3(p).value) < 1e-4);
  CHECK(rel(case3_qfi_fidelity(p, c, kDefaultEpsSchedule, 1.3).value, fid.value) < 1e-8);
  CHECK(rel(case3_qfi_fidelity({0.1, 1e-4, 2}, c).value, case3_qfi_appendix3({0.1, 1e-4, 2}).value) < 1e-4);
}

TEST_CASE("mode-integral state") {
  const Cutoff c(6);
  const ChannelParams p{0.2, 1e-3, 2};
  const int nodes = case3_min_nodes(c);
  CHECK(nodes == 2 * (2 * 12) + 1);
  CHECK(max_abs(case3_rho_theta(0, p, c, nodes).matrix() - case3_lambda(p, c).matrix()) < 1e-10);
  for (double th : {0.3, -2.0}) CHECK(std::abs(case3_rho_theta(th, p, c, nodes).matrix().trace() - 1.0) < 1e-12);
  CHECK_THROWS_AS(case3_rho_theta(0, p, c, nodes - 1), PreconditionError);

  // Unitary on the states whose total photon number stays inside the box.
  const MatrixXc u = plus_minus_to_up_down(c);
  std::vector<Eigen::Index> inside;
  for (int np = 0; np <= 6; ++np)
    for (int nm = 0; np + nm <= 6; ++nm) inside.push_back(np * 7 + nm);
  MatrixXc cols(u.rows(), Eigen::Index(inside.size()));
  for (std::size_t k = 0; k < inside.size(); ++k) cols.col(Eigen::Index(k)) = u.col(inside[k]);
  CHECK(max_abs(cols.adjoint() * cols - MatrixXc::Identity(cols.cols(), cols.cols())) < 1e-12);
  // |1>_+ |0>_- = (|1,0> + |0,1>)/sqrt2 in up/down labels.
  CHECK(std::abs(u(7, 7) - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(u(1, 7) - 1 / std::sqrt(2.0)) < 1e-15);

  const auto quad = case3_qfi_quadrature(p, c, nodes);
  CHECK(rel(quad.value, case3_qfi_appendix3(p).value) < 1e-4);
}
