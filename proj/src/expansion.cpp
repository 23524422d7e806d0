#include "symberg/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "symberg/config.hpp"
#include "symberg/errors.hpp"

namespace symberg {

namespace {

// J / (0 - y) for a jet vanishing at y = 0.
MatrixJet divide_by_minus_y(const MatrixJet& j, double scale) {
  const int iy = j.var_index("y");
  const MonomialTable& t = j.table();
  const double tol = config::divide_tol * std::max(scale, 1e-300);
  for (int i = 0; i < t.size(); ++i)
    if (t.exps[i][iy] == 0 && j.at(i).norm() >= tol && j.at(i).norm() > 0.0)
      throw NonDivisibleError("recursion: amplitude does not vanish on the diagonal (norm " +
                              std::to_string(j.at(i).norm()) + ")");
  MatrixJet out(j.vars(), j.order() - 1, j.dim());
  const MonomialTable& to = out.table();
  for (int i = 0; i < to.size(); ++i) {
    Exponent e = to.exps[i];
    e[iy] += 1;
    out.at(i) = -j.coeff(e);
  }
  return out;
}

// A jet in the pinned variables that does not depend on y.
MatrixJet y_free(const MatrixJet& j) { return embed(pin_zero(j, "y"), kPolarVars); }

void check_recursion_budget(const ChartData& chart, int k, int N, int& rk) {
  if (k < 1) throw InvalidInput("coeff_recursion: k must be >= 1");
  if (N < 0 || N > config::max_order) throw InvalidInput("coeff_recursion: N out of range");
  rk = sym_rank(chart.rank, k);
  if (rk > config::max_sym_rank) throw InvalidInput("coeff_recursion: Sym^k rank above budget");
  chart.phi.require_order(2 * N + 4, "coeff_recursion.phi");
  chart.g.require_order(2 * N + 4, "coeff_recursion.g");
}

}  // namespace

// ---------------------------------------------------------------- phase

PhasePack build_phase(const Polarization& psi, int order) {
  psi.psi.require_order(order, "build_phase");
  const MatrixJet p = psi.psi.truncated(order);
  const MatrixJet psi_y = embed(p, kPhaseVars);
  const MatrixJet psi_x1 = embed(p, kPhaseVars, {{"y", "x1"}});
  MatrixJet prod = jet_exp(-psi_y) * jet_exp(psi_x1);
  const int r = p.dim();
  prod.at(0) = CMatrix::Identity(r, r) + (prod.at(0) - CMatrix::Identity(r, r));
  PhasePack out;
  out.P = jet_log(prod);
  out.theta = segment_average(jet_partial(out.P, "x1"), "x");
  out.tau = build_tau(psi, order);
  return out;
}

double phase_identity_residual(const PhasePack& phase) {
  const int n = phase.theta.order();
  const int r = phase.theta.dim();
  const MatrixJet xmy = MatrixJet::variable(kTripleVars, n, "x", CMatrix::Identity(r, r)) -
                        MatrixJet::variable(kTripleVars, n, "y", CMatrix::Identity(r, r));
  const MatrixJet lhs = phase.theta * xmy;
  const MatrixJet rhs = embed(phase.P, kTripleVars, {{"x1", "x"}}).truncated(n);
  return (lhs - rhs).max_norm() / std::max(phase.P.max_norm(), 1e-300);
}

MatrixJet build_tau(const Polarization& psi, int order) {
  psi.psi.require_order(order, "build_tau");
  const MatrixJet p = psi.psi.truncated(order);
  const MatrixJet psi_x = embed(p, kTripleVars, {{"y", "x"}});
  const MatrixJet psi_y = embed(p, kTripleVars);
  const MatrixJet e1 = jet_exp(-psi_x) * jet_exp(psi_y);
  const MatrixJet e2 = jet_exp(-psi_y) * jet_exp(psi_x);
  const MatrixJet num = e1 * jet_partial(e2, "z");
  return divide_by_xy(num, "x", "y", std::max(num.max_norm(), 1.0));
}

MatrixJet tau_ad_series(const PhasePack& phase) {
  const MatrixJet dz = jet_partial(phase.theta, "z");
  const int n = dz.order();
  const int r = dz.dim();
  const MatrixJet th = phase.theta.truncated(n);
  const MatrixJet xmy = MatrixJet::variable(kTripleVars, n, "x", CMatrix::Identity(r, r)) -
                        MatrixJet::variable(kTripleVars, n, "y", CMatrix::Identity(r, r));
  MatrixJet term = dz;
  MatrixJet sum = dz;
  double fact = 1.0;
  for (int m = 1; m <= n; ++m) {
    // ad_{-theta}(X) = X theta - theta X
    term = (term * th - th * term) * xmy;
    fact *= (m + 1);
    sum += term * cplx(1.0 / fact, 0.0);
  }
  return sum;
}

// ---------------------------------------------------------------- recursion

CoefficientTable coeff_recursion(const ChartData& chart, int k, int N) {
  int rk = 0;
  check_recursion_budget(chart, k, N, rk);
  const SymBasis basis = weak_compositions(k, chart.rank);
  const MatrixJet psi = polarize(chart.phi).psi;
  const MatrixJet psi0 = y_free(psi);
  const MatrixJet e1 = jet_exp(-psi0) * jet_exp(psi);
  const MatrixJet e2 = jet_exp(-psi) * jet_exp(psi0);
  const MatrixJet num = e1 * jet_partial(e2, "z");
  const MatrixJet tau = divide_by_minus_y(num, std::max(num.max_norm(), 1.0));

  const MatrixJet gp = polarize_jet(chart.g);
  const MatrixJet g0inv = jet_inverse(y_free(gp));
  const MatrixJet tk = lift_sk(tau, basis);
  const MatrixJet tinv = jet_inverse(tk);
  const MatrixJet tau_diag = lift_sk(y_free(tau), basis);
  const MatrixJet id = MatrixJet::identity(kPolarVars, tau.order(), rk);
  const cplx kk(k, 0.0);

  CoefficientTable out;
  out.k = k;
  out.N = N;
  const MatrixJet b0 = tau_diag * g0inv * cplx(1.0 / k, 0.0);
  out.b.push_back(b0.constant_term());
  out.b_jets.push_back(pin_zero(b0, "y"));

  const MatrixJet a0 = tinv * tau_diag * g0inv * gp - id;
  MatrixJet amp = divide_by_minus_y(a0, std::max(a0.max_norm(), 1.0));
  for (int m = 1; m <= N; ++m) {
    const MatrixJet da = jet_partial(amp, "z");
    const MatrixJet bm = g0inv * y_free(da);
    out.b.push_back(bm.constant_term());
    out.b_jets.push_back(pin_zero(bm, "y"));
    if (m == N) break;
    const MatrixJet am = gp * tinv * bm * kk;
    const MatrixJet rest = tinv * da * kk;
    amp = divide_by_minus_y(am - rest, std::max(am.max_norm(), rest.max_norm()));
  }
  return out;
}

CoefficientTable coeff_recursion_full(const ChartData& chart, int k, int N) {
  int rk = 0;
  check_recursion_budget(chart, k, N, rk);
  const SymBasis basis = weak_compositions(k, chart.rank);
  const MatrixJet psi = polarize(chart.phi).psi;
  const MatrixJet tau = build_tau({psi}, psi.order());

  const MatrixJet gp = polarize_jet(chart.g);
  const MatrixJet gx = embed(gp, kTripleVars, {{"y", "x"}});
  const MatrixJet gy = embed(gp, kTripleVars);
  const MatrixJet gxinv = jet_inverse(gx);
  const MatrixJet tk = lift_sk(tau, basis);
  const MatrixJet tinv = jet_inverse(tk);
  auto on_diagonal = [](const MatrixJet& j) {
    return embed(restrict_diagonal(j, "y", "x"), kTripleVars);
  };
  const MatrixJet tau_diag = on_diagonal(tk);
  const MatrixJet id = MatrixJet::identity(kTripleVars, tau.order(), rk);
  const cplx kk(k, 0.0);
  auto center_jet = [](const MatrixJet& j) { return pin_zero(pin_zero(j, "y"), "x"); };

  CoefficientTable out;
  out.k = k;
  out.N = N;
  const MatrixJet b0 = tau_diag * gxinv * cplx(1.0 / k, 0.0);
  out.b.push_back(b0.constant_term());
  out.b_jets.push_back(center_jet(b0));

  const MatrixJet a0 = tinv * tau_diag * gxinv * gy - id;
  MatrixJet amp = divide_by_xy(a0, "x", "y", std::max(a0.max_norm(), 1.0));
  for (int m = 1; m <= N; ++m) {
    const MatrixJet da = jet_partial(amp, "z");
    const MatrixJet bm = gxinv * on_diagonal(da);
    out.b.push_back(bm.constant_term());
    out.b_jets.push_back(center_jet(bm));
    if (m == N) break;
    const MatrixJet am = gy * tinv * bm * kk;
    const MatrixJet rest = tinv * da * kk;
    amp = divide_by_xy(am - rest, "x", "y", std::max(am.max_norm(), rest.max_norm()));
  }
  return out;
}

// ---------------------------------------------------------------- closed forms

ClosedForm closed_form_b0_b1(const ChartData& chart, int k, const DebugOptions& debug) {
  chart.phi.require_order(5, "closed_form_b0_b1");
  const CurvaturePack p = curvature_pack(chart, debug);
  const SymBasis basis = weak_compositions(k, chart.rank);
  // The b1 displays are written for Lambda F = -g^{-1} F_tilde, the
  // negative of the stored lambdaF.
  const MatrixJet l = -lift_sk(p.lambdaF, basis);
  const MatrixJet q = lift_sk(p.lambda_laplacian_F, basis);
  const MatrixJet s = lift_sk(p.dbar_star_F, basis);
  const MatrixJet linv = jet_inverse(l);
  const MatrixJet& ginv = p.g_inv;
  const int rk = basis.size();
  const CMatrix scal = p.scal.constant_term()(0, 0) * CMatrix::Identity(rk, rk);
  const cplx g0inv = ginv.constant_term()(0, 0);

  if (hermitian_eig(inv_sqrtm_hpd(p.h0) * p.lambdaF.constant_term() * sqrtm_hpd(p.h0))
          .eigenvalues.minCoeff() <= 0.0)
    throw DomainError("closed_form_b0_b1: lambdaF is not positive at the center");

  ClosedForm out;
  const CMatrix l0inv = linv.constant_term();
  const CMatrix q0 = q.constant_term();
  const CMatrix s0 = s.constant_term();
  const CMatrix dl0 = jet_partial(l, "z").constant_term();
  out.b0 = -l.constant_term() / static_cast<double>(k);
  out.b1 = -0.5 * l0inv * q0 + 0.5 * scal +
           0.5 * g0inv * jet_partial(linv, "z").constant_term() * s0;
  out.b1_compact = 0.5 * g0inv * jet_partial(linv * s, "z").constant_term() + 0.5 * scal;
  out.b1_wedge_as_printed =
      -0.5 * l0inv * q0 + 0.5 * scal - 0.5 * g0inv * l0inv * s0 * l0inv * dl0;
  out.b1_main_ordering = -0.5 * q0 * l0inv + 0.5 * scal - 0.5 * g0inv * s0 * l0inv * dl0 * l0inv;
  out.forms_gap = (out.b1 - out.b1_compact).norm();
  out.wedge_as_printed_gap = (out.b1 - out.b1_wedge_as_printed).norm();
  out.main_ordering_gap = (out.b1 - out.b1_main_ordering).norm();
  return out;
}

LineCoefficients line_bundle_b0_b1(const ChartData& chart, int k) {
  (void)k;
  if (chart.rank != 1) throw InvalidInput("line_bundle_b0_b1: rank must be 1");
  chart.phi.require_order(5, "line_bundle_b0_b1");
  const CurvaturePack p = curvature_pack(chart);
  const double ft = p.F_tilde.constant_term()(0, 0).real();
  const double g0 = polarize_jet(chart.g).constant_term()(0, 0).real();
  const double scal_omega = p.scal.constant_term()(0, 0).real();
  const double scal_prime = scalar_curvature_of_density(p.F_tilde).constant_term()(0, 0).real();
  LineCoefficients out;
  out.b0 = ft / g0;
  out.b1 = scal_omega - 0.5 * out.b0 * scal_prime;
  out.cross_identity = out.b0 * (g0 / ft);
  return out;
}

std::vector<CoefficientRow> coefficient_report(const ChartData& chart, int k, int N) {
  const CoefficientTable t = coeff_recursion(chart, k, N);
  const ClosedForm cf = closed_form_b0_b1(chart, k);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<CoefficientRow> rows;
  for (int m = 0; m <= N; ++m) {
    CoefficientRow row;
    row.k = k;
    row.m = m;
    row.recursion = t.b[m];
    row.recursion_norm = op_norm(t.b[m]);
    if (m <= 1) {
      row.closed = m == 0 ? cf.b0 : cf.b1;
      row.closed_norm = op_norm(row.closed);
      row.agreement = (row.recursion - row.closed).norm() / std::max(1.0, row.closed.norm());
    } else {
      row.closed_norm = nan;
      row.agreement = nan;
    }
    const Eigen::Index n = t.b[m].rows();
    const cplx mean = t.b[m].trace() / static_cast<double>(n);
    row.scalar_defect = (t.b[m] - mean * CMatrix::Identity(n, n)).norm() / std::max(1.0, t.b[m].norm());
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------- kernel

double trust_radius(const ChartData& chart) {
  const MatrixJet& phi = chart.phi;
  const MonomialTable& t = phi.table();
  const int n = phi.order();
  double root = 0.0;
  for (int d = std::max(1, n / 2); d <= n; ++d) {
    double m = 0.0;
    for (int i = 0; i < t.size(); ++i)
      if (t.degree[i] == d) m = std::max(m, phi.at(i).norm());
    if (m > 0.0) root = std::max(root, std::pow(m, 1.0 / d));
  }
  const double rho = root > 0.0 ? 1.0 / root : INFINITY;
  return 0.5 * rho;
}

CMatrix b_sum(const CoefficientTable& table, int upto) {
  if (upto > table.N) throw InvalidInput("b_sum: order above the table");
  CMatrix s = CMatrix::Zero(table.b[0].rows(), table.b[0].cols());
  for (int m = 0; m <= upto; ++m) s += table.b[m] * std::pow(static_cast<double>(table.k), 1 - m);
  return s;
}

CMatrix b_sum_at(const CoefficientTable& table, int upto, cplx zb) {
  if (upto > table.N) throw InvalidInput("b_sum_at: order above the table");
  CMatrix s = CMatrix::Zero(table.b[0].rows(), table.b[0].cols());
  for (int m = 0; m <= upto; ++m)
    s += table.b_jets[m].evaluate({zb}) * std::pow(static_cast<double>(table.k), 1 - m);
  return s;
}

CMatrix local_kernel_eval(const ChartData& chart, const CoefficientTable& table, cplx w) {
  if (std::abs(w) > trust_radius(chart))
    throw DomainError("local_kernel_eval: point outside the trust radius");
  const SymBasis basis = weak_compositions(table.k, chart.rank);
  const MatrixJet psi0 = pin_zero(polarize(chart.phi).psi, "y");
  const CMatrix epsi = expm(s_k_lift(psi0.evaluate({std::conj(w)}), basis));
  return epsi * b_sum_at(table, table.N, std::conj(w)) / (2.0 * std::numbers::pi);
}

}  // namespace symberg
