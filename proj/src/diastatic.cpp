#include "symberg/diastatic.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "symberg/errors.hpp"
#include "symberg/sympow.hpp"

namespace symberg {

Polarization polarize(const MatrixJet& phi_jet) { return {polarize_jet(phi_jet)}; }

DiastasisJet diastasis_jet(const MatrixJet& phi_jet, int order) {
  phi_jet.require_order(order, "diastasis_jet");
  const MatrixJet phi = phi_jet.truncated(order);
  const MatrixJet psi = polarize(phi).psi;
  const int r = phi.dim();
  const CMatrix phi0 = hermitian_part(phi.constant_term());
  const CMatrix half = expm(-0.5 * phi0, Structure::hermitian);

  // psi(y, xb) depends on u only; psi(x, yb) on v only.
  const MatrixJet psi_u = embed(pin_zero(psi, "z"), kDiastasisVars, {{"y", "u"}});
  const MatrixJet psi_v = embed(pin_zero(psi, "y"), kDiastasisVars, {{"z", "v"}});
  const MatrixJet phi_uv = embed(phi, kDiastasisVars, {{"y", "u"}, {"yb", "v"}});

  MatrixJet prod = jet_mul(half, jet_exp(psi_u));
  prod = prod * jet_exp(-phi_uv);
  prod = prod * jet_exp(psi_v);
  prod = jet_mul(prod, half);
  if ((prod.constant_term() - CMatrix::Identity(r, r)).norm() > 1e-10 * std::max(1.0, prod.max_norm()))
    throw InternalError("diastasis_jet: constant term of the product is not the identity");
  prod.at(0) = CMatrix::Identity(r, r);
  return {jet_log(prod), cplx(0.0, 0.0)};
}

CMatrix diastasis_point(const BundleModel& model, cplx x, cplx y) {
  const CMatrix hx = model.metric(x);
  const CMatrix hy = model.metric(y);
  // e^{psi(y, xb)} is the inverse of the polarized metric.
  const CMatrix e = model.metric_polarized(y, std::conj(x)).inverse();
  const CMatrix m = sqrtm_hpd(hx) * e * sqrtm_hpd(hy);
  return logm_principal(hermitian_part(m * m.adjoint()), Structure::hermitian);
}

double sym_power_decay_check(const BundleModel& model, cplx x, cplx y, int k) {
  const CMatrix d = diastasis_point(model, x, y);
  return op_norm(expm(s_k_lift(d, k), Structure::hermitian));
}

std::vector<cplx> disk_sample_points(int count, double radius) {
  if (count < 1 || !(radius > 0.0)) throw InvalidInput("disk_sample_points: need count >= 1 and radius > 0");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<cplx> out;
  for (int i = 0; i < count; ++i)
    out.push_back(std::polar(radius * std::sqrt((i + 0.5) / count), golden * i));
  return out;
}

EigenvalueEstimate eigenvalue_estimate(const BundleModel& model, int count, double radius, int kmax) {
  const std::vector<cplx> pts = disk_sample_points(count, radius);
  EigenvalueEstimate out;
  out.delta = std::numeric_limits<double>::infinity();
  out.decay_excess = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      const CMatrix d = diastasis_point(model, pts[i], pts[j]);
      const double lmax = hermitian_eig(d).eigenvalues.maxCoeff();
      out.delta = std::min(out.delta, -lmax / std::norm(pts[i] - pts[j]));
      for (int k = 1; k <= kmax; ++k) {
        const double lhs = std::log(op_norm(expm(s_k_lift(d, k), Structure::hermitian)));
        out.decay_excess = std::max(out.decay_excess, lhs - k * lmax);
      }
      ++out.pairs;
    }
  }
  return out;
}

MatrixJet k_frame_metric(const MatrixJet& phi_jet, int order) {
  return jet_exp(diastasis_jet(phi_jet, order).D);
}

double curvature_link_residual(const ChartData& chart, const DebugOptions& debug) {
  const DiastasisJet d = diastasis_jet(chart.phi, std::min(chart.phi.order(), 4));
  const CurvaturePack p = curvature_pack(chart, debug);
  const cplx g0 = polarize_jet(chart.g).constant_term()(0, 0);
  const CMatrix ft = g0 * p.lambdaF.constant_term();
  const CMatrix pred = kCurvatureLinkSign * inv_sqrtm_hpd(p.h0) * ft * sqrtm_hpd(p.h0);
  const CMatrix d11 = d.D.coeff({1, 1, 0});
  return (d11 - pred).norm() / std::max(d11.norm(), 1e-300);
}

double pure_coefficient_defect(const DiastasisJet& d) {
  const double scale = std::max(d.D.max_norm(), 1e-300);
  double worst = 0.0;
  const MonomialTable& t = d.D.table();
  for (int i = 0; i < t.size(); ++i)
    if (t.exps[i][0] == 0 || t.exps[i][1] == 0) worst = std::max(worst, d.D.at(i).norm() / scale);
  return worst;
}

}  // namespace symberg
