#include <doctest.h>

#include <cmath>

#include "symberg/errors.hpp"
#include "symberg/expansion.hpp"
#include "test_util.hpp"

using namespace symberg;
using namespace testutil;

namespace {

double op(const CMatrix& m) { return op_norm(m); }

// Rank-1 chart whose potential is a * phi_00 + b * phi_11 of a diagonal chart.
ChartData slot_chart(const ChartData& c, int a, int b) {
  ChartData out;
  out.rank = 1;
  out.g = c.g;
  out.center = c.center;
  out.phi = MatrixJet(c.phi.vars(), c.phi.order(), 1);
  for (int i = 0; i < c.phi.size(); ++i)
    out.phi.at(i)(0, 0) = double(a) * c.phi.at(i)(0, 0) + double(b) * c.phi.at(i)(1, 1);
  return out;
}

}  // namespace

TEST_CASE("phase of the flat model") {
  const ChartData bf = bargmann_fock_chart(1, 6);
  const PhasePack ph = build_phase(polarize(bf.phi), 6);
  // P = z (x1 - y), theta = z.
  for (int i = 0; i < ph.P.size(); ++i) {
    const Exponent& e = ph.P.table().exps[i];
    cplx want = 0.0;
    if (e == Exponent{1, 0, 1}) want = 1.0;
    if (e == Exponent{0, 1, 1}) want = -1.0;
    CHECK(std::abs(ph.P.at(i)(0, 0) - want) < 1e-14);
  }
  for (int i = 0; i < ph.theta.size(); ++i) {
    const Exponent& e = ph.theta.table().exps[i];
    const cplx want = e == Exponent{0, 0, 1} ? 1.0 : 0.0;
    CHECK(std::abs(ph.theta.at(i)(0, 0) - want) < 1e-14);
  }
  for (int i = 0; i < ph.tau.size(); ++i) {
    const cplx want = i == 0 ? 1.0 : 0.0;
    CHECK(std::abs(ph.tau.at(i)(0, 0) - want) < 1e-14);
  }
}

TEST_CASE("phase identity and the two amplitude constructions") {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 3; ++t) {
    const ChartData c = random_positive_chart(rng, 2, 7);
    const Polarization p = polarize(c.phi);
    const PhasePack ph = build_phase(p, 7);
    CHECK(phase_identity_residual(ph) < 1e-10);
    const MatrixJet series = tau_ad_series(ph);
    const MatrixJet direct = ph.tau.truncated(series.order());
    CHECK((series - direct).max_norm() < 1e-9);
    const CurvaturePack cp = curvature_pack(c);
    CHECK((ph.tau.constant_term() - cp.F_tilde.constant_term()).norm() < 1e-9);
  }
}

TEST_CASE("scalar amplitude on the diagonal is the mixed second derivative") {
  std::mt19937_64 rng(62);
  const ChartData c = random_line_chart(rng, 7);
  const Polarization p = polarize(c.phi);
  const PhasePack ph = build_phase(p, 7);
  const MatrixJet on_diag = restrict_diagonal(ph.tau, "y", "x");
  const MatrixJet mixed = jet_partial(jet_partial(p.psi, "y"), "z");
  // restrict_diagonal keeps the variables (x, z); mixed is in (y, z).
  for (int i = 0; i < on_diag.size(); ++i) {
    const Exponent& e = on_diag.table().exps[i];
    CHECK(std::abs(on_diag.at(i)(0, 0) - mixed.coeff({e[0], e[1], 0})(0, 0)) < 1e-9);
  }
  const MatrixJet th_diag = restrict_diagonal(ph.theta, "y", "x");
  const MatrixJet d1 = jet_partial(p.psi, "y");
  for (int i = 0; i < th_diag.size(); ++i) {
    const Exponent& e = th_diag.table().exps[i];
    CHECK(std::abs(th_diag.at(i)(0, 0) - d1.coeff({e[0], e[1], 0})(0, 0)) < 1e-9);
  }
}

TEST_CASE("recursion on the flat and Fubini-Study models") {
  for (int k : {1, 2, 5}) {
    const CoefficientTable t = coeff_recursion(bargmann_fock_chart(1, 10), k, 3);
    CHECK(std::abs(t.b[0](0, 0) - 1.0) < 1e-14);
    for (int m = 1; m <= 3; ++m) CHECK(std::abs(t.b[m](0, 0)) < 1e-13);
  }
  const ChartData fs = chart_from_model(BundleModel::fs_line(1), cplx(0.3, 0.1), 10);
  for (int k : {2, 3}) {
    const CoefficientTable t = coeff_recursion(fs, k, 3);
    const LineCoefficients lc = line_bundle_b0_b1(fs, k);
    CHECK(std::abs(t.b[0](0, 0) - 1.0) < 1e-10);
    CHECK(std::abs(t.b[1](0, 0) - 1.0) < 1e-10);
    CHECK(std::abs(t.b[0](0, 0) - lc.b0) < 1e-8);
    CHECK(std::abs(t.b[1](0, 0) - lc.b1) < 1e-8);
    for (int m = 2; m <= 3; ++m) CHECK(std::abs(t.b[m](0, 0)) < 1e-8);
  }
}

TEST_CASE("recursion agrees with the closed forms") {
  std::mt19937_64 rng(63);
  for (int r : {1, 2}) {
    for (int k : {2, 3, 4}) {
      const ChartData c = random_positive_chart(rng, r, 8);
      const CoefficientTable t = coeff_recursion(c, k, 2);
      const ClosedForm cf = closed_form_b0_b1(c, k);
      CHECK(rel_err(t.b[0], cf.b0) < 1e-8);
      CHECK((t.b[1] - cf.b1).norm() < 1e-8 * std::max(1.0, cf.b1.norm()));
      CHECK(cf.forms_gap < 1e-9);
      if (r == 1) {
        CHECK(cf.wedge_as_printed_gap < 1e-9);
        CHECK(cf.main_ordering_gap < 1e-9);
      }
    }
  }
}

TEST_CASE("three-variable recursion matches the pinned recursion") {
  std::mt19937_64 rng(64);
  const ChartData c = random_positive_chart(rng, 2, 8);
  const CoefficientTable a = coeff_recursion(c, 2, 2);
  const CoefficientTable b = coeff_recursion_full(c, 2, 2);
  for (int m = 0; m <= 2; ++m) CHECK((a.b[m] - b.b[m]).norm() < 1e-9 * std::max(1.0, a.b[m].norm()));
}

TEST_CASE("closed forms on the flat and Hermitian-Einstein charts") {
  const ClosedForm bf = closed_form_b0_b1(bargmann_fock_chart(2, 6), 3);
  CHECK((bf.b0 - CMatrix::Identity(4, 4)).norm() < 1e-13);
  CHECK(bf.b1.norm() < 1e-13);
  std::mt19937_64 rng(65);
  const double c = 1.7;
  const ChartData he = he_chart(rng, 2, 10, c);
  const CurvaturePack cp = curvature_pack(he);
  const double scal = cp.scal.constant_term()(0, 0).real();
  const ClosedForm cf = closed_form_b0_b1(he, 3);
  CHECK((cf.b0 - c * CMatrix::Identity(4, 4)).norm() < 1e-10);
  CHECK((cf.b1 - 0.5 * scal * CMatrix::Identity(4, 4)).norm() < 1e-10);
  const CoefficientTable t = coeff_recursion(he, 3, 3);
  for (int m = 0; m <= 3; ++m) {
    const cplx mean = t.b[m].trace() / 4.0;
    CHECK((t.b[m] - mean * CMatrix::Identity(4, 4)).norm() < 1e-8);
  }
}

TEST_CASE("direct sums are block diagonal with line-bundle entries") {
  KahlerSpec kahler;
  kahler.perturbation = 0.2;
  const BundleModel m = BundleModel::direct_sum({{1, 0.0}, {2, 0.0}}, kahler);
  const ChartData c = chart_from_model(m, cplx(0.2, -0.1), 8);
  const int k = 3;
  const ClosedForm cf = closed_form_b0_b1(c, k);
  const SymBasis basis = weak_compositions(k, 2);
  for (int i = 0; i < basis.size(); ++i) {
    const MultiIndex& n = basis.indices[i];
    const LineCoefficients lc = line_bundle_b0_b1(slot_chart(c, n[0], n[1]), 1);
    CHECK(std::abs(cf.b0(i, i) - lc.b0 / k) < 1e-10);
    CHECK(std::abs(cf.b1(i, i) - lc.b1) < 1e-10);
    for (int j = 0; j < basis.size(); ++j) {
      if (j == i) continue;
      CHECK(std::abs(cf.b0(i, j)) < 1e-12);
      CHECK(std::abs(cf.b1(i, j)) < 1e-12);
    }
  }
}

TEST_CASE("line-bundle formulas") {
  std::mt19937_64 rng(66);
  const ChartData fs = chart_from_model(BundleModel::fs_line(1), 0.0, 6);
  const LineCoefficients same = line_bundle_b0_b1(fs, 2);
  CHECK(std::abs(same.b0 - 1.0) < 1e-13);
  CHECK(std::abs(same.cross_identity - 1.0) < 1e-13);
  // Flat omega with the Fubini-Study line metric: Scal_omega = 0,
  // Lambda omega' = 1 and Scal_omega' = 2 at the origin.
  ChartData flat_base = fs;
  flat_base.g = MatrixJet::constant(kChartVars, 6, CMatrix::Identity(1, 1));
  const LineCoefficients lc = line_bundle_b0_b1(flat_base, 2);
  CHECK(std::abs(lc.b0 - 1.0) < 1e-13);
  CHECK(std::abs(lc.b1 + 1.0) < 1e-12);
  for (int t = 0; t < 3; ++t) {
    const ChartData c = random_line_chart(rng, 8);
    const LineCoefficients l = line_bundle_b0_b1(c, 3);
    const ClosedForm cf = closed_form_b0_b1(c, 1);
    CHECK(std::abs(l.b0 - cf.b0(0, 0)) < 1e-10);
    CHECK(std::abs(l.b1 - cf.b1(0, 0)) < 1e-10);
    CHECK(std::abs(l.cross_identity - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(line_bundle_b0_b1(random_positive_chart(rng, 2, 6), 2), InvalidInput);
}

TEST_CASE("coefficients stay bounded in k") {
  std::mt19937_64 rng(67);
  const ChartData c = random_positive_chart(rng, 2, 8);
  double lo = INFINITY, hi = 0.0;
  for (int k = 2; k <= 8; ++k) {
    const CoefficientTable t = coeff_recursion(c, k, 2);
    double m = 0.0;
    for (const CMatrix& b : t.b) m = std::max(m, op(b));
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  CHECK(hi < 10.0 * lo);
}

TEST_CASE("diagonal values are covariant under constant frame changes") {
  std::mt19937_64 rng(68);
  const ChartData c = random_positive_chart(rng, 2, 8);
  std::mt19937 r2(9);
  const CMatrix tm = CMatrix::Identity(2, 2) + random_matrix(r2, 2, 0.4);
  const MatrixJet tj = MatrixJet::constant(kChartVars, 8, tm);
  ChartData cp = c;
  cp.phi = -jet_log(tj * jet_exp(-c.phi) * hermitian_swap(tj));
  const int k = 3;
  const SymBasis basis = weak_compositions(k, 2);
  const CMatrix tk = sym_pow_matrix(tm, basis);
  const CoefficientTable a = coeff_recursion(c, k, 2), b = coeff_recursion(cp, k, 2);
  const CMatrix h = sym_pow_metric(expm(-c.phi.constant_term(), Structure::hermitian), k);
  const CMatrix hp = sym_pow_metric(expm(-cp.phi.constant_term(), Structure::hermitian), k);
  for (int m = 0; m <= 2; ++m) {
    const double scale = std::max(1.0, a.b[m].norm());
    CHECK((b.b[m] - tk * a.b[m] * tk.inverse()).norm() < 1e-9 * scale);
    // In an orthonormal frame the two agree up to a unitary, so the
    // singular values coincide.
    const CMatrix on_a = inv_sqrtm_hpd(h) * a.b[m] * sqrtm_hpd(h);
    const CMatrix on_b = inv_sqrtm_hpd(hp) * b.b[m] * sqrtm_hpd(hp);
    Eigen::JacobiSVD<CMatrix> sa(on_a), sb(on_b);
    CHECK((sa.singularValues() - sb.singularValues()).norm() < 1e-9 * scale);
  }
}

TEST_CASE("local kernel on the diagonal") {
  const ChartData bf = bargmann_fock_chart(1, 10);
  const CoefficientTable t = coeff_recursion(bf, 4, 2);
  CHECK(std::abs(local_kernel_eval(bf, t, 0.0)(0, 0) - 4.0 / (2.0 * std::numbers::pi)) < 1e-13);
  // Split bundle: every coefficient is diagonal, so the truncated kernel is
  // Hermitian at any k.
  const ChartData ds = chart_from_model(BundleModel::direct_sum({{1, 0.0}, {2, 0.0}}), 0.1, 8);
  const CMatrix kd = local_kernel_eval(ds, coeff_recursion(ds, 3, 2), 0.0);
  CHECK(hermitian_defect(kd) < 1e-12);
  CHECK(hermitian_eig(hermitian_part(kd)).eigenvalues.minCoeff() > 0.0);
  // Generic rank 2: only the full kernel is Hermitian, so the truncated one
  // approaches Hermitian as k grows.
  std::mt19937_64 rng(69);
  const ChartData c = random_positive_chart(rng, 2, 8);
  const CoefficientTable tc = coeff_recursion(c, 2, 2);
  const double d2 = hermitian_defect(local_kernel_eval(c, tc, 0.0));
  const double d8 = hermitian_defect(local_kernel_eval(c, coeff_recursion(c, 8, 2), 0.0));
  CHECK(d8 < 0.05 * d2);
  CHECK_THROWS_AS(local_kernel_eval(c, tc, 10.0 * trust_radius(c) + 1.0), DomainError);
}

TEST_CASE("recursion input validation") {
  const ChartData bf = bargmann_fock_chart(1, 6);
  CHECK_THROWS_AS(coeff_recursion(bf, 0, 1), InvalidInput);
  CHECK_THROWS_AS(coeff_recursion(bf, 2, 2), TruncationError);
  CHECK_THROWS_AS(coeff_recursion(bargmann_fock_chart(4, 6), 40, 1), InvalidInput);
  DebugOptions flip;
  flip.flip_lambdaF_sign = true;
  std::mt19937_64 rng(70);
  const ChartData c = random_positive_chart(rng, 2, 6);
  const CoefficientTable t = coeff_recursion(c, 2, 1);
  CHECK_THROWS_AS(closed_form_b0_b1(c, 2, flip), DomainError);
  (void)t;
}

TEST_CASE("coefficient report") {
  std::mt19937_64 rng(11);
  const ChartData c = random_positive_chart(rng, 2, 8);
  const std::vector<CoefficientRow> rows = coefficient_report(c, 3, 2);
  REQUIRE(rows.size() == 3);
  const CoefficientTable t = coeff_recursion(c, 3, 2);
  for (int m = 0; m < 3; ++m) {
    CHECK(rows[m].m == m);
    CHECK(rows[m].k == 3);
    CHECK((rows[m].recursion - t.b[m]).norm() == 0.0);
    CHECK(rows[m].recursion_norm == doctest::Approx(op(t.b[m])));
    CHECK(rows[m].scalar_defect > 1e-6);
  }
  CHECK(rows[0].agreement < 1e-10);
  CHECK(rows[1].agreement < 1e-10);
  CHECK(std::isnan(rows[2].agreement));
  CHECK(rows[2].closed.size() == 0);

  const std::vector<CoefficientRow> he = coefficient_report(he_chart(rng, 2, 10, 1.3), 2, 3);
  for (const CoefficientRow& r : he) CHECK(r.scalar_defect < 1e-8);

  const BundleModel flat = BundleModel::fs_line(1, 0.0, KahlerSpec{KahlerKind::flat_chart, 1.0, 0.0});
  for (int k : {2, 5, 9}) {
    const std::vector<CoefficientRow> f = coefficient_report(chart_from_model(flat, cplx(0.0, 0.0), 6), k, 1);
    CHECK(std::abs(f[0].recursion(0, 0) - 1.0) < 1e-12);
  }
}
