#include <doctest.h>

#include <cmath>

#include "symberg/errors.hpp"
#include "symberg/geometry.hpp"
#include "test_util.hpp"

using namespace symberg;
using namespace testutil;

namespace {

// -g^{-1} d d-bar log g by central differences (d d-bar = Laplacian / 4).
double fd_scal(double (*g)(cplx), cplx z) {
  const double h = 1e-3;
  auto lg = [&](cplx w) { return std::log(g(w)); };
  const double lap = (lg(z + h) + lg(z - h) + lg(z + cplx(0, h)) + lg(z - cplx(0, h)) - 4 * lg(z)) /
                     (h * h);
  return -lap / 4.0 / g(z);
}

double g_fs(cplx z) { return std::pow(1.0 + std::norm(z), -2.0); }
double g_exp(cplx z) { return std::exp(std::norm(z)); }

}  // namespace

TEST_CASE("chart_from_model potentials") {
  const BundleModel fs = BundleModel::fs_line(1, 0.0, {KahlerKind::flat_chart});
  const ChartData c = chart_from_model(fs, 0.0, 6);
  CHECK(std::abs(c.phi.coeff({1, 1, 0})(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(c.phi.coeff({2, 2, 0})(0, 0) + 0.5) < 1e-14);
  CHECK(std::abs(c.phi.coeff({3, 3, 0})(0, 0) - 1.0 / 3.0) < 1e-14);
  CHECK(c.phi.coeff({2, 1, 0}).norm() < 1e-14);
  CHECK(std::abs(c.g.constant_term()(0, 0) - 1.0) < 1e-15);

  const BundleModel tw0 = BundleModel::twisted_trivial(1, 2, 0.0);
  const ChartData ct = chart_from_model(tw0, 0.0, 6);
  const ChartData cl = chart_from_model(BundleModel::fs_line(1), 0.0, 6);
  for (int i = 0; i < ct.phi.size(); ++i)
    CHECK((ct.phi.at(i) - cl.phi.at(i)(0, 0) * CMatrix::Identity(2, 2)).norm() < 1e-13);

  const BundleModel tw = BundleModel::twisted_trivial(1, 2, 0.3);
  const ChartData c2 = chart_from_model(tw, cplx(0.4, -0.2), 6);
  CHECK(hermitian_symmetry_defect(c2.phi) < 1e-12);
  // phi reproduces -log h at nearby points.
  const cplx d(0.05, 0.02);
  const CMatrix direct = logm_principal(tw.metric(cplx(0.4, -0.2) + d), Structure::hermitian);
  CHECK((c2.phi.evaluate({d, std::conj(d)}) + direct).norm() < 1e-8);
  CHECK_THROWS_AS(tw.phi_jet(cplx(INFINITY, 0.0), 3), DomainError);
}

TEST_CASE("curvature pack of the flat model") {
  const CurvaturePack p = curvature_pack(bargmann_fock_chart(1, 6));
  CHECK(std::abs(p.F_tilde.constant_term()(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(p.lambdaF.constant_term()(0, 0) - 1.0) < 1e-14);
  CHECK(p.scal.max_norm() < 1e-14);
  CHECK(p.lambda_laplacian_F.max_norm() < 1e-14);
  CHECK_THROWS_AS(curvature_pack(bargmann_fock_chart(1, 3)), TruncationError);
}

TEST_CASE("scalar curvature oracles") {
  const MatrixJet one = MatrixJet::identity(kPolarVars, 5, 1) * cplx(2.5, 0.0);
  CHECK(scalar_curvature_of_density(one).max_norm() < 1e-15);
  const cplx c(0.3, 0.2);
  const BundleModel fs = BundleModel::fs_line(1);
  const MatrixJet g = polarize_jet(fs.density_jet(c, 5));
  const double s = scalar_curvature_of_density(g).constant_term()(0, 0).real();
  CHECK(std::abs(s - 2.0) < 1e-12);
  CHECK(std::abs(s - fd_scal(g_fs, c)) < 1e-5);
  // g = exp(|y|^2) at the center c.
  MatrixJet q = MatrixJet::constant(kPolarVars, 5, CMatrix::Constant(1, 1, c)) +
                MatrixJet::variable(kPolarVars, 5, "y", CMatrix::Identity(1, 1));
  MatrixJet qb = MatrixJet::constant(kPolarVars, 5, CMatrix::Constant(1, 1, std::conj(c))) +
                 MatrixJet::variable(kPolarVars, 5, "z", CMatrix::Identity(1, 1));
  const MatrixJet ge = jet_exp(q * qb);
  const double se = scalar_curvature_of_density(ge).constant_term()(0, 0).real();
  CHECK(std::abs(se - fd_scal(g_exp, c)) < 1e-5);
  CHECK(std::abs(se + std::exp(-std::norm(c))) < 1e-12);
}

TEST_CASE("conjugated lambdaF is Hermitian and positive on random charts") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 5; ++t) {
    const ChartData c = random_positive_chart(rng, 2, 6);
    const CurvaturePack p = curvature_pack(c);
    const CMatrix x = inv_sqrtm_hpd(p.h0) * p.lambdaF.constant_term() * sqrtm_hpd(p.h0);
    CHECK(hermitian_defect(x) < 1e-10);
    CHECK(hermitian_eig(x).eigenvalues.minCoeff() > 0.0);
  }
}

TEST_CASE("direct sum packs are block diagonal") {
  const cplx c(0.2, 0.1);
  const BundleModel ds = BundleModel::direct_sum({{1, 0.2}, {2, 0.0}});
  const CurvaturePack p = curvature_pack(chart_from_model(ds, c, 6));
  const CurvaturePack p1 = curvature_pack(chart_from_model(BundleModel::fs_line(1, 0.2), c, 6));
  const CurvaturePack p2 = curvature_pack(chart_from_model(BundleModel::fs_line(2, 0.0), c, 6));
  for (const auto& [full, a, b] : {std::tuple{&p.F_tilde, &p1.F_tilde, &p2.F_tilde},
                                   std::tuple{&p.lambda_laplacian_F, &p1.lambda_laplacian_F,
                                              &p2.lambda_laplacian_F}})
    for (int i = 0; i < full->size(); ++i) {
      CHECK(std::abs(full->at(i)(0, 1)) < 1e-12);
      CHECK(std::abs(full->at(i)(1, 0)) < 1e-12);
      CHECK(std::abs(full->at(i)(0, 0) - a->at(i)(0, 0)) < 1e-12);
      CHECK(std::abs(full->at(i)(1, 1) - b->at(i)(0, 0)) < 1e-12);
    }
}

TEST_CASE("curvature of Sym^k metric is the lift") {
  std::mt19937_64 rng(42);
  const ChartData c = random_positive_chart(rng, 2, 5);
  const int k = 3;
  const SymBasis basis = weak_compositions(k, 2);
  ChartData ck;
  ck.rank = basis.size();
  ck.phi = lift_sk(c.phi, basis);
  ck.g = c.g;
  const CurvaturePack p = curvature_pack(c);
  const CurvaturePack pk = curvature_pack(ck);
  CHECK(rel_err(pk.F_tilde.constant_term(), s_k_lift(p.F_tilde.constant_term(), basis)) < 1e-9);
}

TEST_CASE("catalog models are Griffiths positive") {
  CHECK(BundleModel::fs_line(1).verify_griffiths_positive(16) > 0.9);
  CHECK(BundleModel::fs_line(1, 0.5).verify_griffiths_positive(16) > 0.0);
  CHECK(BundleModel::direct_sum({{1, 0.0}, {2, 0.0}}).verify_griffiths_positive(16) > 0.9);
  CHECK(BundleModel::twisted_trivial(1, 2, 0.1).verify_griffiths_positive(16) > 0.0);
  CHECK_THROWS_AS(BundleModel::fs_line(0).verify_griffiths_positive(8), DomainError);
}

TEST_CASE("model JSON schema") {
  const BundleModel m = BundleModel::from_json(
      R"({"kind":"twisted_trivial","a":1,"r":2,"epsilon":0.1,"kahler":{"kind":"fubini_study"}})");
  CHECK(m.kind() == ModelKind::twisted_trivial);
  CHECK(m.rank() == 2);
  CHECK(BundleModel::from_json(m.to_json()).id() == m.id());
  const BundleModel d = BundleModel::from_json(
      R"({"kind":"direct_sum","summands":[{"d":1},{"d":2,"epsilon":0.1}],
          "kahler":{"kind":"density_expr","fs_weight":1.0,"perturbation":0.2}})");
  CHECK(d.rank() == 2);
  CHECK(std::abs(d.total_volume() - 2.0 * M_PI) < 1e-15);
  CHECK_THROWS_AS(BundleModel::from_json(R"({"kind":"fs_line","d":1,"bogus":3})"), ConfigError);
  CHECK_THROWS_AS(BundleModel::from_json(R"({"kind":"fs_line"})"), ConfigError);
  CHECK_THROWS_AS(BundleModel::from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(BundleModel::from_json(R"({"kind":"torus"})"), ConfigError);
}
