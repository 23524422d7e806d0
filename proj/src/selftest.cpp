#include "symberg/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "symberg/bergman.hpp"
#include "symberg/diastatic.hpp"
#include "symberg/errors.hpp"
#include "symberg/expansion.hpp"
#include "symberg/sympow.hpp"

namespace symberg {

namespace {

struct Measure {
  double value;
  double limit;
};

struct Check {
  std::string module;
  std::string name;
  bool slow;
  std::function<Measure(const SelftestOptions&, std::mt19937_64&)> run;
};

CMatrix random_matrix(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * cplx(g(rng), g(rng));
  return a;
}

CMatrix random_hermitian(std::mt19937_64& rng, int n, double scale) {
  const CMatrix a = random_matrix(rng, n, scale);
  return (a + a.adjoint()) * 0.5;
}

double rel(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

MatrixJet random_jet(std::mt19937_64& rng, const std::vector<std::string>& vars, int order, int dim,
                     double scale) {
  MatrixJet j(vars, order, dim);
  for (int i = 0; i < j.size(); ++i) j.at(i) = random_matrix(rng, dim, scale / (1 + j.table().degree[i]));
  return j;
}

const std::vector<Check>& registry() {
  static const std::vector<Check> checks = {
      // numerics
      {"numerics", "expm/logm round trip on Hermitian input", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         double worst = 0.0;
         for (int t = 0; t < 5; ++t) {
           const CMatrix a = random_hermitian(rng, 4, 0.5);
           worst = std::max(worst, rel(logm_principal(expm(a, Structure::hermitian), Structure::hermitian), a));
         }
         return Measure{worst, 1e-12};
       }},
      {"numerics", "two-factor BCH", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         const CMatrix x = random_matrix(rng, 3, 0.1), y = random_matrix(rng, 3, 0.1);
         return Measure{rel(expm(z_bch({x, y})), expm(x) * expm(y)), 1e-12};
       }},
      {"numerics", "Cholesky reconstruction", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         const CMatrix a = random_matrix(rng, 5, 1.0);
         const CMatrix h = a.adjoint() * a + CMatrix::Identity(5, 5);
         const CMatrix l = cholesky(h);
         return Measure{rel(l * l.adjoint(), h), 1e-13};
       }},
      // sympow
      {"sympow", "spectrum of the derivation lift", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         double worst = 0.0;
         for (int r : {2, 3}) {
           for (int k = 1; k <= 4; ++k) {
             const CMatrix m = random_hermitian(rng, r, 1.0);
             const RVector lam = hermitian_eig(m).eigenvalues;
             const SymBasis b = weak_compositions(k, r);
             std::vector<double> want;
             for (const MultiIndex& n : b.indices) {
               double s = 0.0;
               for (int i = 0; i < r; ++i) s += n[i] * lam(i);
               want.push_back(s);
             }
             std::sort(want.begin(), want.end());
             const RVector got = hermitian_eig(s_k_lift(m, b)).eigenvalues;
             for (int i = 0; i < b.size(); ++i) worst = std::max(worst, std::abs(got(i) - want[i]));
           }
         }
         return Measure{worst, 1e-9};
       }},
      {"sympow", "exponential intertwines the lift", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         double worst = 0.0;
         for (int k = 1; k <= 4; ++k) {
           const CMatrix m = random_matrix(rng, 3, 0.4);
           worst = std::max(worst, rel(expm(s_k_lift(m, k)), sym_pow_matrix(expm(m), k)));
         }
         return Measure{worst, 1e-9};
       }},
      {"sympow", "functoriality of Sym^k", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         const CMatrix a = random_matrix(rng, 2, 1.0), b = random_matrix(rng, 2, 1.0);
         return Measure{rel(sym_pow_matrix(a * b, 4), sym_pow_matrix(a, 4) * sym_pow_matrix(b, 4)), 1e-12};
       }},
      // matjet
      {"matjet", "jet exp/log round trip", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         MatrixJet j = random_jet(rng, {"y", "z"}, 6, 2, 0.2);
         j.at(0) = hermitian_part(j.at(0));
         return Measure{(jet_log(jet_exp(j)) - j).max_norm() / j.max_norm(), 1e-10};
       }},
      {"matjet", "jet inverse", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         MatrixJet j = random_jet(rng, {"y", "z"}, 6, 3, 0.3);
         j.at(0) += CMatrix::Identity(3, 3);
         const MatrixJet p = j * jet_inverse(j) - MatrixJet::identity({"y", "z"}, 6, 3);
         return Measure{p.max_norm(), 1e-12};
       }},
      {"matjet", "division by (x - y)", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         const MatrixJet j = random_jet(rng, {"x", "y", "z"}, 5, 2, 1.0);
         const CMatrix id = CMatrix::Identity(2, 2);
         const MatrixJet xmy = MatrixJet::variable({"x", "y", "z"}, 6, "x", id) -
                               MatrixJet::variable({"x", "y", "z"}, 6, "y", id);
         const MatrixJet q = divide_by_xy(xmy * MatrixJet(j), "x", "y");
         return Measure{(q.truncated(4) - j.truncated(4)).max_norm(), 1e-12};
       }},
      // geometry
      {"geometry", "catalog models are Griffiths positive", false,
       [](const SelftestOptions&, std::mt19937_64&) {
         double lo = INFINITY;
         for (const BundleModel& m : {BundleModel::fs_line(1), BundleModel::fs_line(1, 0.5),
                                      BundleModel::direct_sum({{1, 0.0}, {2, 0.0}}),
                                      BundleModel::twisted_trivial(1, 2, 0.1)})
           lo = std::min(lo, m.verify_griffiths_positive(16));
         return Measure{-lo, -config::griffiths_min_eig};
       }},
      {"geometry", "Fubini-Study curvature", false,
       [](const SelftestOptions& o, std::mt19937_64&) {
         const cplx x(0.3, -0.2);
         const CurvaturePack p = curvature_pack(chart_from_model(BundleModel::fs_line(1), x, 4), o.debug);
         const double want = std::pow(1.0 + std::norm(x), -2.0);
         return Measure{std::abs(p.F_tilde.constant_term()(0, 0) - want), 1e-12};
       }},
      {"geometry", "chart jets are Hermitian symmetric", false,
       [](const SelftestOptions&, std::mt19937_64&) {
         const ChartData c = chart_from_model(BundleModel::twisted_trivial(1, 2, 0.1), cplx(0.2, 0.1), 6);
         return Measure{hermitian_symmetry_defect(c.phi), 1e-12};
       }},
      // diastatic
      {"diastatic", "pure coefficients vanish", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         double worst = 0.0;
         for (int t = 0; t < 3; ++t)
           worst = std::max(worst, pure_coefficient_defect(diastasis_jet(random_positive_chart(rng, 2, 6).phi, 6)));
         return Measure{worst, 1e-10};
       }},
      {"diastatic", "curvature link", false,
       [](const SelftestOptions& o, std::mt19937_64& rng) {
         double worst = 0.0;
         for (int t = 0; t < 3; ++t) worst = std::max(worst, curvature_link_residual(random_positive_chart(rng, 2, 6), o.debug));
         return Measure{worst, 1e-9};
       }},
      {"diastatic", "pointwise diastasis is Hermitian and swap symmetric", false,
       [](const SelftestOptions&, std::mt19937_64&) {
         const BundleModel m = BundleModel::twisted_trivial(1, 2, 0.1);
         const cplx x(0.1, 0.05), y(-0.2, 0.15);
         const CMatrix d = diastasis_point(m, x, y), e = diastasis_point(m, y, x);
         const double sym = (d - d.adjoint()).norm();
         const double swap = (hermitian_eig(d).eigenvalues - hermitian_eig(e).eigenvalues).norm();
         return Measure{std::max(sym, swap), 1e-10};
       }},
      {"diastatic", "eigenvalue estimate", false,
       [](const SelftestOptions&, std::mt19937_64&) {
         const EigenvalueEstimate e = eigenvalue_estimate(BundleModel::twisted_trivial(1, 2, 0.1), 6, 0.3, 4);
         return Measure{std::max(-e.delta, e.decay_excess - 1e-9), 0.0};
       }},
      // expansion
      {"expansion", "phase identity", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         const ChartData c = random_positive_chart(rng, 2, 6);
         return Measure{phase_identity_residual(build_phase(polarize(c.phi), 6)), 1e-10};
       }},
      {"expansion", "recursion agrees with the closed forms", false,
       [](const SelftestOptions& o, std::mt19937_64& rng) {
         double worst = 0.0;
         for (int r : {1, 2}) {
           for (int k : {2, 3}) {
             const ChartData c = random_positive_chart(rng, r, 6);
             const CoefficientTable t = coeff_recursion(c, k, 1);
             const ClosedForm cf = closed_form_b0_b1(c, k, o.debug);
             worst = std::max({worst, rel(t.b[0], cf.b0), rel(t.b[1], cf.b1), cf.forms_gap});
           }
         }
         return Measure{worst, 1e-8};
       }},
      {"expansion", "Hermitian-Einstein coefficients are scalar", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         const CoefficientTable t = coeff_recursion(he_chart(rng, 2, 8, 1.3), 2, 2);
         double worst = 0.0;
         for (const CMatrix& b : t.b) {
           const cplx mean = b.trace() / static_cast<double>(b.rows());
           worst = std::max(worst, (b - mean * CMatrix::Identity(b.rows(), b.cols())).norm());
         }
         return Measure{worst, 1e-8};
       }},
      {"expansion", "three-variable recursion cross-check", false,
       [](const SelftestOptions&, std::mt19937_64& rng) {
         const ChartData c = random_positive_chart(rng, 2, 6);
         const CoefficientTable a = coeff_recursion(c, 2, 1), b = coeff_recursion_full(c, 2, 1);
         return Measure{std::max(rel(a.b[0], b.b[0]), rel(a.b[1], b.b[1])), 1e-9};
       }},
      // bergman
      {"bergman", "homogeneous line bundle", false,
       [](const SelftestOptions&, std::mt19937_64&) {
         const BundleModel m = BundleModel::fs_line(1);
         const BergmanSample s = bergman_function(m, 4, cplx(0.4, 0.3), sphere_quadrature(m, 32, 32));
         return Measure{std::abs(s.B(0, 0) - 5.0 / (2.0 * std::numbers::pi)), 1e-12};
       }},
      {"bergman", "trace identity", false,
       [](const SelftestOptions&, std::mt19937_64&) {
         const BundleModel m = BundleModel::twisted_trivial(1, 2, 0.1);
         const BergmanSolver s(m, 3, sphere_quadrature(m, 48, 48));
         return Measure{std::abs(s.trace_integral(sphere_quadrature(m, 72, 72)) - s.dimension()), 1e-6};
       }},
      {"bergman", "Riemann-Roch after pinning", false,
       [](const SelftestOptions&, std::mt19937_64&) {
         const RiemannRochConstants c = pin_riemann_roch(sphere_quadrature(BundleModel::fs_line(1), 48, 48));
         const RiemannRochRecord r = riemann_roch_report(BundleModel::direct_sum({{1, 0.0}, {2, 0.0}}), 4, c, 48, 48);
         return Measure{std::abs(r.error), 1e-8};
       }},
      {"bergman", "expansion matches the direct kernel", false,
       [](const SelftestOptions&, std::mt19937_64&) {
         const auto rows = compare_expansion(BundleModel::fs_line(1, 0.5), {5, 10, 20}, {cplx(0.2, 0.1)}, 1, 48, 48);
         return Measure{rows[0].fitted_exponent, -0.8};
       }},
      {"bergman", "local reproducing property", true,
       [](const SelftestOptions&, std::mt19937_64&) {
         double worst = -INFINITY;
         std::vector<double> prev;
         for (int k : {8, 16, 24}) {
           const std::vector<double> r = reproducing_check(BundleModel::fs_line(1), k, 1, cplx(0.2, 0.1), {0, 1, 2});
           if (!prev.empty())
             for (size_t i = 0; i < r.size(); ++i) worst = std::max(worst, r[i] - prev[i]);
           prev = r;
         }
         return Measure{worst, 0.0};
       }},
  };
  return checks;
}

}  // namespace

const std::vector<std::string>& selftest_modules() {
  static const std::vector<std::string> modules = {"numerics", "sympow",    "matjet", "geometry",
                                                   "diastatic", "expansion", "bergman"};
  return modules;
}

std::vector<SelftestResult> run_selftest(const SelftestOptions& options) {
  if (!options.filter.empty()) {
    const auto& mods = selftest_modules();
    if (std::find(mods.begin(), mods.end(), options.filter) == mods.end())
      throw ConfigError("selftest: unknown module '" + options.filter + "'");
  }
  std::vector<SelftestResult> out;
  const std::vector<Check>& checks = registry();
  for (size_t idx = 0; idx < checks.size(); ++idx) {
    const Check& c = checks[idx];
    if (!options.filter.empty() && c.module != options.filter) continue;
    if (c.slow && !options.include_slow) continue;
    // Each check gets its own stream so filtering does not change results.
    std::seed_seq seq{static_cast<std::uint64_t>(options.seed), static_cast<std::uint64_t>(idx)};
    std::mt19937_64 rng(seq);
    SelftestResult r;
    r.module = c.module;
    r.name = c.name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Measure m = c.run(options, rng);
      r.value = m.value;
      r.limit = m.limit;
      r.passed = std::isfinite(m.value) && m.value <= m.limit;
    } catch (const std::exception& e) {
      r.passed = false;
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(r);
  }
  return out;
}

}  // namespace symberg
