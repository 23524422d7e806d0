#include "symberg/bergman.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "symberg/errors.hpp"
#include "symberg/expansion.hpp"

namespace symberg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Radial parts of the curvature densities, as functions of q = |z|^2. For a
// radial potential f(q), d_y d_z f(yz) = f'(q) + q f''(q).
double line_curvature_density(const LineSpec& l, double q) {
  return l.d * std::pow(1.0 + q, -2.0) + l.epsilon * (1.0 - q) * std::pow(1.0 + q, -3.0);
}

// Lower factor R with R R^* = sym_metric_bounded(z).
CMatrix bounded_factor(const BundleModel& model, const SymBasis& sym, cplx z) {
  if (model.kind() == ModelKind::twisted_trivial) {
    const double q = std::norm(z);
    const int r = model.rank();
    CMatrix a = CMatrix::Identity(r, r);
    for (int i = 0; i + 1 < r; ++i) a(i, i + 1) = model.epsilon() * (z / (1.0 + q));
    return sym_pow_matrix(a, sym);
  }
  const CMatrix g = model.sym_metric_bounded(z, sym);
  CMatrix r = CMatrix::Zero(g.rows(), g.cols());
  for (int i = 0; i < g.rows(); ++i) r(i, i) = std::sqrt(g(i, i).real());
  return r;
}

// Bounded section values sigma_i = scale_i z^p (1+|z|^2)^{-D/2}.
std::vector<cplx> bounded_values(const SectionBasis& b, cplx z) {
  const double q = std::norm(z);
  std::vector<cplx> v(static_cast<size_t>(b.size()));
  for (int i = 0; i < b.size(); ++i)
    v[i] = b.scale[i] * std::pow(z, b.power[i]) * std::pow(1.0 + q, -0.5 * b.degree[i]);
  return v;
}

double density_or_throw(const BundleModel& model, cplx z) {
  const double g = model.density(z);
  if (!(g > 0.0)) throw DomainError("quadrature: Kaehler density is not positive");
  return g;
}

}  // namespace

// ---------------------------------------------------------------- quadrature

GaussRule gauss_legendre01(int n) {
  if (n < 1) throw InvalidInput("gauss_legendre01: need at least one node");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  GaussRule out;
  out.nodes.resize(n);
  out.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    out.nodes[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
    out.weights[i] = v0 * v0;  // 2 v0^2 on [-1, 1], halved for (0, 1)
  }
  return out;
}

std::string QuadratureRule::id() const {
  std::ostringstream os;
  os << "gl" << radial << "x" << angular;
  return os.str();
}

QuadratureRule sphere_quadrature(const BundleModel& model, int radial, int angular) {
  if (radial < 1 || angular < 1) throw InvalidInput("sphere_quadrature: node counts must be positive");
  const GaussRule gl = gauss_legendre01(radial);
  QuadratureRule out;
  out.radial = radial;
  out.angular = angular;
  out.nodes.reserve(static_cast<size_t>(radial) * angular);
  out.weights.reserve(static_cast<size_t>(radial) * angular);
  const double dtheta = kTwoPi / angular;
  for (int i = 0; i < radial; ++i) {
    const double t = gl.nodes[i];
    const double rho = std::sqrt(t / (1.0 - t));
    // omega = 2 g dA and dA = dt dtheta / (2 (1-t)^2).
    const double radial_w = gl.weights[i] / ((1.0 - t) * (1.0 - t));
    for (int j = 0; j < angular; ++j) {
      const cplx z = std::polar(rho, dtheta * (j + 0.5));
      out.nodes.push_back(z);
      out.weights.push_back(radial_w * dtheta * density_or_throw(model, z));
    }
  }
  return out;
}

QuadratureRule disk_quadrature(const BundleModel& model, cplx center, double radius, int radial,
                               int angular) {
  if (!(radius > 0.0)) throw InvalidInput("disk_quadrature: radius must be positive");
  if (radial < 1 || angular < 1) throw InvalidInput("disk_quadrature: node counts must be positive");
  const GaussRule gl = gauss_legendre01(radial);
  QuadratureRule out;
  out.radial = radial;
  out.angular = angular;
  const double dtheta = kTwoPi / angular;
  for (int i = 0; i < radial; ++i) {
    const double r = radius * gl.nodes[i];
    for (int j = 0; j < angular; ++j) {
      const cplx z = center + std::polar(r, dtheta * (j + 0.5));
      out.nodes.push_back(z);
      out.weights.push_back(2.0 * density_or_throw(model, z) * r * radius * gl.weights[i] * dtheta);
    }
  }
  return out;
}

// ---------------------------------------------------------------- sections

int section_count(const BundleModel& model, int k) {
  if (k < 0) throw InvalidInput("section_count: k must be nonnegative");
  const SymBasis sym = weak_compositions(k, model.rank());
  int d = 0;
  for (const MultiIndex& n : sym.indices) d += model.slot_degree(n) + 1;
  return d;
}

SectionBasis section_basis(const BundleModel& model, int k) {
  if (k < 1) throw InvalidInput("section_basis: k must be >= 1");
  SectionBasis out;
  out.k = k;
  out.sym = weak_compositions(k, model.rank());
  for (int m = 0; m < out.sym.size(); ++m) {
    const int deg = model.slot_degree(out.sym.indices[m]);
    for (int p = 0; p <= deg; ++p) {
      out.slot.push_back(m);
      out.power.push_back(p);
      out.degree.push_back(deg);
      out.scale.push_back(std::sqrt(static_cast<double>(binomial(deg, p))));
    }
  }
  if (out.size() == 0) throw DomainError("section_basis: no holomorphic sections");
  return out;
}

CMatrix section_values(const SectionBasis& basis, cplx z) {
  CMatrix s = CMatrix::Zero(basis.size(), basis.sym.size());
  for (int i = 0; i < basis.size(); ++i) s(i, basis.slot[i]) = basis.scale[i] * std::pow(z, basis.power[i]);
  return s;
}

bool uses_diagonal_gram(const BundleModel& model) {
  return model.kind() != ModelKind::twisted_trivial || model.epsilon() == 0.0;
}

CMatrix gram(const BundleModel& model, const SectionBasis& basis, const QuadratureRule& quad) {
  const int d = basis.size();
  const int rk = basis.sym.size();
  CMatrix m = CMatrix::Zero(d, d);
  if (uses_diagonal_gram(model)) {
    // Diagonal metric: only sections in the same slot pair up.
    for (size_t p = 0; p < quad.nodes.size(); ++p) {
      const cplx z = quad.nodes[p];
      const std::vector<cplx> v = bounded_values(basis, z);
      const CMatrix g = model.sym_metric_bounded(z, basis.sym);
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d && basis.slot[b] == basis.slot[a]; ++b)
          m(a, b) += quad.weights[p] * g(basis.slot[a], basis.slot[a]).real() * v[a] * std::conj(v[b]);
    }
  } else {
    // Full metric: accumulate Y Y^* over fixed node blocks, Y = sqrt(w) sigma R.
    constexpr size_t kBlock = 64;
    CMatrix y(d, static_cast<Eigen::Index>(kBlock) * rk);
    for (size_t start = 0; start < quad.nodes.size(); start += kBlock) {
      const size_t stop = std::min(quad.nodes.size(), start + kBlock);
      y.setZero();
      for (size_t p = start; p < stop; ++p) {
        const cplx z = quad.nodes[p];
        const std::vector<cplx> v = bounded_values(basis, z);
        const CMatrix r = bounded_factor(model, basis.sym, z);
        const double sw = std::sqrt(quad.weights[p]);
        const Eigen::Index col = static_cast<Eigen::Index>(p - start) * rk;
        for (int a = 0; a < d; ++a) y.block(a, col, 1, rk) = (sw * v[a]) * r.row(basis.slot[a]);
      }
      m.noalias() += y * y.adjoint();
    }
  }
  for (int a = 0; a < d; ++a) {
    m(a, a) = cplx(m(a, a).real(), 0.0);
    for (int b = a + 1; b < d; ++b) m(b, a) = std::conj(m(a, b));
  }
  return m;
}

// ---------------------------------------------------------------- solver

BergmanSolver::BergmanSolver(const BundleModel& model, int k, const QuadratureRule& quad)
    : model_(model), k_(k), quad_(quad), basis_(section_basis(model, k)) {
  gram_ = symberg::gram(model_, basis_, quad_);
  try {
    chol_ = cholesky(gram_);
  } catch (const FactorizationError& e) {
    const double lo = hermitian_eig(gram_).eigenvalues.minCoeff();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", lo);
    throw DomainError(std::string("bergman: Gram matrix is not positive definite (smallest eigenvalue ") + buf +
                      ")");
  }
  const double top = chol_.diagonal().real().maxCoeff();
  const double bottom = chol_.diagonal().real().minCoeff();
  if (bottom < config::gram_min_pivot * top)
    throw DomainError("bergman: Gram matrix is numerically singular");
}

CMatrix BergmanSolver::orthonormal_values(cplx x) const {
  return chol_.triangularView<Eigen::Lower>().solve(section_values(basis_, x));
}

CMatrix BergmanSolver::orthonormal_frame_values(cplx x) const {
  const CMatrix h = sym_pow_metric(model_.metric(x), k_);
  return orthonormal_values(x) * sqrtm_hpd(h);
}

BergmanSample BergmanSolver::at(cplx x) const {
  const CMatrix y = orthonormal_frame_values(x);
  BergmanSample s;
  s.k = k_;
  s.x = x;
  s.B = hermitian_part(y.adjoint() * y);
  s.op_norm = op_norm(s.B);
  s.trace = s.B.trace().real();
  s.model_id = model_.id();
  s.quad_id = quad_.id();
  return s;
}

CMatrix BergmanSolver::kernel(cplx y, cplx x) const {
  return orthonormal_values(y).adjoint() * orthonormal_values(x);
}

double BergmanSolver::trace_integral(const QuadratureRule& refined) const {
  const CMatrix mr = symberg::gram(model_, basis_, refined);
  const auto tri = chol_.triangularView<Eigen::Lower>();
  // tr(M^{-1} M') with M = L L^*.
  const CMatrix a = tri.solve(mr);
  const CMatrix b = tri.solve(a.adjoint());
  return b.trace().real();
}

BergmanSample bergman_function(const BundleModel& model, int k, cplx x, const QuadratureRule& quad) {
  return BergmanSolver(model, k, quad).at(x);
}

double extremal_lower_bound(const BergmanSolver& solver, cplx x, int trials, std::mt19937_64& rng) {
  const CMatrix y = solver.orthonormal_frame_values(x);
  // ||s(x)||^2 for s = sum_i c_i s_i is c Y Y^* c^*, with (s, s) = |c|^2.
  const CMatrix p = y * y.adjoint();
  const Spectrum sp = hermitian_eig(hermitian_part(p));
  const Eigen::Index top = sp.eigenvalues.size() - 1;
  const CVector c0 = sp.eigenvectors.col(top);
  auto ratio = [&](const CVector& c) {
    return (c.adjoint() * p * c)(0, 0).real() / c.squaredNorm();
  };
  double best = ratio(c0);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    CVector c = c0;
    const double amp = 0.1 * (t + 1) / std::max(trials, 1);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) += amp * cplx(nd(rng), nd(rng));
    best = std::max(best, ratio(c));
  }
  return best;
}

// ---------------------------------------------------------------- Riemann-Roch

double trace_curvature_density(const BundleModel& model, cplx z) {
  const double q = std::norm(z);
  if (model.kind() == ModelKind::twisted_trivial)
    return model.rank() * model.a() * std::pow(1.0 + q, -2.0);  // det A = 1
  double s = 0.0;
  for (const LineSpec& l : model.lines()) s += line_curvature_density(l, q);
  return s;
}

double scal_density(const BundleModel& model, cplx z) {
  const double q = std::norm(z);
  double w = 1.0, p = 0.0;
  if (model.kahler().kind == KahlerKind::density_expr) {
    w = model.kahler().fs_weight;
    p = model.kahler().perturbation;
  } else if (model.kahler().kind == KahlerKind::flat_chart) {
    throw DomainError("scal_density: the flat_chart Kaehler form is local only");
  }
  const double o = 1.0 + q;
  const double g = w / (o * o) + p * (1.0 - q) / (o * o * o);
  const double g1 = -2.0 * w / (o * o * o) + p * (2.0 * q - 4.0) / std::pow(o, 4);
  const double g2 = 6.0 * w / std::pow(o, 4) + p * (18.0 - 6.0 * q) / std::pow(o, 5);
  const double l1 = g1 / g;
  const double l2 = g2 / g - l1 * l1;
  return -(l1 + q * l2) / g;
}

double curvature_integral(const BundleModel& model, int k, const QuadratureRule& quad) {
  const int r = model.rank();
  const double lift = static_cast<double>(k) * sym_rank(r, k) / r;  // tr s^k(A) = lift tr A
  double s = 0.0;
  for (size_t i = 0; i < quad.nodes.size(); ++i)
    s += quad.weights[i] * trace_curvature_density(model, quad.nodes[i]) / model.density(quad.nodes[i]);
  return lift * s;
}

double scal_integral(const BundleModel& model, const QuadratureRule& quad) {
  double s = 0.0;
  for (size_t i = 0; i < quad.nodes.size(); ++i) s += quad.weights[i] * scal_density(model, quad.nodes[i]);
  return s;
}

RiemannRochConstants pin_riemann_roch(const QuadratureRule& quad_template) {
  const BundleModel m = BundleModel::fs_line(1);
  const QuadratureRule quad = sphere_quadrature(m, quad_template.radial, quad_template.angular);
  const double sc = scal_integral(m, quad);
  Eigen::Matrix2d a;
  Eigen::Vector2d rhs;
  for (int k = 1; k <= 2; ++k) {
    a(k - 1, 0) = curvature_integral(m, k, quad);
    a(k - 1, 1) = sym_rank(1, k) * sc;
    rhs(k - 1) = section_count(m, k);
  }
  const Eigen::Vector2d c = a.partialPivLu().solve(rhs);
  return {c(0), c(1)};
}

RiemannRochRecord riemann_roch_report(const BundleModel& model, int k, const RiemannRochConstants& c,
                                      int radial, int angular, bool with_trace) {
  const QuadratureRule quad = sphere_quadrature(model, radial, angular);
  RiemannRochRecord rec;
  rec.model = model.id();
  rec.k = k;
  rec.r_k = sym_rank(model.rank(), k);
  rec.d_k = section_count(model, k);
  rec.curvature_integral = curvature_integral(model, k, quad);
  rec.scal_integral = scal_integral(model, quad);
  rec.predicted = c.c1 * rec.curvature_integral + c.c2 * rec.r_k * rec.scal_integral;
  rec.error = rec.d_k - rec.predicted;
  rec.error_times_k_over_rk = rec.error * k / rec.r_k;
  rec.trace_integral = std::numeric_limits<double>::quiet_NaN();
  if (with_trace) {
    const BergmanSolver solver(model, k, quad);
    rec.trace_integral = solver.trace_integral(sphere_quadrature(model, radial + radial / 2, angular + angular / 2));
  }
  return rec;
}

// ---------------------------------------------------------------- comparison

CMatrix expansion_prediction(const BundleModel& model, int k, int N, cplx x) {
  const ChartData chart = chart_from_model(model, x, 2 * N + 4);
  const CoefficientTable t = coeff_recursion(chart, k, N);
  const CMatrix h = sym_pow_metric(model.metric(x), k);
  return inv_sqrtm_hpd(h) * b_sum(t, N) * sqrtm_hpd(h) / kTwoPi;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("fit_loglog_slope: need two or more pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

std::vector<CompareRow> compare_expansion(const BundleModel& model, const std::vector<int>& k_list,
                                          const std::vector<cplx>& points, int N, int radial, int angular) {
  if (k_list.empty() || points.empty()) throw InvalidInput("compare_expansion: empty sweep");
  const QuadratureRule quad = sphere_quadrature(model, radial, angular);
  std::vector<CompareRow> rows;
  for (int k : k_list) {
    const BergmanSolver solver(model, k, quad);
    for (cplx x : points) {
      CompareRow row;
      row.model = model.id();
      row.k = k;
      row.x = x;
      const CMatrix pred = expansion_prediction(model, k, N, x);
      row.residual_op_norm = op_norm(solver.at(x).B - pred);
      row.b0k_norm = op_norm(expansion_prediction(model, k, 0, x));
      rows.push_back(row);
    }
  }
  for (size_t p = 0; p < points.size(); ++p) {
    std::vector<double> ks, rs;
    for (size_t i = p; i < rows.size(); i += points.size()) {
      ks.push_back(rows[i].k);
      rs.push_back(rows[i].residual_op_norm);
    }
    const double slope = ks.size() >= 2 ? fit_loglog_slope(ks, rs) : std::numeric_limits<double>::quiet_NaN();
    for (size_t i = p; i < rows.size(); i += points.size()) rows[i].fitted_exponent = slope;
  }
  return rows;
}

std::vector<DecaySeries> decay_series(const std::vector<CompareRow>& rows) {
  std::vector<DecaySeries> out;
  for (const CompareRow& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const DecaySeries& s) { return s.x == row.x; });
    if (it == out.end()) {
      out.push_back(DecaySeries{row.x, {}, {}, {}});
      it = out.end() - 1;
    }
    it->k.push_back(row.k);
    it->log_k.push_back(std::log(static_cast<double>(row.k)));
    it->log_residual.push_back(std::log(row.residual_op_norm));
  }
  return out;
}

std::vector<double> reproducing_check(const BundleModel& model, int k, int N, cplx x,
                                      const std::vector<int>& sections, double radius) {
  const BergmanSolver solver(model, k, sphere_quadrature(model));
  const SectionBasis& basis = solver.basis();
  for (int s : sections)
    if (s < 0 || s >= basis.size()) throw InvalidInput("reproducing_check: section index out of range");
  const ChartData chart = chart_from_model(model, x, 2 * N + 4);
  const CoefficientTable table = coeff_recursion(chart, k, N);
  const QuadratureRule disk =
      disk_quadrature(model, x, radius, config::reproduce_radial, config::reproduce_angular);
  const int rk = basis.sym.size();
  const CMatrix hx = sym_pow_metric(model.metric(x), k);
  const CMatrix ux = section_values(basis, x);
  CMatrix integral = CMatrix::Zero(basis.size(), rk);
  for (size_t i = 0; i < disk.nodes.size(); ++i) {
    const cplx y = disk.nodes[i];
    const CMatrix hy = sym_pow_metric(model.metric(y), k);
    // K(y, x) = (1/2pi) e^{s^k psi(x, yb)} b(x, yb).
    const CMatrix epsi = sym_pow_matrix(model.metric_polarized(x, std::conj(y)), basis.sym).inverse();
    const CMatrix kyx = epsi * b_sum_at(table, N, std::conj(y - x)) / kTwoPi;
    integral += disk.weights[i] * section_values(basis, y) * hy * kyx;
  }
  std::vector<double> out;
  for (int s : sections) {
    const CMatrix r = ux.row(s) - integral.row(s);
    const double pointwise = std::sqrt(std::max(0.0, (r * hx * r.adjoint())(0, 0).real()));
    out.push_back(pointwise / std::sqrt(solver.gram()(s, s).real()));
  }
  return out;
}

}  // namespace symberg
