#include "symberg/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "symberg/config.hpp"
#include "symberg/errors.hpp"

namespace symberg {

namespace {

CMatrix scalar(cplx v) { return CMatrix::Constant(1, 1, v); }

CMatrix shift_matrix(int r) {
  CMatrix n = CMatrix::Zero(r, r);
  for (int i = 0; i + 1 < r; ++i) n(i, i + 1) = 1.0;
  return n;
}

// Scalar chart jets for the building blocks y, yb and q = y yb, where the
// chart variables are shifted to the center.
struct ChartBlocks {
  MatrixJet one, y, yb, q, opq, inv, logopq;
};

ChartBlocks chart_blocks(cplx c, int order) {
  ChartBlocks b;
  b.one = MatrixJet::identity(kChartVars, order, 1);
  b.y = MatrixJet::constant(kChartVars, order, scalar(c)) +
        MatrixJet::variable(kChartVars, order, "y", scalar(1.0));
  b.yb = MatrixJet::constant(kChartVars, order, scalar(std::conj(c))) +
         MatrixJet::variable(kChartVars, order, "yb", scalar(1.0));
  b.q = b.y * b.yb;
  b.opq = b.one + b.q;
  b.inv = jet_inverse(b.opq);
  b.logopq = jet_log(b.opq);
  return b;
}

MatrixJet diag_jet(const std::vector<MatrixJet>& entries) {
  const int r = static_cast<int>(entries.size());
  MatrixJet out(entries.front().vars(), entries.front().order(), r);
  for (int i = 0; i < r; ++i)
    for (int m = 0; m < out.size(); ++m) out.at(m)(i, i) = entries[i].at(m)(0, 0);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- models

BundleModel BundleModel::fs_line(int d, double epsilon, KahlerSpec kahler) {
  if (d < 0) throw ConfigError("fs_line: degree must be nonnegative");
  BundleModel m;
  m.kind_ = ModelKind::fs_line;
  m.lines_ = {{d, epsilon}};
  m.r_ = 1;
  m.kahler_ = kahler;
  return m;
}

BundleModel BundleModel::direct_sum(std::vector<LineSpec> lines, KahlerSpec kahler) {
  if (lines.empty()) throw ConfigError("direct_sum: needs at least one summand");
  for (const LineSpec& l : lines)
    if (l.d < 0) throw ConfigError("direct_sum: degrees must be nonnegative");
  BundleModel m;
  m.kind_ = ModelKind::direct_sum;
  m.r_ = static_cast<int>(lines.size());
  m.lines_ = std::move(lines);
  m.kahler_ = kahler;
  return m;
}

BundleModel BundleModel::twisted_trivial(int a, int r, double epsilon, KahlerSpec kahler) {
  if (a < 1) throw ConfigError("twisted_trivial: a must be >= 1");
  if (r < 1) throw ConfigError("twisted_trivial: r must be >= 1");
  BundleModel m;
  m.kind_ = ModelKind::twisted_trivial;
  m.a_ = a;
  m.r_ = r;
  m.eps_ = epsilon;
  m.kahler_ = kahler;
  return m;
}

int BundleModel::rank() const { return r_; }

std::string BundleModel::id() const {
  std::ostringstream os;
  switch (kind_) {
    case ModelKind::fs_line:
      os << "fs_line(d=" << lines_[0].d << ",eps=" << lines_[0].epsilon << ")";
      break;
    case ModelKind::direct_sum:
      os << "direct_sum(";
      for (size_t i = 0; i < lines_.size(); ++i)
        os << (i ? "+" : "") << "O(" << lines_[i].d << ",eps=" << lines_[i].epsilon << ")";
      os << ")";
      break;
    case ModelKind::twisted_trivial:
      os << "twisted_trivial(a=" << a_ << ",r=" << r_ << ",eps=" << eps_ << ")";
      break;
  }
  if (kahler_.kind == KahlerKind::flat_chart) os << "/flat";
  if (kahler_.kind == KahlerKind::density_expr)
    os << "/density(" << kahler_.fs_weight << "," << kahler_.perturbation << ")";
  return os.str();
}

CMatrix BundleModel::metric(cplx z) const { return metric_polarized(z, std::conj(z)); }

CMatrix BundleModel::metric_polarized(cplx y, cplx zb) const {
  const cplx q = y * zb;
  const cplx opq = 1.0 + q;
  switch (kind_) {
    case ModelKind::fs_line:
    case ModelKind::direct_sum: {
      CMatrix h = CMatrix::Zero(r_, r_);
      for (int i = 0; i < r_; ++i)
        h(i, i) = std::pow(opq, -lines_[i].d) * std::exp(-lines_[i].epsilon * q / opq);
      return h;
    }
    case ModelKind::twisted_trivial: {
      const CMatrix n = shift_matrix(r_);
      const CMatrix id = CMatrix::Identity(r_, r_);
      const CMatrix a = id + eps_ * (y / opq) * n;
      const CMatrix b = id + eps_ * (zb / opq) * n.adjoint();
      return std::pow(opq, -a_) * a * b;
    }
  }
  throw InternalError("metric_polarized: unknown model kind");
}

double BundleModel::density(cplx z) const {
  const double q = std::norm(z);
  switch (kahler_.kind) {
    case KahlerKind::fubini_study:
      return std::pow(1.0 + q, -2.0);
    case KahlerKind::density_expr:
      return kahler_.fs_weight * std::pow(1.0 + q, -2.0) +
             kahler_.perturbation * (1.0 - q) * std::pow(1.0 + q, -3.0);
    case KahlerKind::flat_chart:
      break;
  }
  throw DomainError("density: the flat_chart Kaehler form is local only");
}

double BundleModel::total_volume() const {
  if (kahler_.kind == KahlerKind::flat_chart)
    throw DomainError("total_volume: the flat_chart Kaehler form is local only");
  const double w = kahler_.kind == KahlerKind::fubini_study ? 1.0 : kahler_.fs_weight;
  return 2.0 * std::numbers::pi * w;
}

int BundleModel::slot_degree(const MultiIndex& n) const {
  switch (kind_) {
    case ModelKind::fs_line:
      return n[0] * lines_[0].d;
    case ModelKind::direct_sum: {
      int s = 0;
      for (int i = 0; i < r_; ++i) s += n[i] * lines_[i].d;
      return s;
    }
    case ModelKind::twisted_trivial: {
      int k = 0;
      for (int v : n) k += v;
      return k * a_;
    }
  }
  throw InternalError("slot_degree: unknown model kind");
}

CMatrix BundleModel::sym_metric_bounded(cplx z, const SymBasis& basis) const {
  const double q = std::norm(z);
  const double u = q / (1.0 + q);
  switch (kind_) {
    case ModelKind::fs_line:
    case ModelKind::direct_sum: {
      CMatrix g = CMatrix::Zero(basis.size(), basis.size());
      for (int m = 0; m < basis.size(); ++m) {
        double e = 0.0;
        for (int i = 0; i < r_; ++i) e += basis.indices[m][i] * lines_[i].epsilon;
        g(m, m) = std::exp(-e * u);
      }
      return g;
    }
    case ModelKind::twisted_trivial: {
      const CMatrix a = CMatrix::Identity(r_, r_) + eps_ * (z / (1.0 + q)) * shift_matrix(r_);
      const CMatrix sa = sym_pow_matrix(a, basis);
      return sa * sa.adjoint();
    }
  }
  throw InternalError("sym_metric_bounded: unknown model kind");
}

MatrixJet BundleModel::phi_jet(cplx center, int order) const {
  if (!std::isfinite(center.real()) || !std::isfinite(center.imag()))
    throw DomainError("chart center must be a finite point of the affine chart");
  const ChartBlocks b = chart_blocks(center, order);
  const MatrixJet u = b.q * b.inv;
  switch (kind_) {
    case ModelKind::fs_line:
    case ModelKind::direct_sum: {
      std::vector<MatrixJet> entries;
      for (const LineSpec& l : lines_)
        entries.push_back(b.logopq * cplx(l.d, 0.0) + u * cplx(l.epsilon, 0.0));
      return diag_jet(entries);
    }
    case ModelKind::twisted_trivial: {
      const CMatrix n = shift_matrix(r_);
      const MatrixJet id = MatrixJet::identity(kChartVars, order, r_);
      const MatrixJet a = id + jet_mul(b.y * b.inv, MatrixJet::constant(kChartVars, order, eps_ * n));
      const MatrixJet bb =
          id + jet_mul(b.yb * b.inv, MatrixJet::constant(kChartVars, order, eps_ * n.adjoint()));
      return jet_mul(b.logopq, id) * cplx(a_, 0.0) - jet_log(a * bb);
    }
  }
  throw InternalError("phi_jet: unknown model kind");
}

MatrixJet BundleModel::density_jet(cplx center, int order) const {
  const ChartBlocks b = chart_blocks(center, order);
  switch (kahler_.kind) {
    case KahlerKind::fubini_study:
      return b.inv * b.inv;
    case KahlerKind::flat_chart:
      return b.one;
    case KahlerKind::density_expr:
      return b.inv * b.inv * cplx(kahler_.fs_weight, 0.0) +
             (b.one - b.q) * b.inv * b.inv * b.inv * cplx(kahler_.perturbation, 0.0);
  }
  throw InternalError("density_jet: unknown Kaehler kind");
}

double BundleModel::verify_griffiths_positive(int grid) const {
  if (grid <= 0) grid = config::griffiths_grid;
  double lmin = INFINITY;
  for (int i = 0; i < grid; ++i) {
    // Midpoints in t = rho^2/(1+rho^2), uniform angles.
    const double t = (i + 0.5) / grid;
    const double rho = std::sqrt(t / (1.0 - t));
    for (int j = 0; j < grid; ++j) {
      const double ang = 2.0 * std::numbers::pi * j / grid;
      const cplx z = std::polar(rho, ang);
      ChartData c;
      c.rank = r_;
      c.center = z;
      c.phi = phi_jet(z, 2);
      const MatrixJet psi = polarize_jet(c.phi);
      const MatrixJet h = jet_exp(-psi);
      const MatrixJet ftilde = -jet_partial(jet_partial(h, "y") * jet_inverse(h), "z");
      const CMatrix h0 = h.constant_term();
      const CMatrix x = sqrtm_hpd(h0).inverse() * ftilde.constant_term() * sqrtm_hpd(h0);
      // Normalize by the Fubini-Study density so the value is chart-free.
      const double l = hermitian_eig(x).eigenvalues.minCoeff() * std::pow(1.0 + rho * rho, 2.0);
      lmin = std::min(lmin, l);
    }
  }
  if (!(lmin > config::griffiths_min_eig))
    throw DomainError("model " + id() + " is not Griffiths positive (min curvature eigenvalue " +
                      std::to_string(lmin) + ")");
  return lmin;
}

// ---------------------------------------------------------------- JSON

BundleModel BundleModel::from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("model file: top level must be an object");
  auto reject_unknown = [](const json& obj, const std::vector<std::string>& allowed,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
        throw ConfigError("model file: unknown key '" + it.key() + "' in " + where);
  };
  auto get_int = [](const json& obj, const char* key, int def, bool required) {
    if (!obj.contains(key)) {
      if (required) throw ConfigError(std::string("model file: missing key '") + key + "'");
      return def;
    }
    if (!obj[key].is_number_integer())
      throw ConfigError(std::string("model file: '") + key + "' must be an integer");
    return obj[key].get<int>();
  };
  auto get_num = [](const json& obj, const char* key, double def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_number()) throw ConfigError(std::string("model file: '") + key + "' must be a number");
    return obj[key].get<double>();
  };

  KahlerSpec kahler;
  if (j.contains("kahler")) {
    const json& k = j["kahler"];
    if (!k.is_object() || !k.contains("kind") || !k["kind"].is_string())
      throw ConfigError("model file: 'kahler' must be an object with a string 'kind'");
    reject_unknown(k, {"kind", "fs_weight", "perturbation"}, "kahler");
    const std::string kind = k["kind"];
    if (kind == "fubini_study") {
      kahler.kind = KahlerKind::fubini_study;
      if (k.contains("fs_weight") || k.contains("perturbation"))
        throw ConfigError("model file: fubini_study takes no parameters");
    } else if (kind == "flat_chart") {
      kahler.kind = KahlerKind::flat_chart;
      if (k.contains("fs_weight") || k.contains("perturbation"))
        throw ConfigError("model file: flat_chart takes no parameters");
    } else if (kind == "density_expr") {
      kahler.kind = KahlerKind::density_expr;
      kahler.fs_weight = get_num(k, "fs_weight", 1.0);
      kahler.perturbation = get_num(k, "perturbation", 0.0);
      if (!(kahler.fs_weight > 0.0) || !(std::abs(kahler.perturbation) < kahler.fs_weight))
        throw ConfigError("model file: density_expr needs |perturbation| < fs_weight");
    } else {
      throw ConfigError("model file: unknown kahler kind '" + kind + "'");
    }
  }

  if (!j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("model file: missing string key 'kind'");
  const std::string kind = j["kind"];
  if (kind == "fs_line") {
    reject_unknown(j, {"kind", "d", "epsilon", "kahler", "name"}, "model");
    return fs_line(get_int(j, "d", 1, true), get_num(j, "epsilon", 0.0), kahler);
  }
  if (kind == "direct_sum") {
    reject_unknown(j, {"kind", "summands", "kahler", "name"}, "model");
    if (!j.contains("summands") || !j["summands"].is_array() || j["summands"].empty())
      throw ConfigError("model file: direct_sum needs a non-empty 'summands' array");
    std::vector<LineSpec> lines;
    for (const json& s : j["summands"]) {
      if (!s.is_object()) throw ConfigError("model file: each summand must be an object");
      reject_unknown(s, {"d", "epsilon"}, "summand");
      lines.push_back({get_int(s, "d", 1, true), get_num(s, "epsilon", 0.0)});
    }
    return direct_sum(lines, kahler);
  }
  if (kind == "twisted_trivial") {
    reject_unknown(j, {"kind", "a", "r", "epsilon", "kahler", "name"}, "model");
    return twisted_trivial(get_int(j, "a", 1, true), get_int(j, "r", 2, true),
                           get_num(j, "epsilon", 0.0), kahler);
  }
  throw ConfigError("model file: unknown kind '" + kind + "'");
}

std::string BundleModel::to_json() const {
  nlohmann::ordered_json j;
  switch (kind_) {
    case ModelKind::fs_line:
      j["kind"] = "fs_line";
      j["d"] = lines_[0].d;
      j["epsilon"] = lines_[0].epsilon;
      break;
    case ModelKind::direct_sum:
      j["kind"] = "direct_sum";
      j["summands"] = nlohmann::ordered_json::array();
      for (const LineSpec& l : lines_) j["summands"].push_back({{"d", l.d}, {"epsilon", l.epsilon}});
      break;
    case ModelKind::twisted_trivial:
      j["kind"] = "twisted_trivial";
      j["a"] = a_;
      j["r"] = r_;
      j["epsilon"] = eps_;
      break;
  }
  switch (kahler_.kind) {
    case KahlerKind::fubini_study:
      j["kahler"] = {{"kind", "fubini_study"}};
      break;
    case KahlerKind::flat_chart:
      j["kahler"] = {{"kind", "flat_chart"}};
      break;
    case KahlerKind::density_expr:
      j["kahler"] = {{"kind", "density_expr"},
                     {"fs_weight", kahler_.fs_weight},
                     {"perturbation", kahler_.perturbation}};
      break;
  }
  return j.dump();
}

// ---------------------------------------------------------------- charts

double hermitian_symmetry_defect(const MatrixJet& chart_jet) {
  const double s = chart_jet.max_norm();
  if (s == 0.0) return 0.0;
  return (hermitian_swap(chart_jet) - chart_jet).max_norm() / s;
}

MatrixJet polarize_jet(const MatrixJet& chart_jet) {
  if (chart_jet.vars() != kChartVars) throw InvalidInput("polarize: expected chart variables (y, yb)");
  if (hermitian_symmetry_defect(chart_jet) > 1e-10)
    throw InvalidInput("polarize: jet is not Hermitian-symmetric");
  return embed(chart_jet, kPolarVars, {{"yb", "z"}});
}

ChartData chart_from_model(const BundleModel& model, cplx center, int order) {
  ChartData c;
  c.rank = model.rank();
  c.center = center;
  c.phi = model.phi_jet(center, order);
  c.g = model.density_jet(center, order);
  return c;
}

MatrixJet scalar_curvature_of_density(const MatrixJet& g_polar) {
  if (g_polar.dim() != 1) throw InvalidInput("scalar curvature: density must be scalar");
  const cplx g0 = g_polar.constant_term()(0, 0);
  if (!(g0.real() > 0.0) || std::abs(g0.imag()) > 1e-12 * std::abs(g0))
    throw DomainError("scalar curvature: density must be positive");
  const MatrixJet ginv = jet_inverse(g_polar);
  return -(ginv * jet_partial(jet_partial(g_polar, "y") * ginv, "z"));
}

CurvaturePack curvature_pack(const ChartData& chart, const DebugOptions& debug) {
  chart.phi.require_order(4, "curvature_pack.lambda_laplacian_F");
  chart.g.require_order(4, "curvature_pack.scal");
  CurvaturePack p;
  const MatrixJet psi = polarize_jet(chart.phi);
  const MatrixJet h = jet_exp(-psi);
  const MatrixJet hinv = jet_inverse(h);
  p.h0 = hermitian_part(h.constant_term());
  p.eta = jet_partial(h, "y") * hinv;
  p.F_tilde = -jet_partial(p.eta, "z");
  const MatrixJet gp = polarize_jet(chart.g);
  p.g_inv = jet_inverse(gp);
  p.lambdaF = p.g_inv * p.F_tilde;
  if (debug.flip_lambdaF_sign) p.lambdaF = -p.lambdaF;
  p.scal = scalar_curvature_of_density(gp);
  p.dbar_star_F = -(h * jet_partial(p.g_inv * hinv * p.F_tilde * h, "y") * hinv);
  p.lambda_laplacian_F = -(p.g_inv * jet_partial(p.dbar_star_F, "z"));
  return p;
}

// ---------------------------------------------------------------- test charts

namespace {

CMatrix gaussian_matrix(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * cplx(g(rng), g(rng));
  return a;
}

// Random Hermitian-symmetric chart jet with coefficient scale
// amp * decay^{degree}, starting at total degree min_degree.
MatrixJet random_hermitian_symmetric(std::mt19937_64& rng, int dim, int order, int min_degree,
                                     double amp, double decay) {
  MatrixJet j(kChartVars, order, dim);
  const MonomialTable& t = j.table();
  for (int i = 0; i < t.size(); ++i) {
    const Exponent& e = t.exps[i];
    if (t.degree[i] < min_degree || e[0] > e[1]) continue;
    const double s = amp * std::pow(decay, t.degree[i]);
    CMatrix c = gaussian_matrix(rng, dim, s);
    if (e[0] == e[1]) c = hermitian_part(c);
    j.coeff_ref({e[0], e[1], 0}) = c;
    j.coeff_ref({e[1], e[0], 0}) = c.adjoint();
  }
  return j;
}

MatrixJet random_density(std::mt19937_64& rng, int order, double strength) {
  MatrixJet g = random_hermitian_symmetric(rng, 1, order, 1, strength, 0.6);
  std::uniform_real_distribution<double> u(0.7, 1.5);
  g.at(0) = scalar(u(rng));
  return g;
}

double center_positivity(const ChartData& c) {
  const MatrixJet psi = polarize_jet(c.phi);
  const MatrixJet h = jet_exp(-psi);
  const MatrixJet ft = -jet_partial(jet_partial(h, "y") * jet_inverse(h), "z");
  const CMatrix h0 = hermitian_part(h.constant_term());
  const CMatrix x = inv_sqrtm_hpd(h0) * ft.constant_term() * sqrtm_hpd(h0);
  return hermitian_eig(x).eigenvalues.minCoeff();
}

}  // namespace

ChartData random_positive_chart(std::mt19937_64& rng, int rank, int order, double strength) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    ChartData c;
    c.rank = rank;
    MatrixJet phi = random_hermitian_symmetric(rng, rank, order, 0, strength, 0.6);
    const CMatrix p = gaussian_matrix(rng, rank, 0.3);
    // Dominant positive (1,1) part.
    phi.coeff_ref({1, 1, 0}) += p * p.adjoint() + CMatrix::Identity(rank, rank);
    c.phi = phi;
    c.g = random_density(rng, order, strength);
    if (center_positivity(c) > 0.2) return c;
  }
  throw InternalError("random_positive_chart: could not draw a positive chart");
}

ChartData random_line_chart(std::mt19937_64& rng, int order) {
  return random_positive_chart(rng, 1, order);
}

ChartData he_chart(std::mt19937_64& rng, int rank, int order, double c) {
  if (!(c > 0.0)) throw InvalidInput("he_chart: Einstein constant must be positive");
  // f = y yb + small terms, built two orders higher so that d d-bar f is
  // available through the chart order.
  MatrixJet f = random_hermitian_symmetric(rng, 1, order + 2, 2, 0.15, 0.6);
  f.coeff_ref({1, 1, 0}) += scalar(1.0);
  const MatrixJet ddbar = jet_partial(jet_partial(f, "y"), "yb");

  const CMatrix t0 = CMatrix::Identity(rank, rank) + gaussian_matrix(rng, rank, 0.1);
  const MatrixJet t = MatrixJet::constant(kChartVars, order, t0) +
                      MatrixJet::variable(kChartVars, order, "y", gaussian_matrix(rng, rank, 0.3)) +
                      jet_mul(MatrixJet::variable(kChartVars, order, "y", gaussian_matrix(rng, rank, 0.2)),
                              MatrixJet::variable(kChartVars, order, "y", CMatrix::Identity(rank, rank)));
  const MatrixJet tstar = hermitian_swap(t);
  ChartData out;
  out.rank = rank;
  out.phi = jet_mul(f.truncated(order), MatrixJet::identity(kChartVars, order, rank)) - jet_log(t * tstar);
  out.g = ddbar * cplx(1.0 / c, 0.0);
  return out;
}

ChartData bargmann_fock_chart(int rank, int order) {
  ChartData c;
  c.rank = rank;
  c.phi = MatrixJet::variable(kChartVars, order, "y", CMatrix::Identity(rank, rank)) *
          MatrixJet::variable(kChartVars, order, "yb", CMatrix::Identity(rank, rank));
  c.g = MatrixJet::identity(kChartVars, order, 1);
  return c;
}

}  // namespace symberg
