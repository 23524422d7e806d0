#include "symberg/matjet.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>

#include "symberg/config.hpp"
#include "symberg/errors.hpp"
#include "symberg/sympow.hpp"

namespace symberg {

// ---------------------------------------------------------------- tables

int MonomialTable::index_of(const Exponent& e) const {
  int flat = 0;
  int deg = 0;
  for (int v = 0; v < num_vars; ++v) {
    if (e[v] < 0) return -1;
    deg += e[v];
    flat = flat * (order + 1) + e[v];
  }
  for (int v = num_vars; v < 3; ++v)
    if (e[v] != 0) return -1;
  if (deg > order) return -1;
  return dense[flat];
}

std::shared_ptr<const MonomialTable> MonomialTable::get(int num_vars, int order) {
  if (num_vars < 1 || num_vars > 3) throw InvalidInput("MonomialTable: 1 to 3 variables");
  if (order < 0) throw InvalidInput("MonomialTable: negative order");
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{num_vars, order}];
  if (slot) return slot;

  auto t = std::make_shared<MonomialTable>();
  t->num_vars = num_vars;
  t->order = order;
  for (int d = 0; d <= order; ++d) {
    if (num_vars == 1) {
      t->exps.push_back({d, 0, 0});
    } else if (num_vars == 2) {
      for (int a = d; a >= 0; --a) t->exps.push_back({a, d - a, 0});
    } else {
      for (int a = d; a >= 0; --a)
        for (int b = d - a; b >= 0; --b) t->exps.push_back({a, b, d - a - b});
    }
  }
  int cells = 1;
  for (int v = 0; v < num_vars; ++v) cells *= order + 1;
  t->dense.assign(cells, -1);
  for (int i = 0; i < t->size(); ++i) {
    const Exponent& e = t->exps[i];
    int flat = 0;
    int deg = 0;
    for (int v = 0; v < num_vars; ++v) {
      flat = flat * (order + 1) + e[v];
      deg += e[v];
    }
    t->dense[flat] = i;
    t->degree.push_back(deg);
  }
  const size_t n = t->exps.size();
  t->sum_idx.assign(n * n, -1);
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b) {
      if (t->degree[a] + t->degree[b] > order) continue;
      Exponent s{};
      for (int v = 0; v < 3; ++v) s[v] = t->exps[a][v] + t->exps[b][v];
      t->sum_idx[a * n + b] = t->index_of(s);
    }
  slot = t;
  return slot;
}

// ---------------------------------------------------------------- basics

MatrixJet::MatrixJet(std::vector<std::string> vars, int order, int dim)
    : vars_(std::move(vars)), order_(order), dim_(dim) {
  if (dim < 1) throw InvalidInput("MatrixJet: dimension must be positive");
  for (size_t i = 0; i < vars_.size(); ++i)
    for (size_t j = i + 1; j < vars_.size(); ++j)
      if (vars_[i] == vars_[j]) throw InvalidInput("MatrixJet: duplicate variable " + vars_[i]);
  table_ = MonomialTable::get(static_cast<int>(vars_.size()), order);
  coeffs_.assign(table_->size(), CMatrix::Zero(dim, dim));
}

MatrixJet MatrixJet::constant(std::vector<std::string> vars, int order, const CMatrix& c) {
  require_square(c, "MatrixJet::constant");
  MatrixJet j(std::move(vars), order, static_cast<int>(c.rows()));
  j.coeffs_[0] = c;
  return j;
}

MatrixJet MatrixJet::identity(std::vector<std::string> vars, int order, int dim) {
  return constant(std::move(vars), order, CMatrix::Identity(dim, dim));
}

MatrixJet MatrixJet::variable(std::vector<std::string> vars, int order, const std::string& v,
                              const CMatrix& coeff) {
  require_square(coeff, "MatrixJet::variable");
  MatrixJet j(std::move(vars), order, static_cast<int>(coeff.rows()));
  if (order >= 1) {
    Exponent e{0, 0, 0};
    e[j.var_index(v)] = 1;
    j.coeff_ref(e) = coeff;
  }
  return j;
}

int MatrixJet::var_index(const std::string& name) const {
  for (size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i] == name) return static_cast<int>(i);
  throw InvalidInput("MatrixJet: no variable named " + name);
}

CMatrix MatrixJet::coeff(const Exponent& e) const {
  const int i = table_->index_of(e);
  if (i < 0) return CMatrix::Zero(dim_, dim_);
  return coeffs_[i];
}

CMatrix& MatrixJet::coeff_ref(const Exponent& e) {
  const int i = table_->index_of(e);
  if (i < 0) throw InvalidInput("MatrixJet: monomial above truncation order");
  return coeffs_[i];
}

double MatrixJet::max_norm() const {
  double m = 0.0;
  for (const CMatrix& c : coeffs_) m = std::max(m, c.norm());
  return m;
}

double MatrixJet::l1_norm() const {
  double s = 0.0;
  for (const CMatrix& c : coeffs_) s += c.cwiseAbs().colwise().sum().maxCoeff();
  return s;
}

CMatrix MatrixJet::evaluate(const std::vector<cplx>& point) const {
  if (static_cast<int>(point.size()) != num_vars())
    throw InvalidInput("MatrixJet::evaluate: wrong number of coordinates");
  CMatrix out = CMatrix::Zero(dim_, dim_);
  for (int i = 0; i < size(); ++i) {
    cplx m(1.0, 0.0);
    for (int v = 0; v < num_vars(); ++v) m *= std::pow(point[v], table_->exps[i][v]);
    out += m * coeffs_[i];
  }
  return out;
}

MatrixJet MatrixJet::truncated(int order) const {
  if (order > order_) throw TruncationError("truncated: cannot raise the order of a jet");
  MatrixJet out(vars_, order, dim_);
  for (int i = 0; i < out.size(); ++i) out.coeffs_[i] = coeffs_[i];
  return out;
}

void MatrixJet::require_order(int needed, const std::string& consumer) const {
  if (order_ < needed)
    throw TruncationError(consumer + ": needs jet order " + std::to_string(needed) + ", got " +
                          std::to_string(order_));
}

std::string MatrixJet::dump() const {
  std::ostringstream os;
  os << std::setprecision(12);
  for (int i = 0; i < size(); ++i) {
    const Exponent& e = table_->exps[i];
    os << "deg=(";
    for (int v = 0; v < num_vars(); ++v) os << (v ? "," : "") << e[v];
    os << ") norm=" << coeffs_[i].norm() << " matrix=[";
    for (int r = 0; r < dim_; ++r) {
      os << (r ? "," : "") << "[";
      for (int c = 0; c < dim_; ++c) {
        const cplx z = coeffs_[i](r, c);
        os << (c ? "," : "") << "(" << z.real() << "," << z.imag() << ")";
      }
      os << "]";
    }
    os << "]\n";
  }
  return os.str();
}

namespace {

void require_compatible(const MatrixJet& a, const MatrixJet& b, const char* who, bool allow_scalar) {
  if (a.vars() != b.vars()) throw InvalidInput(std::string(who) + ": variable mismatch");
  if (a.dim() != b.dim() && !(allow_scalar && (a.dim() == 1 || b.dim() == 1)))
    throw InvalidInput(std::string(who) + ": dimension mismatch");
}

}  // namespace

MatrixJet& MatrixJet::operator+=(const MatrixJet& o) {
  require_compatible(*this, o, "jet addition", false);
  if (o.order_ < order_) *this = truncated(o.order_);
  for (int i = 0; i < size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

MatrixJet& MatrixJet::operator-=(const MatrixJet& o) {
  require_compatible(*this, o, "jet subtraction", false);
  if (o.order_ < order_) *this = truncated(o.order_);
  for (int i = 0; i < size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

MatrixJet& MatrixJet::operator*=(cplx s) {
  for (CMatrix& c : coeffs_) c *= s;
  return *this;
}

MatrixJet operator+(MatrixJet a, const MatrixJet& b) { return a += b; }
MatrixJet operator-(MatrixJet a, const MatrixJet& b) { return a -= b; }
MatrixJet operator-(MatrixJet a) { return a *= cplx(-1.0, 0.0); }
MatrixJet operator*(MatrixJet a, cplx s) { return a *= s; }
MatrixJet operator*(cplx s, MatrixJet a) { return a *= s; }

// ---------------------------------------------------------------- products

MatrixJet jet_mul(const MatrixJet& a, const MatrixJet& b) {
  require_compatible(a, b, "jet_mul", true);
  const int order = std::min(a.order(), b.order());
  const MatrixJet at = a.order() == order ? a : a.truncated(order);
  const MatrixJet bt = b.order() == order ? b : b.truncated(order);
  MatrixJet out(a.vars(), order, std::max(a.dim(), b.dim()));
  const MonomialTable& t = out.table();
  const int n = t.size();
  for (int i = 0; i < n; ++i) {
    const CMatrix& ca = at.at(i);
    if (ca.isZero(0.0)) continue;
    for (int j = 0; j < n && t.degree[i] + t.degree[j] <= order; ++j) {
      const int s = t.sum(i, j);
      const CMatrix& cb = bt.at(j);
      if (a.dim() == 1)
        out.at(s) += ca(0, 0) * cb;
      else if (b.dim() == 1)
        out.at(s) += ca * cb(0, 0);
      else
        out.at(s).noalias() += ca * cb;
    }
  }
  return out;
}

MatrixJet operator*(const MatrixJet& a, const MatrixJet& b) { return jet_mul(a, b); }

MatrixJet jet_mul(const CMatrix& c, const MatrixJet& a) {
  MatrixJet out = a;
  for (int i = 0; i < out.size(); ++i) out.at(i) = c * a.at(i);
  return out;
}

MatrixJet jet_mul(const MatrixJet& a, const CMatrix& c) {
  MatrixJet out = a;
  for (int i = 0; i < out.size(); ++i) out.at(i) = a.at(i) * c;
  return out;
}

MatrixJet jet_inverse(const MatrixJet& j) {
  const CMatrix& j0 = j.constant_term();
  Eigen::JacobiSVD<CMatrix> svd(j0);
  const auto sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? sv(0) / smin : INFINITY;
  if (!(cond < 1e14))
    throw DomainError("jet_inverse: singular constant term (condition estimate " +
                      std::to_string(cond) + ")");
  const CMatrix b0 = j0.partialPivLu().inverse();
  const MonomialTable& t = j.table();
  MatrixJet out(j.vars(), j.order(), j.dim());
  out.at(0) = b0;
  for (int g = 1; g < t.size(); ++g) {
    const Exponent& eg = t.exps[g];
    CMatrix acc = CMatrix::Zero(j.dim(), j.dim());
    for (int a = 0; a < g; ++a) {
      const Exponent& ea = t.exps[a];
      Exponent diff{};
      bool ok = true;
      for (int v = 0; v < 3; ++v) {
        diff[v] = eg[v] - ea[v];
        ok = ok && diff[v] >= 0;
      }
      if (!ok) continue;
      acc.noalias() += j.at(t.index_of(diff)) * out.at(a);
    }
    out.at(g) = -b0 * acc;
  }
  return out;
}

MatrixJet jet_exp(const MatrixJet& j) {
  const double nrm = j.l1_norm();
  int squarings = 0;
  if (nrm > config::expm_scale_target)
    squarings = static_cast<int>(std::ceil(std::log2(nrm / config::expm_scale_target)));
  const MatrixJet x = j * cplx(std::ldexp(1.0, -squarings), 0.0);
  MatrixJet sum = MatrixJet::identity(j.vars(), j.order(), j.dim());
  MatrixJet term = sum;
  for (int n = 1; n < config::series_max_terms; ++n) {
    term = jet_mul(term, x) * cplx(1.0 / n, 0.0);
    sum += term;
    if (term.l1_norm() < config::series_term_tol * sum.l1_norm()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = jet_mul(sum, sum);
  return sum;
}

namespace {

// Matrix of delta -> e^{L} sum_{n>=0} (-ad_L)^n delta / (n+1)! acting on
// column-stacked d x d matrices.
CMatrix dexp_matrix(const CMatrix& L) {
  const auto d = L.rows();
  const CMatrix eL = expm(L);
  CMatrix op(d * d, d * d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) {
      CMatrix delta = CMatrix::Zero(d, d);
      delta(r, c) = 1.0;
      CMatrix term = delta;
      CMatrix sum = delta;
      for (int n = 1; n < config::series_max_terms; ++n) {
        term = (term * L - L * term) / static_cast<double>(n + 1);
        sum += term;
        if (term.norm() < config::series_term_tol * sum.norm()) break;
      }
      const CMatrix img = eL * sum;
      op.col(c * d + r) = Eigen::Map<const CVector>(img.data(), d * d);
    }
  return op;
}

}  // namespace

MatrixJet jet_log(const MatrixJet& j) {
  const int d = j.dim();
  const CMatrix& j0 = j.constant_term();
  const bool near_identity = op_norm(j0 - CMatrix::Identity(d, d)) < config::mercator_radius;
  CMatrix l0;
  if (near_identity) {
    l0 = logm_principal(j0, Structure::general);
  } else if (hermitian_defect(j0) <= config::hermitian_tol * 1e3) {
    l0 = logm_principal(hermitian_part(j0), Structure::hermitian);
  } else {
    throw DomainError("jet_log: constant term outside the principal logarithm domain");
  }

  // Seed: L0 + Mercator(e^{-L0} J - I); exact when everything commutes.
  const MatrixJet r = jet_mul(expm(-l0), j) - MatrixJet::identity(j.vars(), j.order(), d);
  MatrixJet l = MatrixJet::constant(j.vars(), j.order(), l0);
  {
    MatrixJet power = MatrixJet::identity(j.vars(), j.order(), d);
    for (int n = 1; n <= j.order(); ++n) {
      power = jet_mul(power, r);
      MatrixJet term = power * cplx((n % 2 == 1 ? 1.0 : -1.0) / n, 0.0);
      term.at(0).setZero();
      l += term;
    }
  }

  // Degree-by-degree correction: if L is right through degree m-1 then the
  // degree-m part of J - exp(L) equals dexp_{L0} of the missing terms.
  const Eigen::PartialPivLU<CMatrix> lu(dexp_matrix(l0));
  const MonomialTable& t = j.table();
  const double scale = std::max(1.0, j.max_norm());
  int steps = 0;
  for (int m = 1; m <= j.order(); ++m) {
    const MatrixJet err = j - jet_exp(l);
    ++steps;
    for (int i = 0; i < t.size(); ++i) {
      if (t.degree[i] != m) continue;
      const CMatrix& e = err.at(i);
      const CVector sol = lu.solve(Eigen::Map<const CVector>(e.data(), d * d));
      l.at(i) += Eigen::Map<const CMatrix>(sol.data(), d, d);
    }
  }
  if (steps > j.order() + 2) throw InternalError("jet_log: too many correction steps");
  const double resid = (j - jet_exp(l)).max_norm();
  if (!(resid <= config::jet_log_residual_tol * scale))
    throw InternalError("jet_log: correction did not converge (residual " +
                        std::to_string(resid) + ")");
  return l;
}

// ---------------------------------------------------------------- calculus

MatrixJet jet_partial(const MatrixJet& j, int var_index) {
  if (var_index < 0 || var_index >= j.num_vars())
    throw InvalidInput("jet_partial: variable index out of range");
  if (j.order() == 0) throw TruncationError("jet_partial: jet of order 0 has no derivative");
  MatrixJet out(j.vars(), j.order() - 1, j.dim());
  const MonomialTable& t = out.table();
  for (int i = 0; i < t.size(); ++i) {
    Exponent e = t.exps[i];
    e[var_index] += 1;
    out.at(i) = static_cast<double>(e[var_index]) * j.coeff(e);
  }
  return out;
}

MatrixJet jet_partial(const MatrixJet& j, const std::string& var) {
  return jet_partial(j, j.var_index(var));
}

MatrixJet segment_average(const MatrixJet& j, const std::string& new_name) {
  if (j.num_vars() < 2) throw InvalidInput("segment_average: needs at least two variables");
  std::vector<std::string> vars = j.vars();
  vars[0] = new_name;
  MatrixJet out(vars, j.order(), j.dim());
  const MonomialTable& t = j.table();
  for (int i = 0; i < t.size(); ++i) {
    const Exponent& e = t.exps[i];
    const int a = e[0];
    for (int p = 0; p <= a; ++p) {
      Exponent f = e;
      f[0] = p;
      f[1] = e[1] + a - p;
      out.coeff_ref(f) += j.at(i) / static_cast<double>(a + 1);
    }
  }
  return out;
}

MatrixJet divide_by_xy(const MatrixJet& j, const std::string& x, const std::string& y,
                       double scale) {
  const int ix = j.var_index(x);
  const int iy = j.var_index(y);
  if (ix == iy) throw InvalidInput("divide_by_xy: x and y must differ");
  if (j.order() == 0) throw TruncationError("divide_by_xy: jet of order 0");
  const MonomialTable& t = j.table();

  // Rewrite in (x, w = y - x): y^b = sum_c C(b,c) x^{b-c} w^c.
  MatrixJet w(j.vars(), j.order(), j.dim());
  for (int i = 0; i < t.size(); ++i) {
    const Exponent& e = t.exps[i];
    for (int c = 0; c <= e[iy]; ++c) {
      Exponent f = e;
      f[ix] = e[ix] + e[iy] - c;
      f[iy] = c;
      w.coeff_ref(f) += static_cast<double>(binomial(e[iy], c)) * j.at(i);
    }
  }
  if (scale < 0.0) scale = j.max_norm();
  const double tol = config::divide_tol * std::max(scale, 1e-300);
  for (int i = 0; i < t.size(); ++i) {
    if (t.exps[i][iy] != 0) continue;
    const double n = w.at(i).norm();
    if (n >= tol && n > 0.0) {
      std::ostringstream os;
      os << "divide_by_xy: jet does not vanish on the diagonal at degree (";
      for (int v = 0; v < j.num_vars(); ++v) os << (v ? "," : "") << t.exps[i][v];
      os << "), norm " << n;
      throw NonDivisibleError(os.str());
    }
  }
  // J / (x - y) = -J / w: shift w exponents down and negate.
  MatrixJet q(j.vars(), j.order() - 1, j.dim());
  const MonomialTable& tq = q.table();
  for (int i = 0; i < tq.size(); ++i) {
    Exponent e = tq.exps[i];
    e[iy] += 1;
    q.at(i) = -w.coeff(e);
  }
  // Back to (x, y): w^c = sum_p C(c,p) y^p (-x)^{c-p}.
  MatrixJet out(j.vars(), j.order() - 1, j.dim());
  for (int i = 0; i < tq.size(); ++i) {
    const Exponent& e = tq.exps[i];
    for (int p = 0; p <= e[iy]; ++p) {
      Exponent f = e;
      f[iy] = p;
      f[ix] = e[ix] + e[iy] - p;
      const double sign = ((e[iy] - p) % 2 == 0) ? 1.0 : -1.0;
      out.coeff_ref(f) += sign * static_cast<double>(binomial(e[iy], p)) * q.at(i);
    }
  }
  return out;
}

namespace {

std::vector<std::string> without(const std::vector<std::string>& vars, int idx) {
  std::vector<std::string> out;
  for (int i = 0; i < static_cast<int>(vars.size()); ++i)
    if (i != idx) out.push_back(vars[i]);
  return out;
}

Exponent drop_slot(const Exponent& e, int idx) {
  Exponent out{0, 0, 0};
  int k = 0;
  for (int v = 0; v < 3; ++v)
    if (v != idx) out[k++] = e[v];
  return out;
}

}  // namespace

MatrixJet restrict_diagonal(const MatrixJet& j, const std::string& y, const std::string& x) {
  const int iy = j.var_index(y);
  const int ix = j.var_index(x);
  if (ix == iy) throw InvalidInput("restrict_diagonal: invalid pattern");
  MatrixJet out(without(j.vars(), iy), j.order(), j.dim());
  const MonomialTable& t = j.table();
  for (int i = 0; i < t.size(); ++i) {
    Exponent e = t.exps[i];
    e[ix] += e[iy];
    e[iy] = 0;
    out.coeff_ref(drop_slot(e, iy)) += j.at(i);
  }
  return out;
}

MatrixJet pin_zero(const MatrixJet& j, const std::string& var) {
  const int iv = j.var_index(var);
  if (j.num_vars() == 1) throw InvalidInput("pin_zero: cannot remove the only variable");
  MatrixJet out(without(j.vars(), iv), j.order(), j.dim());
  const MonomialTable& t = j.table();
  for (int i = 0; i < t.size(); ++i)
    if (t.exps[i][iv] == 0) out.coeff_ref(drop_slot(t.exps[i], iv)) = j.at(i);
  return out;
}

MatrixJet embed(const MatrixJet& j, const std::vector<std::string>& target,
                const std::map<std::string, std::string>& rename) {
  MatrixJet out(target, j.order(), j.dim());
  std::vector<int> slot(j.num_vars());
  for (int v = 0; v < j.num_vars(); ++v) {
    const auto it = rename.find(j.vars()[v]);
    const std::string name = it == rename.end() ? j.vars()[v] : it->second;
    slot[v] = out.var_index(name);
    for (int u = 0; u < v; ++u)
      if (slot[u] == slot[v]) throw InvalidInput("embed: two variables mapped to " + name);
  }
  const MonomialTable& t = j.table();
  for (int i = 0; i < t.size(); ++i) {
    Exponent e{0, 0, 0};
    for (int v = 0; v < j.num_vars(); ++v) e[slot[v]] = t.exps[i][v];
    out.coeff_ref(e) = j.at(i);
  }
  return out;
}

MatrixJet lift_sk(const MatrixJet& j, const SymBasis& basis) {
  MatrixJet out(j.vars(), j.order(), basis.size());
  for (int i = 0; i < j.size(); ++i) out.at(i) = s_k_lift(j.at(i), basis);
  return out;
}

MatrixJet conjugate_by(const CMatrix& left, const MatrixJet& j, const CMatrix& right) {
  MatrixJet out = j;
  for (int i = 0; i < j.size(); ++i) out.at(i) = left * j.at(i) * right;
  return out;
}

MatrixJet hermitian_swap(const MatrixJet& j) {
  if (j.num_vars() != 2) throw InvalidInput("hermitian_swap: needs a 2-variable jet");
  MatrixJet out(j.vars(), j.order(), j.dim());
  const MonomialTable& t = j.table();
  for (int i = 0; i < t.size(); ++i) {
    const Exponent& e = t.exps[i];
    out.coeff_ref({e[1], e[0], 0}) = j.at(i).adjoint();
  }
  return out;
}

}  // namespace symberg
