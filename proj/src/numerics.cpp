#include "symberg/numerics.hpp"

#include <cmath>
#include <string>

#include "symberg/config.hpp"
#include "symberg/errors.hpp"

namespace symberg {

void require_finite(const CMatrix& A, const char* who) {
  if (!A.allFinite()) throw InvalidInput(std::string(who) + ": non-finite entries");
}

void require_square(const CMatrix& A, const char* who) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw InvalidInput(std::string(who) + ": expected a non-empty square matrix");
}

Spectrum hermitian_eig(const CMatrix& A) {
  require_square(A, "hermitian_eig");
  require_finite(A, "hermitian_eig");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(A));
  if (es.info() != Eigen::Success) throw DomainError("hermitian_eig: no convergence");
  return {es.eigenvalues(), es.eigenvectors()};
}

CMatrix hermitian_part(const CMatrix& A) { return (A + A.adjoint()) * 0.5; }

double hermitian_defect(const CMatrix& A) {
  const double scale = A.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (A - A.adjoint()).cwiseAbs().maxCoeff() / scale;
}

CMatrix hermitian_function(const CMatrix& H, double (*f)(double)) {
  const Spectrum sp = hermitian_eig(H);
  RVector fv(sp.eigenvalues.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(sp.eigenvalues(i));
  return sp.eigenvectors * fv.cast<cplx>().asDiagonal() * sp.eigenvectors.adjoint();
}

namespace {

double sqrt_pos(double x) {
  if (!(x > 0.0)) throw DomainError("matrix square root: matrix not positive definite");
  return std::sqrt(x);
}
double inv_sqrt_pos(double x) { return 1.0 / sqrt_pos(x); }
double log_pos(double x) {
  if (!(x > 0.0))
    throw DomainError("logm_principal: Hermitian spectrum touches the closed negative axis");
  return std::log(x);
}

// Induced 1-norm; a cheap upper bound for the operator norm used to pick
// the scaling exponent.
double norm1(const CMatrix& A) { return A.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

CMatrix sqrtm_hpd(const CMatrix& H) { return hermitian_function(H, sqrt_pos); }
CMatrix inv_sqrtm_hpd(const CMatrix& H) { return hermitian_function(H, inv_sqrt_pos); }

CMatrix expm(const CMatrix& A, Structure s) {
  require_square(A, "expm");
  require_finite(A, "expm");
  if (s == Structure::hermitian) return hermitian_function(A, [](double x) { return std::exp(x); });

  const double nrm = norm1(A);
  int squarings = 0;
  if (nrm > config::expm_scale_target)
    squarings = static_cast<int>(std::ceil(std::log2(nrm / config::expm_scale_target)));
  const CMatrix X = A / std::ldexp(1.0, squarings);

  const auto n = A.rows();
  CMatrix sum = CMatrix::Identity(n, n);
  CMatrix term = CMatrix::Identity(n, n);
  for (int j = 1; j < config::series_max_terms; ++j) {
    term = term * X / static_cast<double>(j);
    sum += term;
    if (term.norm() < config::series_term_tol * sum.norm()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

CMatrix logm_principal(const CMatrix& A, Structure s) {
  require_square(A, "logm_principal");
  require_finite(A, "logm_principal");
  if (s == Structure::hermitian) return hermitian_function(A, log_pos);

  const auto n = A.rows();
  const CMatrix E = A - CMatrix::Identity(n, n);
  if (op_norm(E) >= config::mercator_radius)
    throw DomainError("logm_principal: general input must satisfy ||A - I|| < 1");
  CMatrix sum = CMatrix::Zero(n, n);
  CMatrix power = CMatrix::Identity(n, n);
  for (int j = 1; j < 20 * config::series_max_terms; ++j) {
    power = power * E;
    const CMatrix term = power * ((j % 2 == 1 ? 1.0 : -1.0) / j);
    sum += term;
    if (term.norm() < config::series_term_tol * std::max(sum.norm(), 1e-300)) break;
  }
  return sum;
}

double op_norm(const CMatrix& A) {
  require_finite(A, "op_norm");
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(A);
  return svd.singularValues()(0);
}

CMatrix cholesky(const CMatrix& H) {
  require_square(H, "cholesky");
  require_finite(H, "cholesky");
  // Explicit column-by-column factorization so the failing pivot can be
  // reported.
  const auto n = H.rows();
  CMatrix L = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    cplx d = H(j, j);
    for (Eigen::Index p = 0; p < j; ++p) d -= L(j, p) * std::conj(L(j, p));
    if (!(d.real() > 0.0) || !std::isfinite(d.real()))
      throw FactorizationError(
          "cholesky: matrix not positive definite at pivot " + std::to_string(j),
          static_cast<int>(j));
    const double ljj = std::sqrt(d.real());
    L(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      cplx v = H(i, j);
      for (Eigen::Index p = 0; p < j; ++p) v -= L(i, p) * std::conj(L(j, p));
      L(i, j) = v / ljj;
    }
  }
  return L;
}

CMatrix z_bch(const std::vector<CMatrix>& Xs) {
  if (Xs.empty()) throw InvalidInput("z_bch: empty list");
  const auto n = Xs.front().rows();
  CMatrix prod = CMatrix::Identity(n, n);
  for (const CMatrix& X : Xs) {
    require_square(X, "z_bch");
    if (X.rows() != n) throw InvalidInput("z_bch: dimension mismatch");
    prod = prod * expm(X);
  }
  return logm_principal(prod);
}

}  // namespace symberg
