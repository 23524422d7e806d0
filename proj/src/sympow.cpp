#include "symberg/sympow.hpp"

#include <cmath>
#include <functional>

#include "symberg/errors.hpp"

namespace symberg {

int SymBasis::index_of(const MultiIndex& n) const {
  const auto it = position.find(n);
  return it == position.end() ? -1 : it->second;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

int sym_rank(int r, int k) { return static_cast<int>(binomial(k + r - 1, r - 1)); }

SymBasis weak_compositions(int k, int r) {
  if (k < 0) throw InvalidInput("weak_compositions: k must be >= 0");
  if (r < 1) throw InvalidInput("weak_compositions: r must be >= 1");
  SymBasis b;
  b.r = r;
  b.k = k;
  MultiIndex cur(r, 0);
  // Slot 0 takes the largest share first, which yields reverse-lex order.
  std::function<void(int, int)> fill = [&](int slot, int remaining) {
    if (slot == r - 1) {
      cur[slot] = remaining;
      b.indices.push_back(cur);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      cur[slot] = v;
      fill(slot + 1, remaining - v);
    }
  };
  fill(0, k);
  for (int i = 0; i < b.size(); ++i) b.position[b.indices[i]] = i;
  return b;
}

namespace {

double log_factorial_multi(const MultiIndex& n) {
  double s = 0.0;
  for (int v : n) s += std::lgamma(v + 1.0);
  return s;
}

void require_matching(const CMatrix& A, const SymBasis& basis, const char* who) {
  require_square(A, who);
  require_finite(A, who);
  if (A.rows() != basis.r) throw InvalidInput(std::string(who) + ": rank mismatch with basis");
}

}  // namespace

CMatrix sym_pow_matrix(const CMatrix& A, int k) {
  require_square(A, "sym_pow_matrix");
  return sym_pow_matrix(A, weak_compositions(k, static_cast<int>(A.rows())));
}

namespace {

// Column-by-column expansion of Sym^k(A): column n holds the coefficients of
// prod_j (sum_i a_ij e_i)^{n_j}, rescaled to the orthonormal basis.
CMatrix column_expansion(const CMatrix& A, const SymBasis& basis, const std::vector<SymBasis>& level,
                         const std::vector<std::vector<std::vector<int>>>& succ) {
  const int r = basis.r;
  const int rk = basis.size();
  CMatrix out(rk, rk);
  for (int col = 0; col < rk; ++col) {
    const MultiIndex& n = basis.indices[col];
    std::vector<cplx> poly(1, cplx(1.0, 0.0));
    int d = 0;
    for (int j = 0; j < r; ++j) {
      for (int rep = 0; rep < n[j]; ++rep) {
        std::vector<cplx> next(level[d + 1].size(), cplx(0.0, 0.0));
        for (int m = 0; m < level[d].size(); ++m) {
          if (poly[m] == cplx(0.0, 0.0)) continue;
          for (int i = 0; i < r; ++i) next[succ[d][m][i]] += poly[m] * A(i, j);
        }
        poly = std::move(next);
        ++d;
      }
    }
    const double lfn = log_factorial_multi(n);
    for (int row = 0; row < rk; ++row)
      out(row, col) = poly[row] * std::exp(0.5 * (log_factorial_multi(basis.indices[row]) - lfn));
  }
  return out;
}

}  // namespace

CMatrix sym_pow_matrix(const CMatrix& A, const SymBasis& basis) {
  require_matching(A, basis, "sym_pow_matrix");
  const int r = basis.r;
  const int k = basis.k;
  std::vector<SymBasis> level;
  level.reserve(k + 1);
  for (int d = 0; d <= k; ++d) level.push_back(d == k ? basis : weak_compositions(d, r));

  // succ[d][m][i] = position of m + e_i in level d + 1.
  std::vector<std::vector<std::vector<int>>> succ(k);
  for (int d = 0; d < k; ++d) {
    succ[d].resize(level[d].size());
    for (int m = 0; m < level[d].size(); ++m) {
      MultiIndex up = level[d].indices[m];
      succ[d][m].resize(r);
      for (int i = 0; i < r; ++i) {
        ++up[i];
        succ[d][m][i] = level[d + 1].index_of(up);
        --up[i];
      }
    }
  }

  // Entries above the diagonal come from the columns of A and entries below
  // it from the columns of A^T. The diagonal averages the two, which keeps
  // Sym^k(A^T) = Sym^k(A)^T exact bit for bit.
  const CMatrix p = column_expansion(A, basis, level, succ);
  const CMatrix q = column_expansion(A.transpose(), basis, level, succ);
  const int rk = basis.size();
  CMatrix out(rk, rk);
  for (int col = 0; col < rk; ++col) {
    for (int row = 0; row < col; ++row) {
      out(row, col) = p(row, col);
      out(col, row) = q(row, col);
    }
    out(col, col) = 0.5 * (p(col, col) + q(col, col));
  }
  return out;
}

CMatrix s_k_lift(const CMatrix& M, int k) {
  require_square(M, "s_k_lift");
  return s_k_lift(M, weak_compositions(k, static_cast<int>(M.rows())));
}

CMatrix s_k_lift(const CMatrix& M, const SymBasis& basis) {
  require_matching(M, basis, "s_k_lift");
  const int r = basis.r;
  const int rk = basis.size();
  CMatrix out = CMatrix::Zero(rk, rk);
  for (int col = 0; col < rk; ++col) {
    const MultiIndex& n = basis.indices[col];
    cplx diag(0.0, 0.0);
    for (int i = 0; i < r; ++i) diag += static_cast<double>(n[i]) * M(i, i);
    out(col, col) = diag;
    for (int j = 0; j < r; ++j) {
      if (n[j] == 0) continue;
      for (int i = 0; i < r; ++i) {
        if (i == j) continue;
        MultiIndex f = n;
        ++f[i];
        --f[j];
        const int row = basis.index_of(f);
        out(row, col) = std::sqrt(static_cast<double>(n[i] + 1) * n[j]) * M(i, j);
      }
    }
  }
  return out;
}

CMatrix sym_pow_metric(const CMatrix& H, int k) {
  require_square(H, "sym_pow_metric");
  require_finite(H, "sym_pow_metric");
  if (hermitian_defect(H) > 1e-10) throw DomainError("sym_pow_metric: metric not Hermitian");
  if (hermitian_eig(H).eigenvalues.minCoeff() <= 0.0)
    throw DomainError("sym_pow_metric: metric not positive definite");
  return sym_pow_matrix(H, k);
}

}  // namespace symberg
