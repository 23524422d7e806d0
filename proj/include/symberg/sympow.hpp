#pragma once

#include <map>
#include <vector>

#include "symberg/numerics.hpp"

namespace symberg {

// A weak composition n = (n_1, ..., n_r); its degree is the sum of parts.
using MultiIndex = std::vector<int>;

// Ordered basis u_n = e_n / sqrt(n!) of Sym^k of an r-dimensional space.
// The order is graded reverse-lexicographic: for r = 2, k = 2 it is
// (2,0), (1,1), (0,2).
struct SymBasis {
  int r = 0;
  int k = 0;
  std::vector<MultiIndex> indices;
  std::map<MultiIndex, int> position;

  int size() const { return static_cast<int>(indices.size()); }
  int index_of(const MultiIndex& n) const;  // -1 when absent
};

long long binomial(int n, int k);
// r_k = binomial(k + r - 1, r - 1).
int sym_rank(int r, int k);

SymBasis weak_compositions(int k, int r);

// Matrix of Sym^k A in the u_n basis.
CMatrix sym_pow_matrix(const CMatrix& A, int k);
CMatrix sym_pow_matrix(const CMatrix& A, const SymBasis& basis);

// The derivative of Sym^k at the identity, applied to M.
CMatrix s_k_lift(const CMatrix& M, int k);
CMatrix s_k_lift(const CMatrix& M, const SymBasis& basis);

// Sym^k of a Hermitian positive-definite metric matrix.
CMatrix sym_pow_metric(const CMatrix& H, int k);

}  // namespace symberg
