#pragma once

#include <random>

#include "symberg/numerics.hpp"

namespace testutil {

using symberg::CMatrix;
using symberg::cplx;

inline CMatrix random_matrix(std::mt19937& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * cplx(g(rng), g(rng));
  return a;
}

inline CMatrix random_hermitian(std::mt19937& rng, int n, double scale = 1.0) {
  const CMatrix a = random_matrix(rng, n, scale);
  return (a + a.adjoint()) * 0.5;
}

inline CMatrix random_hpd(std::mt19937& rng, int n) {
  const CMatrix a = random_matrix(rng, n);
  return a.adjoint() * a + 0.5 * CMatrix::Identity(n, n);
}

inline double rel_err(const CMatrix& a, const CMatrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace testutil
