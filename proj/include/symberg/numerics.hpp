#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace symberg {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Callers state whether a matrix is Hermitian; it is never guessed.
enum class Structure { general, hermitian };

// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
struct Spectrum {
  RVector eigenvalues;
  CMatrix eigenvectors;  // columns, unitary
};

// Throws InvalidInput when A has a NaN or infinite entry.
void require_finite(const CMatrix& A, const char* who);
void require_square(const CMatrix& A, const char* who);

Spectrum hermitian_eig(const CMatrix& A);

// e^A. Hermitian input goes through the eigendecomposition; general input
// through scaling and squaring of a Taylor series.
CMatrix expm(const CMatrix& A, Structure s = Structure::general);

// Principal logarithm. Hermitian input must be positive definite; general
// input must satisfy ||A - I||_op < 1 (Mercator series).
CMatrix logm_principal(const CMatrix& A, Structure s = Structure::general);

// Largest singular value.
double op_norm(const CMatrix& A);

// Lower-triangular L with L L^* = H.
CMatrix cholesky(const CMatrix& H);

// log(e^{X_1} ... e^{X_p}).
CMatrix z_bch(const std::vector<CMatrix>& Xs);

// f(H) for Hermitian H via its spectrum (f applied to eigenvalues).
CMatrix hermitian_function(const CMatrix& H, double (*f)(double));
CMatrix sqrtm_hpd(const CMatrix& H);
CMatrix inv_sqrtm_hpd(const CMatrix& H);

// (A + A^*)/2
CMatrix hermitian_part(const CMatrix& A);

// max_ij |A_ij - A^*_ij| relative to max |A_ij| (0 for the zero matrix).
double hermitian_defect(const CMatrix& A);

}  // namespace symberg
