#pragma once

#include <random>
#include <string>
#include <vector>

#include "symberg/config.hpp"
#include "symberg/geometry.hpp"
#include "symberg/sympow.hpp"

namespace symberg {

// Gauss-Legendre nodes and weights on (0, 1), by Golub-Welsch.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre01(int n);

// Product rule on the affine chart of P^1. The radial variable is
// t = |z|^2/(1+|z|^2) with Gauss-Legendre nodes, the angle is uniform, and
// the weights include the Kaehler density, so sum_i w_i f(z_i) approximates
// the integral of f omega.
struct QuadratureRule {
  int radial = 0;
  int angular = 0;
  std::vector<cplx> nodes;
  std::vector<double> weights;
  std::string id() const;
};
QuadratureRule sphere_quadrature(const BundleModel& model, int radial = config::default_quad_radial,
                                 int angular = config::default_quad_angular);
// Polar rule on the disk |z - center| < radius with the same weighting.
QuadratureRule disk_quadrature(const BundleModel& model, cplx center, double radius, int radial,
                               int angular);

// Holomorphic sections of Sym^k E: section i is
//   scale_i z^{power_i} u_{slot_i},  0 <= power_i <= slot_degree(slot_i),
// with scale = sqrt(binomial(D, power)) so the sections are well scaled
// under the Fubini-Study weight. Ordered by slot, then by power.
struct SectionBasis {
  int k = 0;
  SymBasis sym;
  std::vector<int> slot;
  std::vector<int> power;
  std::vector<int> degree;  // slot degree D of each section
  std::vector<double> scale;
  int size() const { return static_cast<int>(slot.size()); }
};
SectionBasis section_basis(const BundleModel& model, int k);
// d_k x r_k matrix whose rows are the section values in the standard frame.
CMatrix section_values(const SectionBasis& basis, cplx z);

// True when Sym^k h is diagonal in the section basis (split bundles and the
// untwisted tensor product), so gram() pairs sections slot by slot.
bool uses_diagonal_gram(const BundleModel& model);

// Gram matrix of the section basis under Sym^k h and omega.
CMatrix gram(const BundleModel& model, const SectionBasis& basis, const QuadratureRule& quad);

struct BergmanSample {
  int k = 0;
  cplx x;
  CMatrix B;  // orthonormal frame of Sym^k h at x
  double op_norm = 0.0;
  double trace = 0.0;
  std::string model_id;
  std::string quad_id;
};

// Orthonormalized section basis of one (model, k, quadrature).
class BergmanSolver {
 public:
  BergmanSolver(const BundleModel& model, int k, const QuadratureRule& quad);

  const BundleModel& model() const { return model_; }
  int k() const { return k_; }
  const SectionBasis& basis() const { return basis_; }
  const CMatrix& gram() const { return gram_; }
  const QuadratureRule& quadrature() const { return quad_; }
  int dimension() const { return basis_.size(); }

  // Rows: orthonormal sections at x in the standard frame.
  CMatrix orthonormal_values(cplx x) const;
  // Rows: orthonormal sections at x in the orthonormal frame of Sym^k h(x).
  CMatrix orthonormal_frame_values(cplx x) const;
  BergmanSample at(cplx x) const;
  // sum_i s_i(y)^* s_i(x) in the standard frame.
  CMatrix kernel(cplx y, cplx x) const;
  // Integral of tr B_k omega, with the integral evaluated on `refined`.
  double trace_integral(const QuadratureRule& refined) const;

 private:
  BundleModel model_;
  int k_;
  QuadratureRule quad_;
  SectionBasis basis_;
  CMatrix gram_;
  CMatrix chol_;  // lower factor of gram_
};

BergmanSample bergman_function(const BundleModel& model, int k, cplx x, const QuadratureRule& quad);

// Largest ||s(x)||^2 / (s, s) over the top eigenvector of B_k(x) pulled back
// to a section and `trials` random perturbations of it.
double extremal_lower_bound(const BergmanSolver& solver, cplx x, int trials, std::mt19937_64& rng);

// Pointwise densities: tr F_tilde of h and Scal_omega at z.
double trace_curvature_density(const BundleModel& model, cplx z);
double scal_density(const BundleModel& model, cplx z);

// Integrals entering the Riemann-Roch comparison.
//   curvature: integral of tr(sqrt(-1) F) for Sym^k h
//   scal:      integral of Scal_omega omega
double curvature_integral(const BundleModel& model, int k, const QuadratureRule& quad);
double scal_integral(const BundleModel& model, const QuadratureRule& quad);

struct RiemannRochConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};
// Solves d_k = c1 curvature + c2 r_k scal on fs_line(1) at k = 1, 2.
RiemannRochConstants pin_riemann_roch(const QuadratureRule& quad_template);

struct RiemannRochRecord {
  std::string model;
  int k = 0;
  int r_k = 0;
  int d_k = 0;
  double curvature_integral = 0.0;
  double scal_integral = 0.0;
  double predicted = 0.0;
  double error = 0.0;
  double error_times_k_over_rk = 0.0;
  double trace_integral = 0.0;  // NaN when not requested
};
int section_count(const BundleModel& model, int k);
RiemannRochRecord riemann_roch_report(const BundleModel& model, int k, const RiemannRochConstants& c,
                                      int radial = config::default_quad_radial,
                                      int angular = config::default_quad_angular,
                                      bool with_trace = false);

// (1/2pi) H^{-1/2} b_k^{(N)} H^{1/2} at x, the expansion in the orthonormal
// frame, with b from the recursion on the chart at x.
CMatrix expansion_prediction(const BundleModel& model, int k, int N, cplx x);

struct CompareRow {
  std::string model;
  int k = 0;
  cplx x;
  double residual_op_norm = 0.0;
  double b0k_norm = 0.0;
  double fitted_exponent = 0.0;  // per point, over the k list
};
// Slope of the least-squares line through (log x, log y).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
std::vector<CompareRow> compare_expansion(const BundleModel& model, const std::vector<int>& k_list,
                                          const std::vector<cplx>& points, int N,
                                          int radial = config::default_quad_radial,
                                          int angular = config::default_quad_angular);

// Plot data for one sample point: log k against log residual.
struct DecaySeries {
  cplx x;
  std::vector<int> k;
  std::vector<double> log_k;
  std::vector<double> log_residual;
};
// One series per distinct point, in order of first appearance.
std::vector<DecaySeries> decay_series(const std::vector<CompareRow>& rows);

// Reproduction residuals |u(x) - (u, K_k^(N)(., x))_disk| / ||u||, for the
// basis sections listed in `sections`, integrating over |y - x| < radius.
std::vector<double> reproducing_check(const BundleModel& model, int k, int N, cplx x,
                                      const std::vector<int>& sections,
                                      double radius = config::reproduce_radius);

}  // namespace symberg
