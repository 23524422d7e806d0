#pragma once

#include <vector>

#include "symberg/diastatic.hpp"
#include "symberg/sympow.hpp"

namespace symberg {

inline const std::vector<std::string> kPhaseVars{"x1", "y", "z"};
inline const std::vector<std::string> kTripleVars{"x", "y", "z"};

// P(x1,y,z) = log(e^{-psi(y,z)} e^{psi(x1,z)}), theta(x,y,z) the segment
// average of d_{x1} P, and the rank-level amplitude tau(x,y,z).
struct PhasePack {
  MatrixJet P;      // kPhaseVars
  MatrixJet theta;  // kTripleVars
  MatrixJet tau;    // kTripleVars, rank level
  bool tau_lifted = false;
};

PhasePack build_phase(const Polarization& psi, int order);
// max norm of theta (x - y) - P(x,y,z), relative to max norm of P.
double phase_identity_residual(const PhasePack& phase);
// tau from e^{-psi(x,z)} e^{psi(y,z)} d_z(e^{-psi(y,z)} e^{psi(x,z)}) / (x - y).
MatrixJet build_tau(const Polarization& psi, int order);
// tau from the series sum_n (x-y)^n ad_{-theta}^n(d_z theta) / (n+1)!.
MatrixJet tau_ad_series(const PhasePack& phase);

// Diagonal values b_{k,m}(x, xb) at the chart center for m = 0..N, together
// with their jets in the antiholomorphic slot (x fixed at the center).
struct CoefficientTable {
  int k = 0;
  int N = 0;
  std::vector<CMatrix> b;
  std::vector<MatrixJet> b_jets;  // vars {"z"}
};

// Recursion with x pinned at the chart center: every jet is in (y, z).
CoefficientTable coeff_recursion(const ChartData& chart, int k, int N);
// Same recursion carried out with x as a third formal variable, dividing by
// (x - y) and restricting to y = x. Used as a cross-check.
CoefficientTable coeff_recursion_full(const ChartData& chart, int k, int N);

// Closed forms from the curvature pack (holomorphic frame, chart center).
//   b0 = s^k(lambdaF)/k
//   b1 = -1/2 L^{-1} Q + 1/2 Scal - 1/2 W,  W = -g^{-1} d_z(L^{-1}) S
//   b1_compact = 1/2 g^{-1} d_z(L^{-1} S) + 1/2 Scal
//   b1_wedge_as_printed = -1/2 L^{-1} Q + 1/2 Scal - 1/2 g^{-1} L^{-1} S L^{-1} d_z(L)
//   b1_main_ordering = -1/2 Q L^{-1} + 1/2 Scal - 1/2 g^{-1} S L^{-1} d_z(L) L^{-1}
// The last two put the wedge factors in the other order. They agree with b1
// for rank 1 only and are kept as diagnostics.
// with L = -s^k(lambdaF), Q = s^k(lambda_laplacian_F), S = s^k(dbar_star_F).
struct ClosedForm {
  CMatrix b0;
  CMatrix b1;
  CMatrix b1_compact;
  CMatrix b1_wedge_as_printed;
  CMatrix b1_main_ordering;
  double forms_gap = 0.0;          // ||b1 - b1_compact||
  double wedge_as_printed_gap = 0.0;  // ||b1 - b1_wedge_as_printed||
  double main_ordering_gap = 0.0;  // ||b1 - b1_main_ordering||
};
ClosedForm closed_form_b0_b1(const ChartData& chart, int k, const DebugOptions& debug = {});

// Line bundles: b0 = Lambda_omega omega', b1 = Scal_omega - 1/2 b0 Scal_omega'
// with omega' = sqrt(-1) F.
struct LineCoefficients {
  double b0 = 0.0;
  double b1 = 0.0;
  double cross_identity = 0.0;  // b0 * Lambda_omega' omega, equal to 1
};
LineCoefficients line_bundle_b0_b1(const ChartData& chart, int k);

// One coefficient b_{k,m} at the chart center from the recursion, next to
// the closed form where one exists (m <= 1; NaN entries otherwise).
//   agreement      ||recursion - closed|| / max(1, ||closed||)
//   scalar_defect  ||b - (tr b / r_k) I|| / max(1, ||b||)
struct CoefficientRow {
  int k = 0;
  int m = 0;
  CMatrix recursion;
  CMatrix closed;  // empty for m >= 2
  double recursion_norm = 0.0;
  double closed_norm = 0.0;
  double agreement = 0.0;
  double scalar_defect = 0.0;
};
std::vector<CoefficientRow> coefficient_report(const ChartData& chart, int k, int N);

// Radius within which the chart's psi jet is trusted for evaluation:
// half the coefficient-decay radius fitted from the jet.
double trust_radius(const ChartData& chart);

// (1/2pi) e^{s^k psi(x, yb)} b_k^{(N)}(x, yb) for x the chart center and
// y = x + w, from jets. This approximates sum_i s_i(y)^* s_i(x) for an
// orthonormal basis of sections written as row vectors.
CMatrix local_kernel_eval(const ChartData& chart, const CoefficientTable& table, cplx w);

// b_k^{(N)} = k sum_m b_{k,m} k^{-m} at the center (or in the z-jet at zb).
CMatrix b_sum(const CoefficientTable& table, int upto);
CMatrix b_sum_at(const CoefficientTable& table, int upto, cplx zb);

}  // namespace symberg
