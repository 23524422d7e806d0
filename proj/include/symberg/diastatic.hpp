#pragma once

#include "symberg/geometry.hpp"

namespace symberg {

// psi(y, z), holomorphic in each slot, with psi(y, conj(y)) = phi(y).
struct Polarization {
  MatrixJet psi;  // vars kPolarVars
};

// D at a center x as a jet in u = y - x and v = conj(y) - conj(x).
struct DiastasisJet {
  MatrixJet D;  // vars {"u", "v"}
  cplx center{0.0, 0.0};
};

inline const std::vector<std::string> kDiastasisVars{"u", "v"};

// Relation between the (1,1) coefficient of D and the curvature:
//   D_{1,1} = kCurvatureLinkSign * h^{-1/2} F_tilde h^{1/2},  h = e^{-phi(x)}.
// Fixed by the flat oracle (phi = |y|^2 gives D = -|u|^2 and F_tilde = 1).
inline constexpr double kCurvatureLinkSign = -1.0;

Polarization polarize(const MatrixJet& phi_jet);

// Five-factor product e^{-phi(x)/2} e^{psi(y,xb)} e^{-phi(y)} e^{psi(x,yb)}
// e^{-phi(x)/2} = e^{D(x,y)} at the chart center, as jets.
DiastasisJet diastasis_jet(const MatrixJet& phi_jet, int order);

// Pointwise D(x, y) for a global model (Hermitian).
CMatrix diastasis_point(const BundleModel& model, cplx x, cplx y);

// || expm(s^k(D(x,y))) ||_op.
double sym_power_decay_check(const BundleModel& model, cplx x, cplx y, int k);

// Sample points in the disk |z| < radius on a sunflower spiral (deterministic).
std::vector<cplx> disk_sample_points(int count, double radius);

// Eigenvalue estimate over all ordered pairs of distinct sample points:
//   delta = min over pairs of -lambda_max(D(x,y)) / |x - y|^2
//   decay_excess = max over pairs and 1 <= k <= kmax of
//                  log||expm(s^k D)|| - k lambda_max(D)
struct EigenvalueEstimate {
  double delta = 0.0;
  double decay_excess = 0.0;
  int pairs = 0;
};
EigenvalueEstimate eigenvalue_estimate(const BundleModel& model, int count, double radius, int kmax);

// e^{D} as a jet: the metric in the K-frame centered at the chart center.
MatrixJet k_frame_metric(const MatrixJet& phi_jet, int order);

// ||D_{1,1} - sign h^{-1/2} (g lambdaF) h^{1/2}|| relative to ||D_{1,1}||
// at the chart center, with lambdaF taken from the curvature pack.
double curvature_link_residual(const ChartData& chart, const DebugOptions& debug = {});

// Largest relative norm among the pure coefficients D_{a,0}, D_{0,b}.
double pure_coefficient_defect(const DiastasisJet& d);

}  // namespace symberg
