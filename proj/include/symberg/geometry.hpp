#pragma once

#include <random>
#include <string>
#include <vector>

#include "symberg/matjet.hpp"
#include "symberg/sympow.hpp"

namespace symberg {

// Chart variable names: "y" is the holomorphic coordinate and "yb" its
// conjugate treated as an independent formal variable, both centered.
inline const std::vector<std::string> kChartVars{"y", "yb"};
// Polarized variables: first slot holomorphic, second slot antiholomorphic.
inline const std::vector<std::string> kPolarVars{"y", "z"};

// Local real-analytic data at a point: h = e^{-phi} and the Kaehler
// density g with omega = sqrt(-1) g dy ^ dyb.
struct ChartData {
  int rank = 0;
  MatrixJet phi;  // dim rank, vars kChartVars
  MatrixJet g;    // dim 1, vars kChartVars
  cplx center{0.0, 0.0};
};

// Curvature quantities as jets in the polarized variables (y, z).
//   F_tilde           F = F_tilde dy ^ dz with F_tilde = -d_z(d_y(H) H^{-1}), H = e^{-psi}
//   lambdaF           g^{-1} F_tilde (positive for positive bundles)
//   dbar_star_F       -H d_y(g^{-1} H^{-1} F_tilde H) H^{-1}
//   lambda_laplacian_F  -g^{-1} d_z(dbar_star_F)
//   scal              -g^{-1} d_z(d_y(g) g^{-1})
//   eta               d_y(H) H^{-1}
struct CurvaturePack {
  MatrixJet F_tilde;
  MatrixJet lambdaF;
  MatrixJet lambda_laplacian_F;
  MatrixJet dbar_star_F;
  MatrixJet scal;
  MatrixJet eta;
  MatrixJet g_inv;  // g^{-1} polarized, dim 1
  CMatrix h0;       // metric value e^{-phi(center)}
};

// Negative controls for the self-test suite.
struct DebugOptions {
  bool flip_lambdaF_sign = false;
};

enum class KahlerKind { fubini_study, flat_chart, density_expr };

// omega = sqrt(-1) g dy ^ dyb with, for density_expr,
//   g = fs_weight (1+|z|^2)^{-2} + perturbation (1-|z|^2)(1+|z|^2)^{-3}
// (the second term is d d-bar of |z|^2/(1+|z|^2)); fubini_study is
// fs_weight = 1, perturbation = 0; flat_chart is g = 1 (local use only).
struct KahlerSpec {
  KahlerKind kind = KahlerKind::fubini_study;
  double fs_weight = 1.0;
  double perturbation = 0.0;
};

// h = (1+|z|^2)^{-d} exp(-epsilon |z|^2/(1+|z|^2)) on O(d).
struct LineSpec {
  int d = 1;
  double epsilon = 0.0;
};

enum class ModelKind { fs_line, direct_sum, twisted_trivial };

// Global Hermitian bundle on P^1 with closed-form metric in the standard
// frame over the affine chart.
//   fs_line:         one LineSpec
//   direct_sum:      several LineSpecs, diagonal metric
//   twisted_trivial: O(a) tensor C^r with h = (1+|z|^2)^{-a} A A^*,
//                    A = I + epsilon w N, w = z/(1+|z|^2), N = sum E_{i,i+1}
class BundleModel {
 public:
  static BundleModel fs_line(int d, double epsilon = 0.0, KahlerSpec kahler = {});
  static BundleModel direct_sum(std::vector<LineSpec> lines, KahlerSpec kahler = {});
  static BundleModel twisted_trivial(int a, int r, double epsilon, KahlerSpec kahler = {});
  // Parses the JSON model schema; throws ConfigError.
  static BundleModel from_json(const std::string& text);

  ModelKind kind() const { return kind_; }
  const std::vector<LineSpec>& lines() const { return lines_; }
  int a() const { return a_; }
  double epsilon() const { return eps_; }
  const KahlerSpec& kahler() const { return kahler_; }
  int rank() const;
  std::string id() const;
  std::string to_json() const;

  // h(z) in the standard frame.
  CMatrix metric(cplx z) const;
  // Polarized metric: holomorphic in y, antiholomorphic data enters through
  // zb; metric_polarized(z, conj(z)) = metric(z). Equals e^{-psi(y, zb)}.
  CMatrix metric_polarized(cplx y, cplx zb) const;
  // Kaehler density g(z); throws for flat_chart on global use.
  double density(cplx z) const;
  double total_volume() const;  // integral of omega over P^1

  // Degree of the line subbundle spanned by u_n in Sym^k: sections are
  // polynomials of degree <= slot_degree times e_n.
  int slot_degree(const MultiIndex& n) const;
  // Bounded part of Sym^k h: G_{mn} = (1+|z|^2)^{-(D_m+D_n)/2} Ghat_{mn}.
  CMatrix sym_metric_bounded(cplx z, const SymBasis& basis) const;

  // Jets of phi = -log h and of g at center, built by jet arithmetic.
  MatrixJet phi_jet(cplx center, int order) const;
  MatrixJet density_jet(cplx center, int order) const;

  // Smallest eigenvalue of the curvature endomorphism over a stereographic
  // grid; throws DomainError when below the positivity threshold.
  double verify_griffiths_positive(int grid = 0) const;

 private:
  ModelKind kind_ = ModelKind::fs_line;
  std::vector<LineSpec> lines_;
  int a_ = 0;
  int r_ = 1;
  double eps_ = 0.0;
  KahlerSpec kahler_;
};

ChartData chart_from_model(const BundleModel& model, cplx center, int order);
CurvaturePack curvature_pack(const ChartData& chart, const DebugOptions& debug = {});
MatrixJet scalar_curvature_of_density(const MatrixJet& g_polar);

// Relabel yb as z (checks Hermitian symmetry of the chart jet).
MatrixJet polarize_jet(const MatrixJet& chart_jet);
// Max relative defect of Hermitian symmetry of a chart jet.
double hermitian_symmetry_defect(const MatrixJet& chart_jet);

// Test charts. random_positive_chart: Griffiths-positive rank-r data with a
// random positive density. he_chart: phi = f I - log(T T^*) with T
// holomorphic and g = (d d-bar f)/c, so that lambdaF = c I.
ChartData random_positive_chart(std::mt19937_64& rng, int rank, int order, double strength = 0.3);
ChartData random_line_chart(std::mt19937_64& rng, int order);
ChartData he_chart(std::mt19937_64& rng, int rank, int order, double c);
ChartData bargmann_fock_chart(int rank, int order);

}  // namespace symberg
