#pragma once

// Every numerical tolerance and default size used by the library lives here.

namespace symberg::config {

// Relative Hermitian-symmetry tolerance for values tagged Hermitian.
inline constexpr double hermitian_tol = 1e-12;
// Series truncation: a term is dropped once its norm falls below this
// fraction of the running sum.
inline constexpr double series_term_tol = 1e-16;
// Scaling-and-squaring target for the general matrix exponential.
inline constexpr double expm_scale_target = 0.5;
// Hard cap on series terms (guards against runaway loops).
inline constexpr int series_max_terms = 400;
// Mercator series for logm is only used when ||A - I|| is below this.
inline constexpr double mercator_radius = 0.99;
// Relative tolerance for the round-trip check inside jet_log.
inline constexpr double jet_log_residual_tol = 1e-9;
// Divisibility by (x - y): relative tolerance against the jet's max norm.
inline constexpr double divide_tol = 1e-9;
// Griffiths positivity threshold for catalog models.
inline constexpr double griffiths_min_eig = 1e-6;
// Sampling grid used to verify positivity of catalog models.
inline constexpr int griffiths_grid = 64;
// Largest Sym^k rank accepted by the recursion.
inline constexpr int max_sym_rank = 256;
// Default quadrature sizes.
inline constexpr int default_quad_radial = 96;
inline constexpr int default_quad_angular = 128;
// Local reproducing check: disk radius and polar rule sizes.
inline constexpr double reproduce_radius = 0.5;
inline constexpr int reproduce_radial = 64;
inline constexpr int reproduce_angular = 96;
// Relative Gram pivot below which the section basis counts as dependent.
inline constexpr double gram_min_pivot = 1e-13;
// Default recursion depth and largest supported depth.
inline constexpr int default_order = 2;
inline constexpr int max_order = 4;
// Default seed for every random stream.
inline constexpr unsigned default_seed = 42;

}  // namespace symberg::config
