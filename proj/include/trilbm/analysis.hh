#pragma once

// Equivalent-equation coefficients and the one-point (Bloch) dispersion
// analysis, everything in lattice units dx = 1, zeta = 1.
//
// A plane wave turns the scheme into a small amplification matrix.  On the
// Bravais lattice the q x q symbol is exact.  On the two-orientation
// centroid lattice two matrices coexist: the exact 2q x 2q symbol of the
// cell pair (real, even in k; used for stability) and the q x q
// regular-profile reduction behind the published dispersion orders, which
// pretends both orientations carry one smooth profile and thereby keeps the
// odd error terms.  The physical branch continues from the conserved
// eigenvalue 1 at k = 0; the numerical diffusivity is read off as
// mu_num = -sweeps * log(lambda) / k^2 so that no spurious second-order
// term from the exponential survives.  Branch values are polished with a
// compensated Newton step so |mu - mu_num| stays meaningful down to
// k = 1e-3 for the high-order parameter sets.

#include <trilbm/dd.hh>
#include <trilbm/scheme.hh>
#include <trilbm/types.hh>

#include <vector>

namespace trilbm {

inline double henon_sigma(double s) { return 1.0 / s - 0.5; }

// d2t7 diffusivity: mu = zeta a3 sigma1 / 2
double mu_d2t7(double zeta, double a3, double s1);

// coefficient of the fourth-order term in the d2t7 equivalent equation
// (no advection); zero marks the quartic parameter sets
double theta_d2t7(double zeta, double a3, double s1, double s3, double s4);

// d2t4 diffusivity: mu = zeta a3 sigma1 (no factor 1/2)
double mu_d2t4(double zeta, double a3, double s1);

// coefficient of the odd third-derivative term that limits generic d2t4
// parameters to first order: (a3 zeta / 24)(12 sigma1^2 - 1)
double d2t4_first_order_coeff(double zeta, double a3, double s1);

// the published parameter sets (three d2t7, the d2t4 stem and its four
// completions), 15-digit values as published
std::vector<SchemeParams> builtin_param_sets();
SchemeParams find_param_set(const std::string& name);

// amplification matrix at wave vector k (lattice units); q x q, the
// regular-profile reduction on the two-orientation lattice
CMatX one_point_matrix(const SchemeParams& par, const Vec2& k);
// same matrix with compensated phases, for the Newton polish
CDdMat one_point_matrix_dd(const SchemeParams& par, const Vec2& k);
// exact symbol of the two-orientation cell pair (2q x 2q); falls back to
// one_point_matrix on the Bravais lattice
CMatX two_cell_matrix(const SchemeParams& par, const Vec2& k);

// all eigenvalues at |k|, angle theta (radians)
CVecX one_point_spectrum(const SchemeParams& par, double k, double theta);

struct DispersionPoint {
  double k = 0.0;
  double theta = 0.0;
  Cplx lambda;      // physical branch
  CDd lambda_dd;    // polished value
  Cplx mu_num;      // -sweeps * log(lambda)/k^2, compensated
  double eps = 0.0; // |mu - mu_num|
};

// follows the physical branch over a log-spaced k grid at fixed theta;
// throws NumericalError if the branch continuation becomes ambiguous
std::vector<DispersionPoint> dispersion_branch(const SchemeParams& par,
                                               double kmin, double kmax, int nk,
                                               double theta);

// least-squares slope of log(err) against log(h); needs >= 3 points spanning
// at least one decade in h
double measured_order(const std::vector<std::pair<double, double>>& h_err);

// max - min of eps over the angle grid at fixed |k|
double dispersion_anisotropy(const SchemeParams& par, double k,
                             const std::vector<double>& thetas);

// default angle grid: 0,15,...,90 degrees in radians
std::vector<double> default_theta_grid();

// spectral radius over a grid of Bloch vectors covering the reciprocal cell
double bloch_spectral_radius(const SchemeParams& par, int grid);

}  // namespace trilbm
