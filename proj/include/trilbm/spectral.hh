#pragma once

// Matrix-free eigenpairs of the one-step operator.
//
// Krylov-Schur restarted Arnoldi in complex arithmetic with full
// reorthogonalization.  Ritz pairs are re-verified with one extra operator
// application before they are reported.  Runs are deterministic for a fixed
// seed and independent of the worker count.

#include <trilbm/dd.hh>
#include <trilbm/scheme.hh>
#include <trilbm/types.hh>

#include <functional>
#include <vector>

namespace trilbm {

struct ArnoldiOptions {
  int nev = 6;
  int subspace = 0;        // Krylov dimension; 0 picks max(30, 4*nev)
  int max_restarts = 40;
  double tol = 1e-10;      // on |A v - lambda v| / |lambda|
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

struct RitzPair {
  Cplx lambda;
  CVecX v;          // unit norm
  double residual;  // recomputed from a fresh operator application
};

struct SpectrumReport {
  std::vector<RitzPair> pairs;  // sorted by |lambda|, descending
  int operator_applications = 0;
  int restarts = 0;
  bool converged = false;
};

SpectrumReport arnoldi(const std::function<CVecX(const CVecX&)>& apply,
                       Eigen::Index n, const ArnoldiOptions& opt,
                       const CVecX* start = nullptr);

struct PipeDiffusivity {
  double k = 0.0;        // smallest reciprocal wave number of the wrap cell
  Cplx lambda1;          // leading eigenvalue (mass, = 1)
  Cplx lambda0;          // first decaying branch
  Dd lambda0_dd;         // Rayleigh-quotient polish with left/right vectors
  double mu_num = 0.0;   // -sweeps * log(lambda0)/k^2 in lattice units
  double eps = 0.0;      // |mu - mu_num|
  double residual = 0.0;
};

// Diffusivity read off a periodic lattice: Arnoldi for the eigenvalue branch
// just below 1, then a compensated two-sided Rayleigh quotient so the
// comparison against mu survives fourth- and sixth-order parameter sets.
PipeDiffusivity pipe_diffusivity(const Lattice& lat, const SchemeParams& par,
                                 ArnoldiOptions opt = {});

struct DirichletMode {
  Cplx lambda;
  double lambda_num = 0.0;  // (1 - Re lambda)/(mu dt), physical units
  VecX rho;                 // density field, max-norm 1, largest entry positive
  double residual = 0.0;
};

struct DirichletModes {
  std::vector<DirichletMode> modes;  // by |lambda| descending
  double mu = 0.0;
  double dt = 0.0;  // time advanced per operator application (one sweep)
  SpectrumReport report;
};

// Leading decay modes of the walled domain with rho_w = 0.  start_rho seeds
// the Krylov space (useful to stay inside a symmetry class); log_rate = true
// converts with -log(lambda) instead of 1 - lambda.
DirichletModes dirichlet_modes(const Lattice& lat, const SchemeParams& par,
                               int nev, ArnoldiOptions opt = {},
                               const VecX* start_rho = nullptr,
                               bool log_rate = false);

}  // namespace trilbm
