#pragma once

// Ready-made experiments: harmonic steady state, fundamental-mode decay,
// walled decay spectra and refinement sweeps.  Each run returns every number
// the acceptance checks and the command line report.

#include <trilbm/lattice.hh>
#include <trilbm/scheme.hh>
#include <trilbm/spectral.hh>
#include <trilbm/types.hh>

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace trilbm {

struct ExperimentConfig {
  std::string param_set = "d2t7-order2";
  int n_edge = 61;      // nodes per side (d2t7) or triangles per side (d2t4)
  double side = 0.0;    // 0 picks the per-experiment default
  double horizon = 4.0 / 3.0;  // physical end time of decay runs
  double steady_tol = 1e-12;   // relative per-step change for steady state
  long max_steps = 2'000'000;
  int nev = 16;
  int subspace = 0;
  int threads = 0;      // 0 = TRI_LBM_THREADS
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
  long dump_every = 0;  // snapshot cadence for stepping runs (0 = off)
  std::function<void(const StepContext&, const FieldState&)> on_dump;
};

struct HarmonicResult {
  double linf = 0.0;
  double l2 = 0.0;
  long steps = 0;
  double final_change = 0.0;  // last per-step max change
  double dx = 0.0;
  VecX rho;
  VecX exact;
  Lattice lat;
};

// steady state with the harmonic wall profile x^2 - y^2 on a centered
// triangle (default side sqrt(3))
HarmonicResult run_harmonic(const ExperimentConfig& cfg);

struct DecayResult {
  double rate = 0.0;           // fitted from the center-value trace
  double rate_expected = 0.0;  // 3 mu for the fundamental mode
  double linf_at_horizon = 0.0;
  double mu = 0.0;
  double zeta = 0.0;  // adjusted so horizon is a whole number of steps
  double dx = 0.0;
  long steps = 0;
  NodeId center = -1;
  std::vector<std::pair<double, double>> center_trace;  // (t, value)
};

// fundamental mode on the triangle scaled so its decay rate is 3 mu
// (effective side 4 pi / 3), run to the horizon
DecayResult run_mode_decay(const ExperimentConfig& cfg);

struct ModeMatch {
  int m = 0, n = 0;
  double lambda_exact = 0.0;  // m^2 + mn + n^2 in the normalized geometry
  double lambda_num = 0.0;
  double overlap = 0.0;       // against the sampled closed-form mode
  double shape_linf = 0.0;    // after least-squares alignment
  double residual = 0.0;
};

struct ModesResult {
  std::vector<ModeMatch> matches;
  DirichletModes spectrum;
  double dx = 0.0;
};

// walled decay spectrum on the normalized triangle; wanted modes are matched
// against the closed-form shapes by overlap
ModesResult run_dirichlet_modes(const ExperimentConfig& cfg,
                                const std::vector<std::pair<int, int>>& wanted);

struct SweepResult {
  std::vector<std::pair<double, double>> h_err;
  double order = 0.0;
};

// runner maps a size to (h, error)
SweepResult convergence_sweep(const std::vector<int>& sizes,
                              const std::function<std::pair<double, double>(int)>& runner);

struct PipeSweep {
  std::vector<double> k;
  std::vector<double> eps;
  std::vector<double> mu_num;
  std::vector<double> residuals;
  double order = 0.0;
};

// diffusivity error against the wrap-cell wave number over a refinement
// ladder of periodic lattices (ny rows kept fixed)
PipeSweep pipe_convergence(const std::string& param_set,
                           const std::vector<int>& nx_ladder, int ny,
                           int subspace = 0);

// builds the triangle lattice an experiment would use (shared by the CLI)
Lattice experiment_lattice(const SchemeParams& par, int n_edge, double side);
// effective Dirichlet side for mode normalization (4 pi / 3 by default)
double mode_side();

}  // namespace trilbm
