#include <trilbm/harness.hh>

#include <trilbm/analysis.hh>
#include <trilbm/exact.hh>

#include <algorithm>
#include <cmath>

namespace trilbm {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

double mu_of(const SchemeParams& par) {
  return par.kind == SchemeKind::d2t7 ? mu_d2t7(par.zeta, par.a3, par.s[1])
                                      : mu_d2t4(par.zeta, par.a3, par.s[1]);
}

// least-squares slope of log err against log h (no span precondition; the
// callers enforce their own)
double loglog_slope(const std::vector<std::pair<double, double>>& h_err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (auto [h, e] : h_err) {
    if (!(h > 0.0) || !(e > 0.0) || !std::isfinite(e)) continue;
    const double x = std::log(h), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 3) throw ConfigError("slope fit needs at least 3 usable points");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

VecX sample_nodes(const Lattice& lat, const std::function<double(const Vec2&)>& f) {
  VecX v(lat.n_nodes());
  for (Eigen::Index i = 0; i < lat.n_nodes(); ++i) v[i] = f(lat.positions.col(i));
  return v;
}

}  // namespace

double mode_side() { return 4.0 * M_PI / 3.0; }

Lattice experiment_lattice(const SchemeParams& par, int n_edge, double side) {
  if (n_edge < 2) throw ConfigError("experiment needs at least 2 nodes per side");
  if (!(side > 0.0)) throw ConfigError("experiment needs a positive side");
  // side refers to the wall triangle: d2t7 walls sit half a link beyond the
  // node hull, d2t4 walls on the outer mesh edges
  Lattice lat = par.kind == SchemeKind::d2t7
                    ? build_d2t7_triangle(n_edge, side / (n_edge + 0.5))
                    : build_d2t4_equilateral(n_edge, side / (n_edge * kSqrt3));
  center_domain(lat);
  return lat;
}

HarmonicResult run_harmonic(const ExperimentConfig& cfg) {
  const SchemeParams par = find_param_set(cfg.param_set);
  // side sqrt(3) reproduces the published steady-state error levels
  const double side = cfg.side > 0.0 ? cfg.side : kSqrt3;

  HarmonicResult res;
  res.lat = experiment_lattice(par, cfg.n_edge, side);
  const Lattice& lat = res.lat;
  res.dx = lat.dx;
  const MomentMatrices mm = transition_matrices(lat, family_for(lat.kind));
  StepContext ctx = make_step_context(
      lat, mm, par,
      BoundarySpec::make_dirichlet([](const Vec2& p, double) { return exact_harmonic(p); }),
      cfg.threads);

  res.exact = sample_nodes(lat, exact_harmonic);
  // the steady state is unique, so start from the oracle to cut the settling
  FieldState state = initial_equilibrium(ctx, res.exact);
  VecX prev = density(ctx, state);
  for (long it = 0; it < cfg.max_steps; ++it) {
    step(ctx, state);
    if (cfg.dump_every > 0 && cfg.on_dump && state.steps % cfg.dump_every == 0) {
      cfg.on_dump(ctx, state);
    }
    const VecX rho = density(ctx, state);
    const double scale = std::max(rho.cwiseAbs().maxCoeff(), 1e-300);
    res.final_change = (rho - prev).cwiseAbs().maxCoeff() / scale;
    prev = rho;
    res.steps = state.steps;
    if (res.final_change <= cfg.steady_tol) break;
  }
  res.rho = prev;
  const VecX err = res.rho - res.exact;
  res.linf = err.cwiseAbs().maxCoeff();
  res.l2 = std::sqrt(err.squaredNorm() / double(err.size()));
  return res;
}

DecayResult run_mode_decay(const ExperimentConfig& cfg) {
  SchemeParams par = find_param_set(cfg.param_set);
  const double side = cfg.side > 0.0 ? cfg.side : mode_side();
  Lattice lat = experiment_lattice(par, cfg.n_edge, side);
  const TriangleMode mode(1, 1, dirichlet_domain_corners(lat));

  DecayResult res;
  res.dx = lat.dx;
  // land the horizon on a whole number of sweeps by retuning zeta
  const long n_steps = std::max<long>(4, std::lround(cfg.horizon / par.dt_sweep(lat.dx)));
  const double dt_sweep = cfg.horizon / double(n_steps);
  par.zeta = lat.dx * lat.dx / (dt_sweep * par.sweeps_per_dt());
  res.zeta = par.zeta;
  res.mu = mu_of(par);
  res.rate_expected = mode.eigenvalue() * res.mu;
  res.steps = n_steps;

  Eigen::Index center = 0;
  lat.positions.colwise().norm().minCoeff(&center);
  res.center = NodeId(center);

  const MomentMatrices mm = transition_matrices(lat, family_for(lat.kind));
  StepContext ctx = make_step_context(
      lat, mm, par, BoundarySpec::make_dirichlet([](const Vec2&, double) { return 0.0; }),
      cfg.threads);
  const VecX rho0 = sample_nodes(lat, [&](const Vec2& p) { return mode(p); });
  FieldState state = initial_equilibrium(ctx, rho0);
  res.center_trace.emplace_back(0.0, rho0[center]);
  VecX rho = rho0;
  for (long it = 0; it < n_steps; ++it) {
    step(ctx, state);
    if (cfg.dump_every > 0 && cfg.on_dump && state.steps % cfg.dump_every == 0) {
      cfg.on_dump(ctx, state);
    }
    rho = density(ctx, state);
    res.center_trace.emplace_back(state.t, rho[center]);
  }

  // rate from the tail of the center trace, after transients have left
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (auto [t, v] : res.center_trace) {
    if (t < cfg.horizon / 4.0 || !(v > 0.0)) continue;
    sx += t;
    sy += std::log(v);
    sxx += t * t;
    sxy += t * std::log(v);
    ++n;
  }
  if (n < 3) throw NumericalError("decay trace too short or nonpositive");
  res.rate = -(n * sxy - sx * sy) / (n * sxx - sx * sx);

  const double decayed = std::exp(-res.rate_expected * state.t);
  res.linf_at_horizon = (rho - decayed * rho0).cwiseAbs().maxCoeff();
  return res;
}

ModesResult run_dirichlet_modes(const ExperimentConfig& cfg,
                                const std::vector<std::pair<int, int>>& wanted) {
  if (wanted.empty()) throw ConfigError("no modes requested");
  const SchemeParams par = find_param_set(cfg.param_set);
  const double side = cfg.side > 0.0 ? cfg.side : mode_side();
  const Lattice lat = experiment_lattice(par, cfg.n_edge, side);
  const std::array<Vec2, 3> corners = dirichlet_domain_corners(lat);

  std::vector<TriangleMode> exact;
  long max_norm = 0;
  for (auto [m, n] : wanted) {
    exact.emplace_back(m, n, corners);
    max_norm = std::max<long>(max_norm, m * m + m * n + n * n);
  }
  // eigenvalues rank below every (a, b) with a^2 + ab + b^2 <= the largest
  // requested one, so the Krylov run must carry that many pairs
  int count = 0;
  for (int a = 1; a * a + a + 1 <= max_norm; ++a) {
    for (int b = 1; a * a + a * b + b * b <= max_norm; ++b) ++count;
  }
  const int nev = std::max(cfg.nev, count + 8);
  ArnoldiOptions opt;
  opt.nev = nev;
  opt.subspace = cfg.subspace > 0 ? cfg.subspace : std::max(60, 2 * nev + 20);
  opt.seed = cfg.seed;

  VecX seed = VecX::Zero(lat.n_nodes());
  for (const TriangleMode& mode : exact) {
    seed += sample_nodes(lat, [&](const Vec2& p) { return mode(p); });
  }

  ModesResult res;
  res.dx = lat.dx;
  res.spectrum = dirichlet_modes(lat, par, nev, opt, &seed);

  for (std::size_t i = 0; i < wanted.size(); ++i) {
    const VecX e = sample_nodes(lat, [&](const Vec2& p) { return exact[i](p); });
    const double enorm = e.norm();
    ModeMatch match;
    match.m = wanted[i].first;
    match.n = wanted[i].second;
    match.lambda_exact = exact[i].eigenvalue();
    const DirichletMode* best = nullptr;
    for (const DirichletMode& mode : res.spectrum.modes) {
      const double overlap = std::abs(e.dot(mode.rho)) / (enorm * mode.rho.norm());
      if (!best || overlap > match.overlap) {
        best = &mode;
        match.overlap = overlap;
      }
    }
    match.lambda_num = best->lambda_num;
    match.residual = best->residual;
    const double alpha = best->rho.dot(e) / best->rho.squaredNorm();
    match.shape_linf = (e - alpha * best->rho).cwiseAbs().maxCoeff();
    res.matches.push_back(match);
  }
  return res;
}

SweepResult convergence_sweep(const std::vector<int>& sizes,
                              const std::function<std::pair<double, double>(int)>& runner) {
  if (sizes.size() < 3) throw ConfigError("refinement sweep needs at least 3 sizes");
  std::vector<int> order = sizes;
  std::sort(order.begin(), order.end());
  SweepResult res;
  for (int n : order) res.h_err.push_back(runner(n));
  double hmin = res.h_err.front().first, hmax = hmin;
  for (auto [h, e] : res.h_err) {
    hmin = std::min(hmin, h);
    hmax = std::max(hmax, h);
  }
  if (!(hmax >= 3.5 * hmin)) throw ConfigError("refinement span too small for a slope fit");
  res.order = loglog_slope(res.h_err);
  return res;
}

PipeSweep pipe_convergence(const std::string& param_set, const std::vector<int>& nx_ladder,
                           int ny, int subspace) {
  if (nx_ladder.size() < 3) throw ConfigError("pipe sweep needs at least 3 sizes");
  const SchemeParams par = find_param_set(param_set);
  PipeSweep res;
  std::vector<std::pair<double, double>> k_eps;
  for (int nx : nx_ladder) {
    const Lattice lat = par.kind == SchemeKind::d2t7 ? build_d2t7_periodic(nx, ny, 1.0)
                                                     : build_d2t4_periodic(nx, ny, 1.0);
    ArnoldiOptions opt;
    opt.subspace = subspace > 0 ? subspace : 48;
    const PipeDiffusivity pd = pipe_diffusivity(lat, par, opt);
    res.k.push_back(pd.k);
    res.eps.push_back(pd.eps);
    res.mu_num.push_back(pd.mu_num);
    res.residuals.push_back(pd.residual);
    k_eps.emplace_back(pd.k, pd.eps);
  }
  res.order = loglog_slope(k_eps);
  return res;
}

}  // namespace trilbm
