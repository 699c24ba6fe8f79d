#include <trilbm/spectral.hh>

#include <trilbm/analysis.hh>

#include <algorithm>
#include <cmath>
#include <limits>

namespace trilbm {

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

CVecX random_start(Eigen::Index n, std::uint64_t seed) {
  std::uint64_t s = seed;
  CVecX v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = double(splitmix(s) >> 11) * 0x1.0p-52 - 1.0;
    const double im = double(splitmix(s) >> 11) * 0x1.0p-52 - 1.0;
    v[i] = Cplx(re, im);
  }
  const double nrm = v.norm();
  if (nrm == 0.0) throw NumericalError("degenerate start vector");
  return v / nrm;
}

// unitary swap of the adjacent diagonal entries i, i+1 of triangular T
void swap_diag(CMatX& T, CMatX& U, Eigen::Index i) {
  const Cplx d = T(i + 1, i + 1) - T(i, i);
  const Cplx t = T(i, i + 1);
  const double r = std::hypot(std::abs(t), std::abs(d));
  if (std::abs(d) == 0.0 || r == 0.0) return;  // equal eigenvalues: nothing to move
  Eigen::Matrix2cd Q;
  // first column is the unit eigenvector (t, d)/r of the 2x2 block
  Q << t / r, -std::conj(d) / r, d / r, std::conj(t) / r;
  T.middleRows(i, 2) = Q.adjoint() * T.middleRows(i, 2);
  T.middleCols(i, 2) = T.middleCols(i, 2) * Q;
  U.middleCols(i, 2) = U.middleCols(i, 2) * Q;
  T(i + 1, i) = 0.0;
}

// reorder the Schur form so |T(i,i)| is non-increasing
void sort_schur(CMatX& T, CMatX& U) {
  const Eigen::Index m = T.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index best = i;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (std::abs(T(j, j)) > std::abs(T(best, best))) best = j;
    }
    for (Eigen::Index j = best; j > i; --j) swap_diag(T, U, j - 1);
  }
}

Dd mu_ref_dd(const SchemeParams& par) {
  const Dd sigma1 = Dd(1.0) / Dd(par.s[1]) - Dd(0.5);
  Dd mu = Dd(par.zeta) * Dd(par.a3) * sigma1;
  if (par.kind == SchemeKind::d2t7) mu = mu / Dd(2.0);
  return mu;
}

}  // namespace

SpectrumReport arnoldi(const std::function<CVecX(const CVecX&)>& apply, Eigen::Index n,
                       const ArnoldiOptions& opt, const CVecX* start) {
  if (n < 1) throw ConfigError("arnoldi needs a nonempty space");
  if (opt.nev < 1) throw ConfigError("arnoldi needs nev >= 1");
  const Eigen::Index nev = std::min<Eigen::Index>(opt.nev, n);
  Eigen::Index m = opt.subspace > 0 ? opt.subspace : std::max<Eigen::Index>(30, 4 * nev);
  m = std::min(m, n);
  m = std::max(m, std::min(n, nev + 2));

  CMatX V = CMatX::Zero(n, m + 1);
  CMatX H = CMatX::Zero(m + 1, m);
  if (start) {
    if (start->size() != n) throw ConfigError("arnoldi start vector has the wrong size");
    const double nrm = start->norm();
    if (!(nrm > 0.0)) throw ConfigError("arnoldi start vector is zero");
    V.col(0) = *start / nrm;
  } else {
    V.col(0) = random_start(n, opt.seed);
  }

  SpectrumReport rep;
  Eigen::Index k = 0;  // compressed leading block
  CMatX T, U;
  double beta = 0.0;

  for (int r = 0; r <= opt.max_restarts; ++r) {
    for (Eigen::Index j = k; j < m; ++j) {
      CVecX w = apply(V.col(j));
      ++rep.operator_applications;
      const double scale = std::max(w.norm(), 1e-300);
      for (int pass = 0; pass < 2; ++pass) {
        const CVecX c = V.leftCols(j + 1).adjoint() * w;
        w -= V.leftCols(j + 1) * c;
        H.col(j).head(j + 1) += c;
      }
      beta = w.norm();
      if (beta <= 1e-12 * scale) {
        // invariant subspace: restart the basis in its orthogonal complement
        H(j + 1, j) = 0.0;
        if (j + 1 < n) {
          w = random_start(n, opt.seed + std::uint64_t(j) + 1);
          for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w);
          const double nrm = w.norm();
          if (nrm > 1e-8) {
            V.col(j + 1) = w / nrm;
          } else {
            V.col(j + 1).setZero();
          }
        } else {
          V.col(j + 1).setZero();
        }
        beta = 0.0;
      } else {
        H(j + 1, j) = beta;
        V.col(j + 1) = w / beta;
      }
    }

    Eigen::ComplexSchur<CMatX> schur(H.topLeftCorner(m, m));
    if (schur.info() != Eigen::Success) throw NumericalError("schur factorization failed");
    T = schur.matrixT();
    U = schur.matrixU();
    sort_schur(T, U);

    bool done = true;
    for (Eigen::Index i = 0; i < nev; ++i) {
      const double res = std::abs(beta) * std::abs(U(m - 1, i));
      if (res > opt.tol * std::max(1.0, std::abs(T(i, i)))) {
        done = false;
        break;
      }
    }
    rep.restarts = r;
    if (done) {
      rep.converged = true;
      break;
    }
    if (r == opt.max_restarts) break;

    // Krylov-Schur compression: keep the leading Schur vectors plus the
    // coupling row, then grow the basis again
    const Eigen::Index keep = std::min(m - 1, nev + (m - nev) / 2);
    const CMatX Vk = V.leftCols(m) * U.leftCols(keep);
    V.leftCols(keep) = Vk;
    V.col(keep) = V.col(m);
    const Eigen::RowVectorXcd b = beta * U.row(m - 1).head(keep);
    H.setZero();
    H.topLeftCorner(keep, keep) = T.topLeftCorner(keep, keep);
    H.row(keep).head(keep) = b;
    k = keep;
  }

  // Ritz vectors for the leading diagonal entries of the sorted Schur form
  Eigen::ComplexEigenSolver<CMatX> es(T);
  if (es.info() != Eigen::Success) throw NumericalError("ritz extraction failed");
  std::vector<bool> used(std::size_t(m), false);
  for (Eigen::Index i = 0; i < nev; ++i) {
    Eigen::Index pick = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < m; ++c) {
      if (used[std::size_t(c)]) continue;
      const double d = std::abs(es.eigenvalues()[c] - T(i, i));
      if (d < best) {
        best = d;
        pick = c;
      }
    }
    used[std::size_t(pick)] = true;
    RitzPair p;
    p.lambda = es.eigenvalues()[pick];
    p.v = V.leftCols(m) * (U * es.eigenvectors().col(pick));
    p.v /= p.v.norm();
    const CVecX resid = apply(p.v) - p.lambda * p.v;
    ++rep.operator_applications;
    p.residual = resid.norm();
    rep.pairs.push_back(std::move(p));
  }
  std::sort(rep.pairs.begin(), rep.pairs.end(),
            [](const RitzPair& a, const RitzPair& b) { return std::abs(a.lambda) > std::abs(b.lambda); });
  if (rep.converged) {
    for (Eigen::Index i = 0; i < nev; ++i) {
      const RitzPair& p = rep.pairs[std::size_t(i)];
      if (p.residual > 10.0 * opt.tol * std::max(1.0, std::abs(p.lambda))) {
        rep.converged = false;
        break;
      }
    }
  }
  return rep;
}

PipeDiffusivity pipe_diffusivity(const Lattice& lat, const SchemeParams& par, ArnoldiOptions opt) {
  if (lat.wraps.size() != 2) throw ConfigError("pipe diffusivity needs a doubly periodic lattice");
  const MomentMatrices mm = transition_matrices(lat, family_for(lat.kind));
  const StepContext ctx = make_step_context(lat, mm, par, BoundarySpec::make_periodic());
  const Eigen::Index n = ctx.dof();
  opt.nev = std::max(opt.nev, 6);

  const SpectrumReport rep =
      arnoldi([&](const CVecX& x) { return operator_apply(ctx, x); }, n, opt);

  // smallest nonzero reciprocal wave number of the wrap cell, lattice units
  Eigen::Matrix2d B;
  B.col(0) = lat.wraps[0] / lat.dx;
  B.col(1) = lat.wraps[1] / lat.dx;
  const Eigen::Matrix2d G = 2.0 * M_PI * B.inverse().transpose();
  double k = std::numeric_limits<double>::infinity();
  for (int m1 = -2; m1 <= 2; ++m1) {
    for (int m2 = -2; m2 <= 2; ++m2) {
      if (m1 == 0 && m2 == 0) continue;
      k = std::min(k, (double(m1) * G.col(0) + double(m2) * G.col(1)).norm());
    }
  }

  PipeDiffusivity out;
  out.k = k;
  std::size_t mass = 0;
  for (std::size_t i = 1; i < rep.pairs.size(); ++i) {
    if (std::abs(rep.pairs[i].lambda - 1.0) < std::abs(rep.pairs[mass].lambda - 1.0)) mass = i;
  }
  std::size_t lead = mass == 0 ? 1 : 0;
  for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
    if (i == mass) continue;
    if (std::abs(rep.pairs[i].lambda) > std::abs(rep.pairs[lead].lambda)) lead = i;
  }
  out.lambda1 = rep.pairs[mass].lambda;
  out.lambda0 = rep.pairs[lead].lambda;
  out.residual = rep.pairs[lead].residual;
  // exact +-k degeneracy fills the tail with round-off-seeded duplicates, so
  // gate on the two pairs this measurement uses rather than the full report
  if (rep.pairs[mass].residual > 100.0 * opt.tol || out.residual > 100.0 * opt.tol) {
    throw NumericalError("pipe branch did not converge");
  }

  // left eigenvector from the plain transpose, then a compensated two-sided
  // Rayleigh quotient
  const SpectrumReport repT =
      arnoldi([&](const CVecX& x) { return operator_apply_transpose(ctx, x); }, n, opt);
  std::size_t tlead = 0;
  for (std::size_t i = 1; i < repT.pairs.size(); ++i) {
    if (std::abs(repT.pairs[i].lambda - out.lambda0) <
        std::abs(repT.pairs[tlead].lambda - out.lambda0)) {
      tlead = i;
    }
  }
  if (repT.pairs[tlead].residual > 100.0 * opt.tol) {
    throw NumericalError("pipe transpose branch did not converge");
  }

  const CVecX& v = rep.pairs[lead].v;
  const CVecX& w = repT.pairs[tlead].v;
  std::vector<CDd> vd(static_cast<std::size_t>(n)), Av(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) vd[std::size_t(i)] = to_cdd(v[i]);
  apply_step_linear<CDd>(ctx, vd.data(), Av.data());
  CDd num{}, den{};
  for (Eigen::Index i = 0; i < n; ++i) {
    const CDd wi = to_cdd(w[i]);
    num += wi * Av[std::size_t(i)];
    den += wi * vd[std::size_t(i)];
  }
  const CDd lam = num / den;
  out.lambda0_dd = lam.re;

  const Dd k2 = two_prod(k, k);
  const CDd mu_num = -dd_log1p(lam - CDd{Dd(1.0), Dd(0.0)}) *
                     CDd{Dd(double(par.sweeps_per_dt())), Dd(0.0)} / CDd{k2, Dd(0.0)};
  out.mu_num = double(mu_num.re);
  const CDd err = CDd{mu_ref_dd(par), Dd(0.0)} - mu_num;
  out.eps = double(sqrt(norm2(err)));
  return out;
}

DirichletModes dirichlet_modes(const Lattice& lat, const SchemeParams& par, int nev,
                               ArnoldiOptions opt, const VecX* start_rho, bool log_rate) {
  if (lat.boundary_links.empty()) throw ConfigError("dirichlet modes need a walled lattice");
  const MomentMatrices mm = transition_matrices(lat, family_for(lat.kind));
  const StepContext ctx = make_step_context(
      lat, mm, par, BoundarySpec::make_dirichlet([](const Vec2&, double) { return 0.0; }));
  const Eigen::Index n = ctx.dof();
  opt.nev = nev;

  CVecX start;
  const CVecX* sp = nullptr;
  if (start_rho) {
    if (start_rho->size() != lat.n_nodes()) throw ConfigError("start density has the wrong size");
    const FieldState seed = initial_equilibrium(ctx, *start_rho);
    start = seed.f.reshaped().cast<Cplx>();
    sp = &start;
  }
  DirichletModes out;
  out.report = arnoldi([&](const CVecX& x) { return operator_apply(ctx, x); }, n, opt, sp);
  out.mu = par.kind == SchemeKind::d2t7 ? mu_d2t7(par.zeta, par.a3, par.s[1])
                                        : mu_d2t4(par.zeta, par.a3, par.s[1]);
  out.dt = par.dt_sweep(lat.dx);

  const int q = ctx.q();
  for (const RitzPair& p : out.report.pairs) {
    DirichletMode mode;
    mode.lambda = p.lambda;
    mode.residual = p.residual;
    if (log_rate) {
      if (!(p.lambda.real() > 0.0)) throw NumericalError("log rate needs a positive eigenvalue");
      mode.lambda_num = -std::log(p.lambda.real()) / (out.mu * out.dt);
    } else {
      mode.lambda_num = (1.0 - p.lambda.real()) / (out.mu * out.dt);
    }
    CVecX rho_c = CVecX::Zero(lat.n_nodes());
    for (Eigen::Index node = 0; node < lat.n_nodes(); ++node) {
      for (int j = 0; j < q; ++j) rho_c[node] += p.v[node * q + j];
    }
    Eigen::Index imax = 0;
    rho_c.cwiseAbs().maxCoeff(&imax);
    const double peak = std::abs(rho_c[imax]);
    if (peak > 0.0) rho_c *= std::conj(rho_c[imax]) / (peak * peak);
    mode.rho = rho_c.real();
    const double scale = mode.rho.cwiseAbs().maxCoeff();
    if (scale > 0.0) mode.rho /= scale;
    out.modes.push_back(std::move(mode));
  }
  return out;
}

}  // namespace trilbm
