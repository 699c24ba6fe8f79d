#include <trilbm/scheme.hh>

#include <trilbm/dd.hh>

#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace trilbm {

namespace {

int env_threads() {
  const char* s = std::getenv("TRI_LBM_THREADS");
  if (!s || !*s) return 1;
  const long v = std::strtol(s, nullptr, 10);
  if (v < 1 || v > 256) throw ConfigError("TRI_LBM_THREADS out of range");
  return int(v);
}

// static node partition; per-node work is independent, so the result does
// not depend on the worker count
template <class Body>
void over_nodes(int threads, Eigen::Index n, const Body& body) {
  if (threads <= 1 || n < 256) {
    body(Eigen::Index(0), n);
    return;
  }
  const Eigen::Index chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  for (Eigen::Index lo = 0; lo < n; lo += chunk) {
    const Eigen::Index hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

// equilibrium moment direction: m^eq = rho * g
VecX eq_direction(const SchemeParams& par, double dx, int q) {
  VecX g = VecX::Zero(q);
  g[0] = 1.0;
  g[1] = par.u * dx / par.zeta;
  g[2] = par.v * dx / par.zeta;
  g[3] = par.a3;
  return g;
}

template <class Scalar>
Scalar by(double c, const Scalar& x);
template <>
double by<double>(double c, const double& x) { return c * x; }
template <>
Cplx by<Cplx>(double c, const Cplx& x) { return c * x; }
template <>
CDd by<CDd>(double c, const CDd& x) { return CDd{Dd(c), Dd(0.0)} * x; }

}  // namespace

void SchemeParams::check() const {
  const int want = kind == SchemeKind::d2t7 ? 7 : 4;
  if (q() != want) {
    throw ConfigError("parameter set '" + name + "' has " + std::to_string(q()) +
                      " rates, scheme needs " + std::to_string(want));
  }
  if (s[0] != 0.0) throw ConfigError("rate of the conserved moment must be 0");
  for (int k = 1; k < q(); ++k) {
    if (!(s[k] > 0.0 && s[k] < 2.0)) {
      throw ConfigError("relaxation rate s" + std::to_string(k) + " = " +
                        std::to_string(s[k]) + " outside (0,2)");
    }
  }
  if (s[1] != s[2]) throw ConfigError("isotropy needs s1 = s2");
  if (kind == SchemeKind::d2t7 && s[4] != s[5]) throw ConfigError("isotropy needs s4 = s5");
  if (!(zeta > 0.0)) throw ConfigError("zeta must be positive");
  if (!(a3 > 0.0 && a3 < 1.0)) throw ConfigError("a3 must lie in (0,1)");
}

VecX equilibrium_moments(double rho, const SchemeParams& par, double dx, int q) {
  return rho * eq_direction(par, dx, q);
}

VecX relax(const VecX& m, const VecX& m_eq, const VecX& s) {
  return m + s.cwiseProduct(m_eq - m);
}

StepContext make_step_context(const Lattice& lat, const MomentMatrices& mm,
                              const SchemeParams& par, BoundarySpec bc, int threads) {
  par.check();
  if (par.kind != lat.kind) throw ConfigError("parameter set does not match the lattice scheme");
  if (!lat.boundary_links.empty()) {
    if (bc.kind == BoundarySpec::periodic) {
      throw ConfigError("walled lattice needs a Dirichlet boundary spec");
    }
    if (!bc.wall_value) throw ConfigError("Dirichlet boundary needs a wall value function");
  }

  StepContext ctx;
  ctx.lat = &lat;
  ctx.mm = &mm;
  ctx.par = par;
  ctx.bc = std::move(bc);
  ctx.threads = threads == 0 ? env_threads() : threads;

  const int q = lat.q;
  const VecX g = eq_direction(par, lat.dx, q);
  MatX S = par.s.asDiagonal();
  // relaxed moments: m* = ((I - S) + S g e0^T) m
  MatX R = (MatX::Identity(q, q) - S) + S * g * MatX::Identity(q, q).row(0);

  const auto& src_mats = mm.per_node ? mm.bynode : mm.byclass;
  ctx.collide.reserve(src_mats.size());
  ctx.eq_weights.reserve(src_mats.size());
  for (const NodeMatrices& nm : src_mats) {
    ctx.collide.push_back(nm.P * R * nm.Mt);
    ctx.eq_weights.push_back(nm.Mtinv * g);
  }

  const Eigen::Index N = lat.n_nodes();
  ctx.src.resize(Eigen::Index(q) * N);
  for (NodeId n = 0; n < N; ++n) {
    for (int j = 0; j < q; ++j) {
      const Eigen::Index dest = Eigen::Index(n) * q + j;
      if (lat.link_is_boundary(n, j)) {
        ctx.src[dest] = -1;
      } else {
        const NodeId m = lat.neighbors(j, n);
        ctx.src[dest] = Eigen::Index(m) * q + lat.dual_index(j, n);
      }
    }
  }
  for (const BoundaryLink& bl : lat.boundary_links) {
    const NodeMatrices& nm = mm.at(lat, bl.node);
    const Eigen::Index slot = Eigen::Index(bl.node) * q + bl.direction;
    const double w2 = (nm.P * g + nm.Mtinv * g)[bl.direction];
    ctx.walls.push_back({slot, slot, bl.wall_point, w2});
  }
  return ctx;
}

FieldState initial_equilibrium(const StepContext& ctx, const VecX& rho0) {
  const Lattice& lat = *ctx.lat;
  if (rho0.size() != lat.n_nodes()) throw ConfigError("initial density size mismatch");
  FieldState st;
  st.f.resize(lat.q, lat.n_nodes());
  for (NodeId n = 0; n < lat.n_nodes(); ++n) {
    const std::size_t c = ctx.mm->per_node ? std::size_t(n) : std::size_t(lat.node_class[n]);
    st.f.col(n) = rho0[n] * ctx.eq_weights[c];
  }
  return st;
}

VecX density(const StepContext&, const FieldState& state) {
  return state.f.colwise().sum();
}

VecX node_moments(const StepContext& ctx, const FieldState& state, NodeId n) {
  return ctx.mm->at(*ctx.lat, n).Mt * state.f.col(n);
}

template <class Scalar>
void apply_step_linear(const StepContext& ctx, const Scalar* in, Scalar* out) {
  const Eigen::Index N = ctx.lat->n_nodes();
  const int q = ctx.q();
  std::vector<Scalar> post(std::size_t(q) * std::size_t(N));
  const bool per_node = ctx.mm->per_node;
  const VecXi& cls = ctx.lat->node_class;

  over_nodes(ctx.threads, N, [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index n = lo; n < hi; ++n) {
      const MatX& C = ctx.collide[per_node ? std::size_t(n) : std::size_t(cls[n])];
      const Scalar* fn = in + n * q;
      Scalar* on = post.data() + n * q;
      for (int k = 0; k < q; ++k) {
        Scalar acc{};
        for (int j = 0; j < q; ++j) acc += by(C(k, j), fn[j]);
        on[k] = acc;
      }
    }
  });
  over_nodes(ctx.threads, Eigen::Index(q) * N, [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index d = lo; d < hi; ++d) {
      out[d] = ctx.src[d] >= 0 ? post[std::size_t(ctx.src[d])] : Scalar{};
    }
  });
  for (const StepContext::WallStream& w : ctx.walls) {
    out[w.dest] = -post[std::size_t(w.out)];
  }
}

template void apply_step_linear<double>(const StepContext&, const double*, double*);
template void apply_step_linear<Cplx>(const StepContext&, const Cplx*, Cplx*);
template void apply_step_linear<CDd>(const StepContext&, const CDd*, CDd*);

void step(StepContext& ctx, FieldState& state) {
  const Eigen::Index N = ctx.lat->n_nodes();
  const int q = ctx.q();
  const double t_pre = state.t;
  MatX post(q, N);
  const bool per_node = ctx.mm->per_node;
  const VecXi& cls = ctx.lat->node_class;

  over_nodes(ctx.threads, N, [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index n = lo; n < hi; ++n) {
      const MatX& C = ctx.collide[per_node ? std::size_t(n) : std::size_t(cls[n])];
      post.col(n).noalias() = C * state.f.col(n);
    }
  });
  double* f = state.f.data();
  const double* p = post.data();
  over_nodes(ctx.threads, Eigen::Index(q) * N, [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index d = lo; d < hi; ++d) {
      if (ctx.src[d] >= 0) f[d] = p[ctx.src[d]];
    }
  });
  for (const StepContext::WallStream& w : ctx.walls) {
    const double rho_w = ctx.bc.wall_value ? ctx.bc.wall_value(w.point, t_pre) : 0.0;
    f[w.dest] = -p[w.out] + rho_w * w.w2;
  }

  state.steps += 1;
  state.t += ctx.par.dt_sweep(ctx.lat->dx);
  if (ctx.check_every > 0 && state.steps % ctx.check_every == 0 && !state.f.allFinite()) {
    for (NodeId n = 0; n < N; ++n) {
      if (!state.f.col(n).allFinite()) throw DivergenceError(state.steps, n);
    }
  }
}

VecX operator_apply(const StepContext& ctx, const VecX& x) {
  if (x.size() != ctx.dof()) throw ConfigError("operator input size mismatch");
  VecX y(x.size());
  apply_step_linear<double>(ctx, x.data(), y.data());
  return y;
}

CVecX operator_apply(const StepContext& ctx, const CVecX& x) {
  if (x.size() != ctx.dof()) throw ConfigError("operator input size mismatch");
  CVecX y(x.size());
  apply_step_linear<Cplx>(ctx, x.data(), y.data());
  return y;
}

namespace {

template <class Scalar>
void apply_transpose(const StepContext& ctx, const Scalar* in, Scalar* out) {
  const Eigen::Index N = ctx.lat->n_nodes();
  const int q = ctx.q();
  std::vector<Scalar> z(std::size_t(q) * std::size_t(N), Scalar{});
  for (Eigen::Index d = 0; d < Eigen::Index(q) * N; ++d) {
    if (ctx.src[d] >= 0) z[std::size_t(ctx.src[d])] = in[d];
  }
  for (const StepContext::WallStream& w : ctx.walls) {
    z[std::size_t(w.out)] = by(-1.0, in[w.dest]);
  }
  const bool per_node = ctx.mm->per_node;
  const VecXi& cls = ctx.lat->node_class;
  over_nodes(ctx.threads, N, [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index n = lo; n < hi; ++n) {
      const MatX& C = ctx.collide[per_node ? std::size_t(n) : std::size_t(cls[n])];
      const Scalar* zn = z.data() + n * q;
      Scalar* on = out + n * q;
      for (int j = 0; j < q; ++j) {
        Scalar acc{};
        for (int k = 0; k < q; ++k) acc += by(C(k, j), zn[k]);
        on[j] = acc;
      }
    }
  });
}

}  // namespace

VecX operator_apply_transpose(const StepContext& ctx, const VecX& x) {
  if (x.size() != ctx.dof()) throw ConfigError("operator input size mismatch");
  VecX y(x.size());
  apply_transpose<double>(ctx, x.data(), y.data());
  return y;
}

CVecX operator_apply_transpose(const StepContext& ctx, const CVecX& x) {
  if (x.size() != ctx.dof()) throw ConfigError("operator input size mismatch");
  CVecX y(x.size());
  apply_transpose<Cplx>(ctx, x.data(), y.data());
  return y;
}

}  // namespace trilbm
