// Stepping: equilibria, conservation, linearity, walls, determinism.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <trilbm/analysis.hh>
#include <trilbm/scheme.hh>

#include <cmath>
#include <limits>
#include <random>

using namespace trilbm;

namespace {

StepContext context_for(const Lattice& lat, const MomentMatrices& mm, const char* set,
                        BoundarySpec bc, int threads = 1) {
  return make_step_context(lat, mm, find_param_set(set), std::move(bc), threads);
}

VecX random_field(Eigen::Index n, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  VecX x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0 + shift;
  }
  return x;
}

}  // namespace

TEST_CASE("parameter validation") {
  SchemeParams p = find_param_set("d2t7-order2");
  CHECK_NOTHROW(p.check());

  SchemeParams bad = p;
  bad.s[1] = 1.1;  // breaks s1 = s2
  CHECK_THROWS_AS(bad.check(), ConfigError);
  bad = p;
  bad.s[3] = 2.0;
  CHECK_THROWS_AS(bad.check(), ConfigError);
  bad = p;
  bad.s[0] = 0.1;
  CHECK_THROWS_AS(bad.check(), ConfigError);
  bad = p;
  bad.a3 = 1.5;
  CHECK_THROWS_AS(bad.check(), ConfigError);
  bad = p;
  bad.kind = SchemeKind::d2t4;  // 7 rates on a 4-moment scheme
  CHECK_THROWS_AS(bad.check(), ConfigError);
}

TEST_CASE("time conventions") {
  SchemeParams p7 = find_param_set("d2t7-order2");
  SchemeParams p4 = find_param_set("d2t4-order2");
  CHECK(p7.sweeps_per_dt() == 1);
  CHECK(p4.sweeps_per_dt() == 2);
  CHECK(p7.dt(0.5) == doctest::Approx(0.25 / p7.zeta).epsilon(1e-15));
  CHECK(p4.dt_sweep(0.5) == doctest::Approx(0.125 / p4.zeta).epsilon(1e-15));
}

TEST_CASE("equilibrium moments") {
  SchemeParams p7 = find_param_set("d2t7-order2");
  VecX m7 = equilibrium_moments(1.0, p7, 1.0, 7);
  CHECK(m7[0] == 1.0);
  CHECK(m7[1] == 0.0);
  CHECK(m7[2] == 0.0);
  CHECK(m7[3] == 0.25);
  CHECK(m7.tail(3).cwiseAbs().maxCoeff() == 0.0);

  SchemeParams p4 = find_param_set("d2t4-order1");
  VecX m4 = equilibrium_moments(2.0, p4, 1.0, 4);
  CHECK(m4[0] == 2.0);
  CHECK(m4[3] == doctest::Approx(0.433012701892218).epsilon(1e-15));

  // advection enters the first moments as rho u dx / zeta
  SchemeParams adv = p7;
  adv.u = 0.3;
  adv.v = -0.1;
  adv.zeta = 2.0;
  VecX ma = equilibrium_moments(0.5, adv, 0.25, 7);
  CHECK(ma[1] == doctest::Approx(0.5 * 0.3 * 0.25 / 2.0).epsilon(1e-15));
  CHECK(ma[2] == doctest::Approx(0.5 * -0.1 * 0.25 / 2.0).epsilon(1e-15));
}

TEST_CASE("relaxation moves moments by their rates") {
  VecX m(4), meq(4), s(4);
  m << 1.0, 0.2, -0.1, 0.1;
  meq << 1.0, 0.0, 0.0, 0.25;
  s << 0.0, 0.8, 0.8, 1.428571428571428;
  VecX out = relax(m, meq, s);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(out[2] == doctest::Approx(-0.02).epsilon(1e-15));
  CHECK(out[3] == doctest::Approx(0.1 + 1.428571428571428 * 0.15).epsilon(1e-15));
  // s = 1 lands on equilibrium, s = 2 reflects across it
  VecX s1 = VecX::Ones(4), s2 = VecX::Constant(4, 2.0);
  CHECK((relax(m, meq, s1) - meq).cwiseAbs().maxCoeff() == 0.0);
  CHECK((relax(m, meq, s2) - (2 * meq - m)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("uniform equilibrium is a fixed point") {
  for (const char* set : {"d2t7-order4", "d2t4-order2"}) {
    SchemeParams par = find_param_set(set);
    Lattice lat = par.kind == SchemeKind::d2t7 ? build_d2t7_periodic(6, 5, 1.0)
                                               : build_d2t4_periodic(5, 4, 1.0);
    MomentMatrices mm = transition_matrices(lat, family_for(par.kind));
    StepContext ctx = make_step_context(lat, mm, par, BoundarySpec::make_periodic(), 1);
    FieldState st = initial_equilibrium(ctx, VecX::Constant(lat.n_nodes(), 0.7));
    const MatX f0 = st.f;
    for (int i = 0; i < 50; ++i) step(ctx, st);
    CHECK((st.f - f0).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((density(ctx, st).array() - 0.7).abs().maxCoeff() < 1e-13);
    CHECK(st.steps == 50);
    CHECK(st.t == doctest::Approx(50 * par.dt_sweep(1.0)).epsilon(1e-12));
  }
}

TEST_CASE("mass is conserved to round-off over long runs") {
  Lattice lat = build_d2t7_periodic(96, 4, 1.0);
  MomentMatrices mm = transition_matrices(lat, d2t7_family());
  StepContext ctx = context_for(lat, mm, "d2t7-order2", BoundarySpec::make_periodic());
  FieldState st = initial_equilibrium(ctx, random_field(lat.n_nodes(), 11, 2.0));
  const double mass0 = density(ctx, st).sum();
  for (int i = 0; i < 10000; ++i) step(ctx, st);
  CHECK(std::abs(density(ctx, st).sum() - mass0) / std::abs(mass0) < 1e-12);

  Lattice lt4 = build_d2t4_periodic(12, 12, 1.0);
  MomentMatrices mm4 = transition_matrices(lt4, d2t4_family());
  StepContext c4 = context_for(lt4, mm4, "d2t4-order3", BoundarySpec::make_periodic());
  FieldState s4 = initial_equilibrium(c4, random_field(lt4.n_nodes(), 12, 2.0));
  const double m40 = density(c4, s4).sum();
  for (int i = 0; i < 10000; ++i) step(c4, s4);
  CHECK(std::abs(density(c4, s4).sum() - m40) / std::abs(m40) < 1e-12);
}

TEST_CASE("single wrapped node reduces to collide-and-permute") {
  Lattice lat = build_d2t7_periodic(1, 1, 1.0);
  MomentMatrices mm = transition_matrices(lat, d2t7_family());
  StepContext ctx = context_for(lat, mm, "d2t7-order2", BoundarySpec::make_periodic());
  FieldState st;
  st.f = random_field(7, 3);
  const VecX post = ctx.collide[0] * st.f.col(0);
  FieldState stepped = st;
  step(ctx, stepped);
  for (int j = 0; j < 7; ++j) {
    CHECK(stepped.f(j, 0) == post[lat.dual_index(j, 0)]);
  }
}

TEST_CASE("homogeneous walls make the step linear") {
  Lattice lat = build_d2t4_equilateral(6, 1.0);
  MomentMatrices mm = transition_matrices(lat, d2t4_family());
  StepContext ctx = context_for(lat, mm, "d2t4-order2",
                                BoundarySpec::make_dirichlet([](const Vec2&, double) { return 0.0; }));
  const Eigen::Index n = ctx.dof();
  VecX x = random_field(n, 21), y = random_field(n, 22);
  VecX lhs = operator_apply(ctx, VecX(1.3 * x - 0.4 * y));
  VecX rhs = 1.3 * operator_apply(ctx, x) - 0.4 * operator_apply(ctx, y);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

  // step() with a nonzero wall value is the linear map plus a state-free
  // affine shift
  StepContext cg = context_for(lat, mm, "d2t4-order2",
                               BoundarySpec::make_dirichlet([](const Vec2& p, double) {
                                 return 1.0 + p.x() - 2.0 * p.y();
                               }));
  FieldState fs;
  fs.f = Eigen::Map<const MatX>(x.data(), lat.q, lat.n_nodes());
  FieldState zero;
  zero.f = MatX::Zero(lat.q, lat.n_nodes());
  step(cg, fs);
  step(cg, zero);
  VecX affine = Eigen::Map<const VecX>(zero.f.data(), n);
  VecX linear = operator_apply(ctx, x);
  VecX got = Eigen::Map<const VecX>(fs.f.data(), n);
  CHECK((got - (linear + affine)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("complex apply matches the real one on both parts") {
  Lattice lat = build_d2t7_triangle(7, 1.0);
  MomentMatrices mm = transition_matrices(lat, d2t7_family());
  StepContext ctx = context_for(lat, mm, "d2t7-order6",
                                BoundarySpec::make_dirichlet([](const Vec2&, double) { return 0.0; }));
  VecX xr = random_field(ctx.dof(), 5), xi = random_field(ctx.dof(), 6);
  CVecX z = xr.cast<Cplx>() + Cplx(0, 1) * xi.cast<Cplx>();
  CVecX Az = operator_apply(ctx, z);
  CHECK((Az.real() - operator_apply(ctx, xr)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((Az.imag() - operator_apply(ctx, xi)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("transpose pairs with the forward map") {
  Lattice lat = build_d2t4_equilateral(7, 1.0);
  MomentMatrices mm = transition_matrices(lat, d2t4_family());
  StepContext ctx = context_for(lat, mm, "d2t4-order4",
                                BoundarySpec::make_dirichlet([](const Vec2&, double) { return 0.0; }));
  VecX x = random_field(ctx.dof(), 31), y = random_field(ctx.dof(), 32);
  const double a = operator_apply_transpose(ctx, x).dot(y);
  const double b = x.dot(operator_apply(ctx, y));
  CHECK(std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(a)));

  // complex version is the plain transpose, no conjugation
  CVecX cx = x.cast<Cplx>() * Cplx(0.6, 0.8);
  CVecX cy = y.cast<Cplx>();
  const Cplx ca = (operator_apply_transpose(ctx, cx).transpose() * cy).value();
  const Cplx cb = (cx.transpose() * operator_apply(ctx, cy)).value();
  CHECK(std::abs(ca - cb) < 1e-12 * std::max(1.0, std::abs(ca)));
}

TEST_CASE("worker count never changes a bit") {
  Lattice lat = build_d2t7_periodic(32, 16, 1.0);  // 512 nodes, above the serial cutoff
  MomentMatrices mm = transition_matrices(lat, d2t7_family());
  const VecX rho0 = random_field(lat.n_nodes(), 77, 2.0);
  MatX ref;
  for (int threads : {1, 2, 4}) {
    StepContext ctx = context_for(lat, mm, "d2t7-order4", BoundarySpec::make_periodic(), threads);
    FieldState st = initial_equilibrium(ctx, rho0);
    for (int i = 0; i < 200; ++i) step(ctx, st);
    if (threads == 1) {
      ref = st.f;
    } else {
      CHECK((st.f - ref).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("config errors") {
  Lattice walled = build_d2t4_equilateral(4, 1.0);
  MomentMatrices mm = transition_matrices(walled, d2t4_family());
  CHECK_THROWS_AS(context_for(walled, mm, "d2t4-order2", BoundarySpec::make_periodic()),
                  ConfigError);
  CHECK_THROWS_AS(context_for(walled, mm, "d2t4-order2", BoundarySpec{BoundarySpec::dirichlet, {}}),
                  ConfigError);
  CHECK_THROWS_AS(context_for(walled, mm, "d2t7-order2",
                              BoundarySpec::make_dirichlet([](const Vec2&, double) { return 0.0; })),
                  ConfigError);

  StepContext ctx = context_for(walled, mm, "d2t4-order2",
                                BoundarySpec::make_dirichlet([](const Vec2&, double) { return 0.0; }));
  CHECK_THROWS_AS(initial_equilibrium(ctx, VecX::Ones(3)), ConfigError);
  const VecX wrong_size = VecX::Ones(5);
  CHECK_THROWS_AS(operator_apply(ctx, wrong_size), ConfigError);
}

TEST_CASE("divergence scan reports the poisoned step") {
  Lattice lat = build_d2t7_periodic(4, 4, 1.0);
  MomentMatrices mm = transition_matrices(lat, d2t7_family());
  StepContext ctx = context_for(lat, mm, "d2t7-order2", BoundarySpec::make_periodic());
  ctx.check_every = 1;
  FieldState st = initial_equilibrium(ctx, VecX::Ones(lat.n_nodes()));
  st.f(0, 3) = std::nan("");
  CHECK_THROWS_AS(step(ctx, st), DivergenceError);
  try {
    FieldState st2 = initial_equilibrium(ctx, VecX::Ones(lat.n_nodes()));
    st2.f(2, 5) = std::numeric_limits<double>::infinity();
    step(ctx, st2);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.step == 1);
    CHECK(e.node >= 0);
  }
}
