// Experiment drivers and the text output helpers.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <trilbm/analysis.hh>
#include <trilbm/exact.hh>
#include <trilbm/harness.hh>
#include <trilbm/io.hh>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

using namespace trilbm;

TEST_CASE("experiment lattices realize the requested side") {
  SchemeParams p7 = find_param_set("d2t7-order2");
  Lattice l7 = experiment_lattice(p7, 21, 1.0);
  auto c7 = dirichlet_domain_corners(l7);
  CHECK((c7[1] - c7[0]).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l7.dx == doctest::Approx(1.0 / 21.5).epsilon(1e-12));

  SchemeParams p4 = find_param_set("d2t4-order2");
  Lattice l4 = experiment_lattice(p4, 12, 2.0);
  auto c4 = dirichlet_domain_corners(l4);
  CHECK((c4[1] - c4[0]).norm() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(l4.dx == doctest::Approx(2.0 / (12 * std::sqrt(3.0))).epsilon(1e-12));

  CHECK(mode_side() == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-15));
}

TEST_CASE("order fit over a synthetic refinement") {
  SweepResult r = convergence_sweep({8, 16, 32, 64, 128}, [](int n) {
    const double h = 1.0 / n;
    return std::pair{h, 5.0 * h * h};
  });
  CHECK(r.order == doctest::Approx(2.0).epsilon(1e-10));
  REQUIRE(r.h_err.size() == 5);
  CHECK(r.h_err.front().first == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("harmonic steady state converges to the wall profile") {
  ExperimentConfig cfg;
  cfg.param_set = "d2t7-order2";
  cfg.n_edge = 21;
  cfg.threads = 1;
  HarmonicResult hr = run_harmonic(cfg);
  CHECK(hr.steps > 0);
  CHECK(hr.final_change <= cfg.steady_tol);
  CHECK(hr.rho.size() == hr.lat.n_nodes());
  CHECK(hr.dx == doctest::Approx(1.0 / 21.5).epsilon(1e-12));
  // the sampled reference is the harmonic polynomial at the node positions
  for (NodeId n : {NodeId(0), NodeId(57), NodeId(200)}) {
    CHECK(hr.exact[n] == doctest::Approx(exact_harmonic(hr.lat.positions.col(n))).epsilon(1e-13));
  }
  CHECK(hr.linf == doctest::Approx((hr.rho - hr.exact).cwiseAbs().maxCoeff()).epsilon(1e-13));
  CHECK(hr.linf < 0.02);  // second order on a 21-node edge
  CHECK(hr.l2 <= hr.linf);

  // the wall data is time independent, so more steps change nothing
  ExperimentConfig tight = cfg;
  tight.steady_tol = 1e-13;
  HarmonicResult hr2 = run_harmonic(tight);
  CHECK(std::abs(hr2.linf - hr.linf) < 1e-6);
}

TEST_CASE("fundamental decay matches 3 mu on the normalized triangle") {
  ExperimentConfig cfg;
  cfg.param_set = "d2t7-order4";
  cfg.n_edge = 13;
  cfg.threads = 1;
  DecayResult dr = run_mode_decay(cfg);
  const SchemeParams par = find_param_set(cfg.param_set);
  // zeta is retuned so the horizon is a whole number of sweeps
  CHECK(dr.zeta != par.zeta);
  const double dt_sweep = dr.dx * dr.dx / dr.zeta / par.sweeps_per_dt();
  CHECK(double(dr.steps) * dt_sweep == doctest::Approx(cfg.horizon).epsilon(1e-12));
  CHECK(dr.rate_expected == doctest::Approx(3.0 * dr.mu).epsilon(1e-12));
  CHECK(std::abs(dr.rate - dr.rate_expected) < 0.05 * dr.rate_expected);
  REQUIRE(dr.center_trace.size() > 2);
  // center value decays monotonically
  CHECK(dr.center_trace.front().second > dr.center_trace.back().second);
  CHECK(dr.linf_at_horizon < dr.center_trace.front().second);
}

TEST_CASE("walled spectrum matches the closed-form shapes") {
  ExperimentConfig cfg;
  cfg.param_set = "d2t7-order2";
  cfg.n_edge = 15;
  cfg.nev = 8;
  cfg.threads = 1;
  ModesResult mr = run_dirichlet_modes(cfg, {{1, 1}, {2, 1}});
  REQUIRE(mr.matches.size() == 2);
  const ModeMatch& m11 = mr.matches[0];
  CHECK(m11.m == 1);
  CHECK(m11.n == 1);
  CHECK(m11.lambda_exact == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(m11.overlap > 0.99);
  CHECK(std::abs(m11.lambda_num - 3.0) < 0.05 * 3.0);
  CHECK(m11.residual < 1e-8);
  const ModeMatch& m21 = mr.matches[1];
  CHECK(m21.lambda_exact == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(m21.overlap > 0.95);
  CHECK(std::abs(m21.lambda_num - 7.0) < 0.08 * 7.0);
}

TEST_CASE("pipe refinement ladder drops at second order") {
  PipeSweep ps = pipe_convergence("d2t7-order2", {12, 24, 48}, 4);
  REQUIRE(ps.k.size() == 3);
  CHECK(ps.k[1] == doctest::Approx(ps.k[0] / 2).epsilon(1e-12));
  CHECK(ps.eps[2] < ps.eps[1]);
  CHECK(ps.eps[1] < ps.eps[0]);
  CHECK(std::abs(ps.order - 2.0) < 0.3);
  for (double r : ps.residuals) CHECK(r < 1e-9);
}

TEST_CASE("csv and json writers round-trip full precision") {
  // stod rejects subnormals (ERANGE), so stay in the normal range
  const double vals[] = {1.0 / 3.0, -2.7182818284590452, 6.02e23, -1e-300,
                         std::numeric_limits<double>::min()};
  for (double v : vals) {
    CHECK(std::stod(format_full(v)) == v);
  }

  std::ostringstream os;
  VecX a(3), b(3);
  a << 0.1, 0.2, 0.30000000000000004;
  b << -1, 2, std::sqrt(2.0);
  write_csv(os, {"alpha", "beta"}, {a, b});
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "alpha,beta");
  for (int i = 0; i < 3; ++i) {
    std::getline(is, line);
    const auto comma = line.find(',');
    CHECK(std::stod(line.substr(0, comma)) == a[i]);
    CHECK(std::stod(line.substr(comma + 1)) == b[i]);
  }

  const std::string path = "/tmp/trilbm_test_summary.json";
  write_json(path, {{"nodes", 55}, {"dx", 0.5}});
  std::ifstream in(path);
  nlohmann::json j;
  in >> j;
  CHECK(j["nodes"] == 55);
  CHECK(j["dx"] == 0.5);
  std::remove(path.c_str());
}

TEST_CASE("vtk export carries positions and fields") {
  Lattice lat = build_d2t4_equilateral(3, 1.0);
  std::ostringstream os;
  write_vtk(os, lat, {{"rho", VecX::LinSpaced(lat.n_nodes(), 0.0, 1.0)}});
  const std::string s = os.str();
  CHECK(s.find("# vtk DataFile") != std::string::npos);
  CHECK(s.find("rho") != std::string::npos);
  // one polygon per triangle when the triangulation is attached
  CHECK(s.find("POLYGONS") != std::string::npos);

  nlohmann::json summary = lattice_summary(lat);
  CHECK(summary["nodes"] == 9);
  CHECK(summary["q"] == 4);
  CHECK(summary["kind"] == "d2t4");
}
