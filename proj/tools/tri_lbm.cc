// tri-lbm: triangular-lattice relaxation schemes for the heat equation.

#include <trilbm/analysis.hh>
#include <trilbm/exact.hh>
#include <trilbm/harness.hh>
#include <trilbm/io.hh>
#include <trilbm/lattice.hh>
#include <trilbm/spectral.hh>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using nlohmann::json;
using namespace trilbm;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// "order4" with --scheme d2t7 means the catalog entry d2t7-order4
SchemeParams resolve_set(const std::string& scheme, const std::string& set) {
  if (set.rfind("d2t", 0) == 0) return find_param_set(set);
  return find_param_set(scheme + "-" + set);
}

std::vector<double> parse_theta(const std::string& spec) {
  std::vector<double> degrees;
  const auto c1 = spec.find(':');
  if (c1 == std::string::npos) {
    degrees.push_back(std::stod(spec));
  } else {
    const auto c2 = spec.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ConfigError("theta wants start:step:stop or a value");
    const double start = std::stod(spec.substr(0, c1));
    const double step = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    const double stop = std::stod(spec.substr(c2 + 1));
    if (!(step > 0.0) || stop < start) throw ConfigError("bad theta range");
    for (double d = start; d <= stop + 1e-9; d += step) degrees.push_back(d);
  }
  std::vector<double> radians;
  for (double d : degrees) radians.push_back(d * M_PI / 180.0);
  return radians;
}

struct RunFlags {
  std::string scheme = "d2t7";
  std::string set = "order2";
  ExperimentConfig cfg;
  std::string out;
};

void add_run_flags(CLI::App* cmd, RunFlags& rf, const std::string& default_out) {
  cmd->add_option("--scheme", rf.scheme, "d2t7 or d2t4");
  cmd->add_option("--set", rf.set, "parameter set (catalog name or suffix)");
  cmd->add_option("--n", rf.cfg.n_edge, "nodes (d2t7) or triangles (d2t4) per side");
  cmd->add_option("--side", rf.cfg.side, "wall-triangle side, 0 = experiment default");
  cmd->add_option("--horizon", rf.cfg.horizon, "end time of decay runs");
  cmd->add_option("--steady-tol", rf.cfg.steady_tol, "relative steady-state tolerance");
  cmd->add_option("--max-steps", rf.cfg.max_steps, "step budget");
  cmd->add_option("--nev", rf.cfg.nev, "eigenpairs to compute");
  cmd->add_option("--subspace", rf.cfg.subspace, "Krylov dimension, 0 = automatic");
  cmd->add_option("--threads", rf.cfg.threads, "workers, 0 = TRI_LBM_THREADS");
  cmd->add_option("--seed", rf.cfg.seed, "seed for start vectors");
  cmd->add_option("--dump-every", rf.cfg.dump_every, "field snapshot cadence in steps");
  rf.out = default_out;
  cmd->add_option("--out", rf.out, "output path prefix");
}

json config_echo(const RunFlags& rf, const SchemeParams& par) {
  json j;
  j["set"] = par.name;
  j["zeta"] = par.zeta;
  j["a3"] = par.a3;
  j["s"] = std::vector<double>(par.s.data(), par.s.data() + par.s.size());
  j["n"] = rf.cfg.n_edge;
  j["side"] = rf.cfg.side;
  j["horizon"] = rf.cfg.horizon;
  j["steady_tol"] = rf.cfg.steady_tol;
  j["max_steps"] = rf.cfg.max_steps;
  j["nev"] = rf.cfg.nev;
  j["subspace"] = rf.cfg.subspace;
  j["threads"] = rf.cfg.threads;
  j["seed"] = rf.cfg.seed;
  return j;
}

// CSV snapshot (node_id, x, y, rho, m1, m2, m3) for --dump-every
void write_snapshot(const std::string& prefix, const StepContext& ctx, const FieldState& state) {
  const Lattice& lat = *ctx.lat;
  char name[32];
  std::snprintf(name, sizeof name, "-%08ld.csv", state.steps);
  std::vector<VecX> cols(7, VecX(lat.n_nodes()));
  for (Eigen::Index n = 0; n < lat.n_nodes(); ++n) {
    const VecX m = node_moments(ctx, state, NodeId(n));
    cols[0][n] = double(n);
    cols[1][n] = lat.positions(0, n);
    cols[2][n] = lat.positions(1, n);
    for (int k = 0; k < 4; ++k) cols[std::size_t(3 + k)][n] = m[k];
  }
  write_csv(prefix + name, {"node_id", "x", "y", "rho", "m1", "m2", "m3"}, cols);
}

int run_mesh(const std::string& scheme, const std::string& domain, int n, int nx, int ny,
             double dx, double amplitude, std::uint64_t seed, const std::string& wall,
             const std::string& out, const std::string& json_out) {
  const SchemeKind kind = scheme == "d2t4" ? SchemeKind::d2t4 : SchemeKind::d2t7;
  if (scheme != "d2t4" && scheme != "d2t7") throw ConfigError("scheme must be d2t7 or d2t4");
  Lattice lat;
  if (domain == "triangle") {
    lat = kind == SchemeKind::d2t7 ? build_d2t7_triangle(n, dx) : build_d2t4_equilateral(n, dx);
  } else if (domain == "rect" || domain == "pipe") {
    const int mx = nx > 0 ? nx : (domain == "pipe" ? 96 : 36);
    const int my = ny > 0 ? ny : (domain == "pipe" ? 4 : 52);
    lat = kind == SchemeKind::d2t7 ? build_d2t7_periodic(mx, my, dx)
                                   : build_d2t4_periodic(mx, my, dx);
  } else {
    throw ConfigError("domain must be triangle, rect or pipe");
  }
  if (amplitude > 0.0) {
    const WallPlacement wp =
        wall == "half" ? WallPlacement::half_link : WallPlacement::edge_midpoint;
    lat = perturb(lat, amplitude, seed, wp);
  }
  const LatticeReport report = validate(lat);
  std::cout << "nodes " << lat.n_nodes() << ", boundary links " << lat.boundary_links.size()
            << ", validation " << (report.ok() ? "clean" : "FAILED") << "\n";
  if (!out.empty()) write_vtk(out, lat, {});
  if (!json_out.empty()) {
    json j = lattice_summary(lat);
    j["validation_clean"] = report.ok();
    j["violations"] = report.violations.size();
    write_json(json_out, j);
  }
  if (!report.ok()) throw NumericalError("lattice validation failed");
  return 0;
}

void run_matrices(const std::string& scheme, const std::string& out) {
  const SchemeKind kind = scheme == "d2t4" ? SchemeKind::d2t4 : SchemeKind::d2t7;
  if (scheme != "d2t4" && scheme != "d2t7") throw ConfigError("scheme must be d2t7 or d2t4");
  const Lattice lat =
      kind == SchemeKind::d2t7 ? build_d2t7_periodic(2, 2, 1.0) : build_d2t4_periodic(2, 2, 1.0);
  const MomentMatrices mm = transition_matrices(lat, family_for(kind));
  const auto dump = [&](const std::string& name, int cls, const MatX& m) {
    std::vector<std::string> header;
    std::vector<VecX> cols;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      header.push_back("c" + std::to_string(c));
      cols.push_back(m.col(c));
    }
    write_csv(out + "-" + name + "-class" + std::to_string(cls) + ".csv", header, cols);
  };
  for (std::size_t c = 0; c < mm.byclass.size(); ++c) {
    const NodeMatrices& nm = mm.byclass[c];
    dump("M", int(c), nm.M);
    dump("Mincoming", int(c), nm.Mt);
    dump("Minv", int(c), nm.Minv);
    dump("P", int(c), nm.P);
  }
  std::cout << "wrote " << 4 * mm.byclass.size() << " matrices to " << out << "-*.csv\n";
}

void run_tune(const std::string& json_out) {
  json all = json::array();
  std::printf("%-14s %-5s %10s %10s %14s %14s\n", "set", "q", "a3", "s1", "mu", "theta/c1");
  for (const SchemeParams& p : builtin_param_sets()) {
    const bool seven = p.kind == SchemeKind::d2t7;
    const double mu = seven ? mu_d2t7(p.zeta, p.a3, p.s[1]) : mu_d2t4(p.zeta, p.a3, p.s[1]);
    const double defect = seven ? theta_d2t7(p.zeta, p.a3, p.s[1], p.s[3], p.s[4])
                                : d2t4_first_order_coeff(p.zeta, p.a3, p.s[1]);
    std::printf("%-14s %-5d %10.7f %10.7f %14.6e %14.6e\n", p.name.c_str(), p.q(), p.a3, p.s[1],
                mu, defect);
    json e;
    e["name"] = p.name;
    e["q"] = p.q();
    e["zeta"] = p.zeta;
    e["a3"] = p.a3;
    e["s"] = std::vector<double>(p.s.data(), p.s.data() + p.s.size());
    e["mu"] = mu;
    e[seven ? "theta" : "first_order_coeff"] = defect;
    all.push_back(e);
  }
  if (!json_out.empty()) write_json(json_out, all);
}

void run_dispersion(const RunFlags& rf, const std::string& theta_spec, double kmin, double kmax,
                    int nk, const std::string& json_out) {
  const SchemeParams par = resolve_set(rf.scheme, rf.set);
  const std::vector<double> thetas = parse_theta(theta_spec);
  std::vector<VecX> cols(6);
  const Eigen::Index rows = Eigen::Index(thetas.size()) * nk;
  for (VecX& c : cols) c.resize(rows);
  json orders = json::object();
  Eigen::Index r = 0;
  for (double th : thetas) {
    const std::vector<DispersionPoint> branch = dispersion_branch(par, kmin, kmax, nk, th);
    std::vector<std::pair<double, double>> k_eps;
    for (const DispersionPoint& p : branch) {
      cols[0][r] = p.k;
      cols[1][r] = th * 180.0 / M_PI;
      cols[2][r] = p.lambda.real();
      cols[3][r] = p.lambda.imag();
      cols[4][r] = p.mu_num.real();
      cols[5][r] = p.eps;
      ++r;
      k_eps.emplace_back(p.k, p.eps);
    }
    if (kmax >= 10.0 * kmin) {
      char key[32];
      std::snprintf(key, sizeof key, "%g", th * 180.0 / M_PI);
      orders[key] = measured_order(k_eps);
    }
  }
  write_csv(rf.out, {"k", "theta", "re_lambda", "im_lambda", "mu_num", "eps"}, cols);
  std::cout << "wrote " << rows << " dispersion points to " << rf.out << "\n";
  if (!json_out.empty()) {
    json j;
    j["set"] = par.name;
    j["kmin"] = kmin;
    j["kmax"] = kmax;
    j["nk"] = nk;
    j["orders"] = orders;
    write_json(json_out, j);
  }
}

void run_periodic_modes(const RunFlags& rf, int nx, int ny) {
  const SchemeParams par = resolve_set(rf.scheme, rf.set);
  const Lattice lat = par.kind == SchemeKind::d2t7 ? build_d2t7_periodic(nx, ny, 1.0)
                                                   : build_d2t4_periodic(nx, ny, 1.0);
  ArnoldiOptions opt;
  opt.nev = rf.cfg.nev;
  opt.subspace = rf.cfg.subspace > 0 ? rf.cfg.subspace : 48;
  opt.seed = rf.cfg.seed;
  const double t0 = now_seconds();
  const PipeDiffusivity pd = pipe_diffusivity(lat, par, opt);
  const double elapsed = now_seconds() - t0;
  std::printf("%s %dx%d: k = %.6e, mu_num = %.12e, eps = %.3e, residual = %.2e\n",
              par.name.c_str(), nx, ny, pd.k, pd.mu_num, pd.eps, pd.residual);
  if (!rf.out.empty()) {
    json j;
    j["set"] = par.name;
    j["nx"] = nx;
    j["ny"] = ny;
    j["nodes"] = lat.n_nodes();
    j["k"] = pd.k;
    j["lambda1"] = {pd.lambda1.real(), pd.lambda1.imag()};
    j["lambda0"] = {pd.lambda0.real(), pd.lambda0.imag()};
    j["lambda0_polished"] = double(pd.lambda0_dd);
    j["mu_num"] = pd.mu_num;
    j["eps"] = pd.eps;
    j["residual"] = pd.residual;
    j["seconds"] = elapsed;
    write_json(rf.out, j);
  }
}

void run_harmonic_cmd(RunFlags& rf, bool write_fields) {
  rf.cfg.param_set = resolve_set(rf.scheme, rf.set).name;
  const SchemeParams par = find_param_set(rf.cfg.param_set);
  if (rf.cfg.dump_every > 0) {
    rf.cfg.on_dump = [&](const StepContext& ctx, const FieldState& st) {
      write_snapshot(rf.out, ctx, st);
    };
  }
  const double t0 = now_seconds();
  const HarmonicResult res = run_harmonic(rf.cfg);
  const double elapsed = now_seconds() - t0;
  std::printf("harmonic %s n=%d: linf = %.6e, l2 = %.6e, steps = %ld\n", par.name.c_str(),
              rf.cfg.n_edge, res.linf, res.l2, res.steps);
  if (rf.out.empty()) return;
  json j;
  j["config"] = config_echo(rf, par);
  j["dx"] = res.dx;
  j["linf"] = res.linf;
  j["l2"] = res.l2;
  j["steps"] = res.steps;
  j["final_change"] = res.final_change;
  j["seconds"] = elapsed;
  write_json(rf.out + ".json", j);
  if (write_fields) {
    write_vtk(rf.out + ".vtk", res.lat,
              {{"rho", res.rho}, {"exact", res.exact}, {"error", res.rho - res.exact}});
  }
}

void run_decay_cmd(RunFlags& rf) {
  rf.cfg.param_set = resolve_set(rf.scheme, rf.set).name;
  const SchemeParams par = find_param_set(rf.cfg.param_set);
  if (rf.cfg.dump_every > 0) {
    rf.cfg.on_dump = [&](const StepContext& ctx, const FieldState& st) {
      write_snapshot(rf.out, ctx, st);
    };
  }
  const double t0 = now_seconds();
  const DecayResult res = run_mode_decay(rf.cfg);
  const double elapsed = now_seconds() - t0;
  std::printf("decay %s n=%d: rate = %.8e (expected %.8e), linf(T) = %.3e\n", par.name.c_str(),
              rf.cfg.n_edge, res.rate, res.rate_expected, res.linf_at_horizon);
  if (rf.out.empty()) return;
  json j;
  j["config"] = config_echo(rf, par);
  j["dx"] = res.dx;
  j["zeta"] = res.zeta;
  j["mu"] = res.mu;
  j["rate"] = res.rate;
  j["rate_expected"] = res.rate_expected;
  j["linf_at_horizon"] = res.linf_at_horizon;
  j["steps"] = res.steps;
  j["center"] = res.center;
  j["seconds"] = elapsed;
  write_json(rf.out + ".json", j);
  VecX t(res.center_trace.size()), v(res.center_trace.size());
  for (std::size_t i = 0; i < res.center_trace.size(); ++i) {
    t[Eigen::Index(i)] = res.center_trace[i].first;
    v[Eigen::Index(i)] = res.center_trace[i].second;
  }
  write_csv(rf.out + "-center.csv", {"t", "value"}, {t, v});
}

std::vector<std::pair<int, int>> parse_modes(const std::string& spec) {
  std::vector<std::pair<int, int>> out;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    const std::size_t end = spec.find(';', pos);
    const std::string item = spec.substr(pos, end == std::string::npos ? end : end - pos);
    const std::size_t comma = item.find(',');
    if (comma == std::string::npos) throw ConfigError("modes want m,n pairs separated by ;");
    out.emplace_back(std::stoi(item.substr(0, comma)), std::stoi(item.substr(comma + 1)));
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  if (out.empty()) throw ConfigError("no modes given");
  return out;
}

void run_modes_cmd(RunFlags& rf, const std::string& mode_spec) {
  rf.cfg.param_set = resolve_set(rf.scheme, rf.set).name;
  const SchemeParams par = find_param_set(rf.cfg.param_set);
  const std::vector<std::pair<int, int>> wanted = parse_modes(mode_spec);
  const double t0 = now_seconds();
  const ModesResult res = run_dirichlet_modes(rf.cfg, wanted);
  const double elapsed = now_seconds() - t0;
  for (const ModeMatch& m : res.matches) {
    std::printf("mode (%d,%d): lambda = %.8f (exact %.8f), overlap = %.6f, shape linf = %.3e\n",
                m.m, m.n, m.lambda_num, m.lambda_exact, m.overlap, m.shape_linf);
  }
  if (rf.out.empty()) return;
  std::filesystem::create_directories(rf.out);
  const std::string dir = rf.out + "/";
  json j;
  j["config"] = config_echo(rf, par);
  j["dx"] = res.dx;
  j["mu"] = res.spectrum.mu;
  j["dt"] = res.spectrum.dt;
  j["seconds"] = elapsed;
  for (const ModeMatch& m : res.matches) {
    j["matches"].push_back({{"m", m.m},
                            {"n", m.n},
                            {"lambda_exact", m.lambda_exact},
                            {"lambda_num", m.lambda_num},
                            {"overlap", m.overlap},
                            {"shape_linf", m.shape_linf},
                            {"residual", m.residual}});
  }
  write_json(dir + "summary.json", j);
  const std::size_t nm = res.spectrum.modes.size();
  VecX re(nm), im(nm), lnum(nm), resid(nm);
  for (std::size_t i = 0; i < nm; ++i) {
    re[Eigen::Index(i)] = res.spectrum.modes[i].lambda.real();
    im[Eigen::Index(i)] = res.spectrum.modes[i].lambda.imag();
    lnum[Eigen::Index(i)] = res.spectrum.modes[i].lambda_num;
    resid[Eigen::Index(i)] = res.spectrum.modes[i].residual;
  }
  write_csv(dir + "eigenvalues.csv", {"re_lambda", "im_lambda", "lambda_num", "residual"},
            {re, im, lnum, resid});
  const SchemeParams par_lat = find_param_set(rf.cfg.param_set);
  const Lattice lat = experiment_lattice(par_lat, rf.cfg.n_edge,
                                         rf.cfg.side > 0.0 ? rf.cfg.side : mode_side());
  for (std::size_t i = 0; i < nm; ++i) {
    write_vtk(dir + "mode_" + std::to_string(i) + ".vtk", lat,
              {{"rho", res.spectrum.modes[i].rho}});
  }
}

void run_sweep_cmd(RunFlags& rf, const std::string& experiment, std::vector<int> sizes, int ny) {
  rf.cfg.param_set = resolve_set(rf.scheme, rf.set).name;
  json j;
  j["experiment"] = experiment;
  j["set"] = rf.cfg.param_set;
  if (experiment == "pipe") {
    const PipeSweep sweep = pipe_convergence(rf.cfg.param_set, sizes, ny, rf.cfg.subspace);
    j["k"] = sweep.k;
    j["eps"] = sweep.eps;
    j["mu_num"] = sweep.mu_num;
    j["order"] = sweep.order;
    std::printf("pipe sweep %s: order = %.3f\n", rf.cfg.param_set.c_str(), sweep.order);
  } else if (experiment == "harmonic" || experiment == "decay") {
    const SweepResult sweep = convergence_sweep(sizes, [&](int n) {
      ExperimentConfig c = rf.cfg;
      c.n_edge = n;
      if (experiment == "harmonic") {
        const HarmonicResult r = run_harmonic(c);
        return std::make_pair(r.dx, r.linf);
      }
      const DecayResult r = run_mode_decay(c);
      return std::make_pair(r.dx, r.linf_at_horizon);
    });
    for (auto [h, e] : sweep.h_err) {
      j["h"].push_back(h);
      j["err"].push_back(e);
    }
    j["order"] = sweep.order;
    std::printf("%s sweep %s: order = %.3f\n", experiment.c_str(), rf.cfg.param_set.c_str(),
                sweep.order);
  } else {
    throw ConfigError("experiment must be harmonic, decay or pipe");
  }
  if (!rf.out.empty()) write_json(rf.out, j);
}

std::string json_scalar_to_flag(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// --config file.json supplies defaults; explicit flags win
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + long(i), args.begin() + long(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + long(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("bad config file: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("config file must hold one JSON object");
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    bool present = false;
    for (const std::string& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        present = true;
        break;
      }
    }
    if (present) continue;
    args.push_back(flag);
    if (value.is_array()) {
      std::string joined;
      for (const auto& e : value) {
        if (!joined.empty()) joined += ",";
        joined += json_scalar_to_flag(e);
      }
      args.push_back(joined);
    } else {
      args.push_back(json_scalar_to_flag(value));
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"triangular-lattice relaxation schemes for the heat equation"};
  app.require_subcommand(1);

  // mesh
  auto mesh_scheme = std::make_shared<std::string>("d2t7");
  auto mesh_domain = std::make_shared<std::string>("triangle");
  auto mesh_n = std::make_shared<int>(8);
  auto mesh_nx = std::make_shared<int>(0), mesh_ny = std::make_shared<int>(0);
  auto mesh_dx = std::make_shared<double>(1.0);
  auto mesh_amp = std::make_shared<double>(0.0);
  auto mesh_seed = std::make_shared<std::uint64_t>(42);
  auto mesh_wall = std::make_shared<std::string>("edge");
  auto mesh_out = std::make_shared<std::string>("mesh.vtk");
  auto mesh_json = std::make_shared<std::string>("");
  CLI::App* mesh = app.add_subcommand("mesh", "build, validate and export a lattice");
  mesh->add_option("--scheme", *mesh_scheme, "d2t7 or d2t4");
  mesh->add_option("--domain", *mesh_domain, "triangle, rect or pipe");
  mesh->add_option("--n", *mesh_n, "nodes or triangles per side (triangle domain)");
  mesh->add_option("--nx", *mesh_nx, "periodic cells in the first direction");
  mesh->add_option("--ny", *mesh_ny, "periodic cells in the second direction");
  mesh->add_option("--dx", *mesh_dx, "lattice spacing");
  mesh->add_option("--perturb", *mesh_amp, "relative node perturbation amplitude");
  mesh->add_option("--seed", *mesh_seed, "perturbation seed");
  mesh->add_option("--wall", *mesh_wall, "wall placement after perturbation: half or edge");
  mesh->add_option("--out", *mesh_out, "VTK mesh path");
  mesh->add_option("--json", *mesh_json, "JSON descriptor path");
  mesh->callback([=] {
    run_mesh(*mesh_scheme, *mesh_domain, *mesh_n, *mesh_nx, *mesh_ny, *mesh_dx, *mesh_amp,
             *mesh_seed, *mesh_wall, *mesh_out, *mesh_json);
  });

  // matrices
  auto mat_scheme = std::make_shared<std::string>("d2t7");
  auto mat_out = std::make_shared<std::string>("matrices");
  CLI::App* mat = app.add_subcommand("matrices", "dump the per-class moment matrices as CSV");
  mat->add_option("--scheme", *mat_scheme, "d2t7 or d2t4");
  mat->add_option("--out", *mat_out, "output prefix");
  mat->callback([=] { run_matrices(*mat_scheme, *mat_out); });

  // tune
  auto tune_json = std::make_shared<std::string>("");
  CLI::App* tune = app.add_subcommand("tune", "print the built-in parameter sets");
  tune->add_option("--json", *tune_json, "also write the catalog as JSON");
  tune->callback([=] { run_tune(*tune_json); });

  // dispersion
  auto disp = std::make_shared<RunFlags>();
  auto disp_theta = std::make_shared<std::string>("0:15:90");
  auto disp_kmin = std::make_shared<double>(1e-3);
  auto disp_kmax = std::make_shared<double>(1e-1);
  auto disp_nk = std::make_shared<int>(25);
  auto disp_json = std::make_shared<std::string>("");
  CLI::App* dsp = app.add_subcommand("dispersion", "one-point eigenvalue branch over k");
  add_run_flags(dsp, *disp, "dispersion.csv");
  dsp->add_option("--kmin", *disp_kmin, "smallest wave number");
  dsp->add_option("--kmax", *disp_kmax, "largest wave number");
  dsp->add_option("--nk", *disp_nk, "points on the log grid");
  dsp->add_option("--theta", *disp_theta, "angle in degrees, or start:step:stop");
  dsp->add_option("--json", *disp_json, "summary path (orders per angle)");
  dsp->callback([=] { run_dispersion(*disp, *disp_theta, *disp_kmin, *disp_kmax, *disp_nk, *disp_json); });

  // pipe-modes / rect-modes
  auto pipe = std::make_shared<RunFlags>();
  auto pipe_nx = std::make_shared<int>(96), pipe_ny = std::make_shared<int>(4);
  CLI::App* pm = app.add_subcommand("pipe-modes", "diffusivity from a periodic pipe spectrum");
  add_run_flags(pm, *pipe, "");
  pm->add_option("--nx", *pipe_nx, "cells along the pipe");
  pm->add_option("--ny", *pipe_ny, "cells across the pipe");
  pm->callback([=] { run_periodic_modes(*pipe, *pipe_nx, *pipe_ny); });

  auto rect = std::make_shared<RunFlags>();
  auto rect_nx = std::make_shared<int>(36), rect_ny = std::make_shared<int>(52);
  CLI::App* rm = app.add_subcommand("rect-modes", "diffusivity from a periodic rectangle");
  add_run_flags(rm, *rect, "");
  rm->add_option("--nx", *rect_nx, "cells in the first direction");
  rm->add_option("--ny", *rect_ny, "cells in the second direction");
  rm->callback([=] { run_periodic_modes(*rect, *rect_nx, *rect_ny); });

  // harmonic
  auto harm = std::make_shared<RunFlags>();
  auto harm_fields = std::make_shared<bool>(false);
  CLI::App* hc = app.add_subcommand("harmonic", "steady state with the harmonic wall profile");
  add_run_flags(hc, *harm, "harmonic");
  hc->add_flag("--fields", *harm_fields, "also write rho/exact/error as VTK");
  hc->callback([=] { run_harmonic_cmd(*harm, *harm_fields); });

  // decay
  auto decay = std::make_shared<RunFlags>();
  CLI::App* dc = app.add_subcommand("decay", "fundamental-mode decay to the horizon");
  add_run_flags(dc, *decay, "decay");
  dc->callback([=] { run_decay_cmd(*decay); });

  // modes
  auto modes = std::make_shared<RunFlags>();
  auto modes_spec = std::make_shared<std::string>("2,2;4,4;6,6");
  CLI::App* mc = app.add_subcommand("modes", "walled decay spectrum and mode matching");
  add_run_flags(mc, *modes, "modes-out");
  mc->add_option("--modes", *modes_spec, "wanted modes as m,n pairs separated by ;");
  mc->callback([=] { run_modes_cmd(*modes, *modes_spec); });

  // sweep
  auto sweep = std::make_shared<RunFlags>();
  auto sweep_exp = std::make_shared<std::string>("harmonic");
  auto sweep_sizes = std::make_shared<std::vector<int>>(std::vector<int>{16, 23, 32, 45, 61});
  auto sweep_ny = std::make_shared<int>(4);
  CLI::App* sw = app.add_subcommand("sweep", "refinement sweep with a slope fit");
  add_run_flags(sw, *sweep, "");
  sw->add_option("--experiment", *sweep_exp, "harmonic, decay or pipe");
  sw->add_option("--sizes", *sweep_sizes, "refinement sizes")->delimiter(',');
  sw->add_option("--ny", *sweep_ny, "pipe rows (pipe sweeps)");
  sw->callback([=] { run_sweep_cmd(*sweep, *sweep_exp, *sweep_sizes, *sweep_ny); });

  try {
    std::vector<std::string> args = merge_config({argv + 1, argv + argc});
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
