#include <trilbm/analysis.hh>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace trilbm {

namespace {

// ---- double-double building blocks for the one-point matrices -------------
//
// The high-order parameter sets push |mu - mu_num| below 1e-18 at k = 1e-3,
// so the amplification matrix itself is built in double-double arithmetic
// with the exact sqrt(3)/2 velocity components; the plain-double matrix is
// the rounded image of this one.

CDdMat cdd_identity(int n) {
  CDdMat a(n);
  for (int i = 0; i < n; ++i) a.at(i, i) = CDd{Dd(1.0), Dd(0.0)};
  return a;
}

CDdMat cdd_mul(const CDdMat& a, const CDdMat& b) {
  const int n = a.n;
  CDdMat c(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      CDd acc{};
      for (int k = 0; k < n; ++k) acc += a.at(i, k) * b.at(k, j);
      c.at(i, j) = acc;
    }
  }
  return c;
}

CDdMat cdd_inv(const CDdMat& a) {
  const int n = a.n;
  CDdMat inv(n);
  for (int col = 0; col < n; ++col) {
    std::vector<CDd> e(static_cast<std::size_t>(n));
    e[std::size_t(col)] = CDd{Dd(1.0), Dd(0.0)};
    solve_cdd(a, e);
    for (int i = 0; i < n; ++i) inv.at(i, col) = e[std::size_t(i)];
  }
  return inv;
}

CDd cr(Dd x) { return {x, Dd(0.0)}; }
CDd cr(double x) { return {Dd(x), Dd(0.0)}; }

struct DdTables {
  int q = 0;
  bool two_class = false;
  std::vector<std::pair<Dd, Dd>> xi;  // moving slots of the left/base class
  CDdMat CL, CR;                      // incoming-representation collision
  CDdMat CS;                          // one-class collision for the profile reduction
};

// relaxation map in moment space: m* = ((I - S) + S g e0^T) m
CDdMat relax_map(const SchemeParams& par, int q) {
  CDdMat R(q);
  std::vector<Dd> g(static_cast<std::size_t>(q));
  g[0] = Dd(1.0);
  g[1] = Dd(par.u) / Dd(par.zeta);
  g[2] = Dd(par.v) / Dd(par.zeta);
  g[3] = Dd(par.a3);
  for (int k = 0; k < q; ++k) {
    R.at(k, k) = cr(Dd(1.0) - Dd(par.s[k]));
    R.at(k, 0) += cr(Dd(par.s[k]) * g[std::size_t(k)]);
  }
  return R;
}

DdTables dd_tables(const SchemeParams& par) {
  const Dd h = sqrt(Dd(3.0)) / Dd(2.0);  // exact sqrt(3)/2
  const Dd one(1.0), two(2.0), half(0.5), zero(0.0);
  DdTables t;
  if (par.kind == SchemeKind::d2t7) {
    t.q = 7;
    t.xi = {{zero, one}, {-h, half}, {-h, -half}, {zero, -one}, {h, -half}, {h, half}};
    // rows of the moment matrix on the exact velocity set
    const Dd M[7][7] = {
        {one, one, one, one, one, one, one},
        {zero, zero, -h, -h, zero, h, h},
        {zero, one, half, -half, -one, -half, half},
        {zero, one, one, one, one, one, one},
        {zero, zero, -one, one, zero, -one, one},
        {zero, -two, one, one, -two, one, one},
        {zero, -one, one, -one, one, -one, one},
    };
    CDdMat Mm(7);
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) Mm.at(i, j) = cr(M[i][j]);
    // classic representation: collision = M^{-1} R M
    t.CL = cdd_mul(cdd_inv(Mm), cdd_mul(relax_map(par, 7), Mm));
  } else {
    t.q = 4;
    t.two_class = true;
    t.xi = {{-one, zero}, {half, -h}, {half, h}};
    const Dd ML[4][4] = {
        {one, one, one, one},
        {zero, -one, half, half},
        {zero, zero, -h, h},
        {zero, one, one, one},
    };
    CDdMat L(4), Rr(4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        L.at(i, j) = cr(ML[i][j]);
        // right class negates the two odd rows
        Rr.at(i, j) = (i == 1 || i == 2) ? cr(-ML[i][j]) : cr(ML[i][j]);
      }
    }
    const CDdMat R = relax_map(par, 4);
    // incoming moments use the opposite class's moment matrix
    t.CL = cdd_mul(cdd_inv(L), cdd_mul(R, Rr));
    t.CR = cdd_mul(cdd_inv(Rr), cdd_mul(R, L));
    // regular-profile reduction: incoming moments and the reconstruction at
    // the displaced cell share the same (right-class) matrix
    t.CS = cdd_mul(cdd_inv(Rr), cdd_mul(R, Rr));
  }
  return t;
}

// One-point matrix of the published dispersion analysis.  On the one-class
// lattice this is the exact Bloch symbol.  On the two-orientation lattice it
// is the regular-profile reduction: one q x q matrix whose moments and
// reconstruction both use the right-class matrix, as if every cell saw the
// same smooth profile.  The reduction keeps the odd (first- and third-order)
// terms of the equivalent equation; the exact two-cell symbol loses them,
// see two_cell_dd.
CDdMat one_point_dd(const SchemeParams& par, double kx, double ky) {
  const DdTables t = dd_tables(par);
  const int q = t.q;
  auto phase = [&](const std::pair<Dd, Dd>& xi) {
    return Dd(kx) * xi.first + Dd(ky) * xi.second;
  };
  CDdMat A(q);
  if (!t.two_class) {
    for (int j = 0; j < q; ++j) {
      // classic streaming: f_j(x, t+1) = f*_j(x - xi_j)
      const CDd ph = j == 0 ? cr(1.0) : dd_polar(-phase(t.xi[std::size_t(j - 1)]));
      for (int l = 0; l < q; ++l) A.at(j, l) = ph * t.CL.at(j, l);
    }
    return A;
  }
  for (int j = 0; j < q; ++j) {
    // incoming slot j reads the neighbor at x + xi_j; the rest slot stays
    const CDd ph = j == 0 ? cr(1.0) : dd_polar(phase(t.xi[std::size_t(j - 1)]));
    for (int l = 0; l < q; ++l) A.at(j, l) = ph * t.CS.at(j, l);
  }
  return A;
}

// Exact Bloch symbol of the two-orientation cell pair.  Swapping the two
// q-blocks conjugates the matrix, so the physical branch is real and even in
// k: the exact symbol has no odd error terms and every parameter set decays
// at second order.  Used for stability, not for the dispersion orders.
CDdMat two_cell_dd(const SchemeParams& par, double kx, double ky) {
  const DdTables t = dd_tables(par);
  const int q = t.q;
  auto phase = [&](const std::pair<Dd, Dd>& xi) {
    return Dd(kx) * xi.first + Dd(ky) * xi.second;
  };
  if (!t.two_class) return one_point_dd(par, kx, ky);
  // incoming slot j of a left cell reads the right neighbor at x + xi^L_j,
  // and conversely; rest slots stay on the cell
  CDdMat A(2 * q);
  for (int j = 0; j < q; ++j) {
    const CDd phL = j == 0 ? CDd{} : dd_polar(phase(t.xi[std::size_t(j - 1)]));
    const CDd phR = j == 0 ? CDd{} : conj(phL);
    for (int l = 0; l < q; ++l) {
      A.at(j, l) = (j == 0 ? t.CL.at(0, l) : CDd{});
      A.at(j, q + l) = phL * t.CR.at(j, l);
      A.at(q + j, l) = phR * t.CL.at(j, l);
      A.at(q + j, q + l) = (j == 0 ? t.CR.at(0, l) : CDd{});
    }
  }
  return A;
}

CMatX downcast(const CDdMat& a) {
  CMatX m(a.n, a.n);
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) m(i, j) = to_cplx(a.at(i, j));
  return m;
}

Dd mu_ref_dd(const SchemeParams& par) {
  const Dd sigma1 = Dd(1.0) / Dd(par.s[1]) - Dd(0.5);
  Dd mu = Dd(par.zeta) * Dd(par.a3) * sigma1;
  if (par.kind == SchemeKind::d2t7) mu = mu / Dd(2.0);
  return mu;
}

// physical-branch eigenpair of the double matrix nearest the heat prediction
std::pair<Cplx, CVecX> physical_pair(const CMatX& A, double prediction) {
  Eigen::ComplexEigenSolver<CMatX> es(A);
  if (es.info() != Eigen::Success) throw NumericalError("one-point eigensolver failed");
  Eigen::Index best = 0, second = -1;
  double d1 = std::abs(es.eigenvalues()[0] - prediction);
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i) {
    const double d = std::abs(es.eigenvalues()[i] - prediction);
    if (d < d1) {
      second = best;
      best = i;
      d1 = d;
    } else if (second < 0 || d < std::abs(es.eigenvalues()[second] - prediction)) {
      second = i;
    }
  }
  const double d2 = std::abs(es.eigenvalues()[second] - prediction);
  if (d2 < 2.0 * d1 && d1 > 1e-12) {
    throw NumericalError("ambiguous physical branch at prediction " + std::to_string(prediction));
  }
  return {es.eigenvalues()[best], es.eigenvectors().col(best)};
}

DispersionPoint dispersion_point(const SchemeParams& par, double k, double theta) {
  const double kx = k * std::cos(theta), ky = k * std::sin(theta);
  const CDdMat Add = one_point_dd(par, kx, ky);
  const CMatX A = downcast(Add);
  const double mu = double(mu_ref_dd(par));
  // one matrix application advances one sweep, a fraction of the unit dt
  auto [lam, v] = physical_pair(A, 1.0 - mu * k * k / par.sweeps_per_dt());
  const RefinedPair rp = refine_eigenpair(Add, lam, v);

  DispersionPoint p;
  p.k = k;
  p.theta = theta;
  p.lambda_dd = rp.lambda;
  p.lambda = to_cplx(rp.lambda);
  const Dd k2 = two_prod(kx, kx) + two_prod(ky, ky);
  // one sweep covers 1/sweeps_per_dt of the diffusive unit (lattice units)
  const CDd mu_num =
      -dd_log1p(rp.lambda - cr(1.0)) * cr(double(par.sweeps_per_dt())) / cr(k2);
  p.mu_num = to_cplx(mu_num);
  const CDd err = cr(mu_ref_dd(par)) - mu_num;
  p.eps = double(sqrt(norm2(err)));
  return p;
}

SchemeParams make_set(const char* name, SchemeKind kind, double zeta, double a3,
                      std::initializer_list<double> rates) {
  SchemeParams p;
  p.name = name;
  p.kind = kind;
  p.zeta = zeta;
  p.a3 = a3;
  p.s.resize(Eigen::Index(rates.size()));
  Eigen::Index i = 0;
  for (double r : rates) p.s[i++] = r;
  return p;
}

}  // namespace

double mu_d2t7(double zeta, double a3, double s1) {
  return 0.5 * zeta * a3 * henon_sigma(s1);
}

double theta_d2t7(double zeta, double a3, double s1, double s3, double s4) {
  const double o1 = henon_sigma(s1), o3 = henon_sigma(s3), o4 = henon_sigma(s4);
  return -(1.0 / 16.0) * o1 * a3 * zeta *
         ((1.0 - a3) * (1.0 - 4.0 * o1 * o3) - 2.0 * o1 * o4 + 4.0 * a3 * o1 * o1);
}

double mu_d2t4(double zeta, double a3, double s1) {
  return zeta * a3 * henon_sigma(s1);
}

double d2t4_first_order_coeff(double zeta, double a3, double s1) {
  const double o1 = henon_sigma(s1);
  return (a3 * zeta / 24.0) * (12.0 * o1 * o1 - 1.0);
}

std::vector<SchemeParams> builtin_param_sets() {
  using K = SchemeKind;
  const double s1_7 = 0.8, s3_7 = 1.428571428571428;
  const double s1_4 = 1.267949192431122;
  return {
      make_set("d2t7-order2", K::d2t7, 1.0, 0.25,
               {0.0, s1_7, s1_7, s3_7, 0.481927710843373, 0.481927710843373,
                0.476190476190476}),
      make_set("d2t7-order4", K::d2t7, 1.0, 0.25,
               {0.0, s1_7, s1_7, s3_7, 0.930232558139534, 0.930232558139534,
                0.526315789473684}),
      make_set("d2t7-order6", K::d2t7, 1.0, 0.25,
               {0.0, s1_7, s1_7, 1.086117521785847, 1.344205296559553, 1.344205296559553,
                0.647305233773416}),
      make_set("d2t4-order1", K::d2t4, 1.0, 0.216506350946109,
               {0.0, 1.2, 1.2, 0.750796078775233}),
      // the published "at least second order" pair (a3, s1); the free s3 is
      // taken from the second-order completion
      make_set("d2t4-sup2", K::d2t4, 1.0, 0.25, {0.0, s1_4, s1_4, 0.422649730810374}),
      make_set("d2t4-order2", K::d2t4, 1.0, 0.25, {0.0, s1_4, s1_4, 0.422649730810374}),
      make_set("d2t4-order3", K::d2t4, 1.0, 0.25, {0.0, s1_4, s1_4, 0.758775495823486}),
      make_set("d2t4-order4", K::d2t4, 1.0, 0.25, {0.0, s1_4, s1_4, 0.732050807568877}),
  };
}

SchemeParams find_param_set(const std::string& name) {
  for (SchemeParams& p : builtin_param_sets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const SchemeParams& p : builtin_param_sets()) known += " " + p.name;
  throw ConfigError("unknown parameter set '" + name + "'; known:" + known);
}

CMatX one_point_matrix(const SchemeParams& par, const Vec2& k) {
  return downcast(one_point_dd(par, k.x(), k.y()));
}

CDdMat one_point_matrix_dd(const SchemeParams& par, const Vec2& k) {
  return one_point_dd(par, k.x(), k.y());
}

CMatX two_cell_matrix(const SchemeParams& par, const Vec2& k) {
  return downcast(two_cell_dd(par, k.x(), k.y()));
}

CVecX one_point_spectrum(const SchemeParams& par, double k, double theta) {
  const CMatX A = downcast(one_point_dd(par, k * std::cos(theta), k * std::sin(theta)));
  Eigen::ComplexEigenSolver<CMatX> es(A, false);
  if (es.info() != Eigen::Success) throw NumericalError("one-point eigensolver failed");
  CVecX ev = es.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(),
            [](Cplx a, Cplx b) { return std::abs(a) > std::abs(b); });
  return ev;
}

std::vector<DispersionPoint> dispersion_branch(const SchemeParams& par, double kmin,
                                               double kmax, int nk, double theta) {
  if (!(kmin > 0.0) || !(kmax > kmin) || nk < 2) throw ConfigError("bad dispersion grid");
  std::vector<DispersionPoint> out;
  out.reserve(std::size_t(nk));
  for (int i = 0; i < nk; ++i) {
    const double k = kmin * std::pow(kmax / kmin, double(i) / double(nk - 1));
    out.push_back(dispersion_point(par, k, theta));
  }
  return out;
}

double measured_order(const std::vector<std::pair<double, double>>& h_err) {
  std::vector<std::pair<double, double>> pts;
  for (auto [h, e] : h_err) {
    if (h > 0.0 && e > 0.0 && std::isfinite(e)) pts.emplace_back(std::log(h), std::log(e));
  }
  if (pts.size() < 3) throw ConfigError("order fit needs at least 3 usable points");
  auto [lo, hi] = std::minmax_element(pts.begin(), pts.end());
  // mesh ladders grow by ~sqrt(2) per step, so four sizes span a factor ~2.8
  if (hi->first - lo->first < std::log(2.5) * (1.0 - 1e-9)) {
    throw ConfigError("order fit needs a factor 2.5 of scale span");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = double(pts.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double dispersion_anisotropy(const SchemeParams& par, double k,
                             const std::vector<double>& thetas) {
  if (thetas.empty()) throw ConfigError("anisotropy needs at least one angle");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double th : thetas) {
    const double eps = dispersion_point(par, k, th).eps;
    lo = std::min(lo, eps);
    hi = std::max(hi, eps);
  }
  return hi - lo;
}

std::vector<double> default_theta_grid() {
  std::vector<double> g;
  for (int d = 0; d <= 90; d += 15) g.push_back(d * M_PI / 180.0);
  return g;
}

double bloch_spectral_radius(const SchemeParams& par, int grid) {
  if (grid < 1) throw ConfigError("bloch grid must be positive");
  // reciprocal basis of the unit cell in lattice units
  const double scale = par.kind == SchemeKind::d2t7 ? 1.0 : std::sqrt(3.0);
  Eigen::Matrix2d B;
  B.col(0) = scale * Vec2(std::sqrt(3.0) / 2, 0.5);
  B.col(1) = scale * Vec2(0.0, 1.0);
  const Eigen::Matrix2d G = 2.0 * M_PI * B.inverse().transpose();
  double radius = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Vec2 k = (double(i) / grid) * G.col(0) + (double(j) / grid) * G.col(1);
      // stability is a property of the full cell pair, not the reduction
      const CMatX A = downcast(two_cell_dd(par, k.x(), k.y()));
      Eigen::ComplexEigenSolver<CMatX> es(A, false);
      if (es.info() != Eigen::Success) throw NumericalError("bloch eigensolver failed");
      radius = std::max(radius, es.eigenvalues().cwiseAbs().maxCoeff());
    }
  }
  return radius;
}

}  // namespace trilbm
