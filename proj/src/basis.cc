#include <trilbm/basis.hh>

#include <cmath>
#include <iostream>
#include <string>

namespace trilbm {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (; p > 0; --p) r *= x;
  return r;
}

struct Inverted {
  MatX inv;
  double cond;
};

Inverted invert(const MatX& m, const char* what) {
  Eigen::JacobiSVD<MatX> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || !std::isfinite(smax)) {
    throw NumericalError(std::string("singular moment matrix (") + what + ")");
  }
  Eigen::PartialPivLU<MatX> lu(m);
  return {lu.inverse(), smax / smin};
}

NodeMatrices build_node(const PolynomialFamily& fam, const Mat2X& vel, const char* what,
                        double& cond) {
  NodeMatrices nm;
  nm.M = moment_matrix(fam, vel);
  nm.Mt = moment_matrix(fam, -vel);
  auto mi = invert(nm.M, what);
  auto ti = invert(nm.Mt, what);
  nm.Minv = std::move(mi.inv);
  nm.Mtinv = std::move(ti.inv);
  cond = std::max(mi.cond, ti.cond);
  return nm;
}

}  // namespace

double PolynomialFamily::eval(int k, const Vec2& xi) const {
  double acc = 0.0;
  for (const Term& t : polys[std::size_t(k)]) {
    acc += t.coef * ipow(xi.x(), t.px) * ipow(xi.y(), t.py);
  }
  return acc;
}

VecX PolynomialFamily::eval_all(const Vec2& xi) const {
  VecX out(size());
  for (int k = 0; k < size(); ++k) out[k] = eval(k, xi);
  return out;
}

PolynomialFamily d2t7_family() {
  const double c = 4.0 / std::sqrt(3.0);
  PolynomialFamily f;
  f.polys = {
      {{0, 0, 1.0}},                          // 1
      {{1, 0, 1.0}},                          // X
      {{0, 1, 1.0}},                          // Y
      {{2, 0, 1.0}, {0, 2, 1.0}},             // X^2 + Y^2
      {{1, 1, c}},                            // (4/sqrt3) XY
      {{2, 0, 2.0}, {0, 2, -2.0}},            // 2(X^2 - Y^2)
      {{0, 1, 3.0}, {0, 3, -4.0}},            // 3Y - 4Y^3
  };
  return f;
}

PolynomialFamily d2t4_family() {
  PolynomialFamily f;
  f.polys = {
      {{0, 0, 1.0}},
      {{1, 0, 1.0}},
      {{0, 1, 1.0}},
      {{2, 0, 1.0}, {0, 2, 1.0}},
  };
  return f;
}

PolynomialFamily family_for(SchemeKind kind) {
  return kind == SchemeKind::d2t7 ? d2t7_family() : d2t4_family();
}

MatX moment_matrix(const PolynomialFamily& fam, const Mat2X& velocities) {
  MatX m(fam.size(), velocities.cols());
  for (Eigen::Index j = 0; j < velocities.cols(); ++j) {
    m.col(j) = fam.eval_all(velocities.col(j));
  }
  return m;
}

MomentMatrices transition_matrices(const Lattice& lat, const PolynomialFamily& fam) {
  if (fam.size() != lat.q) {
    throw ConfigError("polynomial family size " + std::to_string(fam.size()) +
                      " does not match q = " + std::to_string(lat.q));
  }
  MomentMatrices mm;
  double worst_cond = 0.0;
  if (!lat.node_velocities) {
    for (std::size_t c = 0; c < lat.class_velocities.size(); ++c) {
      double cond = 0.0;
      NodeMatrices nm = build_node(fam, lat.class_velocities[c], "class", cond);
      // cut slots use this node's own inverse rows, internal slots the
      // neighbor's; on the unperturbed lattices both give M^{-1}
      nm.P = nm.Minv;
      worst_cond = std::max(worst_cond, cond);
      mm.byclass.push_back(std::move(nm));
    }
  } else {
    mm.per_node = true;
    const int q = lat.q;
    mm.bynode.reserve(std::size_t(lat.n_nodes()));
    for (NodeId n = 0; n < lat.n_nodes(); ++n) {
      Mat2X vel = lat.node_velocities->middleCols(Eigen::Index(n) * q, q);
      double cond = 0.0;
      mm.bynode.push_back(build_node(fam, vel, ("node " + std::to_string(n)).c_str(), cond));
      worst_cond = std::max(worst_cond, cond);
    }
    for (NodeId n = 0; n < lat.n_nodes(); ++n) {
      NodeMatrices& nm = mm.bynode[std::size_t(n)];
      nm.P.resize(q, q);
      for (int j = 0; j < q; ++j) {
        if (lat.link_is_boundary(n, j)) {
          nm.P.row(j) = mm.bynode[std::size_t(n)].Minv.row(j);
        } else {
          const NodeId m = lat.neighbors(j, n);
          nm.P.row(j) = mm.bynode[std::size_t(m)].Mtinv.row(lat.dual_index(j, n));
        }
      }
    }
  }
  if (worst_cond > 1e8) {
    std::cerr << "warning: moment matrix condition number " << worst_cond << "\n";
  }
  return mm;
}

double duality_identity_residual(const Lattice& lat, const MomentMatrices& mm) {
  const int q = lat.q;
  double worst = 0.0;
  for (NodeId n = 0; n < lat.n_nodes(); ++n) {
    bool internal = true;
    for (int j = 1; j < q && internal; ++j) internal = !lat.link_is_boundary(n, j);
    if (!internal) continue;
    const MatX& Mt = mm.at(lat, n).Mt;
    MatX acc = MatX::Zero(q, q);
    for (int j = 0; j < q; ++j) {
      const NodeId m = lat.neighbors(j, n);
      const MatX& P = mm.at(lat, m).P;
      acc += Mt.col(j) * P.row(lat.dual_index(j, n));
    }
    worst = std::max(worst, (acc - MatX::Identity(q, q)).cwiseAbs().maxCoeff());
  }
  return worst;
}

LambdaTensor lambda_tensor(const MatX& M) {
  const int q = int(M.rows());
  if (M.cols() != q) throw ConfigError("lambda_tensor needs a square moment matrix");
  LambdaTensor t;
  t.q = q;
  t.a.assign(std::size_t(q) * q * q, 0.0);
  Eigen::PartialPivLU<MatX> lu(M);
  MatX Minv = lu.inverse();
  for (int k = 0; k < q; ++k) {
    for (int p = 0; p < q; ++p) {
      for (int l = 0; l < q; ++l) {
        double acc = 0.0;
        for (int j = 0; j < q; ++j) acc += M(k, j) * M(p, j) * Minv(j, l);
        t.a[std::size_t((k * q + p) * q + l)] = acc;
      }
    }
  }
  return t;
}

}  // namespace trilbm
