#pragma once

// Polynomial moment bases and the matrices that carry particle densities to
// moments and back.
//
// For a node x with incoming slots j, moments are m_k = sum_j Mt(x)_{kj} f_j
// with Mt(x)_{kj} = p_k(-xi_j(x)).  The outgoing map P has rows taken from
// the inverses of the neighbors' Mt:  P(x)_{j,l} = Mt(x_j)^{-1}_{n_j(x),l};
// a slot cut by a wall falls back to the row of M(x)^{-1}, which on the
// unperturbed lattices makes P a single per-class matrix (M^{-1} for the
// Bravais lattice, the orientation-class inverse for d2t4).

#include <trilbm/lattice.hh>
#include <trilbm/types.hh>

#include <vector>

namespace trilbm {

struct PolynomialFamily {
  struct Term {
    int px = 0, py = 0;
    double coef = 0.0;
  };
  std::vector<std::vector<Term>> polys;

  int size() const { return int(polys.size()); }
  double eval(int k, const Vec2& xi) const;
  VecX eval_all(const Vec2& xi) const;
};

// 1, X, Y, X^2+Y^2, (4/sqrt3) XY, 2(X^2-Y^2), 3Y-4Y^3
PolynomialFamily d2t7_family();
// 1, X, Y, X^2+Y^2
PolynomialFamily d2t4_family();
PolynomialFamily family_for(SchemeKind kind);

// M_{kj} = p_k(xi_j); columns follow the velocity table
MatX moment_matrix(const PolynomialFamily& fam, const Mat2X& velocities);

struct NodeMatrices {
  MatX M;     // p_k(xi_j)
  MatX Mt;    // p_k(-xi_j)
  MatX Minv;
  MatX Mtinv;
  MatX P;     // outgoing map, rows assembled per the header comment
};

struct MomentMatrices {
  bool per_node = false;
  std::vector<NodeMatrices> byclass;  // indexed by node class when !per_node
  std::vector<NodeMatrices> bynode;   // indexed by node when per_node

  const NodeMatrices& at(const Lattice& lat, NodeId n) const {
    return per_node ? bynode[std::size_t(n)]
                    : byclass[std::size_t(lat.node_class[n])];
  }
};

// Builds M, Mt, their inverses and P for every class (or node, when the
// lattice carries per-node velocities).  Throws NumericalError on a singular
// moment matrix; warns on condition numbers above 1e8.
MomentMatrices transition_matrices(const Lattice& lat, const PolynomialFamily& fam);

// max over internal nodes and slots of | sum_j Mt(x)_{kj} P(x_j)_{n_j(x),l}
// - delta_{kl} |
double duality_identity_residual(const Lattice& lat, const MomentMatrices& mm);

// structure constants of the basis on the velocity set:
// p_k(xi) p_p(xi) = sum_l Lambda[k,p,l] p_l(xi) for every velocity xi
struct LambdaTensor {
  int q = 0;
  std::vector<double> a;  // k*q*q + p*q + l
  double at(int k, int p, int l) const { return a[std::size_t((k * q + p) * q + l)]; }
};

LambdaTensor lambda_tensor(const MatX& M);

}  // namespace trilbm
