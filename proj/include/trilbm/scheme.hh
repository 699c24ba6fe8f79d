#pragma once

// One time step of the relaxation scheme on a constant-degree lattice.
//
// State is stored in the incoming representation: f(j, n) is the density
// that arrived at node n from its j-neighbor (slot 0 is the rest particle).
// A step reads moments m = Mt f, relaxes them toward equilibrium, maps back
// to outgoing densities f* = P m*, and streams f*_j(x) into slot n_j(x) of
// the neighbor x_j.  Collision and the two maps fuse into one per-class
// matrix, so a step is a small matvec per node plus a permutation.
//
// Walls use the anti-bounce-back rule at the stored wall point:
//   incoming_j(x, t+dt) = -f*_j(x, t) + 2 f^eq_j(rho_w(wall_point, t)).
// With the homogeneous rule (rho_w = 0) the step is exactly linear, which is
// what the spectral module applies.

#include <trilbm/basis.hh>
#include <trilbm/lattice.hh>
#include <trilbm/types.hh>

#include <functional>
#include <string>
#include <vector>

namespace trilbm {

struct SchemeParams {
  std::string name;
  SchemeKind kind = SchemeKind::d2t7;
  double zeta = 1.0;  // dt = dx^2 / zeta (diffusive scaling)
  double a3 = 0.25;   // equilibrium weight of the energy moment
  double u = 0.0;     // advection velocity (zero in every study here)
  double v = 0.0;
  VecX s;             // per-moment relaxation rates, s[0] = 0

  int q() const { return int(s.size()); }
  double dt(double dx) const { return dx * dx / zeta; }
  // The two-orientation lattice reverses every velocity between sweeps, so a
  // particle needs two sweeps for one uncorrelated hop; the diffusive unit dt
  // spans the pair. On the one-class lattice a sweep is the whole unit.
  int sweeps_per_dt() const { return kind == SchemeKind::d2t4 ? 2 : 1; }
  double dt_sweep(double dx) const { return dt(dx) / sweeps_per_dt(); }
  // throws ConfigError unless rates lie in (0,2) and the isotropy pairs match
  void check() const;
};

struct BoundarySpec {
  enum Kind { periodic, dirichlet } kind = periodic;
  // value imposed at the wall point; ignored for periodic domains
  std::function<double(const Vec2&, double)> wall_value;

  static BoundarySpec make_periodic() { return {periodic, {}}; }
  static BoundarySpec make_dirichlet(std::function<double(const Vec2&, double)> g) {
    return {dirichlet, std::move(g)};
  }
};

// (rho, rho u dx/zeta, rho v dx/zeta, a3 rho, 0, ...)
VecX equilibrium_moments(double rho, const SchemeParams& par, double dx, int q);

VecX relax(const VecX& m, const VecX& m_eq, const VecX& s);

struct StepContext {
  const Lattice* lat = nullptr;
  const MomentMatrices* mm = nullptr;
  SchemeParams par;
  BoundarySpec bc;
  int threads = 1;
  long check_every = 256;  // divergence scan cadence

  // fused collide maps (incoming -> outgoing), per class or per node
  std::vector<MatX> collide;
  std::vector<VecX> eq_weights;  // f^eq = eq_weights[class] * rho

  struct WallStream {
    Eigen::Index dest;  // incoming slot fed by the wall
    Eigen::Index out;   // outgoing slot reflected by it
    Vec2 point;
    double w2;          // 2 f^eq_j weight at the owning node
  };
  VecXi src;  // q*N: flat source slot per destination slot, -1 under a wall
  std::vector<WallStream> walls;

  int q() const { return lat->q; }
  Eigen::Index dof() const { return Eigen::Index(lat->q) * lat->n_nodes(); }
};

// threads = 0 reads TRI_LBM_THREADS (default 1)
StepContext make_step_context(const Lattice& lat, const MomentMatrices& mm,
                              const SchemeParams& par, BoundarySpec bc,
                              int threads = 0);

struct FieldState {
  MatX f;  // q x N incoming densities
  double t = 0.0;
  long steps = 0;
};

FieldState initial_equilibrium(const StepContext& ctx, const VecX& rho0);
VecX density(const StepContext& ctx, const FieldState& state);
// moments of node n in the current state
VecX node_moments(const StepContext& ctx, const FieldState& state, NodeId n);

// advances by one dt; throws DivergenceError if the scan finds non-finite
// values
void step(StepContext& ctx, FieldState& state);

// homogeneous one-step map (walls at rho_w = 0), scalar-generic so the same
// code path serves double states, the complex Arnoldi vectors and the
// compensated Rayleigh-quotient evaluation
template <class Scalar>
void apply_step_linear(const StepContext& ctx, const Scalar* in, Scalar* out);

VecX operator_apply(const StepContext& ctx, const VecX& x);
CVecX operator_apply(const StepContext& ctx, const CVecX& x);
// plain (unconjugated) transpose of the homogeneous map, for left
// eigenvectors
VecX operator_apply_transpose(const StepContext& ctx, const VecX& x);
CVecX operator_apply_transpose(const StepContext& ctx, const CVecX& x);

}  // namespace trilbm
