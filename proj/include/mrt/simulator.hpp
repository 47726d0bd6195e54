#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mrt/discrete_field.hpp"

namespace mrt {

struct FlowState {
  Vec2 eta, u;
  Field q; // most recent stage pressure, used as the next warm start
  double t = 0;

  static FlowState zero(const Grid2D& g);
};

/// A run left the regime the model covers (NaN, det <= 0, out of slab,
/// elliptic failure or det drift beyond tolerance).
class PhysicsAbort : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct StepOptions {
  double det_tol = 1e-4;
  int reproject_every = 16; // 0 disables
  double proj_tol = 1e-9;   // relative div_A u after reprojection
};

struct StageEval {
  Vec2 u_t;
  Field q;
  int iterations = 0;
};

/// Nonlinear transformed MRT system
///   eta_t = u,  rho u_t + grad_A q + a rho u = lambda m^2 d11 eta + g G_eta e2,  div_A u = 0,
/// advanced with classical RK4 and one pressure solve per stage.
class MrtSimulator {
public:
  MrtSimulator(const Grid2D& g, const Profile& p, const PhysParams& pp, NeumannOptions no = {},
               StepOptions so = {});

  /// rho(y2 + eta2) - rho(y2). Small displacements use the Taylor series of the
  /// profile so the difference keeps full relative precision.
  Field g_eta(const Field& eta2) const;

  /// Right-hand side in the convention of NeumannSolver::solve:
  ///   L q = (1/J) [div_cof((F - a rho u)/rho) + div_{cof_t} u],  F = lambda m^2 d11 eta + g G_eta e2,
  /// which is d/dt div_cof(u) = div_cof(u_t) + div_{cof_t}(u) = 0 with u_t from accel.
  /// F2 and u2 vanish on the walls, so the wall flux is zero.
  Field pressure_rhs(const FlowState& s, const GeometryA& A) const;

  /// (F - P_V grad_A q) / rho - a u.
  Vec2 accel(const FlowState& s, const GeometryA& A, const Field& q) const;

  /// Geometry, pressure and acceleration at s.
  StageEval evaluate(const FlowState& s, const Field* guess) const;

  /// One RK4 step; reprojects u per cadence. Throws PhysicsAbort.
  void step(FlowState& s, double dt);

  /// u <- P_A u. Returns the relative residual |div_A u| / |u|.
  double reproject(FlowState& s) const;

  double cfl_dt(const FlowState& s, double cfl) const;

  const Grid2D& grid() const { return g_; }
  const Profile& profile() const { return p_; }
  const PhysParams& phys() const { return pp_; }
  const NeumannSolver& solver() const { return solver_; }
  const StepOptions& step_options() const { return so_; }
  long steps() const { return steps_; }
  double last_det_dev() const { return last_det_dev_; }
  double last_projection_residual() const { return last_proj_; }

private:
  Grid2D g_;
  Profile p_;
  PhysParams pp_;
  StepOptions so_;
  NeumannSolver solver_;
  Field rho_, drho_[5]; // drho_[k] = k-th derivative at the nodes
  Field y2_;
  long steps_ = 0;
  double last_det_dev_ = 0, last_proj_ = 0;
};

struct RunOptions {
  double t_end = 1;
  double dt = 0;   // 0: from cfl at t = 0
  double cfl = 0.4;
  int output_every = 10; // steps between observer calls
};

struct RunResult {
  FlowState final;
  bool aborted = false;
  std::string abort_reason;
  long steps = 0;
  double dt = 0;
};

/// Called at t = 0, every output_every steps and at the end, with the state,
/// its acceleration and the pressure at that state.
using Observer = std::function<void(const FlowState&, const StageEval&)>;

RunResult run(MrtSimulator& sim, FlowState init, const RunOptions& ro, const Observer& obs = {});

/// Eulerian fields (rho pert., v, M, beta) sampled at the grid nodes x through the inverse flow map.
struct EulerianFields {
  Field rho; // rho(y2) - rho(x2) with y = zeta^{-1}(x)
  Vec2 v, M; // M = (m, 0) + m d1 eta
  Field beta;
  std::vector<int> holes; // nodes where the inverse map did not converge
  int max_newton = 0;
};

/// Inverts zeta = y + eta by Newton iteration per node on a bilinear (periodic in
/// y1) interpolant of eta and its gradient. Unconverged nodes are left as holes
/// filled with the bilinear value at the last iterate.
EulerianFields reconstruct_eulerian(const Grid2D& g, const FlowState& s, const Profile& p, double m);

/// Reflection y1 -> -y1 parity defect: |eta1 + R eta1| + |eta2 - R eta2| (same
/// for u) over |(eta, u)|.
double parity_defect(const Grid2D& g, const FlowState& s);

} // namespace mrt
