#pragma once

#include "mrt/discrete_field.hpp"
#include "mrt/mode_spectrum.hpp"

namespace mrt {

/// Real unstable mode on a Grid2D:
///   w1 = 2 phi(y2) sin(xi y1), w2 = 2 psi(y2) cos(xi y1), beta = 2 theta cos(xi y1) - mean
/// with phi = -psi'/xi and theta = ((U^2 + aU) rho + lambda m^2 xi^2) phi / (U xi).
struct Eigenmode2D {
  int xi0 = 0;
  double Upsilon = 0;
  Field w1, w2, beta;
  Eigen::VectorXd phi, psi, theta; // at the n2 wall-normal nodes

  Vec2 w() const { return {w1, w2}; }
};

/// The 1D profile is re-solved on the interior nodes of the grid when the
/// supplied result lives on a different mesh, so Upsilon is the growth rate of
/// the same finite-difference problem. phi uses fourth-order differences.
Eigenmode2D build_mode(const ModeResult& mr, const Profile& p, const PhysParams& pp, const Grid2D& g);

struct ModeResidual {
  double momentum = 0;   // |R|_0 / |U^2 rho w|_0
  double divergence = 0; // |div w|_0 / |w|_0
  double wall_normal = 0;
};

/// Residual of U^2 rho w + U grad beta + a U rho w = lambda m^2 d11 w + g rho' w2 e2
/// evaluated with d1 and the second-order d2.
ModeResidual mode_residual(const Eigenmode2D& mode, const Profile& p, const PhysParams& pp, const Grid2D& g,
                           bool drop_beta = false);

struct LinearState {
  Vec2 eta, u;
  Field q;
};

/// delta e^{U t} (w/U, w, beta).
LinearState linear_solution(const Eigenmode2D& mode, double delta, double t);

struct SeedResult {
  Vec2 eta, u;
  double div_residual = 0; // |div_A0 u0|_0
  double det_min = 1, det_max = 1;
};

/// eta0 = delta w~/U, u0 = delta w~ projected to div_A0 u0 = 0, where w~ is w
/// projected with the identity geometry first.
SeedResult seed_initial_data(const Eigenmode2D& mode, double delta, const NeumannSolver& solver);

/// Project velocity v and displacement e: u0 = P_A0 v with A0 from e.
SeedResult compatible_data(const Vec2& eta, const Vec2& v, const NeumannSolver& solver);

struct InstabilityThresholds {
  double m0 = 0;
  double epsilon0 = 0;
  double Lambda = 0;
  double norms[2][6] = {}; // [chi][component x derivative]
};

/// L1 norms of chi_i, d1 chi_i, d2 chi_i for i = 1, 2 (the eight index
/// combinations of the escape criterion, six of them distinct).
void l1_norms(const Grid2D& g, const Vec2& chi, double out[6]);

InstabilityThresholds thresholds(const Eigenmode2D& mode, const Grid2D& g, double Lambda, double epsilon0);

/// T = ln(2 eps / (m0 delta)) / Lambda.
double escape_time(double Lambda, double epsilon, double m0, double delta);

/// Fourth-order derivative of samples on a uniform mesh (five-point stencils,
/// one-sided near the ends).
Eigen::VectorXd derivative4(const Eigen::VectorXd& f, double d);

} // namespace mrt
