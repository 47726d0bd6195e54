#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrt/profile.hpp"

namespace mrt {

enum class ModeBackend { finite_difference, chebyshev };

std::string to_string(ModeBackend b);
ModeBackend mode_backend_from_string(const std::string& s);

/// Interior collocation grid on (0, h) for psi with psi(0) = psi(h) = 0.
///
/// finite_difference: y_i = i*d, d = h/(n+1), i = 1..n. Mass matrices are
/// diagonal (trapezoid), stiffness matrices are the compact three-point form
/// with the coefficient sampled at cell midpoints.
///
/// chebyshev: interior Gauss-Lobatto points, Clenshaw-Curtis weights and the
/// collocation derivative of the full (n+2)-point interpolant.
struct ModeGrid {
  ModeBackend backend = ModeBackend::finite_difference;
  int n = 0;
  double h = 1.0;
  Eigen::VectorXd nodes;   // interior nodes, increasing
  Eigen::VectorXd weights; // quadrature weights at interior nodes

  static ModeGrid make(ModeBackend backend, int n, double h);
  static ModeGrid finite_difference(int n, double h) { return make(ModeBackend::finite_difference, n, h); }

  /// Matrix of psi -> int f psi chi.
  Eigen::MatrixXd mass(const std::function<double(double)>& f) const;
  /// Matrix of psi -> int f psi' chi'.
  Eigen::MatrixXd stiffness(const std::function<double(double)>& f) const;

  // chebyshev only: all n+2 nodes, their weights, derivative from interior values
  Eigen::VectorXd all_nodes, all_weights;
  Eigen::MatrixXd deriv;
};

/// Discrete forms at one frequency. E = xi^2 E~ and J is the weighted norm.
/// The two pieces of E are kept so callers can inspect them separately.
struct QuadraticForms {
  int xi = 0;
  Eigen::MatrixXd buoyancy; // xi^2 g M_{rho'}
  Eigen::MatrixXd tension;  // xi^2 lambda m^2 (xi^2 M_1 + K_1), positive semidefinite
  Eigen::MatrixXd E;        // buoyancy - tension
  Eigen::MatrixXd J;        // xi^2 M_rho + K_rho
  Eigen::VectorXd J_mass_diag; // diagonal of xi^2 M_rho, J minus it is semidefinite
};

struct SpectrumOptions {
  /// Flip the sign of the buoyancy term in E. Mutation hook for the verify suite.
  bool inject_sign_error = false;
  /// Also solve the growth-rate fixed point by bisection on actual eigensolves.
  bool fixed_point_check = false;
  /// Dense generalized eigensolve up to this size, shifted inverse iteration above.
  int dense_limit = 512;
};

QuadraticForms assemble_forms(const Profile& p, const PhysParams& pp, int xi, const ModeGrid& grid,
                              const SpectrumOptions& opts = {});

struct AlphaResult {
  double alpha = 0;
  Eigen::VectorXd psi; // psi^T J psi = 1, largest |entry| positive
  int iterations = 0;  // 0 for the dense path
};

/// Largest generalized eigenvalue of (E - a s J, J).
AlphaResult alpha_of_s(const QuadraticForms& f, double a, double s, int dense_limit = 512);
inline AlphaResult alpha0(const QuadraticForms& f, int dense_limit = 512) { return alpha_of_s(f, 0.0, 0.0, dense_limit); }

/// max-norm of (alpha J - E) psi relative to max-norm of psi.
double bvp_residual(const QuadraticForms& f, double alpha, const Eigen::VectorXd& psi);

/// Positive root of gamma^2 + a gamma = alpha0, or 0 when alpha0 <= 0.
double growth_rate(double alpha0, double a);

/// Fixed points of s -> alpha(s) found by bisection with a fresh eigensolve
/// per evaluation. `bvp` solves s^2 = alpha(s); `textual` solves s = alpha(s).
struct FixedPointCheck {
  double gamma_bvp = 0;
  double gamma_textual = 0;
  int evaluations = 0;
};
FixedPointCheck fixed_point_gamma(const QuadraticForms& f, double a, int dense_limit = 512);

struct ModeResult {
  int xi = 0;
  double alpha0 = 0;
  double gamma = 0;
  Eigen::VectorXd psi;
  bool unstable = false;
  double residual = 0;
  double gamma_fixed_point = -1; // set when fixed_point_check is on
  double gamma_textual = -1;
  ModeBackend backend = ModeBackend::finite_difference;
  double h = 1.0;
};

ModeResult solve_mode(const Profile& p, const PhysParams& pp, int xi, const ModeGrid& grid,
                      const SpectrumOptions& opts = {});

struct GrowthSpectrum {
  std::vector<ModeResult> modes; // xi = 1..xi_max
  std::vector<int> F;            // unstable set with its mirror, sorted
  double Lambda = 0;
  int xi_star = 0; // 0 when F is empty
  double m_C = 0;
  bool tail_decreasing = false;
  std::vector<std::string> warnings;
  int n = 0;
  ModeBackend backend = ModeBackend::finite_difference;

  const ModeResult& mode(int xi) const;
};

GrowthSpectrum compute_spectrum(const Profile& p, const PhysParams& pp, int xi_max, const ModeGrid& grid,
                                const SpectrumOptions& opts = {});

/// m_C = sqrt(g mu_max / lambda), mu_max the top eigenvalue of (M_{rho'}, K_1 + M_1).
/// Zero when the profile has no Rayleigh-Taylor region.
double critical_field(const Profile& p, double g, double lambda, const ModeGrid& grid, int dense_limit = 512);

struct EnergyBoundResult {
  double worst_ratio = 0;
  std::vector<double> ratios;
  double extremal_ratio = 0; // at the fastest mode, should be 1
  int extremal_xi = 0;
};

/// Random divergence-free trial fields (xi phi + psi' = 0 mode by mode, plus
/// horizontal shears) and the ratio E(v) / ((Lambda^2 + a Lambda) |sqrt(rho) v|^2),
/// evaluated by 2D quadrature on a 64 x n2 grid (n2 = 257 by default).
/// When Lambda = 0 the ratio is +inf for E > 0 and 0 otherwise.
EnergyBoundResult verify_energy_bound(const GrowthSpectrum& s, const Profile& p, const PhysParams& pp, int trials,
                                      std::uint64_t seed = 1, int n2 = 257);

} // namespace mrt
