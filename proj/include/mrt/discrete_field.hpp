#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mrt/profile.hpp"

namespace mrt {

/// Scalar nodal field, index j*n1 + i (y1 fastest).
using Field = Eigen::ArrayXd;

/// Two-component nodal field.
struct Vec2 {
  Field c1, c2;

  Vec2() = default;
  Vec2(Field a, Field b) : c1(std::move(a)), c2(std::move(b)) {}
  static Vec2 zero(Eigen::Index n) { return {Field::Zero(n), Field::Zero(n)}; }

  Vec2& operator+=(const Vec2& o) { c1 += o.c1; c2 += o.c2; return *this; }
  Vec2& operator-=(const Vec2& o) { c1 -= o.c1; c2 -= o.c2; return *this; }
  Vec2& operator*=(double s) { c1 *= s; c2 *= s; return *this; }
};
inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }

/// Diffeomorphism lost or the flow map left the slab.
class GeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Periodic in y1 over [0, 2pi), walls at y2 = 0 and y2 = h (both are nodes).
class Grid2D {
public:
  Grid2D(int n1, int n2, double h);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  Eigen::Index size() const { return Eigen::Index(n1_) * n2_; }
  double h() const { return h_; }
  double dy1() const { return dy1_; }
  double dy2() const { return dy2_; }
  double y1(int i) const { return i * dy1_; }
  double y2(int j) const { return j * dy2_; }
  Eigen::Index idx(int i, int j) const { return Eigen::Index(j) * n1_ + i; }

  Field sample(const std::function<double(double, double)>& f) const;
  /// f(y2) broadcast along y1.
  Field sample_y2(const std::function<double(double)>& f) const;

  /// Trapezoid weights in y2 times dy1; the H of the summation-by-parts pair.
  const Field& weights() const { return w_; }
  double integrate(const Field& f) const { return (w_ * f).sum(); }
  double inner(const Field& f, const Field& g) const { return (w_ * f * g).sum(); }
  double norm(const Field& f) const { return std::sqrt(inner(f, f)); }
  double norm(const Vec2& v) const { return std::sqrt(inner(v.c1, v.c1) + inner(v.c2, v.c2)); }
  double area() const { return 2.0 * 3.14159265358979323846 * h_; }
  /// Area mean with the quadrature weights.
  double mean(const Field& f) const { return integrate(f) / w_.sum(); }

  /// Wavenumber used by odd derivatives; 0 at the Nyquist index.
  double kappa(int k) const { return (2 * k == n1_) ? 0.0 : double(k); }
  int nk() const { return n1_ / 2 + 1; }

  /// Real-to-complex transform of every y1 row: out[j*nk + k].
  void forward(const Field& f, std::vector<std::complex<double>>& out) const;
  /// Inverse of forward including the 1/n1 normalization.
  Field backward(const std::vector<std::complex<double>>& in) const;

private:
  int n1_, n2_;
  double h_, dy1_, dy2_;
  Field w_;
  struct Plans;
  std::shared_ptr<Plans> plans_;
};

/// f(-y1), i.e. index i -> (n1 - i) mod n1 in every row.
Field reflect_y1(const Grid2D& g, const Field& f);

/// Fourier derivative in y1 (Nyquist zeroed).
Field d1(const Grid2D& g, const Field& f);
/// d1 applied twice.
Field d11(const Grid2D& g, const Field& f);
/// Centered second-order derivative in y2 with second-order one-sided wall rows.
Field d2(const Grid2D& g, const Field& f);
/// Centered derivative in y2 with first-order wall rows; with the trapezoid
/// weights it satisfies summation by parts, H D + D^T H = diag(-1, 0, .., 0, 1).
Field d2_sbp(const Grid2D& g, const Field& f);

/// Zero the y2 component at the wall rows.
void zero_wall_normal(const Grid2D& g, Vec2& v);
/// Max |v2| over the wall rows.
double wall_normal_max(const Grid2D& g, const Vec2& v);

/// Lagrangian geometry of zeta = y + eta. The cofactor matrix
///   cof = [[1 + d2 eta2, -d1 eta2], [-d2 eta1, 1 + d1 eta1]]
/// and J = det cof = det grad zeta are formed with d1 and d2_sbp, and
/// A = cof / J = (grad zeta)^{-T}. At J = 1 A is the cofactor itself.
struct GeometryA {
  Field c11, c12, c21, c22; // cofactor entries
  Field J;
  double max_det_dev = 0; // max |J - 1|

  Field a(int i, int j) const;
};

GeometryA identity_geometry(const Grid2D& g);
/// Throws GeometryError when J <= 0 anywhere.
GeometryA geometry(const Grid2D& g, const Vec2& eta);
/// Time derivative of the cofactor for eta_t = u; same closed form with u in
/// place of eta and no identity part. J is not used by the caller.
GeometryA geometry_rate(const Grid2D& g, const Vec2& u);

/// div_A v = A_lk d_k v_l, written as (1/J) d_k(cof_lk v_l) (exact by the Piola identity).
Field div_A(const Grid2D& g, const GeometryA& A, const Vec2& v);
/// d_k(cof_lk v_l) without the 1/J factor.
Field div_cof(const Grid2D& g, const GeometryA& A, const Vec2& v);
/// (grad_A f)_l = A_lk d_k f, pointwise. -grad_A is the adjoint of div_A in the
/// J-weighted inner product for fields with zero wall-normal component.
Vec2 grad_A(const Grid2D& g, const GeometryA& A, const Field& f);
/// curl_A v = A_1k d_k v2 - A_2k d_k v1, written in the conservative form
/// (1/J)(d_k(cof_1k v2) - d_k(cof_2k v1)).
Field curl_A(const Grid2D& g, const GeometryA& A, const Vec2& v);
/// d_j(cof_ij) for i = 1, 2.
Vec2 piola_residual(const Grid2D& g, const GeometryA& A);

/// Smallest C with |grad v|_0 <= C |(div v, curl v)|_0 for discrete fields
/// with v2 = 0 on the walls, derivatives d1 and d2. Computed mode by mode from
/// a dense generalized eigenproblem; modes with no y1 variation give 1.
double hodge_constant(const Grid2D& g);
/// |grad v|_0 / |(div v, curl v)|_0 with the same operators.
double hodge_ratio(const Grid2D& g, const Vec2& v);

struct NeumannOptions {
  double rtol = 1e-9;
  double ctol = 1e-10;
  int max_iter = 500;
};

/// Prescribed wall values of the normal component of grad_A q / rho.
/// Empty vectors mean zero flux.
struct WallFlux {
  Eigen::ArrayXd bottom, top; // length n1 each
};

struct NeumannResult {
  Field q;
  int iterations = 0;
  double residual = 0;          // relative, J-weighted norm
  double compat_deviation = 0;  // kernel component of rhs before projection, relative
};

/// Solves div_A(P_V grad_A q / rho) + rhs = 0 with the wall flux, q orthogonal
/// to the four-dimensional discrete kernel {1, (-1)^i, (-1)^j, (-1)^(i+j)}.
/// Preconditioned conjugate gradients on the symmetrized system, with an exact
/// per-Fourier-mode solve of the A = I operator as preconditioner.
class NeumannSolver {
public:
  NeumannSolver(const Grid2D& g, const Profile& p, NeumannOptions opts = {});

  NeumannResult solve(const GeometryA& A, const Field& rhs, const WallFlux& flux = {},
                      const Field* guess = nullptr) const;
  /// L q = div_A(P_V grad_A q / rho).
  Field apply(const GeometryA& A, const Field& q) const;
  /// Remove the kernel components of f in the H inner product.
  Field remove_kernel(const Field& f) const;

  const Grid2D& grid() const { return g_; }
  const Field& rho() const { return rho_; }
  const NeumannOptions& options() const { return opts_; }
  /// Apply the preconditioner to a residual of the symmetrized system.
  Field precondition(const Field& r) const;

private:
  Grid2D g_;
  NeumannOptions opts_;
  Field rho_, inv_rho_;
  std::vector<Field> kernel_; // H-orthonormal
  struct Precond;
  std::shared_ptr<const Precond> pc_;
};

/// Helmholtz projection in the rho-weighted metric: u <- u - P_V grad_A phi / rho
/// with L phi = div_A u. Returns the solve record; u ends with div_A u ~ 0.
NeumannResult project_solenoidal(const NeumannSolver& s, const GeometryA& A, Vec2& u, const Field* guess = nullptr);

/// Relative L2 error of the Neumann solve against the exact pressure of a
/// sheared map zeta = (y1 + 0.1 sin(pi y2 / h), y2), for which
/// q(y) = cos(zeta1) cos(pi y2 / h) and the right-hand side are known in closed form.
double neumann_manufactured_error(const Grid2D& g, const Profile& p, NeumannOptions opts = {1e-13, 1e-10, 2000});

NeumannResult neumann_solve(const Grid2D& g, const GeometryA& A, const Profile& p, const Field& rhs,
                            const WallFlux& flux = {}, NeumannOptions opts = {});

} // namespace mrt
