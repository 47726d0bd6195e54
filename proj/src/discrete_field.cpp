#include "mrt/discrete_field.hpp"

#include <cmath>
#include <deque>
#include <mutex>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <fftw3.h>

namespace mrt {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

using cplx = std::complex<double>;

} // namespace

struct Grid2D::Plans {
  fftw_plan fwd = nullptr, bwd = nullptr;
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

Grid2D::Grid2D(int n1, int n2, double h) : n1_(n1), n2_(n2), h_(h) {
  if (n1 < 4 || (n1 & (n1 - 1)) != 0) throw ConfigError("grid.n1 must be a power of two >= 4");
  if (n2 < 8) throw ConfigError("grid.n2 must be at least 8");
  if (!(h > 0)) throw ConfigError("domain height must be positive");
  dy1_ = 2.0 * 3.14159265358979323846 / n1;
  dy2_ = h / (n2 - 1);
  w_.resize(size());
  for (int j = 0; j < n2; ++j) {
    double wj = dy1_ * dy2_ * ((j == 0 || j == n2 - 1) ? 0.5 : 1.0);
    w_.segment(Eigen::Index(j) * n1, n1).setConstant(wj);
  }

  plans_ = std::make_shared<Plans>();
  std::vector<double> in(size());
  std::vector<cplx> out(std::size_t(n2) * nk());
  int len[1] = {n1};
  std::lock_guard<std::mutex> lock(planner_mutex());
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->fwd = fftw_plan_many_dft_r2c(1, len, n2, in.data(), nullptr, 1, n1,
                                       reinterpret_cast<fftw_complex*>(out.data()), nullptr, 1, nk(), flags);
  plans_->bwd = fftw_plan_many_dft_c2r(1, len, n2, reinterpret_cast<fftw_complex*>(out.data()), nullptr, 1,
                                       nk(), in.data(), nullptr, 1, n1, flags);
  if (!plans_->fwd || !plans_->bwd) throw std::runtime_error("FFTW planning failed");
}

Field Grid2D::sample(const std::function<double(double, double)>& f) const {
  Field out(size());
  for (int j = 0; j < n2_; ++j)
    for (int i = 0; i < n1_; ++i) out[idx(i, j)] = f(y1(i), y2(j));
  return out;
}

Field Grid2D::sample_y2(const std::function<double(double)>& f) const {
  Field out(size());
  for (int j = 0; j < n2_; ++j) out.segment(Eigen::Index(j) * n1_, n1_).setConstant(f(y2(j)));
  return out;
}

void Grid2D::forward(const Field& f, std::vector<cplx>& out) const {
  out.resize(std::size_t(n2_) * nk());
  Field tmp = f; // FFTW takes a non-const pointer
  fftw_execute_dft_r2c(plans_->fwd, tmp.data(), reinterpret_cast<fftw_complex*>(out.data()));
}

Field Grid2D::backward(const std::vector<cplx>& in) const {
  std::vector<cplx> tmp = in; // c2r overwrites its input
  Field out(size());
  fftw_execute_dft_c2r(plans_->bwd, reinterpret_cast<fftw_complex*>(tmp.data()), out.data());
  return out / n1_;
}

namespace {

Field spectral(const Grid2D& g, const Field& f, int order) {
  std::vector<cplx> c;
  g.forward(f, c);
  const int nk = g.nk();
  for (int j = 0; j < g.n2(); ++j)
    for (int k = 0; k < nk; ++k) {
      double kap = g.kappa(k);
      cplx m = order == 1 ? cplx(0, kap) : cplx(-kap * kap, 0);
      c[std::size_t(j) * nk + k] *= m;
    }
  return g.backward(c);
}

} // namespace

Field reflect_y1(const Grid2D& g, const Field& f) {
  const int n1 = g.n1();
  Field r(f.size());
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < n1; ++i) r[g.idx(i, j)] = f[g.idx((n1 - i) % n1, j)];
  return r;
}

Field d1(const Grid2D& g, const Field& f) { return spectral(g, f, 1); }
Field d11(const Grid2D& g, const Field& f) { return spectral(g, f, 2); }

Field d2(const Grid2D& g, const Field& f) {
  const int n1 = g.n1(), n2 = g.n2();
  const double c = 1.0 / (2.0 * g.dy2());
  Field out(g.size());
  auto row = [&](int j) { return f.segment(Eigen::Index(j) * n1, n1); };
  for (int j = 1; j < n2 - 1; ++j) out.segment(Eigen::Index(j) * n1, n1) = c * (row(j + 1) - row(j - 1));
  out.segment(0, n1) = c * (-3.0 * row(0) + 4.0 * row(1) - row(2));
  out.segment(Eigen::Index(n2 - 1) * n1, n1) = c * (3.0 * row(n2 - 1) - 4.0 * row(n2 - 2) + row(n2 - 3));
  return out;
}

Field d2_sbp(const Grid2D& g, const Field& f) {
  const int n1 = g.n1(), n2 = g.n2();
  const double c = 1.0 / (2.0 * g.dy2());
  Field out(g.size());
  auto row = [&](int j) { return f.segment(Eigen::Index(j) * n1, n1); };
  for (int j = 1; j < n2 - 1; ++j) out.segment(Eigen::Index(j) * n1, n1) = c * (row(j + 1) - row(j - 1));
  out.segment(0, n1) = (row(1) - row(0)) / g.dy2();
  out.segment(Eigen::Index(n2 - 1) * n1, n1) = (row(n2 - 1) - row(n2 - 2)) / g.dy2();
  return out;
}

void zero_wall_normal(const Grid2D& g, Vec2& v) {
  v.c2.segment(0, g.n1()).setZero();
  v.c2.segment(Eigen::Index(g.n2() - 1) * g.n1(), g.n1()).setZero();
}

double wall_normal_max(const Grid2D& g, const Vec2& v) {
  double a = v.c2.segment(0, g.n1()).abs().maxCoeff();
  double b = v.c2.segment(Eigen::Index(g.n2() - 1) * g.n1(), g.n1()).abs().maxCoeff();
  return std::max(a, b);
}

Field GeometryA::a(int i, int j) const {
  const Field* c[2][2] = {{&c11, &c12}, {&c21, &c22}};
  return *c[i - 1][j - 1] / J;
}

GeometryA identity_geometry(const Grid2D& g) {
  GeometryA A;
  A.c11 = A.c22 = A.J = Field::Ones(g.size());
  A.c12 = A.c21 = Field::Zero(g.size());
  return A;
}

GeometryA geometry(const Grid2D& g, const Vec2& eta) {
  GeometryA A;
  Field e11 = d1(g, eta.c1), e12 = d2_sbp(g, eta.c1);
  Field e21 = d1(g, eta.c2), e22 = d2_sbp(g, eta.c2);
  A.c11 = 1.0 + e22;
  A.c12 = -e21;
  A.c21 = -e12;
  A.c22 = 1.0 + e11;
  A.J = A.c11 * A.c22 - A.c12 * A.c21;
  Eigen::Index k;
  double jmin = A.J.minCoeff(&k);
  if (!(jmin > 0)) {
    std::ostringstream os;
    os << "det grad zeta = " << jmin << " <= 0 at node (" << k % g.n1() << ", " << k / g.n1() << ")";
    throw GeometryError(os.str());
  }
  A.max_det_dev = (A.J - 1.0).abs().maxCoeff();
  return A;
}

GeometryA geometry_rate(const Grid2D& g, const Vec2& u) {
  GeometryA A;
  A.c11 = d2_sbp(g, u.c2);
  A.c12 = -d1(g, u.c2);
  A.c21 = -d2_sbp(g, u.c1);
  A.c22 = d1(g, u.c1);
  A.J = Field::Ones(g.size());
  return A;
}

Field div_cof(const Grid2D& g, const GeometryA& A, const Vec2& v) {
  return d1(g, A.c11 * v.c1 + A.c21 * v.c2) + d2_sbp(g, A.c12 * v.c1 + A.c22 * v.c2);
}

Field div_A(const Grid2D& g, const GeometryA& A, const Vec2& v) { return div_cof(g, A, v) / A.J; }

Vec2 grad_A(const Grid2D& g, const GeometryA& A, const Field& f) {
  Field f1 = d1(g, f), f2 = d2_sbp(g, f);
  return {(A.c11 * f1 + A.c12 * f2) / A.J, (A.c21 * f1 + A.c22 * f2) / A.J};
}

Field curl_A(const Grid2D& g, const GeometryA& A, const Vec2& v) {
  Field t = d1(g, A.c11 * v.c2 - A.c21 * v.c1) + d2_sbp(g, A.c12 * v.c2 - A.c22 * v.c1);
  return t / A.J;
}

Vec2 piola_residual(const Grid2D& g, const GeometryA& A) {
  return {d1(g, A.c11) + d2_sbp(g, A.c12), d1(g, A.c21) + d2_sbp(g, A.c22)};
}

// ---------------------------------------------------------------------------
// Neumann solver

struct NeumannSolver::Precond {
  int n1 = 0, n2 = 0, nk = 0;
  std::deque<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> sparse;  // indexed by k
  std::vector<Eigen::LLT<Eigen::MatrixXd>> dense;                         // k = 0 and Nyquist
  std::vector<int> dense_slot;                                            // k -> slot or -1
};

NeumannSolver::NeumannSolver(const Grid2D& g, const Profile& p, NeumannOptions opts) : g_(g), opts_(opts) {
  if (std::abs(p.h() - g.h()) > 1e-12 * g.h()) throw ConfigError("profile height does not match the grid");
  rho_ = g.sample_y2([&](double y) { return p.rho(y); });
  inv_rho_ = 1.0 / rho_;

  const int n1 = g.n1(), n2 = g.n2();
  // kernel of the discrete operator, orthonormal in H
  for (int t = 0; t < 4; ++t) {
    Field c = g.sample([&](double, double) { return 1.0; });
    for (int j = 0; j < n2; ++j)
      for (int i = 0; i < n1; ++i) {
        double s = 1;
        if ((t & 1) && (i % 2)) s = -s;
        if ((t & 2) && (j % 2)) s = -s;
        c[g.idx(i, j)] = s;
      }
    for (const Field& e : kernel_) c -= g.inner(c, e) * e;
    kernel_.push_back(c / g.norm(c));
  }

  // per-mode matrices dy1 (kappa^2 Hy/rho + D^T Hy P D / rho)
  auto pc = std::make_shared<Precond>();
  pc->n1 = n1;
  pc->n2 = n2;
  pc->nk = g.nk();
  const double dy = g.dy2(), dy1 = g.dy1();
  Eigen::VectorXd hy(n2), ir(n2);
  for (int j = 0; j < n2; ++j) {
    hy[j] = dy * ((j == 0 || j == n2 - 1) ? 0.5 : 1.0);
    ir[j] = 1.0 / p.rho(g.y2(j));
  }
  std::vector<Eigen::Triplet<double>> td;
  for (int j = 1; j < n2 - 1; ++j) {
    td.emplace_back(j, j + 1, 0.5 / dy);
    td.emplace_back(j, j - 1, -0.5 / dy);
  }
  Eigen::SparseMatrix<double> D(n2, n2);
  D.setFromTriplets(td.begin(), td.end());
  // only interior rows of D survive P, so the wall closure never enters
  Eigen::VectorXd wint = hy.cwiseProduct(ir);
  wint[0] = wint[n2 - 1] = 0;
  Eigen::SparseMatrix<double> K = D.transpose() * wint.asDiagonal() * D;
  Eigen::SparseMatrix<double> Mr(n2, n2);
  {
    std::vector<Eigen::Triplet<double>> tm;
    for (int j = 0; j < n2; ++j) tm.emplace_back(j, j, hy[j] * ir[j]);
    Mr.setFromTriplets(tm.begin(), tm.end());
  }

  pc->sparse.resize(pc->nk);
  pc->dense_slot.assign(pc->nk, -1);
  for (int k = 0; k < pc->nk; ++k) {
    double kap = g.kappa(k);
    Eigen::SparseMatrix<double> S = dy1 * (kap * kap * Mr + K);
    if (kap == 0) {
      Eigen::MatrixXd Sd = Eigen::MatrixXd(S);
      Eigen::VectorXd c1 = Eigen::VectorXd::Ones(n2), c2(n2);
      for (int j = 0; j < n2; ++j) c2[j] = (j % 2) ? -1.0 : 1.0;
      auto hdot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(hy.cwiseProduct(b)); };
      c1 /= std::sqrt(hdot(c1, c1));
      c2 -= hdot(c2, c1) * c1;
      c2 /= std::sqrt(hdot(c2, c2));
      double scale = Sd.diagonal().mean();
      for (const auto* c : {&c1, &c2}) {
        Eigen::VectorXd hc = hy.cwiseProduct(*c);
        Sd += scale * hc * hc.transpose() / hc.squaredNorm();
      }
      pc->dense_slot[k] = int(pc->dense.size());
      pc->dense.emplace_back(Sd);
      if (pc->dense.back().info() != Eigen::Success) throw std::runtime_error("preconditioner factorization failed");
    } else {
      pc->sparse[k].compute(S);
      if (pc->sparse[k].info() != Eigen::Success) throw std::runtime_error("preconditioner factorization failed");
    }
  }
  pc_ = pc;
}

Field NeumannSolver::remove_kernel(const Field& f) const {
  Field out = f;
  for (const Field& e : kernel_) out -= g_.inner(out, e) * e;
  return out;
}

Field NeumannSolver::apply(const GeometryA& A, const Field& q) const {
  Vec2 G = grad_A(g_, A, q);
  zero_wall_normal(g_, G);
  G.c1 *= inv_rho_;
  G.c2 *= inv_rho_;
  return div_A(g_, A, G);
}

Field NeumannSolver::precondition(const Field& r) const {
  const Precond& pc = *pc_;
  std::vector<cplx> c;
  g_.forward(r, c);
  Eigen::VectorXd re(pc.n2), im(pc.n2);
  for (int k = 0; k < pc.nk; ++k) {
    for (int j = 0; j < pc.n2; ++j) {
      re[j] = c[std::size_t(j) * pc.nk + k].real();
      im[j] = c[std::size_t(j) * pc.nk + k].imag();
    }
    if (pc.dense_slot[k] >= 0) {
      const auto& f = pc.dense[pc.dense_slot[k]];
      re = f.solve(re);
      im = f.solve(im);
    } else {
      re = pc.sparse[k].solve(re);
      im = pc.sparse[k].solve(im);
    }
    for (int j = 0; j < pc.n2; ++j) c[std::size_t(j) * pc.nk + k] = cplx(re[j], im[j]);
  }
  return remove_kernel(g_.backward(c));
}

NeumannResult NeumannSolver::solve(const GeometryA& A, const Field& rhs_in, const WallFlux& flux,
                                   const Field* guess) const {
  const Field& H = g_.weights();
  const Field W = H * A.J;
  NeumannResult res;

  Field rhs = rhs_in;
  if (flux.bottom.size() || flux.top.size()) {
    Vec2 X = Vec2::zero(g_.size());
    const int n1 = g_.n1();
    if (flux.bottom.size() == n1) X.c2.segment(0, n1) = flux.bottom;
    if (flux.top.size() == n1) X.c2.segment(Eigen::Index(g_.n2() - 1) * n1, n1) = flux.top;
    rhs += div_A(g_, A, X);
  }

  // project rhs onto the complement of the kernel in the J-weighted product
  std::vector<Field> kw;
  for (const Field& e : kernel_) {
    Field c = e;
    for (const Field& b : kw) c -= (W * c * b).sum() * b;
    kw.push_back(c / std::sqrt((W * c * c).sum()));
  }
  double rnorm0 = std::sqrt((W * rhs * rhs).sum());
  double kcomp = 0;
  for (const Field& b : kw) {
    double cb = (W * rhs * b).sum();
    kcomp += cb * cb;
    rhs -= cb * b;
  }
  res.compat_deviation = rnorm0 > 0 ? std::sqrt(kcomp) / rnorm0 : 0.0;
  double after = 0;
  for (const Field& b : kw) after = std::max(after, std::abs((W * rhs * b).sum()));
  if (after > opts_.ctol * std::max(1.0, rnorm0))
    throw std::runtime_error("Neumann right-hand side incompatible after projection");

  const double bnorm = std::sqrt((W * rhs * rhs).sum());
  if (bnorm == 0) {
    res.q = Field::Zero(g_.size());
    return res;
  }

  // S = -W L is symmetric; PCG on S x = W rhs
  auto S = [&](const Field& x) -> Field { return -W * apply(A, x); };
  auto resid_norm = [&](const Field& r) { return std::sqrt((r * r / W).sum()) / bnorm; };
  Field b = W * rhs;
  Field x = guess ? remove_kernel(*guess) : Field::Zero(g_.size());
  Field r = guess ? Field(b - S(x)) : b;
  res.residual = resid_norm(r);
  if (res.residual <= opts_.rtol) {
    res.q = x;
    return res;
  }
  Field z = precondition(r), p = z;
  double rz = (r * z).sum();
  for (int it = 1; it <= opts_.max_iter; ++it) {
    Field Sp = S(p);
    double alpha = rz / (p * Sp).sum();
    x += alpha * p;
    r -= alpha * Sp;
    res.iterations = it;
    res.residual = resid_norm(r);
    if (!std::isfinite(res.residual)) throw std::runtime_error("Neumann solve produced non-finite residual");
    if (res.residual <= opts_.rtol) {
      res.q = remove_kernel(x);
      return res;
    }
    z = precondition(r);
    double rz_new = (r * z).sum();
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  std::ostringstream os;
  os << "Neumann solve did not reach rtol " << opts_.rtol << " in " << opts_.max_iter
     << " iterations (residual " << res.residual << ")";
  throw std::runtime_error(os.str());
}

NeumannResult project_solenoidal(const NeumannSolver& s, const GeometryA& A, Vec2& u, const Field* guess) {
  const Grid2D& g = s.grid();
  NeumannResult r = s.solve(A, -div_A(g, A, u), {}, guess);
  Vec2 G = grad_A(g, A, r.q);
  zero_wall_normal(g, G);
  u.c1 -= G.c1 / s.rho();
  u.c2 -= G.c2 / s.rho();
  return r;
}

NeumannResult neumann_solve(const Grid2D& g, const GeometryA& A, const Profile& p, const Field& rhs,
                            const WallFlux& flux, NeumannOptions opts) {
  return NeumannSolver(g, p, opts).solve(A, rhs, flux);
}

} // namespace mrt

namespace mrt {

double neumann_manufactured_error(const Grid2D& g, const Profile& p, NeumannOptions opts) {
  const double k = std::acos(-1.0) / g.h();
  auto f = [&](double y) { return 0.1 * std::sin(k * y); };
  Vec2 eta{g.sample([&](double, double y) { return f(y); }), Field::Zero(g.size())};
  GeometryA A = geometry(g, eta);
  Field exact = g.sample([&](double y1, double y2) { return std::cos(y1 + f(y2)) * std::cos(k * y2); });
  // rhs = -div_x(grad_x Q / rho) at x = zeta(y); rho depends on x2 = y2 only
  Field rhs = g.sample([&](double y1, double y2) {
    double c = std::cos(y1 + f(y2)), r = p.rho(y2);
    double Q = c * std::cos(k * y2), Q2 = -k * c * std::sin(k * y2);
    return (1 + k * k) * Q / r + p.drho(y2) * Q2 / (r * r);
  });
  NeumannSolver s(g, p, opts);
  Field ex = s.remove_kernel(exact);
  Field e = s.remove_kernel(s.solve(A, rhs).q) - ex;
  return g.norm(e) / g.norm(ex);
}

} // namespace mrt
