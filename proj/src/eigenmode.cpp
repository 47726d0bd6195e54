#include "mrt/eigenmode.hpp"

#include <cmath>
#include <sstream>

namespace mrt {

Eigen::VectorXd derivative4(const Eigen::VectorXd& f, double d) {
  const Eigen::Index n = f.size();
  if (n < 5) throw std::invalid_argument("derivative4 needs at least 5 samples");
  static const double w0[5] = {-25, 48, -36, 16, -3}; // at offset 0 of stencil 0..4
  static const double w1[5] = {-3, -10, 18, -6, 1};   // at offset 1
  static const double wc[5] = {1, -8, 0, 8, -1};      // centered
  Eigen::VectorXd out(n);
  auto apply = [&](Eigen::Index at, Eigen::Index start, const double* w, int sign) {
    double s = 0;
    for (int k = 0; k < 5; ++k) s += w[k] * f[start + sign * k];
    out[at] = sign * s / (12.0 * d);
  };
  apply(0, 0, w0, 1);
  apply(1, 0, w1, 1);
  for (Eigen::Index j = 2; j < n - 2; ++j) apply(j, j - 2, wc, 1);
  apply(n - 1, n - 1, w0, -1);
  apply(n - 2, n - 1, w1, -1);
  return out;
}

Eigenmode2D build_mode(const ModeResult& mr_in, const Profile& p, const PhysParams& pp, const Grid2D& g) {
  if (!mr_in.unstable || !(mr_in.gamma > 0)) throw std::invalid_argument("build_mode needs an unstable mode");
  const int n2 = g.n2();
  ModeResult mr = mr_in;
  bool same_mesh = mr.backend == ModeBackend::finite_difference && mr.psi.size() == n2 - 2 &&
                   std::abs(mr.h - g.h()) <= 1e-12 * g.h();
  if (!same_mesh) {
    mr = solve_mode(p, pp, mr_in.xi, ModeGrid::finite_difference(n2 - 2, g.h()));
    if (!mr.unstable) {
      std::ostringstream os;
      os << "frequency " << mr_in.xi << " is not unstable on the " << n2 << "-node wall-normal mesh";
      throw std::invalid_argument(os.str());
    }
  }

  Eigenmode2D m;
  m.xi0 = std::abs(mr.xi);
  m.Upsilon = mr.gamma;
  const double xi = m.xi0, U = m.Upsilon;
  m.psi = Eigen::VectorXd::Zero(n2);
  m.psi.segment(1, n2 - 2) = mr.psi;
  m.phi = -derivative4(m.psi, g.dy2()) / xi;
  m.theta.resize(n2);
  for (int j = 0; j < n2; ++j) {
    double r = p.rho(g.y2(j));
    m.theta[j] = ((U * U + pp.a * U) * r + pp.lambda * pp.m * pp.m * xi * xi) * m.phi[j] / (U * xi);
  }
  m.w1.resize(g.size());
  m.w2.resize(g.size());
  Field th(g.size());
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < g.n1(); ++i) {
      double s = std::sin(xi * g.y1(i)), c = std::cos(xi * g.y1(i));
      m.w1[g.idx(i, j)] = 2 * m.phi[j] * s;
      m.w2[g.idx(i, j)] = 2 * m.psi[j] * c;
      th[g.idx(i, j)] = 2 * m.theta[j] * c;
    }
  m.beta = th - g.mean(th);
  return m;
}

ModeResidual mode_residual(const Eigenmode2D& mode, const Profile& p, const PhysParams& pp, const Grid2D& g,
                           bool drop_beta) {
  const double U = mode.Upsilon, lm2 = pp.lambda * pp.m * pp.m;
  Field rho = g.sample_y2([&](double y) { return p.rho(y); });
  Field drho = g.sample_y2([&](double y) { return p.drho(y); });
  Field b1 = d1(g, mode.beta), b2 = d2(g, mode.beta);
  if (drop_beta) b1.setZero(), b2.setZero();
  Vec2 R{(U * U + pp.a * U) * rho * mode.w1 + U * b1 - lm2 * d11(g, mode.w1),
         (U * U + pp.a * U) * rho * mode.w2 + U * b2 - lm2 * d11(g, mode.w2) - pp.g * drho * mode.w2};
  Vec2 scale{U * U * rho * mode.w1, U * U * rho * mode.w2};
  ModeResidual r;
  r.momentum = g.norm(R) / g.norm(scale);
  r.divergence = g.norm(Field(d1(g, mode.w1) + d2(g, mode.w2))) / g.norm(mode.w());
  r.wall_normal = wall_normal_max(g, mode.w());
  return r;
}

LinearState linear_solution(const Eigenmode2D& mode, double delta, double t) {
  double s = delta * std::exp(mode.Upsilon * t);
  LinearState st;
  st.u = {s * mode.w1, s * mode.w2};
  st.eta = (1.0 / mode.Upsilon) * st.u;
  st.q = s * mode.beta;
  return st;
}

SeedResult compatible_data(const Vec2& eta, const Vec2& v, const NeumannSolver& solver) {
  const Grid2D& g = solver.grid();
  SeedResult r;
  r.eta = eta;
  GeometryA A = geometry(g, eta);
  r.det_min = A.J.minCoeff();
  r.det_max = A.J.maxCoeff();
  if (r.det_min < 0.25 || r.det_max > 4.0) throw GeometryError("initial displacement leaves the det range [1/4, 4]");
  r.u = v;
  zero_wall_normal(g, r.u);
  project_solenoidal(solver, A, r.u);
  r.div_residual = g.norm(div_A(g, A, r.u));
  return r;
}

SeedResult seed_initial_data(const Eigenmode2D& mode, double delta, const NeumannSolver& solver) {
  const Grid2D& g = solver.grid();
  if (delta == 0) {
    SeedResult r;
    r.eta = r.u = Vec2::zero(g.size());
    return r;
  }
  Vec2 w = mode.w();
  project_solenoidal(solver, identity_geometry(g), w);
  return compatible_data((delta / mode.Upsilon) * w, delta * w, solver);
}

void l1_norms(const Grid2D& g, const Vec2& chi, double out[6]) {
  const Field* c[2] = {&chi.c1, &chi.c2};
  for (int i = 0; i < 2; ++i) {
    out[3 * i + 0] = g.integrate(c[i]->abs());
    out[3 * i + 1] = g.integrate(d1(g, *c[i]).abs());
    out[3 * i + 2] = g.integrate(d2(g, *c[i]).abs());
  }
}

InstabilityThresholds thresholds(const Eigenmode2D& mode, const Grid2D& g, double Lambda, double epsilon0) {
  if (!(epsilon0 > 0 && epsilon0 <= 1)) throw ConfigError("epsilon0 must lie in (0, 1]");
  InstabilityThresholds t;
  t.Lambda = Lambda;
  t.epsilon0 = epsilon0;
  l1_norms(g, (1.0 / mode.Upsilon) * mode.w(), t.norms[0]);
  l1_norms(g, mode.w(), t.norms[1]);
  t.m0 = INFINITY;
  for (auto& row : t.norms)
    for (double v : row) t.m0 = std::min(t.m0, v);
  return t;
}

double escape_time(double Lambda, double epsilon, double m0, double delta) {
  if (!(Lambda > 0 && epsilon > 0 && m0 > 0 && delta > 0))
    throw std::invalid_argument("escape_time needs positive arguments");
  double arg = 2 * epsilon / (m0 * delta);
  if (arg < 1) throw std::invalid_argument("escape_time: 2 epsilon < m0 delta, logarithm negative");
  return std::log(arg) / Lambda;
}

} // namespace mrt
