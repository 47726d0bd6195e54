#include "mrt/mode_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace mrt {

std::string to_string(ModeBackend b) {
  return b == ModeBackend::chebyshev ? "chebyshev" : "finite_difference";
}

ModeBackend mode_backend_from_string(const std::string& s) {
  if (s == "finite_difference" || s == "fd") return ModeBackend::finite_difference;
  if (s == "chebyshev" || s == "cheb") return ModeBackend::chebyshev;
  throw ConfigError("unknown mode backend '" + s + "' (expected finite_difference or chebyshev)");
}

ModeGrid ModeGrid::make(ModeBackend backend, int n, double h) {
  if (n < 3) throw ConfigError("mode grid needs at least 3 interior nodes");
  if (!(h > 0)) throw ConfigError("mode grid height must be positive");
  ModeGrid g;
  g.backend = backend;
  g.n = n;
  g.h = h;
  if (backend == ModeBackend::finite_difference) {
    double d = h / (n + 1);
    g.nodes.resize(n);
    for (int i = 0; i < n; ++i) g.nodes[i] = (i + 1) * d;
    g.weights = Eigen::VectorXd::Constant(n, d);
    return g;
  }

  // Gauss-Lobatto points x_j = cos(j pi / N) mapped to y = h (1 - x) / 2
  const int N = n + 1;
  const double pi = std::numbers::pi;
  Eigen::VectorXd x(N + 1);
  for (int j = 0; j <= N; ++j) x[j] = std::cos(j * pi / N);
  g.all_nodes = h * (1.0 - x.array()) / 2.0;

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N + 1, N + 1);
  auto c = [&](int j) { return (j == 0 || j == N ? 2.0 : 1.0) * (j % 2 ? -1.0 : 1.0); };
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j)
      if (i != j) D(i, j) = c(i) / c(j) / (x[i] - x[j]);
  for (int i = 0; i <= N; ++i) D(i, i) = -D.row(i).sum();
  D *= -2.0 / h; // dx/dy

  // Clenshaw-Curtis weights
  Eigen::VectorXd w = Eigen::VectorXd::Zero(N + 1);
  for (int j = 0; j <= N; ++j) {
    double theta = j * pi / N, s = 0;
    int kmax = N / 2;
    for (int k = 1; k <= kmax; ++k) {
      double b = (k == N / 2 && N % 2 == 0) ? 1.0 : 2.0;
      s += b / (4.0 * k * k - 1.0) * std::cos(2.0 * k * theta);
    }
    double cj = (j == 0 || j == N) ? 1.0 : 2.0;
    w[j] = cj / N * (1.0 - s);
  }
  g.all_weights = w * h / 2.0;

  g.nodes = g.all_nodes.segment(1, n);
  g.weights = g.all_weights.segment(1, n);
  g.deriv = D.middleCols(1, n);
  return g;
}

Eigen::MatrixXd ModeGrid::mass(const std::function<double(double)>& f) const {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) M(i, i) = f(nodes[i]) * weights[i];
  return M;
}

Eigen::MatrixXd ModeGrid::stiffness(const std::function<double(double)>& f) const {
  if (backend == ModeBackend::chebyshev) {
    Eigen::VectorXd fw(n + 2);
    for (int j = 0; j < n + 2; ++j) fw[j] = f(all_nodes[j]) * all_weights[j];
    return deriv.transpose() * fw.asDiagonal() * deriv;
  }
  double d = h / (n + 1);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i <= n; ++i) {
    double c = f((i + 0.5) * d) / d; // couples nodes i-1 and i (0-based interior index)
    if (i > 0) K(i - 1, i - 1) += c;
    if (i < n) K(i, i) += c;
    if (i > 0 && i < n) {
      K(i - 1, i) -= c;
      K(i, i - 1) -= c;
    }
  }
  return K;
}

QuadraticForms assemble_forms(const Profile& p, const PhysParams& pp, int xi, const ModeGrid& grid,
                              const SpectrumOptions& opts) {
  if (xi == 0) throw std::invalid_argument("frequency xi = 0 is not admissible");
  const double x2 = double(xi) * xi;
  auto rho = [&](double y) { return p.rho(y); };
  auto drho = [&](double y) { return p.drho(y); };
  auto one = [](double) { return 1.0; };

  QuadraticForms f;
  f.xi = xi;
  f.buoyancy = (opts.inject_sign_error ? -1.0 : 1.0) * x2 * pp.g * grid.mass(drho);
  f.tension = x2 * pp.lambda * pp.m * pp.m * (x2 * grid.mass(one) + grid.stiffness(one));
  f.E = f.buoyancy - f.tension;
  f.J = x2 * grid.mass(rho) + grid.stiffness(rho);
  f.J_mass_diag = x2 * grid.mass(rho).diagonal();
  return f;
}

namespace {

void normalize_sign(Eigen::VectorXd& v) {
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  if (v[k] < 0) v = -v;
}

/// Upper bound on the Rayleigh quotient of (E, J). E is a diagonal buoyancy part
/// minus a semidefinite tension part and J dominates its diagonal mass part.
double rayleigh_upper_bound(const QuadraticForms& f) {
  double b = 0;
  for (Eigen::Index i = 0; i < f.buoyancy.rows(); ++i)
    b = std::max(b, f.buoyancy(i, i) / f.J_mass_diag[i]);
  return b;
}

AlphaResult inverse_iteration(const Eigen::MatrixXd& E, const Eigen::MatrixXd& J, double bound) {
  const Eigen::Index n = E.rows();
  Eigen::SparseMatrix<double> Es = E.sparseView(), Js = J.sparseView();
  // every eigenvalue lies below sigma, so iterating on (E - sigma J)^{-1} J picks the largest
  double sigma = bound + 1e-3 * std::abs(bound) + 1e-12;

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] += 0.1 * std::sin(1.7 * i);
  v /= std::sqrt(v.dot(J * v));
  double mu = v.dot(E * v), mu_prev = INFINITY;
  bool rq = false;
  for (int it = 1; it <= 1000; ++it) {
    Eigen::SparseMatrix<double> S = Es - sigma * Js;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(S);
    if (lu.info() != Eigen::Success) {
      // shift hit an eigenvalue: that is the answer
      sigma += 1e-10 * (1 + std::abs(sigma));
      continue;
    }
    Eigen::VectorXd w = lu.solve(Eigen::VectorXd(Js * v));
    v = w / std::sqrt(w.dot(J * w));
    mu = v.dot(E * v);
    double res = (E * v - mu * (J * v)).norm() / (1 + std::abs(mu));
    if (res < 1e-12) {
      normalize_sign(v);
      return {mu, v, it};
    }
    if (!rq && std::abs(mu - mu_prev) < 1e-6 * (1 + std::abs(mu))) rq = true;
    if (rq) sigma = mu + 1e-9 * (1 + std::abs(mu)); // Rayleigh-quotient shift, kept just above
    mu_prev = mu;
  }
  std::ostringstream os;
  os << "inverse iteration did not converge after 1000 iterations (n = " << n << ")";
  throw std::runtime_error(os.str());
}

} // namespace

namespace {

// psi^T M psi accumulated in extended precision.
long double quad_form(const Eigen::MatrixXd& M, const Eigen::VectorXd& psi) {
  long double s = 0;
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    long double c = 0;
    for (Eigen::Index i = 0; i < M.rows(); ++i) c += (long double)M(i, j) * psi[i];
    s += c * psi[j];
  }
  return s;
}

} // namespace

AlphaResult alpha_of_s(const QuadraticForms& f, double a, double s, int dense_limit) {
  Eigen::MatrixXd Es = f.E - a * s * f.J;
  AlphaResult r;
  if (Es.rows() > dense_limit) {
    r = inverse_iteration(Es, f.J, rayleigh_upper_bound(f) - a * s);
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Es, f.J);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver failed");
    const Eigen::Index k = Es.rows() - 1;
    r.psi = es.eigenvectors().col(k);
    r.psi /= std::sqrt(r.psi.dot(f.J * r.psi));
    normalize_sign(r.psi);
  }
  // Rayleigh quotient polish: the eigensolver value carries eps |L^-1 E L^-T|
  // roundoff, the quotient only the square of the eigenvector error
  r.alpha = double(quad_form(f.E, r.psi) / quad_form(f.J, r.psi) - (long double)(a * s));
  return r;
}

double bvp_residual(const QuadraticForms& f, double alpha, const Eigen::VectorXd& psi) {
  return (alpha * (f.J * psi) - f.E * psi).cwiseAbs().maxCoeff() / psi.cwiseAbs().maxCoeff();
}

double growth_rate(double alpha0, double a) {
  if (!(alpha0 > 0)) return 0.0;
  return 0.5 * (-a + std::sqrt(a * a + 4.0 * alpha0));
}

FixedPointCheck fixed_point_gamma(const QuadraticForms& f, double a, int dense_limit) {
  FixedPointCheck out;
  auto alpha = [&](double s) {
    ++out.evaluations;
    return alpha_of_s(f, a, s, dense_limit).alpha;
  };
  double a0 = alpha(0.0);
  if (a0 <= 0) return out;
  // both residuals are increasing in s and negative at 0
  auto bisect = [&](auto&& phi) {
    double lo = 0, hi = 1;
    while (phi(hi) < 0) hi *= 2;
    for (int it = 0; it < 60 && hi - lo > 1e-14 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (phi(mid) < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  out.gamma_bvp = bisect([&](double s) { return s * s - alpha(s); });
  out.gamma_textual = bisect([&](double s) { return s - alpha(s); });
  return out;
}

ModeResult solve_mode(const Profile& p, const PhysParams& pp, int xi, const ModeGrid& grid,
                      const SpectrumOptions& opts) {
  QuadraticForms f = assemble_forms(p, pp, xi, grid, opts);
  AlphaResult ar = alpha0(f, opts.dense_limit);
  ModeResult r;
  r.xi = xi;
  r.backend = grid.backend;
  r.h = grid.h;
  r.alpha0 = ar.alpha;
  r.psi = std::move(ar.psi);
  r.unstable = r.alpha0 > 0;
  r.gamma = growth_rate(r.alpha0, pp.a);
  r.residual = bvp_residual(f, r.alpha0, r.psi);
  if (opts.fixed_point_check) {
    FixedPointCheck fp = fixed_point_gamma(f, pp.a, opts.dense_limit);
    r.gamma_fixed_point = fp.gamma_bvp;
    r.gamma_textual = fp.gamma_textual;
  }
  return r;
}

const ModeResult& GrowthSpectrum::mode(int xi) const {
  int k = std::abs(xi);
  if (k < 1 || k > int(modes.size())) throw std::out_of_range("frequency outside the computed spectrum");
  return modes[k - 1];
}

GrowthSpectrum compute_spectrum(const Profile& p, const PhysParams& pp, int xi_max, const ModeGrid& grid,
                                const SpectrumOptions& opts) {
  if (xi_max < 1) throw ConfigError("xi_max must be at least 1");
  GrowthSpectrum s;
  s.n = grid.n;
  s.backend = grid.backend;
  s.modes.reserve(xi_max);
  for (int xi = 1; xi <= xi_max; ++xi) s.modes.push_back(solve_mode(p, pp, xi, grid, opts));

  for (const auto& m : s.modes) {
    if (!m.unstable) continue;
    s.F.push_back(m.xi);
    s.F.push_back(-m.xi);
    if (m.gamma > s.Lambda) {
      s.Lambda = m.gamma;
      s.xi_star = m.xi;
    }
  }
  std::sort(s.F.begin(), s.F.end());

  const auto& last = s.modes.back();
  if (xi_max == 1) {
    s.tail_decreasing = !last.unstable;
  } else {
    const auto& prev = s.modes[xi_max - 2];
    s.tail_decreasing = last.gamma < prev.gamma || (last.gamma == 0 && prev.gamma == 0);
  }
  if (!s.tail_decreasing)
    s.warnings.push_back("growth rate still rising at xi_max = " + std::to_string(xi_max) +
                         "; Lambda may be truncated");
  s.m_C = opts.inject_sign_error ? 0.0 : critical_field(p, pp.g, pp.lambda, grid, opts.dense_limit);
  return s;
}

double critical_field(const Profile& p, double g, double lambda, const ModeGrid& grid, int dense_limit) {
  if (!rt_condition(p).holds) return 0.0;
  QuadraticForms f;
  f.xi = 1;
  auto one = [](double) { return 1.0; };
  f.buoyancy = grid.mass([&](double y) { return p.drho(y); });
  f.E = f.buoyancy;
  f.J = grid.mass(one) + grid.stiffness(one);
  f.J_mass_diag = grid.mass(one).diagonal();
  double mu = alpha0(f, dense_limit).alpha;
  return mu > 0 ? std::sqrt(g * mu / lambda) : 0.0;
}

} // namespace mrt
