#include "doctest.h"

#include <cmath>
#include <random>

#include "mrt/mode_spectrum.hpp"

using namespace mrt;

namespace {

const double kMcExact = 1 / std::sqrt(1 + M_PI * M_PI);

PhysParams phys(double m, double a) {
  PhysParams pp;
  pp.m = m;
  pp.a = a;
  return pp;
}

// Largest alpha of the Euler-Lagrange problem of E - alpha J by shooting:
//   (alpha rho + xi^2 lambda m^2) psi'' + alpha rho' psi' + xi^2 (g rho' - xi^2 lambda m^2 - alpha rho) psi = 0,
// psi(0) = psi(h) = 0. Above the top eigenvalue the shot has no zero in (0, h].
double shoot_alpha(const Profile& p, const PhysParams& pp, int xi, int steps = 4000) {
  const double x2 = double(xi) * xi, lm2 = pp.lambda * pp.m * pp.m, h = p.h();
  auto positive = [&](double al) {
    auto rhs = [&](double y, double f, double df, double& a, double& b) {
      double P = al * p.rho(y) + x2 * lm2;
      a = df;
      b = -(al * p.drho(y) * df + x2 * (pp.g * p.drho(y) - x2 * lm2 - al * p.rho(y)) * f) / P;
    };
    double y = 0, f = 0, df = 1, d = h / steps;
    for (int k = 0; k < steps; ++k) {
      double a1, b1, a2, b2, a3, b3, a4, b4;
      rhs(y, f, df, a1, b1);
      rhs(y + d / 2, f + d / 2 * a1, df + d / 2 * b1, a2, b2);
      rhs(y + d / 2, f + d / 2 * a2, df + d / 2 * b2, a3, b3);
      rhs(y + d, f + d * a3, df + d * b3, a4, b4);
      f += d / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
      df += d / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
      y += d;
      if (f <= 0) return false;
    }
    return true;
  };
  double lo = 1e-8, hi = pp.g * p.max_abs_drho() / p.min_rho();
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (positive(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("critical field of the linear profile") {
  Profile p = Profile::linear(1, 1, 1);
  double mC = critical_field(p, 1, 1, ModeGrid::finite_difference(255, 1));
  CHECK(std::abs(mC - kMcExact) / kMcExact < 1e-3);
  CHECK(mC == doctest::Approx(0.303316199).epsilon(1e-8)); // frozen, n = 255 interior nodes

  double e[3];
  int n[3] = {63, 127, 255};
  for (int k = 0; k < 3; ++k) e[k] = std::abs(critical_field(p, 1, 1, ModeGrid::finite_difference(n[k], 1)) - kMcExact);
  CHECK(std::log2(e[0] / e[1]) > 1.9);
  CHECK(std::log2(e[1] / e[2]) > 1.9);

  // scaling: m_C ~ sqrt(g / lambda)
  double s = critical_field(p, 4, 1, ModeGrid::finite_difference(127, 1));
  CHECK(s == doctest::Approx(2 * critical_field(p, 1, 1, ModeGrid::finite_difference(127, 1))).epsilon(1e-12));
  CHECK(critical_field(Profile::linear(2, -1, 1), 1, 1, ModeGrid::finite_difference(63, 1)) == 0.0);
}

TEST_CASE("top eigenvalue matches an independent shooting solve") {
  Profile p = Profile::linear(1, 1, 1);
  for (double ratio : {0.0, 0.5}) {
    PhysParams pp = phys(ratio * kMcExact, 0.1);
    for (int xi : {1, 3}) {
      double ref = shoot_alpha(p, pp, xi);
      ModeResult r = solve_mode(p, pp, xi, ModeGrid::finite_difference(255, 1));
      CHECK(r.alpha0 == doctest::Approx(ref).epsilon(2e-5));
      CHECK(r.gamma * r.gamma + pp.a * r.gamma == doctest::Approx(r.alpha0).epsilon(1e-13));
    }
  }
  Profile th = Profile::make(ProfileKind::tanh_layer, {{"jump", 0.8}}, 1);
  PhysParams pp = phys(0.1, 0.3);
  CHECK(solve_mode(th, pp, 2, ModeGrid::finite_difference(511, 1)).alpha0 ==
        doctest::Approx(shoot_alpha(th, pp, 2, 8000)).epsilon(2e-4));
}

TEST_CASE("reference spectrum values are frozen") {
  Profile p = Profile::linear(1, 1, 1);
  ModeGrid grid = ModeGrid::finite_difference(255, 1);
  double mC = critical_field(p, 1, 1, grid);
  GrowthSpectrum s = compute_spectrum(p, phys(0.5 * mC, 0.1), 16, grid);
  CHECK(s.Lambda == doctest::Approx(0.3808057).epsilon(1e-6));
  CHECK(s.xi_star == 3);
  CHECK(s.F == std::vector<int>{-5, -4, -3, -2, -1, 1, 2, 3, 4, 5});
  CHECK(s.tail_decreasing);
}

TEST_CASE("growth rate solves gamma^2 + a gamma = alpha0") {
  CHECK(growth_rate(-1, 0.5) == 0.0);
  CHECK(growth_rate(0, 0.5) == 0.0);
  for (double a : {0.0, 0.1, 3.0})
    for (double al : {1e-12, 0.2, 50.0}) {
      double g = growth_rate(al, a);
      CHECK(g > 0);
      CHECK(g * g + a * g == doctest::Approx(al).epsilon(1e-13));
    }
}

TEST_CASE("alpha is affine in s") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0, 1);
  for (int t = 0; t < 4; ++t) {
    Profile p = Profile::make(ProfileKind::tanh_layer, {{"jump", 0.2 + U(rng)}, {"y0", 0.3 + 0.4 * U(rng)}}, 1);
    PhysParams pp = phys(0.05 * U(rng), U(rng));
    QuadraticForms f = assemble_forms(p, pp, 1 + t, ModeGrid::finite_difference(95, 1));
    double a0 = alpha0(f).alpha;
    for (double s : {0.5, 1.0, 2.0})
      CHECK(std::abs(alpha_of_s(f, pp.a, s).alpha - (a0 - pp.a * s)) <= 1e-12 * (1 + std::abs(a0)));
  }
}

TEST_CASE("fixed point of alpha(s) reproduces the growth rate") {
  Profile p = Profile::linear(1, 1, 1);
  PhysParams pp = phys(0.1, 0.4);
  QuadraticForms f = assemble_forms(p, pp, 2, ModeGrid::finite_difference(63, 1));
  FixedPointCheck fp = fixed_point_gamma(f, pp.a);
  CHECK(fp.gamma_bvp == doctest::Approx(growth_rate(alpha0(f).alpha, pp.a)).epsilon(1e-9));
}

TEST_CASE("dichotomy at the critical field") {
  Profile p = Profile::linear(1, 1, 1);
  ModeGrid grid = ModeGrid::finite_difference(255, 1);
  double mC = critical_field(p, 1, 1, grid);
  CHECK(!compute_spectrum(p, phys(0.99 * mC, 0.1), 8, grid).F.empty());
  GrowthSpectrum st = compute_spectrum(p, phys(1.01 * mC, 0.1), 8, grid);
  CHECK(st.F.empty());
  CHECK(st.Lambda == 0.0);
  CHECK(st.xi_star == 0);
}

TEST_CASE("spectrum monotonicity and mirror symmetry") {
  Profile p = Profile::make(ProfileKind::exponential, {{"beta", 1.2}}, 1);
  ModeGrid grid = ModeGrid::finite_difference(127, 1);
  double prev = INFINITY;
  for (double m : {0.0, 0.05, 0.1, 0.2}) {
    double L = compute_spectrum(p, phys(m, 0.2), 12, grid).Lambda;
    CHECK(L <= prev);
    prev = L;
  }
  prev = INFINITY;
  for (double a : {0.0, 0.5, 2.0}) {
    double L = compute_spectrum(p, phys(0.1, a), 12, grid).Lambda;
    CHECK(L < prev);
    prev = L;
  }
  GrowthSpectrum s = compute_spectrum(p, phys(0.1, 0.2), 12, grid);
  for (int xi : s.F) CHECK(std::count(s.F.begin(), s.F.end(), -xi) == 1);
  CHECK(solve_mode(p, phys(0.1, 0.2), -3, grid).alpha0 == doctest::Approx(solve_mode(p, phys(0.1, 0.2), 3, grid).alpha0));
}

TEST_CASE("Chebyshev backend agrees with finite differences") {
  Profile p = Profile::make(ProfileKind::tanh_layer, {}, 1);
  PhysParams pp = phys(0.05, 0.1);
  double fd = solve_mode(p, pp, 3, ModeGrid::finite_difference(511, 1)).alpha0;
  ModeResult ch = solve_mode(p, pp, 3, ModeGrid::make(ModeBackend::chebyshev, 64, 1));
  CHECK(ch.alpha0 == doctest::Approx(fd).epsilon(1e-4));
  CHECK(ch.residual < 1e-8);
}

TEST_CASE("energy bound over random divergence-free fields") {
  Profile p = Profile::linear(1, 1, 1);
  ModeGrid grid = ModeGrid::finite_difference(127, 1);
  PhysParams pp = phys(0.5 * critical_field(p, 1, 1, grid), 0.1);
  GrowthSpectrum s = compute_spectrum(p, pp, 12, grid);
  EnergyBoundResult r = verify_energy_bound(s, p, pp, 20, 3, 129);
  CHECK(r.worst_ratio <= 1.02);
  CHECK(r.extremal_xi == s.xi_star);
  CHECK(std::abs(r.extremal_ratio - 1) < 1e-3);

  SpectrumOptions bad;
  bad.inject_sign_error = true;
  GrowthSpectrum sb = compute_spectrum(p, pp, 12, grid, bad);
  CHECK(sb.Lambda == 0.0); // sign flip makes the problem look stable
  CHECK(verify_energy_bound(sb, p, pp, 10, 3, 129).worst_ratio > 1.02);
}

TEST_CASE("invalid spectrum requests") {
  Profile p = Profile::linear(1, 1, 1);
  CHECK_THROWS(ModeGrid::finite_difference(2, 1));
  CHECK_THROWS(solve_mode(p, phys(0, 0), 0, ModeGrid::finite_difference(31, 1)));
  CHECK_THROWS_AS(mode_backend_from_string("spline"), ConfigError);
}
