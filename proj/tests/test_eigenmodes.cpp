#include "doctest.h"

#include <cmath>

#include "mrt/eigenmode.hpp"

using namespace mrt;

namespace {

struct Ref {
  Profile p = Profile::linear(1, 1, 1);
  PhysParams pp;
  GrowthSpectrum s;
  Ref() {
    pp.a = 0.1;
    pp.m = 0.5 / std::sqrt(1 + M_PI * M_PI);
    s = compute_spectrum(p, pp, 8, ModeGrid::finite_difference(127, 1));
  }
};

const Ref& ref() {
  static Ref r;
  return r;
}

} // namespace

TEST_CASE("fourth-order differences are exact on quartics") {
  Eigen::VectorXd f(9), df(9);
  const double d = 0.125;
  for (int i = 0; i < 9; ++i) {
    double y = i * d;
    f[i] = 1 - 2 * y + 3 * y * y * y * y;
    df[i] = -2 + 12 * y * y * y;
  }
  CHECK((derivative4(f, d) - df).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS(derivative4(Eigen::VectorXd::Zero(4), d));
}

TEST_CASE("assembled mode is divergence free and wall tangent") {
  const Ref& r = ref();
  Grid2D g(64, 33, 1);
  Eigenmode2D m = build_mode(r.s.mode(r.s.xi_star), r.p, r.pp, g);
  CHECK(m.xi0 == r.s.xi_star);
  CHECK(m.Upsilon == doctest::Approx(r.s.Lambda).epsilon(2e-3)); // re-solved on the 31 interior nodes
  ModeResidual res = mode_residual(m, r.p, r.pp, g);
  CHECK(res.wall_normal == 0.0);
  CHECK(res.divergence < 1e-2); // phi is fourth order, the check uses the second-order d2
  CHECK(res.momentum < 5e-3);
  CHECK(std::abs(g.mean(m.beta)) < 1e-14);

  // the pressure is needed: dropping it leaves an O(1) residual
  CHECK(mode_residual(m, r.p, r.pp, g, true).momentum > 0.1);

  ModeResult st = r.s.mode(r.s.xi_star);
  st.unstable = false;
  CHECK_THROWS(build_mode(st, r.p, r.pp, g));
}

TEST_CASE("momentum residual converges at second order") {
  const Ref& r = ref();
  double e[2], dv[2];
  int n2[2] = {33, 65};
  for (int k = 0; k < 2; ++k) {
    Grid2D g(64, n2[k], 1);
    ModeResidual res = mode_residual(build_mode(r.s.mode(r.s.xi_star), r.p, r.pp, g), r.p, r.pp, g);
    e[k] = res.momentum;
    dv[k] = res.divergence;
  }
  CHECK(std::log2(e[0] / e[1]) > 1.9);
  CHECK(std::log2(dv[0] / dv[1]) > 1.9);
}

TEST_CASE("linear solution grows at Upsilon") {
  const Ref& r = ref();
  Grid2D g(32, 17, 1);
  Eigenmode2D m = build_mode(r.s.mode(2), r.p, r.pp, g);
  LinearState a = linear_solution(m, 1e-3, 0), b = linear_solution(m, 1e-3, 2.0);
  CHECK(g.norm(b.u) / g.norm(a.u) == doctest::Approx(std::exp(2 * m.Upsilon)).epsilon(1e-13));
  CHECK(g.norm(Field(a.eta.c2 * m.Upsilon - a.u.c2)) < 1e-15 * g.norm(a.u));
  CHECK(g.norm(a.q) == doctest::Approx(1e-3 * g.norm(m.beta)));
}

TEST_CASE("seeded data is compatible") {
  const Ref& r = ref();
  Grid2D g(32, 17, 1);
  NeumannSolver solver(g, r.p);
  Eigenmode2D m = build_mode(r.s.mode(r.s.xi_star), r.p, r.pp, g);
  SeedResult sr = seed_initial_data(m, 1e-3, solver);
  GeometryA A = geometry(g, sr.eta);
  CHECK(g.norm(div_A(g, A, sr.u)) < 1e-9 * g.norm(sr.u));
  CHECK(sr.det_min > 0.99);
  CHECK(wall_normal_max(g, sr.u) == 0.0);
  CHECK(g.norm(Field(sr.u.c2 - 1e-3 * m.w2)) < 2e-2 * g.norm(sr.u)); // O(h^2) correction

  SeedResult z = seed_initial_data(m, 0, solver);
  CHECK(g.norm(z.eta) == 0.0);
  CHECK(g.norm(z.u) == 0.0);

  CHECK_THROWS_AS(compatible_data(5.0 * m.w(), m.w(), solver), GeometryError);
}

TEST_CASE("L1 norms of a separable mode") {
  // int_0^{2pi} |sin(xi y1)| = int |cos(xi y1)| = 4, so |w1|_L1 = 8 int |phi| and |w2|_L1 = 8 int |psi|
  const Ref& r = ref();
  Grid2D g(128, 65, 1);
  Eigenmode2D m = build_mode(r.s.mode(r.s.xi_star), r.p, r.pp, g);
  double out[6];
  l1_norms(g, m.w(), out);
  double ip = 0, is = 0;
  for (int j = 0; j < g.n2(); ++j) {
    double w = (j == 0 || j == g.n2() - 1 ? 0.5 : 1.0) * g.dy2();
    ip += w * std::abs(m.phi[j]);
    is += w * std::abs(m.psi[j]);
  }
  CHECK(out[0] == doctest::Approx(8 * ip).epsilon(2e-3));
  CHECK(out[3] == doctest::Approx(8 * is).epsilon(2e-3));
  CHECK(out[1] == doctest::Approx(m.xi0 * out[0]).epsilon(2e-3)); // d1 w1 = 2 xi phi cos

  InstabilityThresholds th = thresholds(m, g, r.s.Lambda, 0.03);
  double lo = INFINITY;
  for (auto& row : th.norms)
    for (double v : row) lo = std::min(lo, v);
  CHECK(th.m0 == lo);
  CHECK_THROWS_AS(thresholds(m, g, r.s.Lambda, 0), ConfigError);
}

TEST_CASE("escape time is logarithmic in delta") {
  CHECK(escape_time(0.5, 0.1, 2.0, 1e-3) == doctest::Approx(std::log(100.0) / 0.5));
  CHECK(escape_time(0.5, 0.1, 2.0, 5e-4) - escape_time(0.5, 0.1, 2.0, 1e-3) == doctest::Approx(std::log(2.0) / 0.5));
  CHECK_THROWS(escape_time(0.5, 0.1, 2.0, 1.0));
  CHECK_THROWS(escape_time(0, 0.1, 2.0, 1e-3));
}
