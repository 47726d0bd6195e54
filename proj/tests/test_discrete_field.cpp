#include "doctest.h"

#include <cmath>
#include <random>

#include "mrt/discrete_field.hpp"

using namespace mrt;

namespace {

Vec2 bump_displacement(const Grid2D& g, double amp) {
  const double k = M_PI / g.h();
  return {g.sample([&](double y1, double y2) { return amp * std::sin(k * y2) * std::cos(2 * y1); }),
          g.sample([&](double y1, double y2) { return amp * std::sin(k * y2) * std::sin(y1 + 0.3); })};
}

Vec2 tangent_field(const Grid2D& g) {
  const double h = g.h();
  return {g.sample([&](double y1, double y2) { return std::cos(y1) * (1 + y2 * y2) + std::sin(3 * y1); }),
          g.sample([&](double y1, double y2) { return y2 * (h - y2) * std::cos(2 * y1 + 0.1); })};
}

} // namespace

TEST_CASE("grid quadrature") {
  Grid2D g(16, 9, 2.0);
  CHECK(g.integrate(Field::Ones(g.size())) == doctest::Approx(g.area()).epsilon(1e-14));
  Field y = g.sample_y2([](double s) { return s; });
  CHECK(g.integrate(y) == doctest::Approx(2 * M_PI * 2.0).epsilon(1e-14)); // trapezoid exact on linear
  CHECK_THROWS(Grid2D(3, 9, 1));
  CHECK_THROWS(Grid2D(16, 2, 1));
}

TEST_CASE("derivative operators") {
  Grid2D g(32, 17, 1);
  Field f = g.sample([](double y1, double y2) { return std::sin(3 * y1) * (1 + y2); });
  Field df = g.sample([](double y1, double y2) { return 3 * std::cos(3 * y1) * (1 + y2); });
  CHECK((d1(g, f) - df).abs().maxCoeff() < 1e-12);
  CHECK((d11(g, f) + 9 * f).abs().maxCoeff() < 1e-11);

  Field q = g.sample([](double, double y2) { return y2 * y2 - 3 * y2; });
  Field dq = g.sample([](double, double y2) { return 2 * y2 - 3; });
  CHECK((d2(g, q) - dq).abs().maxCoeff() < 1e-12); // second-order rows are exact on quadratics

  // summation by parts for d2_sbp: <D u, v> + <u, D v> = boundary terms
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  Field u(g.size()), v(g.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) u[k] = N(rng), v[k] = N(rng);
  double lhs = g.inner(d2_sbp(g, u), v) + g.inner(u, d2_sbp(g, v));
  double rhs = 0;
  for (int i = 0; i < g.n1(); ++i)
    rhs += g.dy1() * (u[g.idx(i, g.n2() - 1)] * v[g.idx(i, g.n2() - 1)] - u[g.idx(i, 0)] * v[g.idx(i, 0)]);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("geometry of the identity and of a smooth map") {
  Grid2D g(32, 33, 1);
  GeometryA I = geometry(g, Vec2::zero(g.size()));
  CHECK(I.max_det_dev == 0.0);
  CHECK((I.c11 - 1).abs().maxCoeff() == 0.0);

  GeometryA A = geometry(g, bump_displacement(g, 0.05));
  Vec2 pr = piola_residual(g, A);
  CHECK(std::max(pr.c1.abs().maxCoeff(), pr.c2.abs().maxCoeff()) < 1e-12);
  CHECK(A.J.minCoeff() > 0.8);
  CHECK_THROWS_AS(geometry(g, bump_displacement(g, 2.0)), GeometryError);
}

TEST_CASE("div_A and grad_A are adjoint in the J-weighted product") {
  Grid2D g(32, 33, 1);
  GeometryA A = geometry(g, bump_displacement(g, 0.05));
  Vec2 v = tangent_field(g);
  Field f = g.sample([](double y1, double y2) { return std::cos(y1 - 0.2) * std::exp(y2); });
  Field dv = div_A(g, A, v);
  Vec2 gf = grad_A(g, A, f);
  double lhs = g.inner(A.J * dv, f) + g.inner(A.J * v.c1, gf.c1) + g.inner(A.J * v.c2, gf.c2);
  CHECK(std::abs(lhs) < 1e-12 * g.norm(dv) * g.norm(f));
}

TEST_CASE("curl of a gradient vanishes at the identity") {
  Grid2D g(32, 33, 1);
  Field f = g.sample([](double y1, double y2) { return std::sin(y1) * y2 * y2 * (1 - y2); });
  Vec2 gf = grad_A(g, identity_geometry(g), f);
  Field c = curl_A(g, identity_geometry(g), gf);
  // d1 and d2 commute exactly on the tensor grid
  CHECK(c.abs().maxCoeff() < 1e-12);
}

TEST_CASE("Hodge constant is grid independent and bounds the ratio") {
  double c32 = hodge_constant(Grid2D(32, 17, 1)), c64 = hodge_constant(Grid2D(64, 33, 1));
  CHECK(c32 == doctest::Approx(c64).epsilon(0.02));
  CHECK(c64 >= 1.0);
  Grid2D g(64, 33, 1);
  CHECK(hodge_ratio(g, tangent_field(g)) <= c64 * (1 + 1e-10));
}

TEST_CASE("Neumann solve agrees with a dense direct solve") {
  Grid2D g(16, 16, 1);
  Profile p = Profile::linear(1, 1, 1);
  NeumannOptions no;
  no.rtol = 1e-14;
  NeumannSolver s(g, p, no);
  GeometryA A = geometry(g, bump_displacement(g, 0.05));
  const Eigen::Index N = g.size();
  Eigen::MatrixXd L(N, N);
  Field e = Field::Zero(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    e[k] = 1;
    L.col(k) = s.apply(A, e).matrix();
    e[k] = 0;
  }
  Field qt = s.remove_kernel(g.sample([](double y1, double y2) { return std::cos(y1) * y2 + y2 * y2; }));
  Field rhs = -s.apply(A, qt);
  Field qd = s.remove_kernel(L.completeOrthogonalDecomposition().solve((-rhs).matrix()).array());
  NeumannResult r = s.solve(A, rhs);
  CHECK(g.norm(Field(r.q - qd)) < 1e-10 * g.norm(qd));
  CHECK(g.norm(Field(r.q - qt)) < 1e-10 * g.norm(qt));
}

TEST_CASE("manufactured Neumann solution converges at second order") {
  Profile p = Profile::make(ProfileKind::exponential, {{"beta", 0.7}}, 1);
  double e0 = neumann_manufactured_error(Grid2D(16, 17, 1), p);
  double e1 = neumann_manufactured_error(Grid2D(16, 33, 1), p);
  double e2 = neumann_manufactured_error(Grid2D(16, 65, 1), p);
  CHECK(std::log2(e0 / e1) > 1.9);
  CHECK(std::log2(e1 / e2) > 1.9);
}

TEST_CASE("projection removes the divergence") {
  Grid2D g(32, 33, 1);
  Profile p = Profile::linear(1, 0.5, 1);
  NeumannOptions no;
  no.rtol = 1e-13;
  NeumannSolver s(g, p, no);
  GeometryA A = geometry(g, bump_displacement(g, 0.03));
  Vec2 u = tangent_field(g);
  project_solenoidal(s, A, u);
  CHECK(g.norm(div_A(g, A, u)) < 1e-10 * g.norm(u));
  CHECK(wall_normal_max(g, u) == 0.0);
  // idempotent
  Vec2 w = u;
  project_solenoidal(s, A, w);
  CHECK(g.norm(w - u) < 1e-8 * g.norm(u));
}

TEST_CASE("kernel removal") {
  Grid2D g(16, 9, 1);
  NeumannSolver s(g, Profile::linear(1, 1, 1));
  Field checker(g.size());
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i) checker[g.idx(i, j)] = 3.0 + ((i + j) % 2 ? -1 : 1);
  CHECK(s.remove_kernel(checker).abs().maxCoeff() < 1e-13);
}
