#include "doctest.h"

#include <cmath>

#include "mrt/diagnostics.hpp"
#include "mrt/experiment.hpp"

using namespace mrt;

TEST_CASE("Sobolev norms of a single Fourier mode") {
  // f = sin(y1): |f|^2 = |d1 f|^2 = |d11 f|^2 = pi h, every d2 term vanishes
  Grid2D g(32, 9, 2.0);
  Field f = g.sample([](double y1, double) { return std::sin(y1); });
  CHECK(sobolev_sq(g, f, 0) == doctest::Approx(2 * M_PI).epsilon(1e-13));
  CHECK(sobolev_sq(g, f, 2) == doctest::Approx(6 * M_PI).epsilon(1e-13));
  // y2 on h = 2: trapezoid of y2^2 overshoots by h dy^2 / 6, and |d2 y2|^2 is the area
  Field y = g.sample([](double, double y2) { return y2; });
  CHECK(sobolev_sq(g, y, 1) == doctest::Approx(2 * M_PI * (8.0 / 3 + 2 * 0.0625 / 6) + 4 * M_PI).epsilon(1e-13));
}

TEST_CASE("rate fit") {
  std::vector<double> t, y;
  for (int k = 0; k <= 40; ++k) t.push_back(0.25 * k), y.push_back(3 * std::exp(-0.7 * 0.25 * k));
  FitResult r = fit_rate(t, y, 1, 9);
  CHECK(r.ok);
  CHECK(r.rate == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(r.r2 == doctest::Approx(1.0));
  CHECK(r.n == 33);
  CHECK(fit_rate_trimmed(t, y).rate == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(!fit_rate(t, y, 1, 1.3).ok);
  y[10] = 0;
  CHECK_THROWS_AS(fit_rate(t, y, 0, 10), std::domain_error);
}

TEST_CASE("escape detection interpolates in log space") {
  std::vector<ReportRow> rows(3);
  for (int k = 0; k < 3; ++k) {
    rows[k].t = k;
    for (int c = 0; c < 6; ++c) rows[k].l1_u[c] = std::pow(10.0, k - 2) * (1 + c);
  }
  EscapeResult e = escape_detect(rows, std::sqrt(10.0) * 0.1);
  CHECK(e.escaped);
  CHECK(e.time == doctest::Approx(1.5));
  CHECK(!escape_detect(rows, 2.0).escaped);
  CHECK(!escape_detect(rows, 1.0, false).escaped);
  CHECK_THROWS(escape_detect(rows, 0));
}

TEST_CASE("potential energy is nonpositive for stable stratification") {
  Grid2D g(32, 17, 1);
  Profile p = Profile::linear(2, -1, 1);
  PhysParams pp;
  pp.m = 0.3;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    Vec2 w = random_solenoidal(g, s, false);
    CHECK(energy_integral(g, w, p, pp) <= 0);
    // quadratic homogeneity
    CHECK(energy_integral(g, 3.0 * w, p, pp) == doctest::Approx(9 * energy_integral(g, w, p, pp)).epsilon(1e-12));
  }
}

TEST_CASE("recorder produces a consistent report") {
  Grid2D g(16, 9, 1);
  Profile p = Profile::linear(1, 1, 1);
  PhysParams pp;
  pp.m = 0.1;
  pp.a = 0.2;
  MrtSimulator sim(g, p, pp);
  FlowState s = FlowState::zero(g);
  Vec2 e = random_solenoidal(g, 3, false);
  project_solenoidal(sim.solver(), identity_geometry(g), e);
  SeedResult sr = compatible_data(1e-4 * e, 1e-4 * random_solenoidal(g, 4, false), sim.solver());
  s.eta = sr.eta;
  s.u = sr.u;
  Recorder rec(sim, 2);
  RunOptions ro;
  ro.t_end = 0.5;
  ro.output_every = 5;
  run(sim, s, ro, std::ref(rec));
  const EnergyReport& r = rec.report();
  REQUIRE(r.rows.size() >= 3);
  CHECK(!r.missing_accel);
  CHECK(r.I0 > 0);
  for (const ReportRow& row : r.rows) {
    CHECK(row.E_k.size() == 3);
    CHECK(row.total >= row.diss);
    CHECK(row.total_p > 0);
    CHECK(row.det_dev < 1e-6);
  }
  CHECK(rec.eta1_fields().size() == r.rows.size());
  CHECK_THROWS_AS(Recorder(sim, 0), ConfigError);
}

TEST_CASE("eta1 limit of a decaying trajectory") {
  Grid2D g(16, 9, 1);
  Field prof = g.sample_y2([](double y) { return y * (1 - y); });
  Field wave = g.sample([](double y1, double y2) { return std::sin(y1) * y2; });
  std::vector<double> t;
  std::vector<Field> eta1;
  for (int k = 0; k <= 200; ++k) {
    t.push_back(0.25 * k);
    eta1.push_back(prof + std::exp(-0.4 * t.back()) * wave);
  }
  Eta1Limit L = eta1_limit(g, t, eta1);
  CHECK(L.variance_rel < 1e-8);
  CHECK(L.decay.rate == doctest::Approx(0.4).epsilon(2e-2)); // tail-average floor biases the last samples
  CHECK_THROWS(eta1_limit(g, {}, {}));
}
