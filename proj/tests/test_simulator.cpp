#include "doctest.h"

#include <cmath>

#include "mrt/experiment.hpp"

using namespace mrt;

namespace {

const Profile& lin() {
  static Profile p = Profile::linear(1, 1, 1);
  return p;
}

PhysParams phys(double m, double a) {
  PhysParams pp;
  pp.m = m;
  pp.a = a;
  return pp;
}

const double kMc = 1 / std::sqrt(1 + M_PI * M_PI);

FlowState seeded(const MrtSimulator& sim, double delta, std::uint64_t seed, bool parity) {
  const Grid2D& g = sim.grid();
  Vec2 e = random_solenoidal(g, seed, parity), v = random_solenoidal(g, seed + 1, parity);
  project_solenoidal(sim.solver(), identity_geometry(g), e);
  SeedResult sr = compatible_data(delta * e, delta * v, sim.solver());
  FlowState s = FlowState::zero(g);
  s.eta = sr.eta;
  s.u = sr.u;
  return s;
}

} // namespace

TEST_CASE("equilibrium is a fixed point") {
  Grid2D g(16, 9, 1);
  MrtSimulator sim(g, lin(), phys(0.2, 0.1));
  FlowState s = FlowState::zero(g);
  for (int n = 0; n < 20; ++n) sim.step(s, 0.05);
  CHECK(g.norm(s.eta) == 0.0);
  CHECK(g.norm(s.u) == 0.0);
  CHECK(s.t == doctest::Approx(1.0));
}

TEST_CASE("buoyancy difference keeps relative precision") {
  Grid2D g(8, 9, 1);
  Profile p = Profile::make(ProfileKind::exponential, {{"beta", 2.0}}, 1);
  MrtSimulator sim(g, p, phys(0, 0));
  for (double e : {1e-12, 1e-6, 1e-4, 0.01}) {
    Field eta2 = Field::Constant(g.size(), e);
    eta2.tail(g.n1()).setZero();
    Field G = sim.g_eta(eta2);
    for (int j = 0; j < g.n2() - 1; ++j) {
      double y = g.y2(j), exact = std::expm1(2 * e) * std::exp(2 * y);
      CHECK(G[g.idx(0, j)] == doctest::Approx(exact).epsilon(1e-12));
    }
  }
  Field out = Field::Constant(g.size(), 0.5);
  CHECK_THROWS_AS(sim.g_eta(out), PhysicsAbort); // top row leaves the slab
}

TEST_CASE("walls stay impermeable and the map stays volume preserving") {
  Grid2D g(32, 17, 1);
  MrtSimulator sim(g, lin(), phys(0.5 * kMc, 0.1));
  FlowState s = seeded(sim, 1e-3, 5, false);
  double dt = sim.cfl_dt(s, 0.4), det = 0;
  for (int n = 1; n <= 64; ++n) {
    sim.step(s, dt);
    CHECK(wall_normal_max(g, s.eta) == 0.0);
    CHECK(wall_normal_max(g, s.u) == 0.0);
    det = std::max(det, sim.last_det_dev());
  }
  CHECK(det < 1e-4);
  CHECK(sim.last_projection_residual() < 1e-9);
}

TEST_CASE("reflection parity is preserved") {
  Grid2D g(32, 17, 1);
  MrtSimulator sim(g, lin(), phys(1.5 * kMc, 0.5));
  FlowState s = seeded(sim, 1e-3, 9, true);
  CHECK(parity_defect(g, s) < 1e-15);
  double dt = sim.cfl_dt(s, 0.4), worst = 0;
  for (int n = 0; n < 200; ++n) {
    sim.step(s, dt);
    worst = std::max(worst, parity_defect(g, s));
  }
  CHECK(worst < 1e-12);

  FlowState r = seeded(sim, 1e-3, 9, false);
  CHECK(parity_defect(g, r) > 1e-3);
}

TEST_CASE("runs are deterministic") {
  Grid2D g(16, 9, 1);
  auto go = [&] {
    MrtSimulator sim(g, lin(), phys(0.5 * kMc, 0.1));
    RunOptions ro;
    ro.t_end = 0.5;
    return run(sim, seeded(sim, 1e-4, 2, false), ro);
  };
  RunResult a = go(), b = go();
  CHECK(a.steps == b.steps);
  CHECK((a.final.eta.c1 == b.final.eta.c1).all());
  CHECK((a.final.u.c2 == b.final.u.c2).all());
}

TEST_CASE("run lands on t_end and calls the observer") {
  Grid2D g(16, 9, 1);
  MrtSimulator sim(g, lin(), phys(0.2, 0.1));
  RunOptions ro;
  ro.t_end = 0.3;
  ro.output_every = 4;
  std::vector<double> seen;
  RunResult r = run(sim, seeded(sim, 1e-4, 4, false), ro, [&](const FlowState& s, const StageEval& ev) {
    seen.push_back(s.t);
    CHECK(ev.u_t.c1.size() == g.size());
  });
  CHECK(!r.aborted);
  CHECK(r.final.t == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(seen.front() == 0.0);
  CHECK(seen.back() == doctest::Approx(0.3).epsilon(1e-12));
  ro.t_end = 0;
  CHECK_THROWS_AS(run(sim, FlowState::zero(g), ro), ConfigError);
}

TEST_CASE("large displacements abort cleanly") {
  Grid2D g(16, 9, 1);
  StepOptions so;
  so.det_tol = 1e-12;
  MrtSimulator sim(g, lin(), phys(0.2, 0.1), {}, so);
  RunOptions ro;
  ro.t_end = 0.1;
  RunResult r = run(sim, seeded(sim, 1e-2, 1, false), ro);
  CHECK(r.aborted);
  CHECK(r.abort_reason.find("det drift") != std::string::npos);
}

TEST_CASE("Eulerian reconstruction") {
  Grid2D g(32, 17, 1);
  FlowState s = FlowState::zero(g);
  EulerianFields z = reconstruct_eulerian(g, s, lin(), 0.3);
  CHECK(z.holes.empty());
  CHECK(z.rho.abs().maxCoeff() == 0.0);
  CHECK((z.M.c1 - 0.3).abs().maxCoeff() == 0.0);

  // uniform horizontal shift: x = y + (c, 0) so fields are translated, rho unchanged
  const double c = 2 * M_PI / 32 * 3;
  s.eta.c1.setConstant(c);
  s.u.c1 = g.sample([](double y1, double) { return std::sin(y1); });
  EulerianFields e = reconstruct_eulerian(g, s, lin(), 0.3);
  CHECK(e.holes.empty());
  Field expect = g.sample([&](double x1, double) { return std::sin(x1 - c); });
  CHECK((e.v.c1 - expect).abs().maxCoeff() < 1e-12);
  CHECK(e.rho.abs().maxCoeff() < 1e-14);
}
