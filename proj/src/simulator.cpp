#include "mrt/simulator.hpp"

#include <cmath>
#include <sstream>

namespace mrt {

FlowState FlowState::zero(const Grid2D& g) {
  FlowState s;
  s.eta = s.u = Vec2::zero(g.size());
  s.q = Field::Zero(g.size());
  return s;
}

MrtSimulator::MrtSimulator(const Grid2D& g, const Profile& p, const PhysParams& pp, NeumannOptions no,
                           StepOptions so)
    : g_(g), p_(p), pp_(pp), so_(so), solver_(g, p, no) {
  pp_.validate();
  rho_ = solver_.rho();
  for (int k = 0; k < 5; ++k) drho_[k] = g.sample_y2([&](double y) { return p.deriv(y, k); });
  y2_ = g.sample_y2([](double y) { return y; });
}

Field MrtSimulator::g_eta(const Field& eta2) const {
  const double h = g_.h(), small = 1e-3 * h;
  Field out(eta2.size());
  for (Eigen::Index k = 0; k < eta2.size(); ++k) {
    double e = eta2[k], y = y2_[k] + e;
    if (!std::isfinite(e)) throw PhysicsAbort("non-finite displacement");
    if (y < -1e-12 * h || y > h * (1 + 1e-12)) {
      std::ostringstream os;
      os << "flow map left the slab: y2 + eta2 = " << y << " at node " << k;
      throw PhysicsAbort(os.str());
    }
    if (std::abs(e) <= small) {
      double d1 = drho_[1][k], d2 = drho_[2][k], d3 = drho_[3][k], d4 = drho_[4][k];
      out[k] = e * (d1 + e * (d2 / 2 + e * (d3 / 6 + e * d4 / 24)));
    } else {
      out[k] = p_.rho(y) - rho_[k];
    }
  }
  return out;
}

Field MrtSimulator::pressure_rhs(const FlowState& s, const GeometryA& A) const {
  const double lm2 = pp_.lambda * pp_.m * pp_.m;
  Vec2 F{lm2 * d11(g_, s.eta.c1), lm2 * d11(g_, s.eta.c2) + pp_.g * g_eta(s.eta.c2)};
  Vec2 X{F.c1 / rho_ - pp_.a * s.u.c1, F.c2 / rho_ - pp_.a * s.u.c2};
  GeometryA At = geometry_rate(g_, s.u);
  return -(div_cof(g_, A, X) + div_cof(g_, At, s.u)) / A.J;
}

Vec2 MrtSimulator::accel(const FlowState& s, const GeometryA& A, const Field& q) const {
  const double lm2 = pp_.lambda * pp_.m * pp_.m;
  Vec2 G = grad_A(g_, A, q);
  zero_wall_normal(g_, G);
  Vec2 ut{(lm2 * d11(g_, s.eta.c1) - G.c1) / rho_ - pp_.a * s.u.c1,
          (lm2 * d11(g_, s.eta.c2) + pp_.g * g_eta(s.eta.c2) - G.c2) / rho_ - pp_.a * s.u.c2};
  return ut;
}

StageEval MrtSimulator::evaluate(const FlowState& s, const Field* guess) const {
  GeometryA A;
  try {
    A = geometry(g_, s.eta);
  } catch (const GeometryError& e) {
    throw PhysicsAbort(e.what());
  }
  StageEval ev;
  NeumannResult r;
  try {
    r = solver_.solve(A, pressure_rhs(s, A), {}, guess);
  } catch (const PhysicsAbort&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw PhysicsAbort(std::string("elliptic failure: ") + e.what());
  }
  ev.q = std::move(r.q);
  ev.iterations = r.iterations;
  ev.u_t = accel(s, A, ev.q);
  return ev;
}

double MrtSimulator::reproject(FlowState& s) const {
  GeometryA A = geometry(g_, s.eta);
  project_solenoidal(solver_, A, s.u);
  double un = g_.norm(s.u);
  return un > 0 ? g_.norm(div_A(g_, A, s.u)) / un : 0.0;
}

void MrtSimulator::step(FlowState& s, double dt) {
  auto stage = [&](const FlowState& x, const Field* guess, Vec2& deta, Vec2& du, Field& q) {
    StageEval ev = evaluate(x, guess);
    deta = x.u;
    du = std::move(ev.u_t);
    q = std::move(ev.q);
  };
  const Field* guess = s.q.size() ? &s.q : nullptr;
  Vec2 ke[4], ku[4];
  Field q;
  FlowState x = s;
  stage(s, guess, ke[0], ku[0], q);
  const double c[3] = {0.5, 0.5, 1.0};
  for (int k = 1; k < 4; ++k) {
    x.eta = s.eta + (c[k - 1] * dt) * ke[k - 1];
    x.u = s.u + (c[k - 1] * dt) * ku[k - 1];
    stage(x, &q, ke[k], ku[k], q);
  }
  s.eta += (dt / 6) * (ke[0] + 2.0 * ke[1] + 2.0 * ke[2] + ke[3]);
  s.u += (dt / 6) * (ku[0] + 2.0 * ku[1] + 2.0 * ku[2] + ku[3]);
  zero_wall_normal(g_, s.eta); // exact already; guards against roundoff
  zero_wall_normal(g_, s.u);
  s.q = std::move(q);
  s.t += dt;
  ++steps_;

  if (!s.eta.c1.allFinite() || !s.eta.c2.allFinite() || !s.u.c1.allFinite() || !s.u.c2.allFinite())
    throw PhysicsAbort("non-finite state at t = " + std::to_string(s.t));
  try {
    if (so_.reproject_every > 0 && steps_ % so_.reproject_every == 0) {
      last_proj_ = reproject(s);
      if (last_proj_ > so_.proj_tol * 10)
        throw PhysicsAbort("reprojection residual " + std::to_string(last_proj_) + " above tolerance");
    }
    GeometryA A = geometry(g_, s.eta);
    last_det_dev_ = A.max_det_dev;
  } catch (const GeometryError& e) {
    throw PhysicsAbort(e.what());
  } catch (const PhysicsAbort&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw PhysicsAbort(std::string("elliptic failure: ") + e.what());
  }
  if (last_det_dev_ > so_.det_tol) {
    std::ostringstream os;
    os << "det drift " << last_det_dev_ << " exceeds det_tol " << so_.det_tol << " at t = " << s.t;
    throw PhysicsAbort(os.str());
  }
}

double MrtSimulator::cfl_dt(const FlowState& s, double cfl) const {
  double umax = std::max(s.u.c1.abs().maxCoeff(), s.u.c2.abs().maxCoeff());
  double alfven = std::sqrt(pp_.lambda / p_.min_rho()) * std::abs(pp_.m);
  // buoyancy speed scale keeps dt finite when the state is at rest and m = 0
  double buoy = std::sqrt(pp_.g * g_.h() * p_.max_abs_drho() / p_.min_rho());
  double speed = std::max(umax + alfven, buoy);
  if (!(speed > 0)) speed = 1;
  return cfl * std::min(g_.dy1(), g_.dy2()) / speed;
}

RunResult run(MrtSimulator& sim, FlowState s, const RunOptions& ro, const Observer& obs) {
  if (!(ro.t_end > 0)) throw ConfigError("run.t_end must be positive");
  RunResult res;
  res.dt = ro.dt > 0 ? ro.dt : sim.cfl_dt(s, ro.cfl);
  long nsteps = std::max(1L, long(std::ceil(ro.t_end / res.dt - 1e-9)));
  res.dt = ro.t_end / nsteps; // land exactly on t_end
  auto observe = [&](FlowState& st) {
    if (!obs) return;
    StageEval ev = sim.evaluate(st, st.q.size() ? &st.q : nullptr);
    st.q = ev.q;
    obs(st, ev);
  };
  try {
    observe(s);
    for (long n = 1; n <= nsteps; ++n) {
      sim.step(s, res.dt);
      res.steps = n;
      if (n % std::max(1, ro.output_every) == 0 || n == nsteps) observe(s);
    }
  } catch (const PhysicsAbort& e) {
    res.aborted = true;
    res.abort_reason = e.what();
  }
  res.final = std::move(s);
  return res;
}

double parity_defect(const Grid2D& g, const FlowState& s) {
  auto reflect = [&](const Field& f) { return reflect_y1(g, f); };
  double num = 0, den = 0;
  for (const Vec2* v : {&s.eta, &s.u}) {
    Field odd = v->c1 + reflect(v->c1), even = v->c2 - reflect(v->c2);
    num += g.inner(odd, odd) + g.inner(even, even);
    den += g.inner(v->c1, v->c1) + g.inner(v->c2, v->c2);
  }
  return den > 0 ? std::sqrt(num / den) : 0.0;
}

} // namespace mrt
