#include "mrt/verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "mrt/config.hpp"
#include "mrt/experiment.hpp"

namespace mrt {

namespace {

using Clock = std::chrono::steady_clock;

CheckResult le(std::string name, std::string stmt, double v, double thr) {
  return {std::move(name), std::move(stmt), v, thr, "<=", 0, v <= thr, 0, ""};
}
CheckResult ge(std::string name, std::string stmt, double v, double thr) {
  return {std::move(name), std::move(stmt), v, thr, ">=", 0, v >= thr, 0, ""};
}
CheckResult in(std::string name, std::string stmt, double v, double lo, double hi) {
  return {std::move(name), std::move(stmt), v, lo, "in", hi, v >= lo && v <= hi, 0, ""};
}

// Reference problem: rho = 1 + y on [0, 1], g = lambda = 1.
const Profile& ref_profile() {
  static const Profile p = Profile::linear(1, 1, 1);
  return p;
}
double ref_mC() {
  static const double m = critical_field(ref_profile(), 1, 1, ModeGrid::finite_difference(255, 1));
  return m;
}
PhysParams ref_phys(double m_ratio, double a) {
  PhysParams pp;
  pp.m = m_ratio * ref_mC();
  pp.a = a;
  return pp;
}

std::vector<Profile> family_samples() {
  return {Profile::make(ProfileKind::constant, {{"rho0", 2}}, 1),
          Profile::make(ProfileKind::linear, {{"rho0", 1}, {"slope", 0.7}}, 1),
          Profile::make(ProfileKind::exponential, {{"rho0", 1}, {"beta", 0.8}}, 1.5),
          Profile::make(ProfileKind::tanh_layer, {{"rho0", 1}, {"jump", 0.5}, {"width", 0.15}}, 1)};
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

Vec2 smooth_displacement(const Grid2D& g, double amp, std::uint64_t seed) {
  Vec2 e = random_solenoidal(g, seed, false);
  e.c1 += g.sample([&](double y1, double y2) { return 0.5 * std::sin(2 * y1) * std::cos(3 * y2); });
  e.c2 += g.sample([&](double y1, double y2) { return 0.4 * std::cos(y1 + 0.3) * std::sin(M_PI * y2 / g.h()); });
  zero_wall_normal(g, e);
  double mx = std::max(e.c1.abs().maxCoeff(), e.c2.abs().maxCoeff());
  return (amp / mx) * e;
}

Field smooth_scalar(const Grid2D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  double c[4] = {U(rng), U(rng), U(rng), U(rng)};
  return g.sample([&](double y1, double y2) {
    return c[0] * std::cos(y1) * y2 + c[1] * std::sin(2 * y1 + 1) * std::cos(2 * y2) + c[2] * y2 * y2 +
           c[3] * std::cos(3 * y1) * std::exp(y2);
  });
}

Vec2 wall_tangent_field(const Grid2D& g, std::uint64_t seed) {
  Field a = smooth_scalar(g, seed), b = smooth_scalar(g, seed + 7);
  Vec2 v{a, b * g.sample_y2([&](double y) { return y * (g.h() - y); })};
  return v;
}

// ---------------------------------------------------------------- profile

void check_profile(std::vector<CheckResult>& out, std::uint64_t seed) {
  double worst = 0;
  std::mt19937_64 rng(seed);
  const double eps = 1e-5;
  for (const Profile& p : family_samples()) {
    std::uniform_real_distribution<double> U(0.05 * p.h(), 0.95 * p.h());
    for (int k = 0; k < 20; ++k) {
      double y = U(rng);
      double fd = (p.rho(y + eps) - p.rho(y - eps)) / (2 * eps);
      worst = std::max(worst, std::abs(fd - p.drho(y)) / (1 + std::abs(p.drho(y))));
    }
  }
  out.push_back(le("profile.fd_derivative", "centered difference (eps 1e-5) vs rho' at 20 points per family", worst,
                   1e-6));

  int mismatches = 0;
  for (const Profile& p : family_samples()) {
    auto prm = p.params();
    prm["rho0"] = (prm.count("rho0") ? prm["rho0"] : 1.0) + 3.0;
    Profile q = Profile::make(p.kind(), prm, p.h());
    if (rt_condition(p).holds != rt_condition(q).holds) ++mismatches;
  }
  out.push_back(le("profile.rt_shift_invariance", "rt_condition changes under rho -> rho + 3", mismatches, 0));

  double worst_rise = 0;
  for (const Profile& p : family_samples()) {
    double prev = equilibrium_pressure(p, 1.0, 0.0);
    for (int k = 1; k <= 200; ++k) {
      double v = equilibrium_pressure(p, 1.0, p.h() * k / 200.0);
      worst_rise = std::max(worst_rise, v - prev);
      prev = v;
    }
  }
  out.push_back(le("profile.pressure_monotone", "largest increase of the hydrostatic pressure along y2", worst_rise, 0));
}

// ---------------------------------------------------------------- spectrum

void check_spectrum(std::vector<CheckResult>& out, const VerifyOptions& o) {
  SpectrumOptions so;
  so.inject_sign_error = o.inject_sign_error;
  ModeGrid grid = ModeGrid::finite_difference(127, 1);

  {
    double worst = 0;
    std::vector<std::pair<Profile, int>> cases;
    auto fam = family_samples();
    for (int k = 0; k < 5; ++k) cases.push_back({fam[1 + k % 3], 1 + k});
    for (auto& [p, xi] : cases) {
      PhysParams pp;
      pp.a = 0.3;
      pp.m = 0.2;
      ModeGrid gr = ModeGrid::finite_difference(127, p.h());
      QuadraticForms f = assemble_forms(p, pp, xi, gr, so);
      double a0 = alpha_of_s(f, pp.a, 0).alpha;
      for (double s : {0.5, 1.0, 2.0})
        worst = std::max(worst, std::abs(alpha_of_s(f, pp.a, s).alpha - (a0 - pp.a * s)) / (1 + std::abs(a0)));
    }
    out.push_back(le("spectrum.alpha_affinity", "|alpha(s) - (alpha(0) - a s)| / (1 + |alpha(0)|)", worst, 1e-12));
  }
  {
    PhysParams pp = ref_phys(0.5, 0.1);
    ModeResult a = solve_mode(ref_profile(), pp, 2, grid, so), b = solve_mode(ref_profile(), pp, -2, grid, so);
    double d = std::abs(a.gamma - b.gamma) + (a.psi - b.psi).cwiseAbs().maxCoeff();
    out.push_back(le("spectrum.mirror_symmetry", "|gamma(2) - gamma(-2)| + |psi(2) - psi(-2)|", d, 1e-12));
  }
  {
    int viol_m = 0, viol_a = 0;
    double g[5][5];
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        g[i][j] = solve_mode(ref_profile(), ref_phys(0.2 * i, 0.25 * j), 2, grid, so).gamma;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        if (i > 0 && g[i][j] > g[i - 1][j] + 1e-13) ++viol_m;
        if (j > 0 && g[i][j] > g[i][j - 1] + 1e-13) ++viol_a;
      }
    out.push_back(le("spectrum.monotone_in_m", "increases of gamma_2 along |m| on a 5x5 (m, a) sweep", viol_m, 0));
    out.push_back(le("spectrum.monotone_in_a", "increases of gamma_2 along a on a 5x5 (m, a) sweep", viol_a, 0));
  }
  {
    ModeGrid g255 = ModeGrid::finite_difference(255, 1);
    double mC = critical_field(ref_profile(), 1, 1, g255);
    PhysParams lo = ref_phys(0, 0), hi = lo;
    lo.m = (1 - 1e-3) * mC;
    hi.m = (1 + 1e-3) * mC;
    bool ok = !compute_spectrum(ref_profile(), lo, 8, g255, so).F.empty() &&
              compute_spectrum(ref_profile(), hi, 8, g255, so).F.empty();
    out.push_back(ge("spectrum.threshold_consistency", "F nonempty at 0.999 m_C and empty at 1.001 m_C", ok, 1));
  }
  {
    double worst = 0;
    for (int xi = 1; xi <= 4; ++xi) {
      QuadraticForms f = assemble_forms(ref_profile(), ref_phys(0.5, 0.1), xi, grid, so);
      AlphaResult a = alpha0(f);
      worst = std::max(worst, bvp_residual(f, a.alpha, a.psi));
    }
    out.push_back(le("spectrum.bvp_residual", "|(alpha J - E) psi| / |psi|, xi = 1..4", worst, 1e-8));
  }
  {
    double m[4];
    int ns[4] = {64, 128, 256, 512};
    for (int k = 0; k < 4; ++k) m[k] = critical_field(ref_profile(), 1, 1, ModeGrid::finite_difference(ns[k] - 1, 1));
    double p1 = std::log2(std::abs((m[0] - m[1]) / (m[1] - m[2])));
    double p2 = std::log2(std::abs((m[1] - m[2]) / (m[2] - m[3])));
    out.push_back(ge("spectrum.mC_richardson_order", "observed order of m_C over n = 64..512 intervals",
                     std::min(p1, p2), 1.9));
  }
  {
    PhysParams pp = ref_phys(0.5, 0.1);
    GrowthSpectrum s = compute_spectrum(ref_profile(), pp, 16, ModeGrid::finite_difference(255, 1), so);
    EnergyBoundResult eb = verify_energy_bound(s, ref_profile(), pp, 100, o.seed);
    out.push_back(le("spectrum.energy_bound",
                     "max over 100 random solenoidal fields of E(v) / ((L^2 + a L) |sqrt(rho) v|^2)", eb.worst_ratio,
                     1.02));
    out.push_back(le("spectrum.energy_bound_equality", "|ratio - 1| at the fastest eigenmode",
                     std::abs(eb.extremal_ratio - 1), 1e-3));
  }
}

// ---------------------------------------------------------------- eigenmode

void check_eigenmode(std::vector<CheckResult>& out) {
  PhysParams pp = ref_phys(0.5, 0.1);
  GrowthSpectrum s = compute_spectrum(ref_profile(), pp, 8, ModeGrid::finite_difference(127, 1));
  double div[3], mom[3], wall = 0, nonvan = INFINITY;
  int n2s[3] = {33, 65, 129};
  for (int k = 0; k < 3; ++k) {
    Grid2D g(32, n2s[k], 1);
    Eigenmode2D m = build_mode(s.mode(s.xi_star), ref_profile(), pp, g);
    ModeResidual r = mode_residual(m, ref_profile(), pp, g);
    div[k] = r.divergence;
    mom[k] = r.momentum;
    wall = std::max(wall, r.wall_normal);
    double l[6];
    l1_norms(g, m.w(), l);
    for (double v : l) nonvan = std::min(nonvan, v / g.norm(m.w()));
  }
  out.push_back(ge("eigenmode.div_order", "observed order of |div w| / |w| (n2 = 33, 65, 129)",
                   std::min(order(div[0], div[1]), order(div[1], div[2])), 1.9));
  out.push_back(le("eigenmode.wall_normal", "max |w2| on the walls", wall, 0));
  out.push_back(ge("eigenmode.momentum_order", "observed order of the momentum residual (n2 = 33, 65, 129)",
                   std::min(order(mom[0], mom[1]), order(mom[1], mom[2])), 1.9));
  out.push_back(ge("eigenmode.nonvanishing", "min of the six L1 norms of w over |w|", nonvan, 1e-12));

  Grid2D g(32, 33, 1);
  Eigenmode2D m = build_mode(s.mode(s.xi_star), ref_profile(), pp, g);
  Field rho = g.sample_y2([](double y) { return 1 + y; });
  auto resid = [&](double delta, double t) {
    LinearState L = linear_solution(m, delta, t);
    const double U = m.Upsilon, lm2 = pp.lambda * pp.m * pp.m;
    Vec2 R{rho * U * L.u.c1 + d1(g, L.q) + pp.a * rho * L.u.c1 - lm2 * d11(g, L.eta.c1),
           rho * U * L.u.c2 + d2(g, L.q) + pp.a * rho * L.u.c2 - lm2 * d11(g, L.eta.c2) - L.eta.c2};
    return g.norm(R);
  };
  double base = resid(1, 0), worst = 0;
  for (double d : {1e-6, 1e-3})
    for (double t : {0.0, 1.0, 5.0}) worst = std::max(worst, std::abs(resid(d, t) / (base * d * std::exp(m.Upsilon * t)) - 1));
  out.push_back(le("eigenmode.linear_solution_residual",
                   "linearized residual over (mode residual) delta e^{U t}, deviation from 1", worst, 1e-9));
}

// ---------------------------------------------------------------- discrete field

void check_field(std::vector<CheckResult>& out, std::uint64_t seed) {
  {
    Grid2D g(64, 33, 1);
    GeometryA A = geometry(g, smooth_displacement(g, 0.05, seed));
    Vec2 v = wall_tangent_field(g, seed + 1);
    Field f = smooth_scalar(g, seed + 2);
    Field JH = A.J;
    Field dv = div_A(g, A, v);
    Vec2 gf = grad_A(g, A, f);
    double lhs = g.inner(JH * dv, f) + g.inner(JH * v.c1, gf.c1) + g.inner(JH * v.c2, gf.c2);
    double scale = std::sqrt(g.inner(JH * dv, dv) * g.inner(JH * f, f));
    out.push_back(le("field.adjointness", "|<div_A v, f>_J + <v, grad_A f>_J| relative, v2 = 0 on walls",
                     std::abs(lhs) / scale, 1e-12));
    Vec2 pr = piola_residual(g, A);
    out.push_back(le("field.piola", "max |d_j cof_ij|", std::max(pr.c1.abs().maxCoeff(), pr.c2.abs().maxCoeff()),
                     1e-10));
  }
  {
    double C[3];
    int ns[3] = {32, 64, 128};
    for (int k = 0; k < 3; ++k) C[k] = hodge_constant(Grid2D(ns[k], ns[k] / 2 + 1, 1));
    double spread = std::max({C[0], C[1], C[2]}) / std::min({C[0], C[1], C[2]});
    CheckResult r = le("field.hodge_stability", "max/min of the Hodge constant over n = 32, 64, 128", spread, 1.05);
    std::ostringstream os;
    os << "C = " << C[0] << ", " << C[1] << ", " << C[2];
    r.detail = os.str();
    out.push_back(r);
    Grid2D g(64, 33, 1);
    double worst = 0;
    for (int t = 0; t < 20; ++t) worst = std::max(worst, hodge_ratio(g, wall_tangent_field(g, seed + 10 + t)));
    out.push_back(le("field.hodge_bound", "max over 20 random fields of ratio / C(64)", worst / C[1], 1 + 1e-10));
  }
  {
    Grid2D g(32, 32, 1);
    Profile p = Profile::linear(1, 1, 1);
    NeumannOptions no;
    no.rtol = 1e-14;
    NeumannSolver solver(g, p, no);
    GeometryA A = geometry(g, smooth_displacement(g, 0.05, seed + 3));
    const Eigen::Index N = g.size();
    Eigen::MatrixXd L(N, N);
    Field e = Field::Zero(N);
    for (Eigen::Index k = 0; k < N; ++k) {
      e[k] = 1;
      L.col(k) = solver.apply(A, e).matrix();
      e[k] = 0;
    }
    Field qtrue = solver.remove_kernel(smooth_scalar(g, seed + 4));
    Field rhs = -solver.apply(A, qtrue);
    Eigen::VectorXd qd = L.completeOrthogonalDecomposition().solve((-rhs).matrix());
    Field qdense = solver.remove_kernel(qd.array());
    Field qit = solver.solve(A, rhs).q;
    double err = g.norm(Field(qit - qdense)) / g.norm(qdense);
    out.push_back(le("field.neumann_dense", "iterative vs dense direct Neumann solve on 32 x 32 (relative)", err,
                     1e-10));
  }
  {
    Profile p = Profile::linear(1, 1, 1);
    double e0 = neumann_manufactured_error(Grid2D(32, 33, 1), p);
    double e1 = neumann_manufactured_error(Grid2D(32, 65, 1), p);
    CheckResult r = ge("field.manufactured_order", "observed order of the sheared-map Neumann solution, n2 = 33, 65",
                       std::log2(e0 / e1), 1.9);
    std::ostringstream os;
    os << "errors " << e0 << ", " << e1;
    r.detail = os.str();
    out.push_back(r);
  }
}

// ---------------------------------------------------------------- simulator

void check_simulator(std::vector<CheckResult>& out, std::uint64_t seed) {
  PhysParams pp = ref_phys(0.5, 0.1);
  GrowthSpectrum s = compute_spectrum(ref_profile(), pp, 8, ModeGrid::finite_difference(127, 1));
  {
    Grid2D g(32, 33, 1);
    MrtSimulator sim(g, ref_profile(), pp);
    Eigenmode2D m = build_mode(s.mode(s.xi_star), ref_profile(), pp, g);
    SeedResult sr = seed_initial_data(m, 1e-3, sim.solver());
    FlowState st = FlowState::zero(g);
    st.eta = sr.eta;
    st.u = sr.u;
    double dt = sim.cfl_dt(st, 0.4), wall = 0, det = 0, proj = 0;
    for (int n = 1; n <= 200; ++n) {
      sim.step(st, dt);
      wall = std::max({wall, wall_normal_max(g, st.eta), wall_normal_max(g, st.u)});
      det = std::max(det, sim.last_det_dev());
      if (n % 16 == 0) proj = std::max(proj, sim.last_projection_residual());
    }
    out.push_back(le("simulator.wall_impermeable", "max |eta2|, |u2| on the walls over 200 steps", wall, 0));
    out.push_back(le("simulator.det_drift", "max |det - 1| over 200 steps, delta = 1e-3", det, 1e-4));
    out.push_back(le("simulator.projection", "|div_A u| / |u| after reprojection", proj, 1e-9));
  }
  {
    Grid2D g(32, 17, 1);
    MrtSimulator sim(g, ref_profile(), ref_phys(1.5, 0.5));
    Vec2 e = random_solenoidal(g, seed, true), v = random_solenoidal(g, seed + 1, true);
    project_solenoidal(sim.solver(), identity_geometry(g), e);
    SeedResult sr = compatible_data(1e-3 * e, 1e-3 * v, sim.solver());
    FlowState st = FlowState::zero(g);
    st.eta = sr.eta;
    st.u = sr.u;
    double dt = sim.cfl_dt(st, 0.4), par = 0;
    for (int n = 0; n < 1000; ++n) {
      sim.step(st, dt);
      par = std::max(par, parity_defect(g, st));
    }
    out.push_back(le("simulator.parity", "max parity defect over 1000 steps from odd/even data", par, 1e-12));
  }
  {
    Grid2D g(32, 17, 1);
    MrtSimulator sim(g, ref_profile(), pp);
    FlowState st = FlowState::zero(g);
    double mx = 0;
    for (int n = 0; n < 100; ++n) {
      sim.step(st, 0.02);
      mx = std::max({mx, st.eta.c1.abs().maxCoeff(), st.eta.c2.abs().maxCoeff(), st.u.c1.abs().maxCoeff(),
                     st.u.c2.abs().maxCoeff()});
    }
    out.push_back(le("simulator.equilibrium", "max |eta|, |u| over 100 steps from rest", mx, 0));
  }
  {
    // nonlinear run vs linear_solution at fixed t, W^{1,1} proxy
    Grid2D g(64, 33, 1);
    MrtSimulator sim(g, ref_profile(), pp);
    Eigenmode2D m = build_mode(s.mode(s.xi_star), ref_profile(), pp, g);
    const double T = std::log(100.0) / m.Upsilon;
    std::vector<double> lx, ly;
    for (double delta : {1e-7, 1e-6, 1e-5}) {
      SeedResult sr = seed_initial_data(m, delta, sim.solver());
      FlowState st = FlowState::zero(g);
      st.eta = sr.eta;
      st.u = sr.u;
      long N = std::lround(std::ceil(T / sim.cfl_dt(st, 0.4)));
      for (long n = 0; n < N; ++n) sim.step(st, T / N);
      LinearState L = linear_solution(m, delta, st.t);
      double a[6], b[6], dev = 0;
      l1_norms(g, st.eta - L.eta, a);
      l1_norms(g, st.u - L.u, b);
      for (int k = 0; k < 6; ++k) dev += a[k] + b[k];
      lx.push_back(std::log(delta));
      ly.push_back(std::log(dev));
    }
    double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3, sxy = 0, sxx = 0;
    for (int k = 0; k < 3; ++k) sxy += (lx[k] - mx) * (ly[k] - my), sxx += (lx[k] - mx) * (lx[k] - mx);
    out.push_back(in("simulator.linear_regime_exponent",
                     "delta exponent of |(eta, u) - linear_solution| in W^{1,1} at t = ln(100)/U, 64 x 33",
                     sxy / sxx, 1.3, 1.7));
  }
}

// ---------------------------------------------------------------- diagnostics

void check_diagnostics(std::vector<CheckResult>& out, std::uint64_t seed) {
  {
    Profile p = Profile::linear(1.5, -0.5, 1);
    PhysParams pp;
    pp.m = 0.4;
    Grid2D g(32, 33, 1);
    double worst = -INFINITY;
    for (int t = 0; t < 5; ++t) {
      Vec2 e = smooth_displacement(g, 0.1, seed + t);
      for (int k = 0; k <= 2; ++k) {
        worst = std::max(worst, energy_integral(g, e, p, pp));
        e = Vec2{d1(g, e.c1), d1(g, e.c2)};
      }
    }
    out.push_back(le("diagnostics.stable_energy_sign", "max E(d1^k eta), rho' <= 0, m > 0", worst, 0));
  }
  {
    Grid2D g(32, 17, 1);
    PhysParams pp = ref_phys(0.5, 0.1);
    MrtSimulator sim(g, ref_profile(), pp);
    Recorder rec(sim, 2);
    FlowState st = FlowState::zero(g);
    st.eta = smooth_displacement(g, 1e-3, seed);
    st.u = 0.5 * smooth_displacement(g, 1e-3, seed + 1);
    StageEval ev = sim.evaluate(st, nullptr);
    ReportRow a = rec.compute_row(st, &ev);
    FlowState s3 = st;
    s3.eta *= 3;
    s3.u *= 3;
    StageEval e3 = ev;
    e3.u_t *= 3;
    e3.q *= 3;
    ReportRow b = rec.compute_row(s3, &e3);
    double worst = 0;
    auto cmp = [&](double x, double y) { worst = std::max(worst, std::abs(y - 9 * x) / std::max(1e-300, std::abs(9 * x))); };
    for (int k = 0; k <= 2; ++k) cmp(a.E_k[k], b.E_k[k]);
    cmp(a.total, b.total);
    cmp(a.total_p, b.total_p);
    cmp(a.diss, b.diss);
    cmp(a.diss_p, b.diss_p);
    out.push_back(le("diagnostics.homogeneity", "relative deviation of F(3x) from 9 F(x) over the quadratic functionals",
                     worst, 1e-12));
  }
  {
    std::vector<double> t, y;
    for (int k = 0; k <= 200; ++k) t.push_back(0.05 * k), y.push_back(2.0 * std::exp(0.37 * 0.05 * k));
    FitResult f = fit_rate_trimmed(t, y);
    out.push_back(le("diagnostics.rate_fit", "|fitted rate - 0.37| on noiseless exponential data",
                     std::abs(f.rate - 0.37), 1e-10));
  }
}

// ---------------------------------------------------------------- cli plumbing

void check_cli(std::vector<CheckResult>& out) {
  const std::string cfg = "profile: {kind: linear, params: {rho0: 1, slope: 1}}\n"
                          "physics: {m_ratio: 0.5, a: 0.1}\n"
                          "grid: {n1: 16, n2: 17, mode_n: 63, xi_max: 6}\n"
                          "run: {t_end: 0.2, output_every: 2}\n"
                          "seeding: {kind: mode, delta: 1e-4}\n";
  auto once = [&]() {
    RunConfig c = parse_config(cfg);
    SpectrumSetup s = setup_spectrum(c);
    Grid2D g(c.n1, c.n2, c.h);
    MrtSimulator sim(g, s.profile, s.phys, c.neumann(), c.step());
    Seed sd = make_seed(c, s, sim);
    Recorder rec(sim, c.k_max);
    run(sim, sd.state, c.run(), std::ref(rec));
    std::ostringstream os;
    os << spectrum_json(s.spectrum, s.profile, s.phys).dump();
    write_report_csv(os, rec.report());
    return os.str();
  };
  out.push_back(ge("cli.determinism", "identical config and seed give identical spectrum JSON and report CSV",
                   once() == once(), 1));
  bool rejected = false;
  try {
    parse_config("profile: {kind: linear}\ngrid: {bogus: 1}\n");
  } catch (const ConfigError&) {
    rejected = true;
  }
  out.push_back(ge("cli.unknown_key", "unknown configuration key is rejected", rejected, 1));
}

} // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& o) {
  std::vector<CheckResult> all;
  const std::vector<std::pair<std::string, std::function<void(std::vector<CheckResult>&)>>> groups = {
      {"profile", [&](auto& v) { check_profile(v, o.seed); }},
      {"spectrum", [&](auto& v) { check_spectrum(v, o); }},
      {"eigenmode", [&](auto& v) { check_eigenmode(v); }},
      {"field", [&](auto& v) { check_field(v, o.seed); }},
      {"simulator", [&](auto& v) { check_simulator(v, o.seed); }},
      {"diagnostics", [&](auto& v) { check_diagnostics(v, o.seed); }},
      {"cli", [&](auto& v) { check_cli(v); }},
  };
  for (const auto& [name, fn] : groups) {
    if (!o.only.empty() && name.find(o.only) == std::string::npos && o.only.find(name) == std::string::npos) continue;
    std::vector<CheckResult> part;
    auto t0 = Clock::now();
    try {
      fn(part);
    } catch (const std::exception& e) {
      part.push_back({name + ".error", "group raised an exception", 0, 0, "<=", 0, false, 0, e.what()});
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    for (auto& c : part) {
      c.seconds = secs / part.size();
      if (o.only.empty() || c.name.find(o.only) != std::string::npos || name.find(o.only) != std::string::npos)
        all.push_back(std::move(c));
    }
  }
  return all;
}

Json verify_json(const std::vector<CheckResult>& r, const VerifyOptions& o) {
  Json j;
  j["inject_sign_error"] = o.inject_sign_error;
  j["seed"] = o.seed;
  bool all = true;
  Json arr = Json::array();
  for (const auto& c : r) {
    all = all && c.pass;
    Json e{{"name", c.name}, {"statement", c.statement}, {"measured", c.measured}, {"relation", c.relation}};
    if (c.relation == "in")
      e["threshold"] = {c.threshold, c.threshold_hi};
    else
      e["threshold"] = c.threshold;
    e["pass"] = c.pass;
    e["seconds"] = c.seconds;
    if (!c.detail.empty()) e["detail"] = c.detail;
    arr.push_back(e);
  }
  j["all_pass"] = all;
  j["checks"] = arr;
  return j;
}

} // namespace mrt
