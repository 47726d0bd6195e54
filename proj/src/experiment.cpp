#include "mrt/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <random>

#include "mrt/io.hpp"

namespace mrt {

SpectrumSetup setup_spectrum(RunConfig& c, const SpectrumOptions& opts_in) {
  SpectrumSetup s;
  s.profile = c.profile();
  SpectrumOptions opts = opts_in;
  opts.dense_limit = c.dense_limit;
  ModeGrid grid = c.mode_grid();
  s.m_C = critical_field(s.profile, c.phys.g, c.phys.lambda, grid, c.dense_limit);
  resolve_field_strength(c, s.m_C);
  s.phys = c.phys;
  s.spectrum = compute_spectrum(s.profile, s.phys, c.xi_max, grid, opts);
  return s;
}

Vec2 random_solenoidal(const Grid2D& g, std::uint64_t seed, bool parity, int kmax, int lmax) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec2 v = Vec2::zero(g.size());
  const double h = g.h();
  for (int k = 1; k <= kmax; ++k)
    for (int l = 1; l <= lmax; ++l) {
      double c = U(rng) / (k * k + l * l), th = parity ? 0.0 : M_PI * U(rng);
      double w = l * M_PI / h;
      for (int j = 0; j < g.n2(); ++j)
        for (int i = 0; i < g.n1(); ++i) {
          double arg = k * g.y1(i) + th, y = g.y2(j);
          v.c1[g.idx(i, j)] += c * w * std::cos(w * y) * std::sin(arg);
          v.c2[g.idx(i, j)] += -c * k * std::sin(w * y) * std::cos(arg);
        }
    }
  if (!parity) { // a horizontal shear keeps the y1-mean part generic
    double c = 0.3 * U(rng);
    v.c1 += g.sample_y2([&](double y) { return c * std::cos(M_PI * y / h); });
  } else { // sin(k y1) sampled at y1 and 2pi - y1 differs in the last bit
    v.c1 = 0.5 * (v.c1 - reflect_y1(g, v.c1));
    v.c2 = 0.5 * (v.c2 + reflect_y1(g, v.c2));
  }
  zero_wall_normal(g, v);
  double n = g.norm(v);
  return (1.0 / n) * v;
}

Seed make_seed(const RunConfig& c, const SpectrumSetup& s, const MrtSimulator& sim) {
  const Grid2D& g = sim.grid();
  Seed out;
  out.state = FlowState::zero(g);
  if (c.seed_kind == "none" || c.delta == 0) return out;

  SeedResult r;
  if (c.seed_kind == "mode") {
    int xi = c.seed_xi ? std::abs(c.seed_xi) : s.spectrum.xi_star;
    if (xi == 0) throw ConfigError("seeding.kind mode: no unstable frequency (|m| >= m_C or no RT region)");
    if (2 * xi >= g.n1()) throw ConfigError("seeding.xi is not resolved by grid.n1");
    ModeResult mr = solve_mode(s.profile, s.phys, xi, ModeGrid::finite_difference(g.n2() - 2, g.h()));
    if (!mr.unstable) throw ConfigError("seeding.xi = " + std::to_string(xi) + " is not an unstable frequency");
    out.mode = build_mode(mr, s.profile, s.phys, g);
    double eps0 = c.epsilon0 > 0 ? c.epsilon0 : std::clamp(0.1 * s.m_C, 1e-3, 1.0);
    out.thresholds = thresholds(*out.mode, g, s.spectrum.Lambda, eps0);
    r = seed_initial_data(*out.mode, c.delta, sim.solver());
  } else if (c.seed_kind == "parity" || c.seed_kind == "random") {
    bool parity = c.seed_kind == "parity";
    Vec2 e = random_solenoidal(g, c.seed, parity), v = random_solenoidal(g, c.seed + 1, parity);
    // discrete div e = 0 leaves det - 1 = O(delta^2); the analytic field alone
    // carries an O(delta h^2) divergence that the dynamics can never remove
    project_solenoidal(sim.solver(), identity_geometry(g), e);
    r = compatible_data(c.delta * e, c.delta * v, sim.solver());
  } else { // file
    std::filesystem::path p(c.seed_file);
    if (p.is_relative()) p = std::filesystem::path(c.source_dir) / p;
    FieldDump d = read_field_dump(p.string());
    if (d.n1 != g.n1() || d.n2 != g.n2() || std::abs(d.h - g.h()) > 1e-12 * g.h())
      throw ConfigError("seeding.file grid does not match grid.n1, grid.n2, profile.h");
    Vec2 e{d.get("eta1"), d.get("eta2")}, v{d.get("u1"), d.get("u2")};
    if (wall_normal_max(g, e) != 0) throw ConfigError("seeding.file: eta2 must vanish on the walls");
    r = compatible_data(e, v, sim.solver());
  }
  out.state.eta = r.eta;
  out.state.u = r.u;
  out.div_residual = r.div_residual;
  return out;
}

} // namespace mrt
