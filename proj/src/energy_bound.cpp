#include <cmath>
#include <random>

#include "mrt/eigenmode.hpp"
#include "mrt/mode_spectrum.hpp"

namespace mrt {

namespace {

struct Quad {
  double E = 0, mass = 0;
};

Quad quad(const Grid2D& g, const Vec2& v, const Field& rho, const Field& drho, const PhysParams& pp) {
  Field a = d1(g, v.c1), b = d1(g, v.c2);
  Quad q;
  q.E = pp.g * g.integrate(drho * v.c2 * v.c2) - pp.lambda * pp.m * pp.m * (g.inner(a, a) + g.inner(b, b));
  q.mass = g.integrate(rho * (v.c1 * v.c1 + v.c2 * v.c2));
  return q;
}

double ratio(const Quad& q, double denom_rate) {
  double d = denom_rate * q.mass;
  if (d > 0) return q.E / d;
  return q.E > 0 ? INFINITY : 0.0;
}

} // namespace

EnergyBoundResult verify_energy_bound(const GrowthSpectrum& s, const Profile& p, const PhysParams& pp, int trials,
                                      std::uint64_t seed, int n2) {
  const double h = p.h(), L = s.Lambda, rate = L * L + pp.a * L;
  const int xi_cap = std::max(1, std::min<int>(int(s.modes.size()), 12));
  Grid2D g(64, n2, h);
  Field rho = g.sample_y2([&](double y) { return p.rho(y); });
  Field drho = g.sample_y2([&](double y) { return p.drho(y); });

  EnergyBoundResult res;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> pick_xi(1, xi_cap), pick_terms(1, 6), pick_modes(1, 4);
  for (int t = 0; t < trials; ++t) {
    Vec2 v = Vec2::zero(g.size());
    int nmodes = pick_modes(rng);
    for (int mnum = 0; mnum < nmodes; ++mnum) {
      // bias toward the fastest frequency so ratios approach the bound
      int xi = (mnum == 0 && s.xi_star > 0 && (t % 2 == 0)) ? s.xi_star : pick_xi(rng);
      int terms = pick_terms(rng);
      std::vector<double> c(terms);
      for (int k = 0; k < terms; ++k) c[k] = U(rng) / (1.0 + k * k);
      double th = M_PI * U(rng);
      for (int j = 0; j < g.n2(); ++j) {
        double y = g.y2(j), psi = 0, dpsi = 0;
        for (int k = 0; k < terms; ++k) {
          double w = (k + 1) * M_PI / h;
          psi += c[k] * std::sin(w * y);
          dpsi += c[k] * w * std::cos(w * y);
        }
        for (int i = 0; i < g.n1(); ++i) {
          double arg = xi * g.y1(i) + th;
          v.c1[g.idx(i, j)] += -dpsi / xi * std::sin(arg);
          v.c2[g.idx(i, j)] += psi * std::cos(arg);
        }
      }
    }
    if (U(rng) > 0) { // horizontal shear, divergence-free and E-neutral
      double c = U(rng);
      v.c1 += c * g.sample_y2([&](double y) { return std::cos(M_PI * y / h); });
    }
    double r = ratio(quad(g, v, rho, drho, pp), rate);
    res.ratios.push_back(r);
    res.worst_ratio = t == 0 ? r : std::max(res.worst_ratio, r);
  }

  if (s.xi_star > 0) {
    ModeResult mr = solve_mode(p, pp, s.xi_star, ModeGrid::finite_difference(n2 - 2, h));
    if (mr.unstable) {
      Eigenmode2D mode = build_mode(mr, p, pp, g);
      res.extremal_xi = s.xi_star;
      res.extremal_ratio = ratio(quad(g, mode.w(), rho, drho, pp), rate);
    }
  }
  return res;
}

} // namespace mrt
