#include <algorithm>
#include <cmath>

#include "mrt/simulator.hpp"

namespace mrt {

namespace {

struct Bilinear {
  const Grid2D& g;
  // weights and corner indices for a point y
  int i0, i1, j0, j1;
  double s, r;

  Bilinear(const Grid2D& g_, double y1, double y2) : g(g_) {
    const double L = 2 * M_PI;
    double x = std::fmod(y1, L);
    if (x < 0) x += L;
    double fi = x / g.dy1();
    i0 = int(std::floor(fi)) % g.n1();
    i1 = (i0 + 1) % g.n1();
    s = fi - std::floor(fi);
    double fj = std::clamp(y2, 0.0, g.h()) / g.dy2();
    j0 = std::min(int(std::floor(fj)), g.n2() - 2);
    j1 = j0 + 1;
    r = fj - j0;
  }
  double operator()(const Field& f) const {
    return (1 - r) * ((1 - s) * f[g.idx(i0, j0)] + s * f[g.idx(i1, j0)]) +
           r * ((1 - s) * f[g.idx(i0, j1)] + s * f[g.idx(i1, j1)]);
  }
};

} // namespace

EulerianFields reconstruct_eulerian(const Grid2D& g, const FlowState& s, const Profile& p, double m) {
  const Field e11 = d1(g, s.eta.c1), e12 = d2(g, s.eta.c1);
  const Field e21 = d1(g, s.eta.c2), e22 = d2(g, s.eta.c2);
  EulerianFields out;
  out.rho.resize(g.size());
  out.v = out.M = Vec2::zero(g.size());
  out.beta = Field::Zero(g.size());
  const bool have_q = s.q.size() == g.size();
  const double tol = 1e-12 * std::max(1.0, g.h());
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i) {
      const double x1 = g.y1(i), x2 = g.y2(j);
      double y1 = x1 - s.eta.c1[g.idx(i, j)], y2 = std::clamp(x2 - s.eta.c2[g.idx(i, j)], 0.0, g.h());
      bool ok = false;
      int it = 0;
      for (; it < 50; ++it) {
        Bilinear b(g, y1, y2);
        double r1 = y1 + b(s.eta.c1) - x1, r2 = y2 + b(s.eta.c2) - x2;
        if (std::hypot(r1, r2) <= tol) {
          ok = true;
          break;
        }
        double a = 1 + b(e11), bb = b(e12), c = b(e21), d = 1 + b(e22);
        double det = a * d - bb * c;
        if (!(std::abs(det) > 1e-14)) break;
        y1 -= (d * r1 - bb * r2) / det;
        y2 = std::clamp(y2 - (a * r2 - c * r1) / det, 0.0, g.h());
      }
      out.max_newton = std::max(out.max_newton, it);
      const int k = g.idx(i, j);
      if (!ok) out.holes.push_back(k);
      Bilinear b(g, y1, y2);
      out.rho[k] = p.rho(y2) - p.rho(x2);
      out.v.c1[k] = b(s.u.c1);
      out.v.c2[k] = b(s.u.c2);
      out.M.c1[k] = m + m * b(e11);
      out.M.c2[k] = m * b(e21);
      if (have_q) out.beta[k] = b(s.q);
    }
  return out;
}

} // namespace mrt
