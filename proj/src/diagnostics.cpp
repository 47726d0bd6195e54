#include "mrt/diagnostics.hpp"

#include <cmath>

#include "mrt/eigenmode.hpp"

namespace mrt {

double energy_integral(const Grid2D& g, const Vec2& w, const Profile& p, const PhysParams& pp) {
  Field drho = g.sample_y2([&](double y) { return p.drho(y); });
  Field a = d1(g, w.c1), b = d1(g, w.c2);
  return pp.g * g.integrate(drho * w.c2 * w.c2) - pp.lambda * pp.m * pp.m * (g.inner(a, a) + g.inner(b, b));
}

double sobolev_sq(const Grid2D& g, const Field& f, int k) {
  double s = 0;
  Field row = f; // d2^a2 f, then d1 applied a1 times
  for (int a2 = 0; a2 <= k; ++a2) {
    Field x = row;
    for (int a1 = 0; a1 + a2 <= k; ++a1) {
      s += g.inner(x, x);
      if (a1 + a2 < k) x = d1(g, x);
    }
    if (a2 < k) row = d2(g, row);
  }
  return s;
}

double sobolev_sq(const Grid2D& g, const Vec2& v, int k) { return sobolev_sq(g, v.c1, k) + sobolev_sq(g, v.c2, k); }

FitResult fit_rate(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
  FitResult r;
  r.t0 = t0;
  r.t1 = t1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size() && i < y.size(); ++i) {
    if (t[i] < t0 - 1e-12 || t[i] > t1 + 1e-12) continue;
    if (!(y[i] > 0)) throw std::domain_error("fit_rate: nonpositive value in the fit window");
    xs.push_back(t[i]);
    ys.push_back(std::log(y[i]));
  }
  r.n = int(xs.size());
  if (r.n < 3) {
    r.note = "fewer than 3 samples in window";
    return r;
  }
  double mx = 0, my = 0;
  for (int i = 0; i < r.n; ++i) mx += xs[i], my += ys[i];
  mx /= r.n;
  my /= r.n;
  for (int i = 0; i < r.n; ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sx += dx;
    sy += dy;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0) {
    r.note = "degenerate window";
    return r;
  }
  r.rate = sxy / sxx;
  double sse = std::max(0.0, syy - r.rate * sxy);
  r.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  r.stderr_rate = r.n > 2 ? std::sqrt(sse / (r.n - 2) / sxx) : 0.0;
  r.ok = true;
  return r;
}

FitResult fit_rate_trimmed(const std::vector<double>& t, const std::vector<double>& y, double trim) {
  if (t.empty()) return {};
  double T0 = t.front(), T1 = t.back(), L = T1 - T0;
  return fit_rate(t, y, T0 + trim * L, T1 - trim * L);
}

EscapeResult escape_detect(const std::vector<ReportRow>& rows, double epsilon, bool use_u) {
  if (!(epsilon > 0)) throw std::invalid_argument("escape_detect: epsilon must be positive");
  auto low = [&](const ReportRow& r) {
    const double* v = use_u ? r.l1_u : r.l1_eta;
    double m = v[0];
    for (int k = 1; k < 6; ++k) m = std::min(m, v[k]);
    return m;
  };
  EscapeResult e;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double b = low(rows[i]);
    if (b < epsilon) continue;
    e.escaped = true;
    e.time = rows[i].t;
    if (i > 0) {
      double a = low(rows[i - 1]);
      if (a > 0 && b > a) {
        double f = std::log(epsilon / a) / std::log(b / a);
        e.time = rows[i - 1].t + f * (rows[i].t - rows[i - 1].t);
      }
    }
    return e;
  }
  return e;
}

std::vector<double> EnergyReport::times() const {
  std::vector<double> t;
  for (const auto& r : rows) t.push_back(r.t);
  return t;
}

std::vector<double> EnergyReport::series(double ReportRow::*member) const {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.*member);
  return v;
}

Recorder::Recorder(const MrtSimulator& sim, int k_max, bool keep_fields)
    : sim_(&sim), k_max_(k_max), keep_(keep_fields) {
  if (k_max < 1) throw ConfigError("diagnostics k_max must be at least 1");
  rep_.k_max = k_max;
}

ReportRow Recorder::compute_row(const FlowState& s, const StageEval* ev) const {
  const Grid2D& g = sim_->grid();
  const int K = k_max_;
  ReportRow r;
  r.t = s.t;
  Vec2 e = s.eta;
  for (int k = 0; k <= K; ++k) {
    r.E_k.push_back(energy_integral(g, e, sim_->profile(), sim_->phys()));
    e = Vec2{d1(g, e.c1), d1(g, e.c2)};
  }
  Vec2 d1eta{d1(g, s.eta.c1), d1(g, s.eta.c2)};
  Vec2 d11eta{d1(g, d1eta.c1), d1(g, d1eta.c2)};
  Vec2 d1u{d1(g, s.u.c1), d1(g, s.u.c2)};
  double ut_q = 0;
  if (ev) {
    Vec2 gq{d1(g, ev->q), d2(g, ev->q)};
    ut_q = sobolev_sq(g, ev->u_t, K - 1) + sobolev_sq(g, gq, K - 1);
  }
  double u_K = sobolev_sq(g, s.u, K), u_K1 = sobolev_sq(g, s.u, K - 1);
  double d1eta_K = sobolev_sq(g, d1eta, K);
  r.total = sobolev_sq(g, s.eta, K) + d1eta_K + u_K + ut_q;
  r.total_p = sobolev_sq(g, d1eta, K - 1) + sobolev_sq(g, d11eta, K - 1) + sobolev_sq(g, d1u, K - 1) + u_K1 + ut_q;
  r.diss = u_K + d1eta_K + ut_q;
  r.diss_p = sobolev_sq(g, d1u, K - 1) + sobolev_sq(g, d11eta, K - 1) + u_K1 + ut_q;
  r.eta2_norm = std::sqrt(sobolev_sq(g, s.eta.c2, K - 1));
  r.u_norm = g.norm(s.u);
  r.eta_inf = std::max(s.eta.c1.abs().maxCoeff(), s.eta.c2.abs().maxCoeff());
  GeometryA A = geometry(g, s.eta);
  r.det_dev = A.max_det_dev;
  r.div_res = g.norm(div_A(g, A, s.u));
  r.parity = parity_defect(g, s);
  l1_norms(g, s.eta, r.l1_eta);
  l1_norms(g, s.u, r.l1_u);
  return r;
}

void Recorder::operator()(const FlowState& s, const StageEval& ev) {
  const StageEval* p = ev.q.size() ? &ev : nullptr;
  if (!p) rep_.missing_accel = true;
  ReportRow r = compute_row(s, p);
  if (rep_.rows.empty()) {
    const Grid2D& g = sim_->grid();
    Vec2 d1eta{d1(g, s.eta.c1), d1(g, s.eta.c2)};
    rep_.I0 = sobolev_sq(g, s.eta, k_max_) + sobolev_sq(g, d1eta, k_max_) + sobolev_sq(g, s.u, k_max_);
  }
  rep_.rows.push_back(std::move(r));
  times_.push_back(s.t);
  eta1_.push_back(s.eta.c1);
  if (keep_) states_.push_back(s);
}

Eta1Limit eta1_limit(const Grid2D& g, const std::vector<double>& t, const std::vector<Field>& eta1, double tail) {
  Eta1Limit out;
  if (t.empty() || t.size() != eta1.size()) throw std::invalid_argument("eta1_limit: empty or mismatched trajectory");
  double T0 = t.front(), T1 = t.back(), cut = T1 - tail * (T1 - T0);
  out.profile = Field::Zero(g.size());
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= cut - 1e-12) out.profile += eta1[i], ++n;
  out.profile /= n;

  // y1-variance: distance to the row means
  Field rowmean(g.size());
  for (int j = 0; j < g.n2(); ++j) {
    double m = out.profile.segment(Eigen::Index(j) * g.n1(), g.n1()).mean();
    rowmean.segment(Eigen::Index(j) * g.n1(), g.n1()).setConstant(m);
  }
  double nn = g.inner(out.profile, out.profile);
  Field dev = out.profile - rowmean;
  out.variance_rel = nn > 0 ? g.inner(dev, dev) / nn : 0.0;

  std::vector<double> dist;
  for (const Field& f : eta1) dist.push_back(g.norm(Field(f - out.profile)));
  std::vector<double> tt = t;
  // fit only where the distance is still above the tail-average noise floor
  double L = T1 - T0;
  out.decay = fit_rate(tt, dist, T0 + 0.05 * L, cut);
  out.decay.rate = -out.decay.rate;
  return out;
}

} // namespace mrt
