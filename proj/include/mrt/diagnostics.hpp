#pragma once

#include <string>
#include <vector>

#include "mrt/discrete_field.hpp"
#include "mrt/simulator.hpp"

namespace mrt {

/// E(w) = int g rho' w2^2 - lambda m^2 |d1 w|_0^2.
double energy_integral(const Grid2D& g, const Vec2& w, const Profile& p, const PhysParams& pp);

/// sum over |alpha| <= k of |d^alpha f|_0^2 with d1 and the second-order d2.
double sobolev_sq(const Grid2D& g, const Field& f, int k);
double sobolev_sq(const Grid2D& g, const Vec2& v, int k);

/// One snapshot of the report. Energy proxies use Sobolev order k_max where the
/// full functionals use 4 (and k_max - 1 where they use 3):
///   total   = |(eta, d1 eta, u)|_K^2 + |(u_t, grad q)|_{K-1}^2
///   total_p = |d1 (eta, d1 eta, u)|_{K-1}^2 + |(u, u_t, grad q)|_{K-1}^2
///   diss    = |(u, d1 eta)|_K^2 + |(u_t, grad q)|_{K-1}^2
///   diss_p  = |d1 (u, d1 eta)|_{K-1}^2 + |(u, u_t, grad q)|_{K-1}^2
struct ReportRow {
  double t = 0;
  std::vector<double> E_k; // E(d1^k eta), k = 0..k_max
  double total = 0, total_p = 0, diss = 0, diss_p = 0;
  double eta2_norm = 0; // |eta2|_{K-1}
  double u_norm = 0;    // |u|_0
  double eta_inf = 0;   // max |eta|
  double det_dev = 0;   // max |J - 1|
  double div_res = 0;   // |div_A u|_0
  double parity = 0;
  double l1_eta[6] = {}, l1_u[6] = {};
};

struct FitResult {
  double rate = 0, r2 = 0, stderr_rate = 0;
  double t0 = 0, t1 = 0;
  int n = 0;
  bool ok = false;
  std::string note;
};

/// Least-squares slope of ln(y) on [t0, t1]. Throws on nonpositive samples in the window.
FitResult fit_rate(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1);
/// Window that drops the first and last `trim` fraction of [t.front(), t.back()].
FitResult fit_rate_trimmed(const std::vector<double>& t, const std::vector<double>& y, double trim = 0.05);

struct EscapeResult {
  bool escaped = false;
  double time = 0;
};

/// First time all six L1 norms of chi_i, d_j chi_i reach epsilon, with chi
/// the displacement (use_u = false) or the velocity. Crossing times are
/// interpolated in log space between snapshots.
EscapeResult escape_detect(const std::vector<ReportRow>& rows, double epsilon, bool use_u = true);

struct Eta1Limit {
  Field profile; // tail average of eta1
  double variance_rel = 0; // y1-variance of the estimate over its squared norm
  FitResult decay;         // fitted decay of |eta1(t) - eta1_inf|_0 (rate reported positive)
};

struct EnergyReport {
  int k_max = 2;
  double I0 = 0; // |(eta0, d1 eta0, u0)|_K^2
  std::vector<ReportRow> rows;
  bool missing_accel = false;

  std::vector<double> times() const;
  std::vector<double> series(double ReportRow::*member) const;
};

/// Observer that builds the report; keeps eta1 fields for the tail average.
class Recorder {
public:
  Recorder(const MrtSimulator& sim, int k_max = 2, bool keep_fields = false);

  void operator()(const FlowState& s, const StageEval& ev);

  const EnergyReport& report() const { return rep_; }
  const std::vector<double>& snapshot_times() const { return times_; }
  const std::vector<Field>& eta1_fields() const { return eta1_; }
  const std::vector<FlowState>& states() const { return states_; }

  ReportRow compute_row(const FlowState& s, const StageEval* ev) const;

private:
  const MrtSimulator* sim_;
  int k_max_;
  bool keep_;
  EnergyReport rep_;
  std::vector<double> times_;
  std::vector<Field> eta1_;
  std::vector<FlowState> states_;
};

Eta1Limit eta1_limit(const Grid2D& g, const std::vector<double>& t, const std::vector<Field>& eta1,
                     double tail = 0.05);

} // namespace mrt
