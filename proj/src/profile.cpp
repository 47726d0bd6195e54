#include "mrt/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mrt {

namespace {

constexpr int kAuditPoints = 4096;

bool finite(double x) { return std::isfinite(x); }

} // namespace

std::string to_string(ProfileKind k) {
  switch (k) {
  case ProfileKind::constant: return "constant";
  case ProfileKind::linear: return "linear";
  case ProfileKind::exponential: return "exponential";
  case ProfileKind::tanh_layer: return "tanh_layer";
  }
  return "unknown";
}

ProfileKind profile_kind_from_string(const std::string& s) {
  if (s == "constant") return ProfileKind::constant;
  if (s == "linear") return ProfileKind::linear;
  if (s == "exponential") return ProfileKind::exponential;
  if (s == "tanh_layer" || s == "tanh-layer" || s == "tanh") return ProfileKind::tanh_layer;
  throw ConfigError("unknown profile kind '" + s + "' (expected constant, linear, exponential, tanh_layer)");
}

void PhysParams::validate() const {
  if (!finite(g) || g <= 0) throw ConfigError("physics.g must be positive");
  if (!finite(a) || a < 0) throw ConfigError("physics.a must be non-negative");
  if (!finite(lambda) || lambda <= 0) throw ConfigError("physics.lambda must be positive");
  if (!finite(m)) throw ConfigError("physics.m must be finite");
}

Profile Profile::make(ProfileKind kind, const std::map<std::string, double>& params, double h) {
  if (!finite(h) || h <= 0) throw ConfigError("profile.h must be positive");
  std::map<std::string, double> full;
  switch (kind) {
  case ProfileKind::constant: full = {{"rho0", 1.0}}; break;
  case ProfileKind::linear: full = {{"rho0", 1.0}, {"slope", 1.0}}; break;
  case ProfileKind::exponential: full = {{"rho0", 1.0}, {"beta", 1.0}}; break;
  case ProfileKind::tanh_layer:
    full = {{"rho0", 1.0}, {"jump", 1.0}, {"y0", 0.5 * h}, {"width", 0.1 * h}};
    break;
  }
  for (const auto& [k, v] : params) {
    auto it = full.find(k);
    if (it == full.end())
      throw ConfigError("profile parameter '" + k + "' is not valid for kind " + to_string(kind));
    if (!finite(v)) throw ConfigError("profile parameter '" + k + "' must be finite");
    it->second = v;
  }

  Profile p;
  p.kind_ = kind;
  p.h_ = h;
  p.params_ = full;
  switch (kind) {
  case ProfileKind::constant: p.c_[0] = full["rho0"]; break;
  case ProfileKind::linear: p.c_[0] = full["rho0"]; p.c_[1] = full["slope"]; break;
  case ProfileKind::exponential: p.c_[0] = full["rho0"]; p.c_[1] = full["beta"]; break;
  case ProfileKind::tanh_layer:
    p.c_[0] = full["rho0"]; p.c_[1] = full["jump"]; p.c_[2] = full["y0"]; p.c_[3] = full["width"];
    if (p.c_[3] <= 0) throw ConfigError("profile parameter 'width' must be positive");
    break;
  }

  double mn = INFINITY, md = 0, mr = 0;
  for (int i = 0; i <= kAuditPoints; ++i) {
    double y = h * i / kAuditPoints;
    double r = p.rho(y), d = p.drho(y);
    if (!finite(r) || !finite(d)) throw ConfigError("profile is not finite on [0, h]");
    mn = std::min(mn, r);
    md = std::max(md, std::abs(d));
    if (r > 0) mr = std::max(mr, std::max(d, 0.0) / r);
  }
  if (mn <= 0) throw ConfigError("profile density must be positive on [0, h] (min " + std::to_string(mn) + ")");
  p.min_rho_ = mn;
  p.max_abs_drho_ = md;
  p.max_pos_ratio_ = mr;
  return p;
}

Profile Profile::linear(double rho0, double slope, double h) {
  return make(ProfileKind::linear, {{"rho0", rho0}, {"slope", slope}}, h);
}

double Profile::deriv(double y, int k) const {
  if (k < 0 || k > 4) throw std::invalid_argument("profile derivative order must be in [0, 4]");
  switch (kind_) {
  case ProfileKind::constant: return k == 0 ? c_[0] : 0.0;
  case ProfileKind::linear: return k == 0 ? c_[0] + c_[1] * y : (k == 1 ? c_[1] : 0.0);
  case ProfileKind::exponential: return c_[0] * std::pow(c_[1], k) * std::exp(c_[1] * y);
  case ProfileKind::tanh_layer: {
    double w = c_[3], t = std::tanh((y - c_[2]) / w), s = 1 - t * t;
    double dk = 0;
    // d^k/dz^k tanh z expressed through t and s = 1 - t^2
    switch (k) {
    case 0: return c_[0] + 0.5 * c_[1] * (1 + t);
    case 1: dk = s; break;
    case 2: dk = -2 * t * s; break;
    case 3: dk = -2 * s * s + 4 * t * t * s; break;
    case 4: dk = 16 * t * s * s - 8 * t * t * t * s; break;
    }
    return 0.5 * c_[1] * dk / std::pow(w, k);
  }
  }
  return 0.0;
}

RtCondition rt_condition(const Profile& p) {
  RtCondition rc;
  double best = -INFINITY;
  for (int i = 0; i <= kAuditPoints; ++i) {
    double y = p.h() * i / kAuditPoints;
    double d = p.drho(y);
    if (d > best) {
      best = d;
      rc.y_witness = y;
    }
  }
  rc.max_drho = best;
  rc.holds = best > 0;
  return rc;
}

double equilibrium_pressure(const Profile& p, double g, double y, double p0) {
  // composite Simpson, fourth order in the panel count
  constexpr int panels = 256;
  if (y == 0) return p0;
  double dx = y / (2 * panels), s = p.rho(0) + p.rho(y);
  for (int i = 1; i < 2 * panels; ++i) s += (i % 2 ? 4 : 2) * p.rho(i * dx);
  return p0 - g * s * dx / 3;
}

double critical_field_upper_bound(const Profile& p, double g, double lambda) {
  return p.h() / std::numbers::pi * std::sqrt(g * p.max_abs_drho() / lambda);
}

} // namespace mrt
