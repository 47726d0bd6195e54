#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrt {

/// Raised for invalid profiles, parameters or configuration values.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ProfileKind { constant, linear, exponential, tanh_layer };

std::string to_string(ProfileKind k);
ProfileKind profile_kind_from_string(const std::string& s);

/// Physical constants of the damped MRT problem.
struct PhysParams {
  double g = 1.0;
  double a = 0.0;      // velocity damping
  double lambda = 1.0; // magnetic coupling
  double m = 0.0;      // horizontal field strength

  void validate() const;
};

/// Analytic equilibrium density on [0, h].
///
/// Families and their parameters (defaults in brackets):
///   constant:    rho0 [1]
///   linear:      rho0 [1], slope [1]                  rho0 + slope*y
///   exponential: rho0 [1], beta [1]                   rho0*exp(beta*y)
///   tanh_layer:  rho0 [1], jump [1], y0 [h/2], width [0.1*h]
///                rho0 + jump/2*(1 + tanh((y - y0)/width))
class Profile {
public:
  Profile() = default;

  /// Validates positivity on a 4096-point audit grid; throws ConfigError.
  static Profile make(ProfileKind kind, const std::map<std::string, double>& params, double h);

  static Profile linear(double rho0, double slope, double h);

  ProfileKind kind() const { return kind_; }
  double h() const { return h_; }
  const std::map<std::string, double>& params() const { return params_; }

  /// k-th derivative of rho at y, 0 <= k <= 4.
  double deriv(double y, int k) const;
  double rho(double y) const { return deriv(y, 0); }
  double drho(double y) const { return deriv(y, 1); }

  double min_rho() const { return min_rho_; }
  /// sup |rho'| over the audit grid.
  double max_abs_drho() const { return max_abs_drho_; }
  /// sup max(rho', 0)/rho over the audit grid.
  double max_pos_drho_over_rho() const { return max_pos_ratio_; }

private:
  ProfileKind kind_ = ProfileKind::constant;
  double h_ = 1.0;
  std::map<std::string, double> params_;
  double c_[4] = {1, 0, 0, 0};
  double min_rho_ = 1, max_abs_drho_ = 0, max_pos_ratio_ = 0;
};

/// Result of the Rayleigh-Taylor condition check on the audit grid.
struct RtCondition {
  bool holds = false;
  double y_witness = 0; // a point where rho' > 0 (or the argmax of rho')
  double max_drho = 0;
};

RtCondition rt_condition(const Profile& p);

/// Hydrostatic pressure P(y) = -g int_0^y rho, plus an additive constant.
double equilibrium_pressure(const Profile& p, double g, double y, double p0 = 0.0);

/// Upper bound (h/pi) sqrt(g sup|rho'| / lambda) on the critical field.
double critical_field_upper_bound(const Profile& p, double g, double lambda);

} // namespace mrt
