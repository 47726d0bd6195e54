#include "doctest.h"

#include <cmath>

#include "mrt/profile.hpp"

using namespace mrt;

TEST_CASE("profile families evaluate their closed forms") {
  Profile lin = Profile::make(ProfileKind::linear, {{"rho0", 2.0}, {"slope", 0.5}}, 1.0);
  CHECK(lin.rho(0.4) == doctest::Approx(2.2).epsilon(1e-15));
  CHECK(lin.drho(0.4) == doctest::Approx(0.5));
  CHECK(lin.deriv(0.4, 2) == 0.0);

  Profile ex = Profile::make(ProfileKind::exponential, {{"beta", 2.0}}, 1.0);
  CHECK(ex.deriv(0.3, 3) == doctest::Approx(8 * std::exp(0.6)).epsilon(1e-14));

  Profile th = Profile::make(ProfileKind::tanh_layer, {}, 2.0);
  CHECK(th.rho(1.0) == doctest::Approx(1.5)); // y0 defaults to h/2
  CHECK(th.params().at("width") == doctest::Approx(0.2));

  Profile c = Profile::make(ProfileKind::constant, {{"rho0", 3.0}}, 1.0);
  CHECK(c.drho(0.7) == 0.0);
  CHECK(c.max_abs_drho() == 0.0);
}

TEST_CASE("derivatives agree with centered differences") {
  for (ProfileKind k : {ProfileKind::linear, ProfileKind::exponential, ProfileKind::tanh_layer}) {
    Profile p = Profile::make(k, {}, 1.0);
    const double e = 1e-4;
    for (double y : {0.2, 0.5, 0.81})
      for (int d = 0; d < 4; ++d) {
        double fd = (p.deriv(y + e, d) - p.deriv(y - e, d)) / (2 * e);
        CHECK(p.deriv(y, d + 1) == doctest::Approx(fd).epsilon(1e-5));
      }
  }
}

TEST_CASE("invalid profiles are configuration errors") {
  CHECK_THROWS_AS(Profile::linear(1, -2, 1), ConfigError); // density crosses zero
  CHECK_THROWS_AS(Profile::make(ProfileKind::linear, {{"beta", 1}}, 1), ConfigError);
  CHECK_THROWS_AS(Profile::make(ProfileKind::tanh_layer, {{"width", 0}}, 1), ConfigError);
  CHECK_THROWS_AS(Profile::linear(1, 1, -1), ConfigError);
  CHECK_THROWS_AS(Profile::linear(1, NAN, 1), ConfigError);
  CHECK_THROWS_AS(profile_kind_from_string("parabolic"), ConfigError);
  CHECK(profile_kind_from_string("tanh-layer") == ProfileKind::tanh_layer);

  PhysParams pp;
  pp.a = -1;
  CHECK_THROWS_AS(pp.validate(), ConfigError);
  pp.a = 0;
  pp.lambda = 0;
  CHECK_THROWS_AS(pp.validate(), ConfigError);
}

TEST_CASE("Rayleigh-Taylor condition and witness") {
  RtCondition up = rt_condition(Profile::linear(1, 1, 1));
  CHECK(up.holds);
  CHECK(up.max_drho == doctest::Approx(1));
  CHECK(!rt_condition(Profile::linear(2, -1, 1)).holds);
  CHECK(!rt_condition(Profile::make(ProfileKind::constant, {}, 1)).holds);

  RtCondition layer = rt_condition(Profile::make(ProfileKind::tanh_layer, {{"y0", 0.3}}, 1));
  CHECK(layer.holds);
  CHECK(layer.y_witness == doctest::Approx(0.3).epsilon(1e-3));
}

TEST_CASE("hydrostatic pressure and the field bound") {
  Profile p = Profile::linear(1, 1, 1);
  for (double y : {0.0, 0.25, 1.0}) CHECK(equilibrium_pressure(p, 2.0, y, 5.0) == doctest::Approx(5 - 2 * (y + y * y / 2)));
  Profile e = Profile::make(ProfileKind::exponential, {{"beta", 1.5}}, 1);
  CHECK(equilibrium_pressure(e, 1.0, 0.8) == doctest::Approx(-(std::exp(1.2) - 1) / 1.5).epsilon(1e-10));

  // (h/pi) sqrt(g sup|rho'| / lambda)
  CHECK(critical_field_upper_bound(p, 1, 1) == doctest::Approx(1 / M_PI).epsilon(1e-14));
  CHECK(critical_field_upper_bound(Profile::linear(1, 4, 2), 1, 4) == doctest::Approx(2 / M_PI).epsilon(1e-14));
}
