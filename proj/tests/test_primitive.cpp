#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "rcoord/errors.hpp"
#include "rcoord/primitive.hpp"

using namespace rcoord;

namespace {

VehicleParams scaled_params() {
  VehicleParams p;
  p.u_min = -0.45;
  p.u_max = 0.45;
  p.v_min = 0.05;
  p.v_max = 0.15;
  return p;
}

}  // namespace

TEST_CASE("constant-speed plan has zero curvature") {
  const Primitive prim(1.0, 0.1, 10.0);
  CHECK(prim.a() == 0.0);
  CHECK(prim.b() == 0.0);
  CHECK(prim.c() == 0.1);
  CHECK(prim.d() == 0.0);
  CHECK(prim.position(5.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(prim.speed(3.7) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(prim.accel(9.9) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("accelerating plan matches the closed-form coefficients") {
  const Primitive prim(1.0, 0.05, 10.0);
  CHECK(prim.b() == doctest::Approx(0.0075).epsilon(1e-14));
  CHECK(prim.a() == doctest::Approx(-2.5e-4).epsilon(1e-14));
  CHECK(prim.exit_speed() == doctest::Approx(0.125).epsilon(1e-14));
  // v(t_f) by direct evaluation agrees with the closed form
  CHECK(prim.speed(10.0) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(prim.position(10.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(prim.accel(10.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(prim.accel(0.0) == doctest::Approx(0.015).epsilon(1e-14));
  CHECK(prim.position(0.0) == 0.0);
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(Primitive(0.0, 0.1, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(Primitive(1.0, 0.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(Primitive(1.0, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Primitive(-1.0, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Primitive(1.0, 0.1, std::nan("")), std::invalid_argument);
}

TEST_CASE("evaluation outside the horizon is a domain error") {
  const Primitive prim(1.0, 0.1, 10.0);
  CHECK_THROWS_AS(prim.position(-0.001), std::domain_error);
  CHECK_THROWS_AS(prim.position(10.001), std::domain_error);
  CHECK_THROWS_AS(prim.speed(11.0), std::domain_error);
  CHECK_THROWS_AS(prim.accel(-1.0), std::domain_error);
}

TEST_CASE("boundary conditions hold for random plans") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> s_dist(0.5, 50.0);
  std::uniform_real_distribution<double> v_dist(0.05, 0.15);
  const VehicleParams params = scaled_params();
  for (int i = 0; i < 2000; ++i) {
    const double S = s_dist(rng);
    const double v0 = v_dist(rng);
    const ExitTimeWindow w = exit_time_window(S, v0, params);
    std::uniform_real_distribution<double> t_dist(w.t_lo, w.t_hi);
    const double tf = t_dist(rng);
    const Primitive prim(S, v0, tf);
    CHECK(prim.position(0.0) == 0.0);
    CHECK(prim.speed(0.0) == v0);
    CHECK(prim.position(tf) == doctest::Approx(S).epsilon(1e-9));
    CHECK(prim.accel(tf) == doctest::Approx(0.0).scale(std::abs(prim.b()) + 1.0).epsilon(1e-9));
  }
}

TEST_CASE("speed and accel are consistent derivatives of position") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> s_dist(0.5, 20.0);
  std::uniform_real_distribution<double> v_dist(0.05, 0.15);
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  const VehicleParams params = scaled_params();
  const double h = 1e-4;
  for (int i = 0; i < 200; ++i) {
    const double S = s_dist(rng);
    const double v0 = v_dist(rng);
    const ExitTimeWindow w = exit_time_window(S, v0, params);
    const double tf = w.t_lo + frac(rng) * (w.t_hi - w.t_lo);
    const Primitive prim(S, v0, tf);
    const double t = frac(rng) * tf;
    const double v_fd = (prim.position(t + h) - prim.position(t - h)) / (2.0 * h);
    const double u_fd = (prim.speed(t + h) - prim.speed(t - h)) / (2.0 * h);
    CHECK(v_fd == doctest::Approx(prim.speed(t)).epsilon(1e-6));
    CHECK(u_fd == doctest::Approx(prim.accel(t)).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("inverse position: closed cases") {
  const Primitive cruise(1.0, 0.1, 10.0);
  CHECK(cruise.inverse_position(0.5) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(cruise.inverse_position(0.0) == 0.0);
  CHECK(cruise.inverse_position(1.0) == 10.0);

  // root of -2.5e-4 t^3 + 7.5e-3 t^2 + 0.05 t = 0.5 is 20 - 10 sqrt(2)
  const Primitive accel(1.0, 0.05, 10.0);
  const double t = accel.inverse_position(0.5);
  CHECK(t == doctest::Approx(5.857864376269049).epsilon(1e-9));
  CHECK(accel.position(t) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(t == doctest::Approx(oracles::bisect_inverse(accel, 0.5)).epsilon(1e-10));
}

TEST_CASE("inverse position: domain and contract errors") {
  const Primitive prim(1.0, 0.1, 10.0);
  CHECK_THROWS_AS(prim.inverse_position(-0.1), std::domain_error);
  CHECK_THROWS_AS(prim.inverse_position(1.1), std::domain_error);

  // horizon long enough that the plan decelerates through v = 0
  const Primitive stalls(1.0, 0.3, 12.0);
  CHECK(stalls.exit_speed() < 0.0);
  CHECK_THROWS_AS(stalls.inverse_position(0.5), ContractViolationError);
}

TEST_CASE("inverse position round-trips across random plans") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> s_dist(0.5, 50.0);
  std::uniform_real_distribution<double> v_dist(0.05, 0.15);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  const VehicleParams params = scaled_params();
  for (int i = 0; i < 50; ++i) {
    const double S = s_dist(rng);
    const double v0 = v_dist(rng);
    const ExitTimeWindow w = exit_time_window(S, v0, params);
    const double tf = w.t_lo + frac(rng) * (w.t_hi - w.t_lo);
    const Primitive prim(S, v0, tf);
    for (int k = 0; k < 100; ++k) {
      const double station = frac(rng) * S;
      const double t = prim.inverse_position(station);
      CHECK(std::abs(prim.position(t) - station) <= 1e-9 * S);
    }
  }
}

TEST_CASE("window on the scaled operating point") {
  const VehicleParams params = scaled_params();
  const ExitTimeWindow w = exit_time_window(1.0, 0.05, params);
  // max{t_umax, t_vmax}: the control-bound root alone would allow horizons
  // whose exit speed blows past v_max (sampling oracle below), so the speed
  // bound must win here.
  CHECK(w.t_lo == doctest::Approx(8.571428571428571).epsilon(1e-12));
  CHECK(w.binding_lo == Binding::speed_bound);
  CHECK_FALSE(oracles::plan_within_bounds(1.0, 0.05, 2.420695782710004, params));
  Primitive too_fast(1.0, 0.05, 2.420695782710004);
  CHECK(too_fast.exit_speed() == doctest::Approx(0.594).epsilon(1e-3));
  CHECK(oracles::plan_within_bounds(1.0, 0.05, w.t_lo, params));

  // deceleration quadratic has no real root at this point; speed floor binds
  CHECK(9.0 * 0.05 * 0.05 + 12.0 * 1.0 * params.u_min < 0.0);
  CHECK(w.t_hi == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(w.binding_hi == Binding::no_real_root);
  CHECK(oracles::plan_within_bounds(1.0, 0.05, w.t_hi, params));
}

TEST_CASE("entry at v_max pins the window to the cruise time") {
  const VehicleParams params = scaled_params();
  const ExitTimeWindow w = exit_time_window(2.0, params.v_max, params);
  CHECK(w.t_lo == doctest::Approx(2.0 / params.v_max).epsilon(1e-12));
  CHECK(constant_speed_time(2.0, params.v_max) == doctest::Approx(w.t_lo).epsilon(1e-12));
}

TEST_CASE("entry speed outside the band is rejected") {
  const VehicleParams params = scaled_params();
  CHECK_THROWS_AS(exit_time_window(1.0, 0.04, params), InfeasibleEntryError);
  CHECK_THROWS_AS(exit_time_window(1.0, 0.16, params), InfeasibleEntryError);
}

TEST_CASE("constant speed time") {
  CHECK(constant_speed_time(1.0, 0.1) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(constant_speed_time(2.0, 0.1) == doctest::Approx(20.0).epsilon(1e-15));
  CHECK_THROWS_AS(constant_speed_time(1.0, 0.0), std::invalid_argument);
  const Primitive prim(1.0, 0.1, constant_speed_time(1.0, 0.1));
  CHECK(prim.a() == 0.0);
  CHECK(prim.b() == 0.0);
}

TEST_CASE("window properties over random parameter draws") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> s_dist(0.5, 30.0);
  std::uniform_real_distribution<double> vmin_dist(0.02, 0.1);
  std::uniform_real_distribution<double> span_dist(1.2, 4.0);
  std::uniform_real_distribution<double> u_dist(0.05, 1.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    VehicleParams p;
    p.v_min = vmin_dist(rng);
    p.v_max = p.v_min * span_dist(rng);
    p.u_max = u_dist(rng);
    p.u_min = -u_dist(rng);
    const double S = s_dist(rng);
    const double v0 = p.v_min + frac(rng) * (p.v_max - p.v_min);
    const ExitTimeWindow w = exit_time_window(S, v0, p);

    CHECK(w.t_lo <= w.t_hi);
    // the zero-control plan is always inside the window
    const double cruise = constant_speed_time(S, v0);
    CHECK(cruise >= w.t_lo - 1e-9 * cruise);
    CHECK(cruise <= w.t_hi + 1e-9 * cruise);

    for (double tf : {w.t_lo, 0.5 * (w.t_lo + w.t_hi), w.t_hi}) {
      CHECK(oracles::plan_within_bounds(S, v0, tf, p));
    }
    CHECK_FALSE(oracles::plan_within_bounds(S, v0, w.t_lo * (1.0 - 1e-3), p));
    CHECK_FALSE(oracles::plan_within_bounds(S, v0, w.t_hi * (1.0 + 1e-3), p));

    // edge tightness: the binding constraint is met with equality
    const Primitive lo_plan(S, v0, w.t_lo);
    if (w.binding_lo == Binding::control_bound) {
      CHECK(lo_plan.accel(0.0) == doctest::Approx(p.u_max).epsilon(1e-6));
    } else {
      CHECK(lo_plan.exit_speed() == doctest::Approx(p.v_max).epsilon(1e-6));
    }
    const Primitive hi_plan(S, v0, w.t_hi);
    if (w.binding_hi == Binding::control_bound) {
      CHECK(hi_plan.accel(0.0) == doctest::Approx(p.u_min).epsilon(1e-6));
    } else {
      CHECK(hi_plan.exit_speed() == doctest::Approx(p.v_min).epsilon(1e-6));
    }
  }
}

TEST_CASE("control envelope is monotone: extremes at t=0 and t=t_f") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> s_dist(0.5, 30.0);
  std::uniform_real_distribution<double> v_dist(0.05, 0.15);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  const VehicleParams params = scaled_params();
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const double S = s_dist(rng);
    const double v0 = v_dist(rng);
    const ExitTimeWindow w = exit_time_window(S, v0, params);
    const double tf = w.t_lo + frac(rng) * (w.t_hi - w.t_lo);
    const Primitive prim(S, v0, tf);
    double u_extreme = 0.0, v_lo = 1e300, v_hi = -1e300;
    for (int k = 0; k <= 100; ++k) {
      const double t = std::min(tf * k / 100.0, tf);
      u_extreme = std::max(u_extreme, std::abs(prim.accel(t)));
      v_lo = std::min(v_lo, prim.speed(t));
      v_hi = std::max(v_hi, prim.speed(t));
    }
    CHECK(std::abs(prim.accel(0.0)) == doctest::Approx(u_extreme).epsilon(1e-12));
    // speed extremes sit at the endpoints: u = 2b(1 - t/t_f) never changes sign
    CHECK(v_hi <= std::max(v0, prim.exit_speed()) + 1e-12);
    CHECK(v_lo >= std::min(v0, prim.exit_speed()) - 1e-12);
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("vehicle params validation") {
  VehicleParams p = scaled_params();
  CHECK_NOTHROW(p.validate());
  p.u_min = 0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = scaled_params();
  p.v_min = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = scaled_params();
  p.v_min = 0.2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = scaled_params();
  p.t_h = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
