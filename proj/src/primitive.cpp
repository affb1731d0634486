#include "rcoord/primitive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rcoord/errors.hpp"

namespace rcoord {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

/// Positive root of u t^2 + 3 v0 t - 3 S = 0 in the cancellation-free form
/// 6 S / (3 v0 + sqrt(D)). For u < 0 this is the smaller of the two positive
/// roots; the caller checks D >= 0 first.
double control_bound_root(double zone_length, double entry_speed, double u) {
  const double disc = 9.0 * entry_speed * entry_speed + 12.0 * zone_length * u;
  return 6.0 * zone_length / (3.0 * entry_speed + std::sqrt(disc));
}

}  // namespace

void VehicleParams::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
  for (double x : {u_min, u_max, v_min, v_max, gamma, phi, length, t_h}) {
    if (!std::isfinite(x)) fail("vehicle params must be finite");
  }
  if (!(u_min < 0.0)) fail("u_min must be negative");
  if (!(u_max > 0.0)) fail("u_max must be positive");
  if (!(v_min > 0.0)) fail("v_min must be positive");
  if (!(v_min <= v_max)) fail("v_min must not exceed v_max");
  if (gamma < 0.0) fail("gamma must be non-negative");
  if (phi < 0.0) fail("phi must be non-negative");
  if (!(length > 0.0)) fail("vehicle length must be positive");
  if (!(t_h > 0.0)) fail("t_h must be positive");
}

Primitive::Primitive(double zone_length, double entry_speed, double horizon)
    : entry_speed_(entry_speed), horizon_(horizon), zone_length_(zone_length) {
  if (!positive_finite(zone_length)) {
    throw std::invalid_argument("zone_length must be positive and finite");
  }
  if (!positive_finite(entry_speed)) {
    throw std::invalid_argument("entry_speed must be positive and finite");
  }
  if (!positive_finite(horizon)) {
    throw std::invalid_argument("horizon must be positive and finite");
  }
  b_ = 3.0 * (zone_length - entry_speed * horizon) / (2.0 * horizon * horizon);
  a_ = -b_ / (3.0 * horizon);
}

double Primitive::position(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    throw std::domain_error("time outside [0, horizon]");
  }
  return ((a_ * t + b_) * t + entry_speed_) * t;
}

double Primitive::speed(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    throw std::domain_error("time outside [0, horizon]");
  }
  return (3.0 * a_ * t + 2.0 * b_) * t + entry_speed_;
}

double Primitive::accel(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    throw std::domain_error("time outside [0, horizon]");
  }
  return 6.0 * a_ * t + 2.0 * b_;
}

double Primitive::inverse_position(double station) const {
  if (!(station >= 0.0 && station <= zone_length_)) {
    throw std::domain_error("station outside [0, zone_length]");
  }
  // u has constant sign on [0, horizon), so speed is monotone and its
  // extrema sit at the endpoints. Positive endpoint speeds imply strict
  // monotonicity of position, which the bracketing below relies on.
  if (!(entry_speed_ > 0.0) || !(exit_speed() > 0.0)) {
    throw ContractViolationError("plan speed crosses zero; position not invertible");
  }
  if (station == 0.0) return 0.0;
  if (station == zone_length_) return horizon_;

  auto value = [&](double t) { return ((a_ * t + b_) * t + entry_speed_) * t - station; };
  auto slope = [&](double t) { return (3.0 * a_ * t + 2.0 * b_) * t + entry_speed_; };

  double lo = 0.0;
  double hi = horizon_;
  double t = std::min(horizon_, station / entry_speed_);  // exact for b == 0
  for (int it = 0; it < 200; ++it) {
    const double f = value(t);
    if (f == 0.0) return t;
    (f > 0.0 ? hi : lo) = t;
    if (hi - lo <= 1e-12) break;
    const double df = slope(t);
    double next = t - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return std::clamp(t, lo, hi);
}

std::string to_string(Binding b) {
  switch (b) {
    case Binding::control_bound: return "control_bound";
    case Binding::speed_bound: return "speed_bound";
    case Binding::no_real_root: return "no_real_root";
  }
  return "unknown";
}

ExitTimeWindow exit_time_window(double zone_length, double entry_speed,
                                const VehicleParams& params) {
  params.validate();
  if (!positive_finite(zone_length)) {
    throw std::invalid_argument("zone_length must be positive and finite");
  }
  if (!std::isfinite(entry_speed)) {
    throw std::invalid_argument("entry_speed must be finite");
  }
  if (entry_speed < params.v_min || entry_speed > params.v_max) {
    throw InfeasibleEntryError("entry speed outside [v_min, v_max]");
  }

  ExitTimeWindow w;
  const double t_umax = control_bound_root(zone_length, entry_speed, params.u_max);
  const double t_vmax = 3.0 * zone_length / (entry_speed + 2.0 * params.v_max);
  if (t_umax >= t_vmax) {
    w.t_lo = t_umax;
    w.binding_lo = Binding::control_bound;
  } else {
    w.t_lo = t_vmax;
    w.binding_lo = Binding::speed_bound;
  }

  const double t_vmin = 3.0 * zone_length / (entry_speed + 2.0 * params.v_min);
  const double disc = 9.0 * entry_speed * entry_speed + 12.0 * zone_length * params.u_min;
  if (disc < 0.0) {
    w.t_hi = t_vmin;
    w.binding_hi = Binding::no_real_root;
  } else {
    const double t_umin = control_bound_root(zone_length, entry_speed, params.u_min);
    if (t_umin <= t_vmin) {
      w.t_hi = t_umin;
      w.binding_hi = Binding::control_bound;
    } else {
      w.t_hi = t_vmin;
      w.binding_hi = Binding::speed_bound;
    }
  }
  return w;
}

double constant_speed_time(double zone_length, double entry_speed) {
  if (!positive_finite(zone_length)) {
    throw std::invalid_argument("zone_length must be positive and finite");
  }
  if (!positive_finite(entry_speed)) {
    throw std::invalid_argument("entry_speed must be positive and finite");
  }
  return zone_length / entry_speed;
}

}  // namespace rcoord
