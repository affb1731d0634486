#pragma once

#include <string>

namespace rcoord {

/// Speed/control limits and safety parameters shared by all vehicles.
/// u_min < 0 < u_max, 0 < v_min <= v_max; gamma/phi parameterize the
/// speed-dependent rear-end gap, length is bumper-to-bumper vehicle length,
/// t_h the node time headway.
struct VehicleParams {
  double u_min = -0.45;
  double u_max = 0.45;
  double v_min = 0.05;
  double v_max = 0.15;
  double gamma = 0.1;
  double phi = 1.0;
  double length = 0.2;
  double t_h = 1.0;

  /// Throws std::invalid_argument on any violated bound or non-finite value.
  void validate() const;

  bool operator==(const VehicleParams&) const = default;
};

/// Energy-optimal cubic motion primitive over one control zone:
///   p(t) = a t^3 + b t^2 + c t,   t in [0, horizon]
/// with p(0) = 0, v(0) = entry_speed, p(horizon) = zone_length and
/// u(horizon) = 0 by construction. Immutable; all accessors are pure.
class Primitive {
 public:
  /// Builds the unique cubic satisfying the boundary conditions:
  ///   b = 3 (S - v0 T) / (2 T^2),  a = -b / (3 T),  c = v0,  d = 0.
  /// Throws std::invalid_argument for non-positive (or non-finite) inputs.
  Primitive(double zone_length, double entry_speed, double horizon);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return entry_speed_; }
  double d() const noexcept { return 0.0; }

  double horizon() const noexcept { return horizon_; }
  double zone_length() const noexcept { return zone_length_; }
  double entry_speed() const noexcept { return entry_speed_; }
  /// v(horizon) = b * horizon + v0 (closed form; v is monotone on the plan).
  double exit_speed() const noexcept { return b_ * horizon_ + entry_speed_; }

  /// Position/speed/control at local time t. Throw std::domain_error for
  /// t outside [0, horizon].
  double position(double t) const;
  double speed(double t) const;
  double accel(double t) const;

  /// Unique t in [0, horizon] with position(t) == station, found by bracketed
  /// bisection with Newton refinement to 1e-12 s. The plan must be strictly
  /// increasing (speed > 0 at both ends, hence everywhere); otherwise throws
  /// ContractViolationError. Stations outside [0, zone_length] throw
  /// std::domain_error.
  double inverse_position(double station) const;

  bool operator==(const Primitive&) const = default;

 private:
  double a_;
  double b_;
  double entry_speed_;
  double horizon_;
  double zone_length_;
};

/// Which constraint pins a window edge. no_real_root marks the upper edge
/// when the deceleration quadratic has no real root and the speed floor is
/// the only binding limit.
enum class Binding { control_bound, speed_bound, no_real_root };

std::string to_string(Binding b);

/// Closed-form feasible horizon interval: every t_f in [t_lo, t_hi] yields a
/// primitive with u(t) in [u_min, u_max] and v(t) in [v_min, v_max] on [0, t_f].
struct ExitTimeWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
  Binding binding_lo = Binding::control_bound;
  Binding binding_hi = Binding::control_bound;

  bool contains(double t_f) const noexcept { return t_f >= t_lo && t_f <= t_hi; }
};

/// Feasible exit-time window for a control zone of length S entered at v0:
///   t_lo = max{ t_umax, t_vmax }
///   t_hi = t_vmin            if 9 v0^2 + 12 S u_min < 0
///        = min{ t_umin, t_vmin }  otherwise (t_umin = smaller positive root
///          of u_min t^2 + 3 v0 t - 3 S = 0)
/// Throws InfeasibleEntryError when v0 is outside [v_min, v_max].
ExitTimeWindow exit_time_window(double zone_length, double entry_speed,
                                const VehicleParams& params);

/// Horizon of the zero-control plan, S / v0. Always inside the window when
/// v_min <= v0 <= v_max.
double constant_speed_time(double zone_length, double entry_speed);

}  // namespace rcoord
