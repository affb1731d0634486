#pragma once

// Independent test oracles: everything here checks the implementation from
// the outside (dense sampling, plain bisection, exhaustive grid search) and
// must stay free of the code paths it validates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "rcoord/primitive.hpp"
#include "rcoord/safety.hpp"
#include "rcoord/scheduler.hpp"

namespace oracles {

/// Samples u(t), v(t) of the cubic plan at `dt` resolution (endpoints
/// included) and reports whether both stay within bounds to `tol`.
inline bool plan_within_bounds(double zone_length, double entry_speed, double horizon,
                               const rcoord::VehicleParams& params, double dt = 1e-3,
                               double tol = 1e-6) {
  const rcoord::Primitive prim(zone_length, entry_speed, horizon);
  double t = 0.0;
  for (;;) {
    const double u = prim.accel(t);
    const double v = prim.speed(t);
    if (u < params.u_min - tol || u > params.u_max + tol) return false;
    if (v < params.v_min - tol || v > params.v_max + tol) return false;
    if (t >= horizon) return true;
    t = std::min(t + dt, horizon);
  }
}

/// Plain bisection on position(t) - station, tolerance 1e-12 s.
inline double bisect_inverse(const rcoord::Primitive& prim, double station) {
  double lo = 0.0;
  double hi = prim.horizon();
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (prim.position(mid) < station ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Minimum rear-end margin by dense sampling of the overlap window.
inline double dense_rear_end_min(const rcoord::TrajectoryPlan& follower,
                                 const rcoord::TrajectoryPlan& leader,
                                 const rcoord::VehicleParams& params,
                                 double dt = 1e-3) {
  const double w0 = follower.entry_time;
  const double w1 = std::min(follower.exit_time(), leader.exit_time());
  if (w1 <= w0) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  double t = w0;
  for (;;) {
    // clamp local times: w1 can exceed an entry+horizon sum by one ulp
    const double tl =
        std::clamp(t - leader.entry_time, 0.0, leader.primitive.horizon());
    const double tf =
        std::clamp(t - follower.entry_time, 0.0, follower.primitive.horizon());
    const double gap = leader.primitive.position(tl) -
                       follower.primitive.position(tf) - params.length -
                       params.gamma - params.phi * follower.primitive.speed(tf);
    best = std::min(best, gap);
    if (t >= w1) return best;
    t = std::min(t + dt, w1);
  }
}

/// Exhaustive minimization of the exit horizon: first admissible point of a
/// uniform grid over the window. Independent of the solver's scan/bisection.
inline std::optional<double> grid_min_horizon(
    const rcoord::Arrival& arrival, const rcoord::ExitTimeWindow& window,
    std::span<const rcoord::TrajectoryPlan> committed,
    const rcoord::GeometryMap& geoms, const rcoord::VehicleParams& params,
    double step = 1e-4) {
  const double S = geoms.at(arrival.path_id).zone_length;
  for (long k = 0;; ++k) {
    double t = window.t_lo + static_cast<double>(k) * step;
    const bool last = t >= window.t_hi;
    if (last) t = window.t_hi;
    const rcoord::TrajectoryPlan candidate{arrival.vehicle_id, arrival.path_id,
                                           arrival.entry_time,
                                           rcoord::Primitive(S, arrival.entry_speed, t)};
    if (rcoord::check_plan(candidate, committed, geoms, params).empty()) return t;
    if (last) return std::nullopt;
  }
}

}  // namespace oracles
