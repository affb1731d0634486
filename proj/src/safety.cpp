#include "rcoord/safety.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rcoord/errors.hpp"

namespace rcoord {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Coefficients of k3 (t-s)^3 + k2 (t-s)^2 + k1 (t-s) + k0 expanded in t,
/// lowest order first.
std::array<double, 4> shift_poly(double k3, double k2, double k1, double k0, double s) {
  return {
      -k3 * s * s * s + k2 * s * s - k1 * s + k0,
      3.0 * k3 * s * s - 2.0 * k2 * s + k1,
      -3.0 * k3 * s + k2,
      k3,
  };
}

double eval_poly(const std::array<double, 4>& p, double t) {
  return ((p[3] * t + p[2]) * t + p[1]) * t + p[0];
}

/// Real roots of q2 x^2 + q1 x + q0 = 0, degenerating gracefully to the
/// linear and constant cases. Returns the number of roots written.
int quadratic_roots(double q2, double q1, double q0, std::array<double, 2>& out) {
  if (q2 == 0.0) {
    if (q1 == 0.0) return 0;
    out[0] = -q0 / q1;
    return 1;
  }
  const double disc = q1 * q1 - 4.0 * q2 * q0;
  if (disc < 0.0) return 0;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (q1 + std::copysign(sq, q1));
  if (q == 0.0) {
    out[0] = 0.0;
    return 1;
  }
  out[0] = q / q2;
  out[1] = q0 / q;
  return 2;
}

}  // namespace

void PathGeometry::validate() const {
  if (path_id.empty()) throw std::invalid_argument("path_id must be non-empty");
  if (!(std::isfinite(zone_length) && zone_length > 0.0)) {
    throw std::invalid_argument("zone_length must be positive and finite");
  }
  double prev = 0.0;
  for (const auto& n : nodes) {
    if (!(std::isfinite(n.station) && n.station > 0.0 && n.station < zone_length)) {
      throw std::invalid_argument("node station must lie strictly inside (0, zone_length)");
    }
    if (!(n.station > prev)) {
      throw std::invalid_argument("node stations must be strictly increasing");
    }
    prev = n.station;
    for (const auto& m : nodes) {
      if (&m != &n && m.id == n.id) {
        throw std::invalid_argument("node ids must be unique per path");
      }
    }
  }
}

bool PathGeometry::has_node(int node) const noexcept {
  return std::any_of(nodes.begin(), nodes.end(),
                     [node](const PathNode& n) { return n.id == node; });
}

double PathGeometry::station_of(int node) const {
  for (const auto& n : nodes) {
    if (n.id == node) return n.station;
  }
  throw std::invalid_argument("node " + std::to_string(node) + " not on path " + path_id);
}

std::string to_string(const SafetyViolation& v) {
  std::string s = v.kind == ViolationKind::lateral ? "lateral" : "rear_end";
  s += " " + v.vehicle + " vs " + v.other;
  if (v.kind == ViolationKind::lateral) s += " at node " + std::to_string(v.node);
  s += " (t=" + std::to_string(v.time) + ", margin=" + std::to_string(v.margin) + ")";
  return s;
}

std::vector<int> conflict_set(const PathGeometry& a, const PathGeometry& b) {
  std::vector<int> shared;
  for (const auto& n : a.nodes) {
    if (b.has_node(n.id)) shared.push_back(n.id);
  }
  std::sort(shared.begin(), shared.end());
  return shared;
}

double node_crossing_time(const TrajectoryPlan& plan, const PathGeometry& geom,
                          int node) {
  return plan.entry_time + plan.primitive.inverse_position(geom.station_of(node));
}

std::vector<SafetyViolation> check_lateral(const TrajectoryPlan& plan,
                                           std::span<const TrajectoryPlan> committed,
                                           const GeometryMap& geoms, double t_h) {
  std::vector<SafetyViolation> out;
  const PathGeometry& gi = geoms.at(plan.path_id);
  for (const TrajectoryPlan& other : committed) {
    if (other.vehicle_id == plan.vehicle_id) continue;
    if (other.exit_time() <= plan.entry_time) continue;  // left the zone
    const PathGeometry& gj = geoms.at(other.path_id);
    for (int node : conflict_set(gi, gj)) {
      const double ti = node_crossing_time(plan, gi, node);
      const double tj = node_crossing_time(other, gj, node);
      const double gap = std::abs(ti - tj);
      if (gap < t_h) {
        out.push_back({ViolationKind::lateral, plan.vehicle_id, other.vehicle_id,
                       node, std::min(ti, tj), gap - t_h});
      }
    }
  }
  return out;
}

double rear_end_margin(const TrajectoryPlan& follower, const TrajectoryPlan& leader,
                       const VehicleParams& params, double* min_time) {
  if (follower.path_id != leader.path_id) {
    throw std::invalid_argument("rear-end constraint requires a common path");
  }
  if (leader.entry_time > follower.entry_time) {
    throw std::invalid_argument("leader must enter no later than follower");
  }

  const double w0 = follower.entry_time;
  const double w1 = std::min(follower.exit_time(), leader.exit_time());
  if (w1 <= w0) {
    if (min_time) *min_time = w0;
    return kInf;  // leader already exited; constraint vacuous
  }

  const Primitive& pl = leader.primitive;
  const Primitive& pf = follower.primitive;
  const auto lead = shift_poly(pl.a(), pl.b(), pl.c(), 0.0, leader.entry_time);
  const auto foll = shift_poly(pf.a(), pf.b(), pf.c(), 0.0, follower.entry_time);
  const auto vfol = shift_poly(0.0, 3.0 * pf.a(), 2.0 * pf.b(), pf.c(), follower.entry_time);

  std::array<double, 4> g;
  for (int k = 0; k < 4; ++k) g[k] = lead[k] - foll[k] - params.phi * vfol[k];
  g[0] -= params.length + params.gamma;

  double best = std::min(eval_poly(g, w0), eval_poly(g, w1));
  double at = eval_poly(g, w0) <= eval_poly(g, w1) ? w0 : w1;
  std::array<double, 2> roots{};
  const int n = quadratic_roots(3.0 * g[3], 2.0 * g[2], g[1], roots);
  for (int k = 0; k < n; ++k) {
    const double t = roots[k];
    if (t > w0 && t < w1) {
      const double val = eval_poly(g, t);
      if (val < best) {
        best = val;
        at = t;
      }
    }
  }
  if (min_time) *min_time = at;
  return best;
}

std::vector<SafetyViolation> check_plan(const TrajectoryPlan& plan,
                                        std::span<const TrajectoryPlan> committed,
                                        const GeometryMap& geoms,
                                        const VehicleParams& params) {
  std::vector<SafetyViolation> out = check_lateral(plan, committed, geoms, params.t_h);

  // "Leads" = the most recently committed, not-yet-exited plan on the same
  // path. Cross-path car-following after a merge is covered by the node
  // headway, not by this constraint.
  const TrajectoryPlan* leader = nullptr;
  for (auto it = committed.rbegin(); it != committed.rend(); ++it) {
    if (it->path_id == plan.path_id && it->vehicle_id != plan.vehicle_id &&
        it->exit_time() > plan.entry_time) {
      leader = &*it;
      break;
    }
  }
  if (leader) {
    double at = 0.0;
    const double margin = rear_end_margin(plan, *leader, params, &at);
    if (margin < 0.0) {
      out.push_back({ViolationKind::rear_end, plan.vehicle_id, leader->vehicle_id,
                     -1, at, margin});
    }
  }
  return out;
}

std::vector<SafetyViolation> audit_schedule(std::span<const TrajectoryPlan> plans,
                                            const GeometryMap& geoms,
                                            const VehicleParams& params) {
  std::vector<SafetyViolation> out;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const PathGeometry& gi = geoms.at(plans[i].path_id);
    for (std::size_t j = i + 1; j < plans.size(); ++j) {
      const PathGeometry& gj = geoms.at(plans[j].path_id);
      // Q(t) semantics: a pair is constrained only if both are ever inside
      // the zone together, mirroring check_lateral at registration time.
      const bool coexist =
          std::min(plans[i].exit_time(), plans[j].exit_time()) >
          std::max(plans[i].entry_time, plans[j].entry_time);
      if (!coexist) continue;
      for (int node : conflict_set(gi, gj)) {
        const double ti = node_crossing_time(plans[i], gi, node);
        const double tj = node_crossing_time(plans[j], gj, node);
        const double gap = std::abs(ti - tj);
        if (gap < params.t_h) {
          out.push_back({ViolationKind::lateral, plans[i].vehicle_id,
                         plans[j].vehicle_id, node, std::min(ti, tj),
                         gap - params.t_h});
        }
      }
      if (plans[i].path_id == plans[j].path_id) {
        const auto& [lead, foll] = plans[i].entry_time <= plans[j].entry_time
                                       ? std::tie(plans[i], plans[j])
                                       : std::tie(plans[j], plans[i]);
        double at = 0.0;
        const double margin = rear_end_margin(foll, lead, params, &at);
        if (margin < 0.0) {
          out.push_back({ViolationKind::rear_end, foll.vehicle_id, lead.vehicle_id,
                         -1, at, margin});
        }
      }
    }
  }
  return out;
}

}  // namespace rcoord
