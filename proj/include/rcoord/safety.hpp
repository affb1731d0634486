#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rcoord/primitive.hpp"

namespace rcoord {

/// A lateral node pinned to a station along one path. The same node id may
/// sit at a different station on another path.
struct PathNode {
  int id = 0;
  double station = 0.0;

  bool operator==(const PathNode&) const = default;
};

/// Control-zone length of one path plus its ordered lateral nodes.
struct PathGeometry {
  std::string path_id;
  double zone_length = 0.0;
  std::vector<PathNode> nodes;  // stations strictly increasing, 0 < l < S

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;

  /// Station of `node` on this path; throws std::invalid_argument if absent.
  double station_of(int node) const;
  bool has_node(int node) const noexcept;

  bool operator==(const PathGeometry&) const = default;
};

using GeometryMap = std::map<std::string, PathGeometry>;

/// A committed plan: one vehicle's cubic bound to a path at an absolute
/// entry time.
struct TrajectoryPlan {
  std::string vehicle_id;
  std::string path_id;
  double entry_time = 0.0;
  Primitive primitive;

  double exit_time() const noexcept { return entry_time + primitive.horizon(); }

  bool operator==(const TrajectoryPlan&) const = default;
};

enum class ViolationKind { rear_end, lateral };

/// One failed safety predicate. margin is negative by construction:
/// seconds short of t_h for lateral, meters short of the safe gap for
/// rear_end (at absolute time `time`).
struct SafetyViolation {
  ViolationKind kind = ViolationKind::lateral;
  std::string vehicle;
  std::string other;
  int node = -1;       // lateral only
  double time = 0.0;   // lateral: earlier crossing; rear_end: argmin of the gap
  double margin = 0.0;
};

std::string to_string(const SafetyViolation& v);

/// Node ids present on both paths, ascending.
std::vector<int> conflict_set(const PathGeometry& a, const PathGeometry& b);

/// Absolute time at which the plan crosses `node` on its path.
double node_crossing_time(const TrajectoryPlan& plan, const PathGeometry& geom,
                          int node);

/// Lateral time-headway check of one plan against every committed plan that
/// is still inside the zone at plan.entry_time. Reports a violation for each
/// shared node whose crossing times differ by less than t_h; equality counts
/// as satisfied.
std::vector<SafetyViolation> check_lateral(const TrajectoryPlan& plan,
                                           std::span<const TrajectoryPlan> committed,
                                           const GeometryMap& geoms, double t_h);

/// Minimum over the overlap window of
///   g(t) = p_leader(t) - p_follower(t) - length - gamma - phi * v_follower(t)
/// with both positions in the common path frame. g is cubic, so the minimum
/// is taken over window endpoints and the real roots of g' inside it.
/// Returns +infinity when the leader exits before the follower enters.
/// Different paths or inverted entry order throw std::invalid_argument.
/// When min_time is non-null it receives the argmin.
double rear_end_margin(const TrajectoryPlan& follower, const TrajectoryPlan& leader,
                       const VehicleParams& params, double* min_time = nullptr);

/// Full admissibility check of a candidate plan against a database snapshot:
/// lateral headway against every active plan plus the rear-end constraint
/// against the most recently committed, not-yet-exited plan on the same path.
/// Empty result means admissible.
std::vector<SafetyViolation> check_plan(const TrajectoryPlan& plan,
                                        std::span<const TrajectoryPlan> committed,
                                        const GeometryMap& geoms,
                                        const VehicleParams& params);

/// Exhaustive pairwise audit of a committed schedule: lateral headway on
/// every pair sharing a node, rear-end margin on every same-path ordered
/// pair. Used for post-hoc verification and reporting.
std::vector<SafetyViolation> audit_schedule(std::span<const TrajectoryPlan> plans,
                                            const GeometryMap& geoms,
                                            const VehicleParams& params);

}  // namespace rcoord
