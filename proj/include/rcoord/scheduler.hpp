#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcoord/safety.hpp"

namespace rcoord {

/// Boundary data of one vehicle reaching the control zone.
struct Arrival {
  std::string vehicle_id;
  std::string path_id;
  double entry_time = 0.0;
  double entry_speed = 0.0;

  bool operator==(const Arrival&) const = default;
};

/// What to do when no horizon in the window clears the safety constraints.
/// `error` aborts the schedule; `delay` holds the vehicle at the zone
/// boundary, retrying with the entry time pushed back in delay_step
/// increments until a safe plan exists.
enum class InfeasibilityPolicy { error, delay };

struct SchedulerConfig {
  double grid_step = 0.01;   // horizon scan resolution (s)
  double refine_tol = 1e-4;  // bisection width at which refinement stops (s)
  InfeasibilityPolicy policy = InfeasibilityPolicy::error;
  double delay_step = 0.1;   // entry-time increment under the delay policy (s)

  void validate() const;

  bool operator==(const SchedulerConfig&) const = default;
};

/// No admissible horizon in the window. Carries the constraints blocking the
/// final candidate so callers can report why.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string vehicle_id, std::vector<SafetyViolation> blocking);

  const std::string& vehicle_id() const noexcept { return vehicle_id_; }
  const std::vector<SafetyViolation>& blocking() const noexcept { return blocking_; }

 private:
  std::string vehicle_id_;
  std::vector<SafetyViolation> blocking_;
};

struct ScheduleOutcome {
  TrajectoryPlan plan;
  ExitTimeWindow window;
  double chosen_horizon = 0.0;
  int search_evaluations = 0;  // admissibility checks spent

  bool operator==(const ScheduleOutcome&) const = default;
};

/// Minimum admissible horizon in [window.t_lo, window.t_hi] for an arrival
/// checked against a database snapshot. Scans the window at grid_step from
/// t_lo (t_hi always included); on the first admissible grid point, bisects
/// against the preceding inadmissible one down to refine_tol and returns the
/// admissible end. t_lo itself, when admissible, is returned exactly.
/// The feasible set may be a union of intervals; the scan handles that by
/// construction. Throws InfeasibleError when nothing in the window passes.
double solve_exit_time(const Arrival& arrival, const ExitTimeWindow& window,
                       std::span<const TrajectoryPlan> committed,
                       const GeometryMap& geoms, const VehicleParams& params,
                       const SchedulerConfig& config, int& evaluations);

/// Time-ordered record of committed plans inside the control zone; the
/// coordinator side of the entry protocol. Single writer: arrivals are
/// processed strictly sequentially in entry-time order. Snapshots are plain
/// copies and may be queried concurrently.
class CoordinatorDb {
 public:
  CoordinatorDb(GeometryMap geoms, VehicleParams params, SchedulerConfig config = {});

  /// Runs the entry protocol for one arrival: derive the feasible window,
  /// solve for the minimum safe horizon against the plans active at the
  /// arrival instant, commit the plan. Later arrivals never perturb
  /// committed plans. Throws ProtocolError on out-of-order arrivals or a
  /// duplicate in-flight vehicle, InfeasibleEntryError for an entry speed
  /// outside limits, InfeasibleError per the configured policy.
  ScheduleOutcome register_arrival(const Arrival& arrival);

  /// Moves plans with exit_time <= now to the archive. Returns how many.
  std::size_t release_exited(double now);

  /// Plans still inside the zone at time t (exit_time > t), commit order.
  std::vector<TrajectoryPlan> snapshot(double t) const;

  const std::vector<TrajectoryPlan>& active() const noexcept { return active_; }
  const std::vector<TrajectoryPlan>& archived() const noexcept { return archive_; }

  const GeometryMap& geometries() const noexcept { return geoms_; }
  const VehicleParams& params() const noexcept { return params_; }
  const SchedulerConfig& config() const noexcept { return config_; }

 private:
  GeometryMap geoms_;
  VehicleParams params_;
  SchedulerConfig config_;
  std::vector<TrajectoryPlan> active_;
  std::vector<TrajectoryPlan> archive_;
  double last_arrival_time_;
};

}  // namespace rcoord
