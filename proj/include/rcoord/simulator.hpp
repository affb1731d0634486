#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rcoord/scheduler.hpp"

namespace rcoord {

/// Everything needed to execute one deterministic run: geometry, limits,
/// arrival stream, sampling and (optional) speed-noise emulation.
struct ScenarioSpec {
  GeometryMap geoms;
  VehicleParams params;
  std::vector<Arrival> arrivals;  // sorted by entry_time
  double sample_rate = 20.0;      // Hz
  double duration = 0.0;          // s; 0 = run until the last vehicle exits
  std::uint64_t seed = 0;
  double disturbance_std = 0.0;   // speed-tracking noise std (m/s)
  SchedulerConfig sched;

  /// Throws std::invalid_argument / ScenarioError-style diagnostics via the
  /// member validators on any broken invariant.
  void validate() const;

  bool operator==(const ScenarioSpec&) const = default;
};

struct Sample {
  double t = 0.0;  // absolute time (s)
  double p = 0.0;  // position along the path (m)
  double v = 0.0;  // speed (m/s)
  double u = 0.0;  // commanded control (m/s^2)
};

/// Sampled state history of one vehicle inside the control zone.
struct VehicleTrace {
  std::string vehicle_id;
  std::string path_id;
  double entry_time = 0.0;
  double scheduled_exit = 0.0;
  double achieved_exit = 0.0;  // == scheduled_exit at zero disturbance
  std::vector<Sample> samples;  // spaced at 1/sample_rate from entry_time
};

struct CrossingRecord {
  std::string vehicle_id;
  int node = 0;
  double time = 0.0;  // detected from the sampled trajectory
};

struct SimResult {
  ScenarioSpec scenario;  // the validated spec this result came from
  std::vector<ScheduleOutcome> schedule;
  std::vector<VehicleTrace> traces;
  std::vector<CrossingRecord> crossings;
  std::vector<SafetyViolation> violations;
};

struct Metrics {
  double v_min_overall = 0.0;
  double v_avg_overall = 0.0;
  std::map<std::string, double> travel_times;      // vehicle -> s
  std::map<int, double> min_node_headway;          // node -> s (>= 2 crossings)
  std::size_t violation_count = 0;
  double exit_time_rmse_pct = 0.0;  // scheduled-vs-achieved, normalized
};

/// Executes a scenario: feeds arrivals through the coordinator in order,
/// evaluates each committed plan analytically at the sample instants
/// (no integration error at zero disturbance), detects node crossings from
/// the samples, and audits the schedule with the exact safety checkers.
/// With disturbance_std > 0, speed is perturbed by seeded noise and position
/// integrated at the sample step; runs are reproducible for a fixed seed.
/// Scheduler infeasibility propagates as InfeasibleError naming the arrival.
SimResult run(const ScenarioSpec& spec);

/// Aggregates a result into the summary metrics. Throws
/// std::invalid_argument for a result with no traces.
Metrics compute_metrics(const SimResult& result);

}  // namespace rcoord
