#include "rcoord/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "rcoord/errors.hpp"

namespace rcoord {

namespace {

std::string describe(const std::string& vehicle,
                     const std::vector<SafetyViolation>& blocking) {
  std::string msg = "no admissible exit time for " + vehicle;
  if (!blocking.empty()) {
    msg += "; blocked at window end by:";
    for (const auto& v : blocking) msg += "\n  " + to_string(v);
  }
  return msg;
}

}  // namespace

void SchedulerConfig::validate() const {
  if (!(std::isfinite(grid_step) && grid_step > 0.0)) {
    throw std::invalid_argument("grid_step must be positive");
  }
  if (!(std::isfinite(refine_tol) && refine_tol > 0.0)) {
    throw std::invalid_argument("refine_tol must be positive");
  }
  if (!(std::isfinite(delay_step) && delay_step > 0.0)) {
    throw std::invalid_argument("delay_step must be positive");
  }
}

InfeasibleError::InfeasibleError(std::string vehicle_id,
                                 std::vector<SafetyViolation> blocking)
    : std::runtime_error(describe(vehicle_id, blocking)),
      vehicle_id_(std::move(vehicle_id)),
      blocking_(std::move(blocking)) {}

double solve_exit_time(const Arrival& arrival, const ExitTimeWindow& window,
                       std::span<const TrajectoryPlan> committed,
                       const GeometryMap& geoms, const VehicleParams& params,
                       const SchedulerConfig& config, int& evaluations) {
  config.validate();
  const double zone_length = geoms.at(arrival.path_id).zone_length;
  evaluations = 0;

  std::vector<SafetyViolation> last_violations;
  auto admissible = [&](double horizon) {
    ++evaluations;
    TrajectoryPlan candidate{arrival.vehicle_id, arrival.path_id, arrival.entry_time,
                             Primitive(zone_length, arrival.entry_speed, horizon)};
    last_violations = check_plan(candidate, committed, geoms, params);
    return last_violations.empty();
  };

  if (admissible(window.t_lo)) return window.t_lo;

  double prev = window.t_lo;  // inadmissible
  for (long k = 1;; ++k) {
    double t = window.t_lo + static_cast<double>(k) * config.grid_step;
    const bool last = t >= window.t_hi;
    if (last) t = window.t_hi;
    if (admissible(t)) {
      double lo = prev;
      double hi = t;
      while (hi - lo > config.refine_tol) {
        const double mid = 0.5 * (lo + hi);
        (admissible(mid) ? hi : lo) = mid;
      }
      return hi;
    }
    if (last) {
      throw InfeasibleError(arrival.vehicle_id, std::move(last_violations));
    }
    prev = t;
  }
}

CoordinatorDb::CoordinatorDb(GeometryMap geoms, VehicleParams params,
                             SchedulerConfig config)
    : geoms_(std::move(geoms)),
      params_(params),
      config_(config),
      last_arrival_time_(-std::numeric_limits<double>::infinity()) {
  params_.validate();
  config_.validate();
  for (const auto& [id, geom] : geoms_) geom.validate();
}

ScheduleOutcome CoordinatorDb::register_arrival(const Arrival& arrival) {
  if (arrival.entry_time < last_arrival_time_) {
    throw ProtocolError("arrival of " + arrival.vehicle_id +
                        " is out of order (entry time regressed)");
  }
  const auto geom_it = geoms_.find(arrival.path_id);
  if (geom_it == geoms_.end()) {
    throw std::invalid_argument("unknown path " + arrival.path_id);
  }
  if (!(std::isfinite(arrival.entry_time) && arrival.entry_time >= 0.0)) {
    throw std::invalid_argument("entry time must be non-negative");
  }
  for (const auto& p : active_) {
    if (p.vehicle_id == arrival.vehicle_id && p.exit_time() > arrival.entry_time) {
      throw ProtocolError("vehicle " + arrival.vehicle_id + " already in flight");
    }
  }
  last_arrival_time_ = arrival.entry_time;

  const double zone_length = geom_it->second.zone_length;
  const ExitTimeWindow window =
      exit_time_window(zone_length, arrival.entry_speed, params_);

  double entry = arrival.entry_time;
  int total_evaluations = 0;
  for (;;) {
    const std::vector<TrajectoryPlan> active_now = snapshot(entry);
    Arrival attempt = arrival;
    attempt.entry_time = entry;
    try {
      int evaluations = 0;
      const double horizon = solve_exit_time(attempt, window, active_now, geoms_,
                                             params_, config_, evaluations);
      total_evaluations += evaluations;
      TrajectoryPlan plan{arrival.vehicle_id, arrival.path_id, entry,
                          Primitive(zone_length, arrival.entry_speed, horizon)};
      active_.push_back(plan);
      return ScheduleOutcome{std::move(plan), window, horizon, total_evaluations};
    } catch (const InfeasibleError&) {
      if (config_.policy != InfeasibilityPolicy::delay) throw;
      entry += config_.delay_step;  // hold at the boundary and retry
    }
  }
}

std::size_t CoordinatorDb::release_exited(double now) {
  const auto split = std::stable_partition(
      active_.begin(), active_.end(),
      [now](const TrajectoryPlan& p) { return p.exit_time() > now; });
  const std::size_t n = static_cast<std::size_t>(active_.end() - split);
  archive_.insert(archive_.end(), std::make_move_iterator(split),
                  std::make_move_iterator(active_.end()));
  active_.erase(split, active_.end());
  return n;
}

std::vector<TrajectoryPlan> CoordinatorDb::snapshot(double t) const {
  std::vector<TrajectoryPlan> out;
  out.reserve(active_.size());
  for (const auto& p : active_) {
    if (p.exit_time() > t) out.push_back(p);
  }
  return out;
}

}  // namespace rcoord
