#include "rcoord/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "rcoord/errors.hpp"

namespace rcoord {

namespace {

/// Plan speed with the terminal value held beyond the horizon; the noisy
/// integrator may need a few extra steps to actually reach the zone end.
double command_speed(const Primitive& prim, double local_t) {
  return prim.speed(std::min(local_t, prim.horizon()));
}

double command_accel(const Primitive& prim, double local_t) {
  return local_t >= prim.horizon() ? 0.0 : prim.accel(local_t);
}

VehicleTrace trace_exact(const ScheduleOutcome& outcome, double dt, double t_cap) {
  const TrajectoryPlan& plan = outcome.plan;
  VehicleTrace trace{plan.vehicle_id, plan.path_id, plan.entry_time,
                     plan.exit_time(), plan.exit_time(), {}};
  const long n = static_cast<long>(std::floor(plan.primitive.horizon() / dt + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double local = std::min(static_cast<double>(k) * dt, plan.primitive.horizon());
    const double t = plan.entry_time + local;
    if (t > t_cap) break;
    trace.samples.push_back({t, plan.primitive.position(local),
                             plan.primitive.speed(local), plan.primitive.accel(local)});
  }
  return trace;
}

VehicleTrace trace_noisy(const ScheduleOutcome& outcome, double dt, double t_cap,
                         double noise_std, std::mt19937_64& rng) {
  const TrajectoryPlan& plan = outcome.plan;
  const Primitive& prim = plan.primitive;
  VehicleTrace trace{plan.vehicle_id, plan.path_id, plan.entry_time,
                     plan.exit_time(), plan.exit_time(), {}};
  std::normal_distribution<double> noise(0.0, noise_std);

  const double S = prim.zone_length();
  const long max_steps =
      static_cast<long>(std::ceil(10.0 * prim.horizon() / dt)) + 1;
  double p = 0.0;
  trace.achieved_exit = std::numeric_limits<double>::quiet_NaN();
  for (long k = 0; k <= max_steps; ++k) {
    const double local = static_cast<double>(k) * dt;
    const double t = plan.entry_time + local;
    const double v = command_speed(prim, local) + noise(rng);
    if (t <= t_cap) {
      trace.samples.push_back({t, p, v, command_accel(prim, local)});
    }
    const double p_next = p + v * dt;
    if (p < S && p_next >= S) {
      trace.achieved_exit = t + (S - p) / v;
      break;
    }
    p = p_next;
    if (t > t_cap) break;
  }
  if (std::isnan(trace.achieved_exit)) {
    // Never reached the zone end inside the cap; report the last instant.
    trace.achieved_exit = trace.samples.empty() ? plan.entry_time
                                                : trace.samples.back().t;
  }
  return trace;
}

/// Crossing detection by linear interpolation between consecutive samples,
/// with a virtual final point at (achieved_exit, zone_length) so stations
/// close to the zone end are still bracketed.
void detect_crossings(const VehicleTrace& trace, const PathGeometry& geom,
                      double zone_length, std::vector<CrossingRecord>& out) {
  for (const PathNode& node : geom.nodes) {
    const double l = node.station;
    double prev_t = 0.0, prev_p = -1.0;
    bool found = false;
    auto consider = [&](double t, double p) {
      if (found) return;
      if (prev_p >= 0.0 && prev_p < l && p >= l) {
        const double w = (l - prev_p) / (p - prev_p);
        out.push_back({trace.vehicle_id, node.id, prev_t + w * (t - prev_t)});
        found = true;
      }
      prev_t = t;
      prev_p = p;
    };
    for (const Sample& s : trace.samples) consider(s.t, s.p);
    consider(trace.achieved_exit, zone_length);
  }
}

/// Sampled-trajectory audit used under disturbance: rear-end gaps at the
/// follower's sample instants (leader position interpolated), lateral
/// headway on the detected crossing times.
void audit_samples(const SimResult& result, const VehicleParams& params,
                   std::vector<SafetyViolation>& out) {
  auto position_at = [](const VehicleTrace& tr, double t, double* v_out) -> bool {
    if (tr.samples.size() < 2) return false;
    if (t < tr.samples.front().t || t > tr.samples.back().t) return false;
    const auto it = std::lower_bound(
        tr.samples.begin(), tr.samples.end(), t,
        [](const Sample& s, double x) { return s.t < x; });
    if (it == tr.samples.begin()) {
      *v_out = it->p;
      return true;
    }
    const Sample& b = *it;
    const Sample& a = *(it - 1);
    const double w = b.t == a.t ? 0.0 : (t - a.t) / (b.t - a.t);
    *v_out = a.p + w * (b.p - a.p);
    return true;
  };

  for (std::size_t i = 0; i < result.traces.size(); ++i) {
    for (std::size_t j = 0; j < result.traces.size(); ++j) {
      if (i == j) continue;
      const VehicleTrace& follower = result.traces[i];
      const VehicleTrace& leader = result.traces[j];
      if (follower.path_id != leader.path_id) continue;
      if (leader.entry_time > follower.entry_time) continue;
      double worst = std::numeric_limits<double>::infinity();
      double at = 0.0;
      for (const Sample& s : follower.samples) {
        double lp = 0.0;
        if (!position_at(leader, s.t, &lp)) continue;
        const double margin =
            lp - s.p - params.length - params.gamma - params.phi * s.v;
        if (margin < worst) {
          worst = margin;
          at = s.t;
        }
      }
      if (worst < 0.0) {
        out.push_back({ViolationKind::rear_end, follower.vehicle_id,
                       leader.vehicle_id, -1, at, worst});
      }
    }
  }

  for (std::size_t i = 0; i < result.crossings.size(); ++i) {
    for (std::size_t j = i + 1; j < result.crossings.size(); ++j) {
      const CrossingRecord& a = result.crossings[i];
      const CrossingRecord& b = result.crossings[j];
      if (a.node != b.node || a.vehicle_id == b.vehicle_id) continue;
      const double gap = std::abs(a.time - b.time);
      if (gap < params.t_h) {
        out.push_back({ViolationKind::lateral, a.vehicle_id, b.vehicle_id, a.node,
                       std::min(a.time, b.time), gap - params.t_h});
      }
    }
  }
}

}  // namespace

void ScenarioSpec::validate() const {
  params.validate();
  sched.validate();
  if (geoms.empty()) throw std::invalid_argument("scenario needs at least one path");
  for (const auto& [id, geom] : geoms) {
    geom.validate();
    if (id != geom.path_id) throw std::invalid_argument("geometry key/path_id mismatch");
  }
  if (!(std::isfinite(sample_rate) && sample_rate > 0.0)) {
    throw std::invalid_argument("sample_rate must be positive");
  }
  if (!(std::isfinite(duration) && duration >= 0.0)) {
    throw std::invalid_argument("duration must be non-negative");
  }
  if (!(std::isfinite(disturbance_std) && disturbance_std >= 0.0)) {
    throw std::invalid_argument("disturbance_std must be non-negative");
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& a : arrivals) {
    if (!geoms.count(a.path_id)) {
      throw std::invalid_argument("arrival " + a.vehicle_id + " references unknown path " +
                                  a.path_id);
    }
    if (a.entry_time < prev) {
      throw std::invalid_argument("arrivals must be sorted by entry time");
    }
    prev = a.entry_time;
  }
}

SimResult run(const ScenarioSpec& spec) {
  spec.validate();

  CoordinatorDb db(spec.geoms, spec.params, spec.sched);
  SimResult result;
  result.scenario = spec;
  for (const Arrival& arrival : spec.arrivals) {
    db.release_exited(arrival.entry_time);
    result.schedule.push_back(db.register_arrival(arrival));
  }

  double last_exit = 0.0;
  for (const auto& o : result.schedule) {
    last_exit = std::max(last_exit, o.plan.exit_time());
  }
  const double t_cap = spec.duration > 0.0 ? spec.duration : last_exit;
  const double dt = 1.0 / spec.sample_rate;

  std::mt19937_64 rng(spec.seed);
  for (const ScheduleOutcome& outcome : result.schedule) {
    VehicleTrace trace =
        spec.disturbance_std > 0.0
            ? trace_noisy(outcome, dt, t_cap, spec.disturbance_std, rng)
            : trace_exact(outcome, dt, t_cap);
    detect_crossings(trace, spec.geoms.at(trace.path_id),
                     outcome.plan.primitive.zone_length(), result.crossings);
    result.traces.push_back(std::move(trace));
  }

  // Exact audit of the committed schedule. The sampled audit only adds
  // information when the executed trajectory deviates from the plan.
  std::vector<TrajectoryPlan> plans;
  plans.reserve(result.schedule.size());
  for (const auto& o : result.schedule) plans.push_back(o.plan);
  result.violations = audit_schedule(plans, spec.geoms, spec.params);
  if (spec.disturbance_std > 0.0) {
    audit_samples(result, spec.params, result.violations);
  }
  return result;
}

Metrics compute_metrics(const SimResult& result) {
  if (result.traces.empty()) {
    throw std::invalid_argument("cannot compute metrics of an empty result");
  }

  Metrics m;
  m.v_min_overall = std::numeric_limits<double>::infinity();
  double v_avg_sum = 0.0;
  double rmse_sum = 0.0;
  for (const VehicleTrace& trace : result.traces) {
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < trace.samples.size(); ++k) {
      const Sample& s0 = trace.samples[k];
      const Sample& s1 = trace.samples[k + 1];
      integral += 0.5 * (s0.v + s1.v) * (s1.t - s0.t);
    }
    double v_avg = 0.0;
    if (trace.samples.size() >= 2) {
      v_avg = integral / (trace.samples.back().t - trace.samples.front().t);
    } else if (!trace.samples.empty()) {
      v_avg = trace.samples.front().v;
    }
    v_avg_sum += v_avg;
    for (const Sample& s : trace.samples) {
      m.v_min_overall = std::min(m.v_min_overall, s.v);
    }
    const double travel = trace.achieved_exit - trace.entry_time;
    m.travel_times[trace.vehicle_id] = travel;
    const double scheduled_travel = trace.scheduled_exit - trace.entry_time;
    const double err = (trace.achieved_exit - trace.scheduled_exit) / scheduled_travel;
    rmse_sum += err * err;
  }
  if (!std::isfinite(m.v_min_overall)) m.v_min_overall = 0.0;  // no samples at all
  m.v_avg_overall = v_avg_sum / static_cast<double>(result.traces.size());
  m.exit_time_rmse_pct =
      100.0 * std::sqrt(rmse_sum / static_cast<double>(result.traces.size()));
  m.violation_count = result.violations.size();

  std::map<int, std::vector<double>> by_node;
  for (const CrossingRecord& c : result.crossings) by_node[c.node].push_back(c.time);
  for (auto& [node, times] : by_node) {
    if (times.size() < 2) continue;
    std::sort(times.begin(), times.end());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
      best = std::min(best, times[k + 1] - times[k]);
    }
    m.min_node_headway[node] = best;
  }
  return m;
}

}  // namespace rcoord
