#include "rcoord/scenario_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rcoord/errors.hpp"

namespace rcoord {

using nlohmann::json;

namespace {

using Kind = ScenarioError::Kind;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; })) {
      throw ScenarioError(Kind::unknown_field, where.empty() ? key : where + "." + key,
                          "unknown field");
    }
  }
}

double get_number(const json& obj, const std::string& where, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ScenarioError(Kind::invariant, where + "." + key, "missing required field");
  }
  if (!it->is_number()) {
    throw ScenarioError(Kind::invariant, where + "." + key, "expected a number");
  }
  const double x = it->get<double>();
  if (!std::isfinite(x)) {
    throw ScenarioError(Kind::invariant, where + "." + key, "must be finite");
  }
  return x;
}

double get_number_or(const json& obj, const std::string& where, const char* key,
                     double fallback) {
  return obj.contains(key) ? get_number(obj, where, key) : fallback;
}

std::string get_string(const json& obj, const std::string& where, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ScenarioError(Kind::invariant, where + "." + key, "missing required field");
  }
  if (!it->is_string() || it->get<std::string>().empty()) {
    throw ScenarioError(Kind::invariant, where + "." + key,
                        "expected a non-empty string");
  }
  return it->get<std::string>();
}

VehicleParams parse_params(const json& obj) {
  require_keys(obj, "params",
               {"v_min", "v_max", "u_min", "u_max", "gamma", "phi", "length", "t_h"});
  VehicleParams p;
  p.v_min = get_number(obj, "params", "v_min");
  p.v_max = get_number(obj, "params", "v_max");
  p.u_min = get_number(obj, "params", "u_min");
  p.u_max = get_number(obj, "params", "u_max");
  p.gamma = get_number_or(obj, "params", "gamma", p.gamma);
  p.phi = get_number_or(obj, "params", "phi", p.phi);
  p.length = get_number_or(obj, "params", "length", p.length);
  p.t_h = get_number_or(obj, "params", "t_h", p.t_h);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(Kind::invariant, "params", e.what());
  }
  return p;
}

GeometryMap parse_paths(const json& arr) {
  if (!arr.is_array() || arr.empty()) {
    throw ScenarioError(Kind::invariant, "paths", "expected a non-empty array");
  }
  GeometryMap geoms;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "paths[" + std::to_string(i) + "]";
    const json& p = arr[i];
    if (!p.is_object()) throw ScenarioError(Kind::invariant, where, "expected an object");
    require_keys(p, where, {"id", "length", "nodes"});
    PathGeometry geom;
    geom.path_id = get_string(p, where, "id");
    geom.zone_length = get_number(p, where, "length");
    if (p.contains("nodes")) {
      const json& nodes = p.at("nodes");
      if (!nodes.is_array()) {
        throw ScenarioError(Kind::invariant, where + ".nodes", "expected an array");
      }
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::string nwhere = where + ".nodes[" + std::to_string(k) + "]";
        const json& n = nodes[k];
        if (!n.is_object()) {
          throw ScenarioError(Kind::invariant, nwhere, "expected an object");
        }
        require_keys(n, nwhere, {"id", "station"});
        if (!n.contains("id") || !n.at("id").is_number_integer()) {
          throw ScenarioError(Kind::invariant, nwhere + ".id",
                              "expected an integer node id");
        }
        geom.nodes.push_back(
            {n.at("id").get<int>(), get_number(n, nwhere, "station")});
      }
    }
    try {
      geom.validate();
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(Kind::invariant, where, e.what());
    }
    if (!geoms.emplace(geom.path_id, geom).second) {
      throw ScenarioError(Kind::invariant, where + ".id",
                          "duplicate path id " + geom.path_id);
    }
  }
  return geoms;
}

std::vector<Arrival> parse_arrivals(const json& arr, const GeometryMap& geoms,
                                    const VehicleParams& params) {
  if (!arr.is_array()) {
    throw ScenarioError(Kind::invariant, "arrivals", "expected an array");
  }
  std::vector<Arrival> out;
  std::set<std::string> seen;
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "arrivals[" + std::to_string(i) + "]";
    const json& a = arr[i];
    if (!a.is_object()) throw ScenarioError(Kind::invariant, where, "expected an object");
    require_keys(a, where, {"vehicle", "path", "time", "speed"});
    Arrival arrival;
    arrival.vehicle_id = get_string(a, where, "vehicle");
    arrival.path_id = get_string(a, where, "path");
    arrival.entry_time = get_number(a, where, "time");
    arrival.entry_speed = get_number(a, where, "speed");
    if (!geoms.count(arrival.path_id)) {
      throw ScenarioError(Kind::dangling_reference, where + ".path",
                          "unknown path " + arrival.path_id);
    }
    if (!seen.insert(arrival.vehicle_id).second) {
      throw ScenarioError(Kind::invariant, where + ".vehicle",
                          "duplicate vehicle id " + arrival.vehicle_id);
    }
    if (arrival.entry_time < 0.0) {
      throw ScenarioError(Kind::invariant, where + ".time", "must be non-negative");
    }
    if (arrival.entry_time < prev) {
      throw ScenarioError(Kind::invariant, where + ".time",
                          "arrivals must be sorted by time");
    }
    prev = arrival.entry_time;
    if (arrival.entry_speed < params.v_min || arrival.entry_speed > params.v_max) {
      throw ScenarioError(Kind::invariant, where + ".speed",
                          "entry speed outside [v_min, v_max]");
    }
    out.push_back(std::move(arrival));
  }
  return out;
}

void parse_sim(const json& obj, ScenarioSpec& spec) {
  require_keys(obj, "sim",
               {"sample_rate", "duration", "seed", "disturbance_std", "grid_step",
                "infeasibility_policy", "delay_step"});
  spec.sample_rate = get_number_or(obj, "sim", "sample_rate", spec.sample_rate);
  spec.duration = get_number_or(obj, "sim", "duration", spec.duration);
  spec.disturbance_std =
      get_number_or(obj, "sim", "disturbance_std", spec.disturbance_std);
  spec.sched.grid_step = get_number_or(obj, "sim", "grid_step", spec.sched.grid_step);
  spec.sched.delay_step = get_number_or(obj, "sim", "delay_step", spec.sched.delay_step);
  if (obj.contains("seed")) {
    const json& s = obj.at("seed");
    if (!s.is_number_unsigned()) {
      throw ScenarioError(Kind::invariant, "sim.seed",
                          "expected a non-negative integer");
    }
    spec.seed = s.get<std::uint64_t>();
  }
  if (obj.contains("infeasibility_policy")) {
    const json& p = obj.at("infeasibility_policy");
    const std::string v = p.is_string() ? p.get<std::string>() : "";
    if (v == "error") {
      spec.sched.policy = InfeasibilityPolicy::error;
    } else if (v == "delay") {
      spec.sched.policy = InfeasibilityPolicy::delay;
    } else {
      throw ScenarioError(Kind::invariant, "sim.infeasibility_policy",
                          "expected \"error\" or \"delay\"");
    }
  }
}

void check_invariants(const ScenarioSpec& spec) {
  if (!(spec.sample_rate > 0.0)) {
    throw ScenarioError(Kind::invariant, "sim.sample_rate", "must be positive");
  }
  if (spec.duration < 0.0) {
    throw ScenarioError(Kind::invariant, "sim.duration", "must be non-negative");
  }
  if (spec.disturbance_std < 0.0) {
    throw ScenarioError(Kind::invariant, "sim.disturbance_std", "must be non-negative");
  }
  try {
    spec.sched.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(Kind::invariant, "sim", e.what());
  }
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError(file.string(), "cannot open for writing");
  return out;
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(Kind::syntax, "", e.what());
  }
  return parse_scenario(doc);
}

ScenarioSpec parse_scenario(const json& doc) {
  if (!doc.is_object()) {
    throw ScenarioError(Kind::invariant, "", "top level must be an object");
  }
  require_keys(doc, "", {"notes", "params", "paths", "arrivals", "sim"});
  for (const char* key : {"params", "paths", "arrivals"}) {
    if (!doc.contains(key)) {
      throw ScenarioError(Kind::invariant, key, "missing required section");
    }
  }
  if (!doc.at("params").is_object()) {
    throw ScenarioError(Kind::invariant, "params", "expected an object");
  }

  ScenarioSpec spec;
  spec.params = parse_params(doc.at("params"));
  spec.geoms = parse_paths(doc.at("paths"));
  spec.arrivals = parse_arrivals(doc.at("arrivals"), spec.geoms, spec.params);
  if (doc.contains("sim")) {
    if (!doc.at("sim").is_object()) {
      throw ScenarioError(Kind::invariant, "sim", "expected an object");
    }
    parse_sim(doc.at("sim"), spec);
  }
  check_invariants(spec);
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError(file.string(), "cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioSpec& spec) {
  json doc;
  doc["params"] = {{"v_min", spec.params.v_min},   {"v_max", spec.params.v_max},
                   {"u_min", spec.params.u_min},   {"u_max", spec.params.u_max},
                   {"gamma", spec.params.gamma},   {"phi", spec.params.phi},
                   {"length", spec.params.length}, {"t_h", spec.params.t_h}};
  json paths = json::array();
  for (const auto& [id, geom] : spec.geoms) {
    json nodes = json::array();
    for (const auto& n : geom.nodes) {
      nodes.push_back({{"id", n.id}, {"station", n.station}});
    }
    paths.push_back({{"id", id}, {"length", geom.zone_length}, {"nodes", nodes}});
  }
  doc["paths"] = paths;
  json arrivals = json::array();
  for (const auto& a : spec.arrivals) {
    arrivals.push_back({{"vehicle", a.vehicle_id},
                        {"path", a.path_id},
                        {"time", a.entry_time},
                        {"speed", a.entry_speed}});
  }
  doc["arrivals"] = arrivals;
  doc["sim"] = {{"sample_rate", spec.sample_rate},
                {"duration", spec.duration},
                {"seed", spec.seed},
                {"disturbance_std", spec.disturbance_std},
                {"grid_step", spec.sched.grid_step},
                {"delay_step", spec.sched.delay_step},
                {"infeasibility_policy",
                 spec.sched.policy == InfeasibilityPolicy::delay ? "delay" : "error"}};
  return doc.dump(2) + "\n";
}

void apply_override(json& doc, const std::string& key, const std::string& value) {
  std::vector<std::string> segments;
  std::string part;
  std::istringstream splitter(key);
  while (std::getline(splitter, part, '.')) segments.push_back(part);
  if (segments.empty()) {
    throw ScenarioError(Kind::unknown_field, key, "empty override key");
  }

  // Bare keys resolve against the params and sim sections.
  if (segments.size() == 1) {
    for (const char* section : {"params", "sim"}) {
      if (doc.contains(section) && doc.at(section).is_object() &&
          doc.at(section).contains(segments[0])) {
        segments = {section, segments[0]};
        break;
      }
    }
    if (segments.size() == 1) {
      static const std::set<std::string> sim_keys = {
          "sample_rate", "duration", "seed", "disturbance_std",
          "grid_step",   "delay_step", "infeasibility_policy"};
      if (sim_keys.count(segments[0])) {
        segments = {"sim", segments[0]};
      } else {
        segments = {"params", segments[0]};
      }
    }
  }

  json* node = &doc;
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    const std::string& seg = segments[i];
    const bool is_index = !seg.empty() && std::all_of(seg.begin(), seg.end(), [](char c) {
      return std::isdigit(static_cast<unsigned char>(c));
    });
    if (is_index && node->is_array()) {
      const std::size_t idx = std::stoul(seg);
      if (idx >= node->size()) {
        throw ScenarioError(Kind::unknown_field, key, "index out of range");
      }
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (i == 0 && !node->contains(seg) &&
          (seg == "sim" || seg == "params")) {
        (*node)[seg] = json::object();  // overriding a defaulted section
      }
      if (!node->contains(seg)) {
        throw ScenarioError(Kind::unknown_field, key, "no such field");
      }
      node = &node->at(seg);
    } else {
      throw ScenarioError(Kind::unknown_field, key, "no such field");
    }
  }

  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // unquoted strings (e.g. infeasibility_policy=delay)
  }
  const std::string& leaf = segments.back();
  if (node->is_object()) {
    if (segments.size() >= 2 &&
        (segments[segments.size() - 2] == "sim" || segments[segments.size() - 2] == "params")) {
      (*node)[leaf] = parsed;  // schema check happens at parse_scenario
    } else if (node->contains(leaf)) {
      (*node)[leaf] = parsed;
    } else {
      throw ScenarioError(Kind::unknown_field, key, "no such field");
    }
  } else if (node->is_array()) {
    const std::size_t idx = std::stoul(leaf);
    if (idx >= node->size()) {
      throw ScenarioError(Kind::unknown_field, key, "index out of range");
    }
    (*node)[idx] = parsed;
  } else {
    throw ScenarioError(Kind::unknown_field, key, "no such field");
  }
}

ExportManifest export_results(const SimResult& result, const Metrics& metrics,
                              const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), ec.message());

  ExportManifest manifest;
  auto add = [&](const std::filesystem::path& p) {
    manifest.files.push_back(p);
    return p;
  };

  {
    auto out = open_out(add(out_dir / "trajectories.csv"));
    out << "vehicle,t,p,v,u\n";
    for (const auto& tr : result.traces) {
      for (const auto& s : tr.samples) {
        out << tr.vehicle_id << ',' << num(s.t) << ',' << num(s.p) << ','
            << num(s.v) << ',' << num(s.u) << '\n';
      }
    }
  }
  {
    auto out = open_out(add(out_dir / "crossings.csv"));
    out << "vehicle,node,time\n";
    for (const auto& c : result.crossings) {
      out << c.vehicle_id << ',' << c.node << ',' << num(c.time) << '\n';
    }
  }
  {
    auto out = open_out(add(out_dir / "schedule.csv"));
    out << "vehicle,t0,t_lo,t_hi,chosen_tf,achieved_tf\n";
    for (std::size_t i = 0; i < result.schedule.size(); ++i) {
      const auto& o = result.schedule[i];
      const auto& tr = result.traces[i];
      out << o.plan.vehicle_id << ',' << num(o.plan.entry_time) << ','
          << num(o.window.t_lo) << ',' << num(o.window.t_hi) << ','
          << num(o.chosen_horizon) << ','
          << num(tr.achieved_exit - tr.entry_time) << '\n';
    }
  }
  {
    json m;
    m["metrics"] = {{"v_min_overall", metrics.v_min_overall},
                    {"v_avg_overall", metrics.v_avg_overall},
                    {"violation_count", metrics.violation_count},
                    {"exit_time_rmse_pct", metrics.exit_time_rmse_pct}};
    json tt = json::object();
    for (const auto& [veh, t] : metrics.travel_times) tt[veh] = t;
    m["metrics"]["travel_times"] = tt;
    json hw = json::object();
    for (const auto& [node, h] : metrics.min_node_headway) {
      hw[std::to_string(node)] = h;
    }
    m["metrics"]["min_node_headway"] = hw;

    const ScenarioSpec& spec = result.scenario;
    m["params"] = {{"v_min", spec.params.v_min},   {"v_max", spec.params.v_max},
                   {"u_min", spec.params.u_min},   {"u_max", spec.params.u_max},
                   {"gamma", spec.params.gamma},   {"phi", spec.params.phi},
                   {"length", spec.params.length}, {"t_h", spec.params.t_h}};
    json paths = json::array();
    for (const auto& [id, geom] : spec.geoms) {
      json nodes = json::array();
      for (const auto& n : geom.nodes) {
        nodes.push_back({{"id", n.id}, {"station", n.station}});
      }
      paths.push_back({{"id", id}, {"length", geom.zone_length}, {"nodes", nodes}});
    }
    m["geometry"] = paths;
    json pv = json::array();
    for (std::size_t i = 0; i < result.schedule.size(); ++i) {
      const auto& o = result.schedule[i];
      const auto& tr = result.traces[i];
      pv.push_back({{"vehicle", o.plan.vehicle_id},
                    {"path", o.plan.path_id},
                    {"t0", o.plan.entry_time},
                    {"t_lo", o.window.t_lo},
                    {"t_hi", o.window.t_hi},
                    {"chosen_tf", o.chosen_horizon},
                    {"achieved_tf", tr.achieved_exit - tr.entry_time},
                    {"search_evaluations", o.search_evaluations}});
    }
    m["per_vehicle"] = pv;
    json viol = json::array();
    for (const auto& v : result.violations) {
      viol.push_back({{"kind", v.kind == ViolationKind::lateral ? "lateral" : "rear_end"},
                      {"vehicle", v.vehicle},
                      {"other", v.other},
                      {"node", v.node},
                      {"time", v.time},
                      {"margin", v.margin}});
    }
    m["violations"] = viol;
    auto out = open_out(add(out_dir / "metrics.json"));
    out << m.dump(2) << '\n';
  }
  {
    // Per-path speed envelope over the control-zone length, binned by
    // position: the plot-ready counterpart of the speed range figures.
    auto out = open_out(add(out_dir / "speed_envelope.csv"));
    out << "path,station,v_min,v_avg,v_max\n";
    constexpr int kBins = 50;
    for (const auto& [path_id, geom] : result.scenario.geoms) {
      struct Bin {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        long n = 0;
      };
      std::vector<Bin> bins(kBins);
      for (const auto& tr : result.traces) {
        if (tr.path_id != path_id) continue;
        for (const auto& s : tr.samples) {
          int k = static_cast<int>(s.p / geom.zone_length * kBins);
          k = std::clamp(k, 0, kBins - 1);
          bins[k].lo = std::min(bins[k].lo, s.v);
          bins[k].hi = std::max(bins[k].hi, s.v);
          bins[k].sum += s.v;
          ++bins[k].n;
        }
      }
      for (int k = 0; k < kBins; ++k) {
        if (bins[k].n == 0) continue;
        const double station = (k + 0.5) * geom.zone_length / kBins;
        out << path_id << ',' << num(station) << ',' << num(bins[k].lo) << ','
            << num(bins[k].sum / bins[k].n) << ',' << num(bins[k].hi) << '\n';
      }
    }
  }
  {
    // Time intervals at each node blocked for a vehicle by the other
    // vehicles' crossings: overlay data for position-trajectory plots.
    auto out = open_out(add(out_dir / "position_bands.csv"));
    out << "vehicle,node,station,block_start,block_end,blocking_vehicle\n";
    const double t_h = result.scenario.params.t_h;
    for (const auto& tr : result.traces) {
      const PathGeometry& geom = result.scenario.geoms.at(tr.path_id);
      for (const auto& n : geom.nodes) {
        for (const auto& c : result.crossings) {
          if (c.vehicle_id == tr.vehicle_id || c.node != n.id) continue;
          out << tr.vehicle_id << ',' << n.id << ',' << num(n.station) << ','
              << num(c.time - t_h) << ',' << num(c.time + t_h) << ','
              << c.vehicle_id << '\n';
        }
      }
    }
  }
  return manifest;
}

}  // namespace rcoord
