#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rcoord/simulator.hpp"

namespace rcoord {

/// Parses and validates a scenario document (JSON text with the sections
/// params / paths / arrivals / sim). Every diagnostic is a ScenarioError
/// whose kind distinguishes syntax, unknown field, dangling reference and
/// invariant breaches, and whose field addresses the offending location.
ScenarioSpec parse_scenario(const std::string& text);
ScenarioSpec parse_scenario(const nlohmann::json& doc);
inline ScenarioSpec parse_scenario(const char* text) {
  return parse_scenario(std::string(text));
}

/// Reads the file and parses it. Missing/unreadable file -> IoError.
ScenarioSpec load_scenario(const std::filesystem::path& file);

/// Canonical textual form; parse(serialize(spec)) == spec field-for-field.
std::string serialize_scenario(const ScenarioSpec& spec);

/// Applies one `key=value` override to a raw scenario document before
/// validation. Keys are dotted paths ("params.t_h", "arrivals.2.speed");
/// a bare key is resolved against the params and sim sections. Unknown
/// keys throw ScenarioError{unknown_field}.
void apply_override(nlohmann::json& doc, const std::string& key,
                    const std::string& value);

struct ExportManifest {
  std::vector<std::filesystem::path> files;
};

/// Writes the run artifacts into out_dir (created if needed):
///   trajectories.csv   vehicle,t,p,v,u
///   crossings.csv      vehicle,node,time
///   schedule.csv       vehicle,t0,t_lo,t_hi,chosen_tf,achieved_tf
///   metrics.json       summary metrics + per-vehicle rows + run context
///   speed_envelope.csv path,station,v_min,v_avg,v_max (plot-ready)
///   position_bands.csv vehicle,node,station,block_start,block_end,blocking_vehicle
/// Numbers carry 15 significant digits. I/O failures surface as IoError.
ExportManifest export_results(const SimResult& result, const Metrics& metrics,
                              const std::filesystem::path& out_dir);

}  // namespace rcoord
