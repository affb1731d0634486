#pragma once

#include <filesystem>
#include <vector>

namespace rcoord {

/// Regenerates plot-ready data from a result directory produced by
/// export_results, using the exported files alone:
///   report/exit_time_bars.csv   vehicle,t0,t_lo,t_hi,chosen_tf,achieved_tf
///   report/speed_envelope.csv   path,station,v_min,v_avg,v_max
///   report/position_bands.csv   vehicle,node,station,block_start,block_end,blocking_vehicle
/// Missing inputs raise IoError naming the absent file.
std::vector<std::filesystem::path> generate_report(
    const std::filesystem::path& result_dir);

}  // namespace rcoord
