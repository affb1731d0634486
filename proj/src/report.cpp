#include "rcoord/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcoord/errors.hpp"

namespace rcoord {

namespace {

using nlohmann::json;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

/// Rows of a headed CSV written by export_results (no quoting in our files).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError(file.string(), "missing result file");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError(file.string(), "missing result file");
  json doc;
  in >> doc;
  return doc;
}

}  // namespace

std::vector<std::filesystem::path> generate_report(
    const std::filesystem::path& result_dir) {
  const auto schedule = read_csv(result_dir / "schedule.csv");
  const auto trajectories = read_csv(result_dir / "trajectories.csv");
  const auto crossings = read_csv(result_dir / "crossings.csv");
  const json meta = read_json(result_dir / "metrics.json");

  const std::filesystem::path report_dir = result_dir / "report";
  std::error_code ec;
  std::filesystem::create_directories(report_dir, ec);
  if (ec) throw IoError(report_dir.string(), ec.message());

  std::vector<std::filesystem::path> files;

  {
    // Exit-time bars: the feasible window, the chosen and the achieved exit
    // horizon for every vehicle.
    const auto file = report_dir / "exit_time_bars.csv";
    std::ofstream out(file);
    if (!out) throw IoError(file.string(), "cannot open for writing");
    out << "vehicle,t0,t_lo,t_hi,chosen_tf,achieved_tf\n";
    for (const auto& row : schedule) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        out << row[i] << (i + 1 < row.size() ? ',' : '\n');
      }
    }
    files.push_back(file);
  }

  std::map<std::string, std::string> vehicle_path;
  std::map<std::string, double> path_length;
  for (const auto& pv : meta.at("per_vehicle")) {
    vehicle_path[pv.at("vehicle").get<std::string>()] =
        pv.at("path").get<std::string>();
  }
  for (const auto& g : meta.at("geometry")) {
    path_length[g.at("id").get<std::string>()] = g.at("length").get<double>();
  }

  {
    // Speed envelope per path, binned by position along the zone.
    const auto file = report_dir / "speed_envelope.csv";
    std::ofstream out(file);
    if (!out) throw IoError(file.string(), "cannot open for writing");
    out << "path,station,v_min,v_avg,v_max\n";
    constexpr int kBins = 50;
    struct Bin {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      double sum = 0.0;
      long n = 0;
    };
    std::map<std::string, std::vector<Bin>> bins;
    for (const auto& row : trajectories) {
      if (row.size() < 4) continue;
      const auto pit = vehicle_path.find(row[0]);
      if (pit == vehicle_path.end()) continue;
      const double S = path_length.at(pit->second);
      const double p = std::stod(row[2]);
      const double v = std::stod(row[3]);
      auto& vec = bins[pit->second];
      if (vec.empty()) vec.resize(kBins);
      int k = static_cast<int>(p / S * kBins);
      k = std::clamp(k, 0, kBins - 1);
      vec[k].lo = std::min(vec[k].lo, v);
      vec[k].hi = std::max(vec[k].hi, v);
      vec[k].sum += v;
      ++vec[k].n;
    }
    for (const auto& [path, vec] : bins) {
      const double S = path_length.at(path);
      for (int k = 0; k < kBins; ++k) {
        if (vec[k].n == 0) continue;
        out << path << ',' << num((k + 0.5) * S / kBins) << ',' << num(vec[k].lo)
            << ',' << num(vec[k].sum / vec[k].n) << ',' << num(vec[k].hi) << '\n';
      }
    }
    files.push_back(file);
  }

  {
    // Blocked node intervals per vehicle, from the crossing log and t_h.
    const auto file = report_dir / "position_bands.csv";
    std::ofstream out(file);
    if (!out) throw IoError(file.string(), "cannot open for writing");
    out << "vehicle,node,station,block_start,block_end,blocking_vehicle\n";
    const double t_h = meta.at("params").at("t_h").get<double>();
    std::map<std::string, std::map<int, double>> stations;
    for (const auto& g : meta.at("geometry")) {
      for (const auto& n : g.at("nodes")) {
        stations[g.at("id").get<std::string>()][n.at("id").get<int>()] =
            n.at("station").get<double>();
      }
    }
    for (const auto& [vehicle, path] : vehicle_path) {
      const auto sit = stations.find(path);
      if (sit == stations.end()) continue;
      for (const auto& row : crossings) {
        if (row.size() < 3 || row[0] == vehicle) continue;
        const int node = std::stoi(row[1]);
        const auto nit = sit->second.find(node);
        if (nit == sit->second.end()) continue;
        const double t = std::stod(row[2]);
        out << vehicle << ',' << node << ',' << num(nit->second) << ','
            << num(t - t_h) << ',' << num(t + t_h) << ',' << row[0] << '\n';
      }
    }
    files.push_back(file);
  }
  return files;
}

}  // namespace rcoord
