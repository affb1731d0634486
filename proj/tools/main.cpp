#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rcoord/errors.hpp"
#include "rcoord/report.hpp"
#include "rcoord/scenario_io.hpp"
#include "rcoord/simulator.hpp"

namespace {

using nlohmann::json;
using namespace rcoord;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitIo = 5;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

json load_document(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError(file.string(), "cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ScenarioError(ScenarioError::Kind::syntax, "", e.what());
  }
}

ScenarioSpec load_with_overrides(const std::filesystem::path& file,
                                 const std::vector<std::string>& overrides) {
  json doc = load_document(file);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ScenarioError(ScenarioError::Kind::invariant, kv,
                          "override must have the form key=value");
    }
    apply_override(doc, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return parse_scenario(doc);
}

void print_summary(const SimResult& result, const Metrics& metrics) {
  std::printf("%-10s %-8s %10s %10s %10s %10s %10s\n", "vehicle", "path", "t0",
              "t_lo", "t_hi", "chosen_tf", "achieved");
  for (std::size_t i = 0; i < result.schedule.size(); ++i) {
    const auto& o = result.schedule[i];
    const auto& tr = result.traces[i];
    std::printf("%-10s %-8s %10s %10s %10s %10s %10s\n", o.plan.vehicle_id.c_str(),
                o.plan.path_id.c_str(), fmt(o.plan.entry_time).c_str(),
                fmt(o.window.t_lo).c_str(), fmt(o.window.t_hi).c_str(),
                fmt(o.chosen_horizon).c_str(),
                fmt(tr.achieved_exit - tr.entry_time).c_str());
  }
  std::printf("\nv_min [m/s]: %s   v_avg [m/s]: %s   travel-time RMSE: %s %%   violations: %zu\n",
              fmt(metrics.v_min_overall).c_str(), fmt(metrics.v_avg_overall).c_str(),
              fmt(metrics.exit_time_rmse_pct).c_str(), metrics.violation_count);
}

int run_one(const std::filesystem::path& scenario,
            const std::vector<std::string>& overrides,
            const std::filesystem::path& out_dir, bool quiet, json* metrics_out) {
  const ScenarioSpec spec = load_with_overrides(scenario, overrides);
  const SimResult result = rcoord::run(spec);
  if (result.traces.empty()) {
    // Nothing scheduled; still emit the (header-only) exports.
    Metrics empty{};
    const auto manifest = export_results(result, empty, out_dir);
    if (!quiet) {
      std::printf("no arrivals; wrote %zu files to %s\n", manifest.files.size(),
                  out_dir.string().c_str());
    }
    return kExitOk;
  }
  const Metrics metrics = compute_metrics(result);
  const auto manifest = export_results(result, metrics, out_dir);
  if (metrics_out) {
    *metrics_out = {{"v_min_overall", metrics.v_min_overall},
                    {"v_avg_overall", metrics.v_avg_overall},
                    {"violation_count", metrics.violation_count},
                    {"exit_time_rmse_pct", metrics.exit_time_rmse_pct}};
  }
  if (!quiet) {
    print_summary(result, metrics);
    std::printf("\nwrote %zu files to %s\n", manifest.files.size(),
                out_dir.string().c_str());
  }
  return kExitOk;
}

int classify(std::exception_ptr ep, bool print = true) {
  try {
    std::rethrow_exception(ep);
  } catch (const ScenarioError& e) {
    if (print) std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ScenarioError::Kind::syntax ? kExitParse : kExitInvariant;
  } catch (const InfeasibleError& e) {
    if (print) std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const InfeasibleEntryError& e) {
    if (print) std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const IoError& e) {
    if (print) std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    if (print) std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    if (print) std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvariant;
  }
}

struct SweepPoint {
  std::vector<std::string> overrides;
  std::filesystem::path dir;
  int exit_code = kExitOk;
  std::string error;
  json metrics;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Roundabout control-zone coordinator and simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::string result_dir;
  std::vector<std::string> overrides;
  std::vector<std::string> sweeps;
  long seed = -1;
  unsigned jobs = 1;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("-s,--scenario", scenario_path, "Scenario file")->required();
    cmd->add_option("--set", overrides,
                    "Override a scenario field (key=value, repeatable)");
    cmd->add_option("--seed", seed, "Shorthand for --set sim.seed=N");
    if (needs_out) cmd->add_option("-o,--out", out_dir, "Output directory");
  };

  CLI::App* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  add_common(validate, false);

  CLI::App* run_cmd = app.add_subcommand("run", "Run a scenario and export results");
  add_common(run_cmd, true);

  CLI::App* sweep = app.add_subcommand("sweep", "Run a Cartesian parameter sweep");
  add_common(sweep, true);
  sweep->add_option("--sweep", sweeps,
                    "Sweep axis: key=v1,v2,... (repeatable; Cartesian product)")
      ->required();
  sweep->add_option("-j,--jobs", jobs, "Concurrent sweep points");

  CLI::App* report = app.add_subcommand("report", "Regenerate plot data from results");
  report->add_option("-d,--dir", result_dir, "Result directory from a previous run")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (seed >= 0) overrides.push_back("sim.seed=" + std::to_string(seed));

  try {
    if (validate->parsed()) {
      load_with_overrides(scenario_path, overrides);
      std::printf("%s: OK\n", scenario_path.c_str());
      return kExitOk;
    }

    if (run_cmd->parsed()) {
      return run_one(scenario_path, overrides, out_dir, false, nullptr);
    }

    if (sweep->parsed()) {
      // Expand the Cartesian product of all sweep axes.
      std::vector<std::vector<std::string>> axes;
      for (const std::string& s : sweeps) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw ScenarioError(ScenarioError::Kind::invariant, s,
                              "sweep must have the form key=v1,v2,...");
        }
        const std::string key = s.substr(0, eq);
        std::vector<std::string> axis;
        std::istringstream values(s.substr(eq + 1));
        std::string v;
        while (std::getline(values, v, ',')) axis.push_back(key + "=" + v);
        if (axis.empty()) {
          throw ScenarioError(ScenarioError::Kind::invariant, s, "empty sweep axis");
        }
        axes.push_back(std::move(axis));
      }
      std::vector<SweepPoint> points(1);
      for (const auto& axis : axes) {
        std::vector<SweepPoint> next;
        for (const auto& base : points) {
          for (const auto& value : axis) {
            SweepPoint p = base;
            p.overrides.push_back(value);
            next.push_back(std::move(p));
          }
        }
        points = std::move(next);
      }
      for (std::size_t i = 0; i < points.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%03zu", i);
        points[i].dir = std::filesystem::path(out_dir) / name;
      }

      std::atomic<std::size_t> cursor{0};
      auto worker = [&]() {
        for (;;) {
          const std::size_t i = cursor.fetch_add(1);
          if (i >= points.size()) return;
          SweepPoint& p = points[i];
          std::vector<std::string> all = overrides;
          all.insert(all.end(), p.overrides.begin(), p.overrides.end());
          try {
            p.exit_code = run_one(scenario_path, all, p.dir, true, &p.metrics);
          } catch (...) {
            const std::exception_ptr ep = std::current_exception();
            p.exit_code = classify(ep, false);
            try {
              std::rethrow_exception(ep);
            } catch (const std::exception& e) {
              p.error = e.what();
            }
          }
        }
      };
      std::vector<std::thread> pool;
      const unsigned n = std::max(1u, jobs);
      for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      json index = json::array();
      int failures = 0;
      for (const auto& p : points) {
        json entry = {{"dir", p.dir.filename().string()},
                      {"overrides", p.overrides},
                      {"exit_code", p.exit_code}};
        if (p.exit_code == kExitOk) {
          entry["metrics"] = p.metrics;
        } else {
          entry["error"] = p.error;
          ++failures;
        }
        index.push_back(entry);
      }
      std::filesystem::create_directories(out_dir);
      std::ofstream idx(std::filesystem::path(out_dir) / "index.json");
      idx << index.dump(2) << '\n';
      std::printf("sweep: %zu points, %d failed\n", points.size(), failures);
      if (failures) {
        for (const auto& p : points) {
          if (p.exit_code != kExitOk) return p.exit_code;
        }
      }
      return kExitOk;
    }

    if (report->parsed()) {
      const auto files = generate_report(result_dir);
      for (const auto& f : files) std::printf("%s\n", f.string().c_str());
      return kExitOk;
    }
  } catch (...) {
    return classify(std::current_exception());
  }
  return kExitOk;
}
