// Exit-code and file-surface checks of the command-line tool, driven as a
// subprocess. Invoked by ctest with the binary path and the scenario dir.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_scenarios;
int g_failures = 0;

int run_cli(const std::string& args) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void expect(const std::string& what, int got, int want) {
  const bool ok = got == want;
  std::printf("[%s] %s (exit %d, want %d)\n", ok ? "ok" : "FAIL", what.c_str(),
              got, want);
  if (!ok) ++g_failures;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("rcoord_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: cli_checks CLI_PATH SCENARIO_DIR\n");
    return 2;
  }
  g_cli = argv[1];
  g_scenarios = argv[2];
  const std::string replica = (g_scenarios / "replica.json").string();
  const std::string minimal = (g_scenarios / "minimal.json").string();

  expect("validate replica", run_cli("validate --scenario \"" + replica + "\""), 0);
  expect("validate minimal", run_cli("validate --scenario \"" + minimal + "\""), 0);

  const fs::path broken_dir = fresh_dir("broken");
  {
    std::ofstream out(broken_dir / "syntax.json");
    out << "{ not json";
  }
  expect("syntax error -> 2",
         run_cli("validate --scenario \"" + (broken_dir / "syntax.json").string() + "\""),
         2);
  {
    std::ofstream out(broken_dir / "dangling.json");
    out << R"({"params": {"v_min": 0.05, "v_max": 0.15, "u_min": -0.45, "u_max": 0.45},
               "paths": [{"id": "main", "length": 2.0}],
               "arrivals": [{"vehicle": "v1", "path": "ghost", "time": 0.0, "speed": 0.1}]})";
  }
  expect("dangling reference -> 3",
         run_cli("validate --scenario \"" + (broken_dir / "dangling.json").string() + "\""),
         3);
  // validate accepts exactly the files run accepts
  expect("run rejects what validate rejects",
         run_cli("run --scenario \"" + (broken_dir / "dangling.json").string() +
                 "\" --out /tmp/rcoord_cli_reject"),
         3);
  {
    std::ofstream out(broken_dir / "badnum.json");
    out << R"({"params": {"v_min": -0.05, "v_max": 0.15, "u_min": -0.45, "u_max": 0.45},
               "paths": [{"id": "main", "length": 2.0}],
               "arrivals": []})";
  }
  expect("invalid numeric -> 3",
         run_cli("validate --scenario \"" + (broken_dir / "badnum.json").string() + "\""),
         3);
  expect("missing file -> 5", run_cli("validate --scenario no/such.json"), 5);

  const fs::path run_dir = fresh_dir("run");
  expect("run replica",
         run_cli("run --scenario \"" + replica + "\" --out \"" + run_dir.string() + "\""),
         0);
  for (const char* name :
       {"trajectories.csv", "crossings.csv", "schedule.csv", "metrics.json",
        "speed_envelope.csv", "position_bands.csv"}) {
    const bool ok = fs::exists(run_dir / name);
    std::printf("[%s] export %s present\n", ok ? "ok" : "FAIL", name);
    if (!ok) ++g_failures;
  }

  expect("report on results",
         run_cli("report --dir \"" + run_dir.string() + "\""), 0);
  fs::remove(run_dir / "schedule.csv");
  expect("report with deleted schedule.csv -> 5",
         run_cli("report --dir \"" + run_dir.string() + "\""), 5);

  {
    std::ofstream out(broken_dir / "empty.json");
    out << R"({"params": {"v_min": 0.05, "v_max": 0.15, "u_min": -0.45, "u_max": 0.45},
               "paths": [{"id": "main", "length": 2.0}],
               "arrivals": []})";
  }
  const fs::path empty_dir = fresh_dir("empty_run");
  expect("run with no arrivals -> 0",
         run_cli("run --scenario \"" + (broken_dir / "empty.json").string() +
                 "\" --out \"" + empty_dir.string() + "\""),
         0);
  fs::remove_all(empty_dir);

  const fs::path infeasible_dir = fresh_dir("infeasible");
  expect("override t_h=1e9 -> infeasible 4",
         run_cli("run --scenario \"" + replica + "\" --out \"" +
                 infeasible_dir.string() + "\" --set t_h=1e9"),
         4);
  expect("override with unknown key -> 3",
         run_cli("run --scenario \"" + replica + "\" --out \"" +
                 infeasible_dir.string() + "\" --set params.warp=9"),
         3);

  const fs::path sweep_dir = fresh_dir("sweep");
  expect("sweep over t_h",
         run_cli("sweep --scenario \"" + replica + "\" --out \"" + sweep_dir.string() +
                 "\" --sweep t_h=0.5,1.0 --jobs 2"),
         0);
  for (const char* name : {"point_000", "point_001", "index.json"}) {
    const bool ok = fs::exists(sweep_dir / name);
    std::printf("[%s] sweep artifact %s present\n", ok ? "ok" : "FAIL", name);
    if (!ok) ++g_failures;
  }
  const fs::path sweep_fail_dir = fresh_dir("sweep_fail");
  expect("sweep with one infeasible point -> failing code",
         run_cli("sweep --scenario \"" + replica + "\" --out \"" +
                 sweep_fail_dir.string() + "\" --sweep t_h=1.0,1e9"),
         4);

  fs::remove_all(broken_dir);
  fs::remove_all(run_dir);
  fs::remove_all(infeasible_dir);
  fs::remove_all(sweep_dir);
  fs::remove_all(sweep_fail_dir);

  if (g_failures) {
    std::printf("%d CLI check(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all CLI checks passed\n");
  return 0;
}
