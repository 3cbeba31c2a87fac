#pragma once

// User surface: JSON run configuration, trace/summary emission, parameter
// sweeps, and the braking-baseline comparison. All numeric output uses
// shortest round-trip formatting so files diff bit-stably across runs.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbf/acc.hpp"
#include "cbf/sim.hpp"

namespace cbf::cli {

// Anything wrong with user input: malformed file, unknown or mistyped key,
// invalid value, missing output directory. Mapped to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  acc::Scenario scenario;  // physical parameters, slopes, toggles
  sim::Config sim;         // dt, T, substeps, initial state
  std::optional<std::string> out_dir;
};

// Parse a JSON object with all-optional keys (defaults in parentheses):
//   mass (1650), grav (9.81), f0 (0.1), f1 (5), f2 (0.25), v_p (13.89),
//   v_d (24), l0 (10), c_a (0.4), c_d (0.4), p1 (0.5), p2 (1), epsilon (10),
//   p_acc (1), dt (0.1), T (30), substeps (10), v0 (6), z0 (100),
//   feasibility_on (true), baseline ("none" | "min_braking_distance"),
//   out_dir (none).
// Unknown keys and type mismatches raise ConfigError naming the key.
RunConfig parse_config(const std::string& json_text);

// Read the file then parse_config. Unreadable path raises ConfigError.
RunConfig load_config(const std::string& path);

// Shortest round-trip decimal rendering; "." separator, "nan"/"inf"/"-inf".
std::string format_double(double value);

// Trace table. Header:
//   t,v,z,u,delta,qp_status,b,psi1,phi,b_hF,safety_beta[,solve_us]
// The timing column is omitted for sweep cells so reruns are bit-identical.
std::string trace_csv(const sim::Trace& trace, bool include_timing);

// {status, first_infeasible_t, min_b, min_psi1, max_v, final_v}; aggregates
// are null when no finite samples exist.
std::string summary_json(const sim::Trace& trace);

// Ego-speed profile as a block-character strip (empty trace: "(empty)").
std::string sparkline(const sim::Trace& trace, int width = 60);

// Simulate, write <out_dir>/trace.csv and <out_dir>/summary.json, print the
// summary to stdout. Returns 0 on Completed, 2 on InfeasibleAt.
int cmd_run(const RunConfig& cfg, const std::string& out_dir);

// Cartesian sweep over p1s x p2s x {feasibility on, off} (baseline forced
// off), one trace_p1_<p1>_p2_<p2>_fea_<on|off>.csv per cell plus sweep.csv,
// cells solved by `workers` threads. Returns 0.
int cmd_sweep(const RunConfig& base, const std::vector<double>& p1s,
              const std::vector<double>& p2s, const std::string& out_dir,
              int workers);

// Run the guarded scenario and the braking baseline side by side; write
// trace_feasibility.csv, trace_braking.csv, comparison.json. The config must
// select baseline "min_braking_distance". Returns 0 once both runs executed.
int cmd_compare_braking(const RunConfig& cfg, const std::string& out_dir);

// Full argv interface (subcommands run / sweep / compare-braking). Exit
// codes: 0 success, 1 configuration or usage error, 2 infeasible run.
int main_entry(int argc, char** argv);

}  // namespace cbf::cli
