#pragma once

#include <pathflow/flow.hpp>
#include <pathflow/mcverify.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pathflow::cli {

const char* version();

/// geometry-check, simulate, divergence, flow, ibp, qi, convergence.
const std::vector<std::string>& commands();

/// Fully resolved experiment. Every field has a config key of the same name.
struct ExperimentConfig {
  std::string command;

  std::string manifold = "circle";
  double drift = 0.0;
  double horizon = 1.0;
  int steps = 256;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;

  std::string rdot = "constant 1";
  std::string phi = "sin_angle";
  std::vector<double> phi_params;
  std::vector<double> phi_times;  // empty means {horizon}

  double s = 0.25;
  double ds = 1.0 / 80;
  double du = 1.0 / 80;
  FlowMode mode = FlowMode::Euler;

  double threshold = 3.0;          // z bound for paired checks
  double mean_threshold = 4.0;     // SE bound for martingale / normalization checks
  int repeats = 1;                 // ibp: independent seeds seed, seed + 1, ...
  int min_pass = 1;
  bool bias_check = false;         // qi: add the ds-halving allowance
  std::size_t bias_samples = 0;    // qi: samples in the halving run, 0 = all

  int points = 100;                // geometry-check
  std::vector<std::string> targets = {"diffusion"};
  std::vector<int> levels = {64, 128, 256, 512};
  int reference_factor = 16;
  std::vector<double> ds_levels = {1.0 / 40, 1.0 / 80, 1.0 / 160};
  double ds_reference = 1.0 / 320;
  double min_order = 0.5;
  double order_tolerance = 0.3;

  bool record_wall_time = false;
};

/// Parses `key = value` lines. Keys before any section apply to every
/// command; keys under `[command]` apply only to that command and override.
/// `#` starts a comment. Unknown keys, unknown sections, repeated keys and
/// invalid values throw ConfigError.
ExperimentConfig parse_config(const std::string& text, const std::string& command,
                              const std::map<std::string, std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::string& command,
                             const std::map<std::string, std::string>& overrides = {});

/// key = value lines for every field, in declaration order.
std::string dump_config(const ExperimentConfig& cfg);

/// One line of a results file. Deterministic checks carry se = 0 and z = 0;
/// their verdict compares lhs against the bound in rhs.
struct ResultRow {
  std::string command;
  std::string manifold;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  double lhs_mean = 0, lhs_se = 0;
  double rhs_mean = 0, rhs_se = 0;
  double diff_mean = 0, diff_se = 0;
  double z = 0;
  bool pass = false;
  double wall_time_s = 0;
  /// Rows that do not gate the exit code (e.g. single repeats of a
  /// repeated check). Not written to the file.
  bool gating = true;
};

inline constexpr const char* kResultsHeader =
    "command,manifold,n_samples,seed,lhs_mean,lhs_se,rhs_mean,rhs_se,diff_mean,diff_se,z,pass,"
    "wall_time_s";

std::string format_results(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results(const std::string& text);
void emit_results(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_results(const std::string& path);

/// Runs one command and returns its rows. Throws ConfigError on invalid
/// configurations and pathflow::Error on numerical failures.
std::vector<ResultRow> execute(const ExperimentConfig& cfg, int threads);

bool all_pass(const std::vector<ResultRow>& rows);

struct RunOptions {
  int threads = 0;  // 0: PATHFLOW_THREADS, then hardware
  std::string out;  // default: <command>_results.csv
};

/// Loads the config, executes, writes the results file and
/// `<out>.manifest`. Returns 0 when every gating row passes, 1 on a check
/// failure or numerical error, 2 on a usage or configuration error.
int run(const std::string& command, const std::string& config_path,
        const std::map<std::string, std::string>& overrides, const RunOptions& options);

}  // namespace pathflow::cli
