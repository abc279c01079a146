#pragma once

// Scenario presets, configuration layering, run artifacts and convergence
// sweeps behind the command-line tool.
//
// Layering: preset < config file < command-line flags. Derived defaults
// (t_max = 20/kappa, dt = min(0.01, 0.05/|H|), n_max) are resolved after all
// layers are applied, unless set explicitly.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bornsim/dynamics.hpp"

namespace bornsim {

enum class ScenarioName { Fig1, Fig2, Fig3a, Fig3b, FiniteT, Custom };
enum class OutputFormat { Csv, Json };

std::string to_string(ScenarioName name);
ScenarioName parse_scenario_name(const std::string& text);

/// Raw key/value settings, as read from a file or from flags.
using Settings = std::map<std::string, std::string>;

/// Keys accepted in config files and as flags.
const std::vector<std::string>& config_keys();

/// Parses flat `key = value` lines (TOML-compatible subset: comments with #,
/// optional double quotes around strings). Throws ConfigError on unknown
/// keys, duplicates, or malformed lines.
Settings parse_settings(const std::string& text);
Settings read_settings_file(const std::filesystem::path& path);

struct ScenarioConfig {
    ScenarioName scenario = ScenarioName::Fig1;
    ModelParams params;
    double weight_l = 1.0;
    TimeGrid grid;
    std::filesystem::path out = "trajectory.csv";
    OutputFormat format = OutputFormat::Csv;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Preset values only (no derived defaults applied).
Settings preset_settings(ScenarioName name);

/// Resolves a full configuration. `file` and `flags` may each set
/// `scenario`; flags win. Throws ConfigError.
ScenarioConfig resolve_config(const Settings& file, const Settings& flags);
ScenarioConfig preset_config(ScenarioName name);

/// Throws InvariantViolation naming the first failed trajectory invariant
/// (population bounds, trace error, monotone counter).
void check_trajectory_invariants(const Trajectory& traj, const ModelParams& params);

struct ConvergenceReport {
    double dt_delta = 0.0;    // max |observable(dt) - observable(dt/2)|
    double nmax_delta = 0.0;  // max |observable(n_max) - observable(2 n_max)|
    double dt_tolerance = 1e-6;
    double nmax_tolerance = 1e-6;
    int base_n_max = 0;
    double base_dt = 0.0;
    bool pass = false;

    nlohmann::json to_json() const;
};

/// Maximum deviation between two runs over the recorded observable columns;
/// `finer` must record at the same times as `base`.
double max_observable_delta(const Trajectory& base, const Trajectory& finer);

ConvergenceReport convergence_report(const ScenarioConfig& config);

struct RunResult {
    Trajectory trajectory;
    nlohmann::json summary;
    std::filesystem::path trajectory_path;
    std::filesystem::path summary_path;
};

/// Runs the scenario and writes the trajectory table and summary JSON.
/// With `with_convergence`, the summary embeds a convergence report.
RunResult run_scenario(const ScenarioConfig& config, bool with_convergence = false);

/// Trajectory table text: header row then one row per recorded time.
std::string trajectory_csv(const Trajectory& traj, const ModelParams& params);
nlohmann::json trajectory_json(const Trajectory& traj, const ModelParams& params);

/// Column names of the trajectory table, in order.
const std::vector<std::string>& trajectory_columns();

/// Summary path next to the trajectory file: <stem>.summary.json.
std::filesystem::path summary_path_for(const std::filesystem::path& out);

}  // namespace bornsim
