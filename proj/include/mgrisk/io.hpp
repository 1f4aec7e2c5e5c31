#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mgrisk/analysis.hpp"
#include "mgrisk/model.hpp"
#include "mgrisk/scenario.hpp"

namespace mgrisk {

inline constexpr int kConfigSchemaVersion = 1;

/// Everything a run needs besides the case toggles chosen on the command line.
struct StudyConfig {
    MicrogridConfig system;
    RiskConfig risk;
    CaseOptions options; // drp_flex, drp_energy_neutral, drp_literal, cvd are read from here
    int scenario_count = 5;
    std::uint64_t seed = 42;
    std::optional<StochasticProfileSpec> profile; // absent: default_profile_spec(system)

    StochasticProfileSpec profile_or_default() const;
    bool operator==(const StudyConfig&) const = default;
};

StudyConfig default_study();

/// JSON text with a top-level schema_version. Unknown keys anywhere are
/// rejected with ConfigError; so is a missing or unsupported schema_version.
StudyConfig parse_study_config(const std::string& text);
std::string study_config_to_json(const StudyConfig& study);
std::string profile_to_json(const StochasticProfileSpec& profile);
StudyConfig load_study_config(const std::filesystem::path& path);
void save_study_config(const StudyConfig& study, const std::filesystem::path& path);

/// Scenario bundle: load.csv, pv_<id>.csv, wt_<id>.csv (rows = hours,
/// columns = scenarios), prob.csv and manifest.json.
void write_scenario_bundle(const ScenarioSet& scenarios, const MicrogridConfig& config,
                           const StochasticProfileSpec& profile, const std::filesystem::path& dir);
ScenarioSet read_scenario_bundle(const MicrogridConfig& config, const std::filesystem::path& dir);

/// Per-case output files. All writers are byte-deterministic for equal input.
void write_solution_csv(const CaseResult& result, const MicrogridConfig& config, const std::filesystem::path& path);
void write_summary_csv(const CaseResult& result, const std::filesystem::path& path);
void write_result_csv(const CaseResult& result, const std::filesystem::path& path);
void write_audit_csv(const CaseResult& result, const std::filesystem::path& path);

/// Reloads the scalar and per-scenario parts of a case written by
/// write_result_csv + write_summary_csv (no solution vector).
CaseResult read_case_result(const std::filesystem::path& dir);

void write_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace mgrisk
