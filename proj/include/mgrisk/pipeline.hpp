#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgrisk/analysis.hpp"
#include "mgrisk/io.hpp"

namespace mgrisk {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitSolver = 3, kExitPartialSweep = 4 };

/// Command-line case selector. `ur` is the base system with the UR cap; the
/// others can add the cap through `with_ur`.
enum class CaseKind { Base, Ur, Drp, Covid, Combined };

CaseKind parse_case_kind(const std::string& text);
std::string to_string(CaseKind kind);

/// Case toggles for `kind` on top of the tuning values (flex, cvd, ...) in `tuning`.
CaseOptions case_options(CaseKind kind, bool with_ur, const CaseOptions& tuning);

/// Directory name used for a case: base, ur, drp, drp_ur, covid, covid_ur, combined, combined_ur.
std::string case_dir_name(CaseKind kind, bool with_ur);

struct CaseSpec {
    std::string name;
    CaseOptions options;
};

/// The six cases of a full study run: base, ur, drp, drp_ur, covid, covid_ur.
std::vector<CaseSpec> standard_cases(const CaseOptions& tuning);

std::vector<double> default_lambda_grid();

/// Throws ConfigError listing every violation if the study is invalid.
void require_valid(const StudyConfig& study);

/// Generates the scenario set and writes it as a bundle under `dir`.
ScenarioSet generate_bundle(const StudyConfig& study, const std::filesystem::path& dir);

/// Solves one case and writes solution.csv, summary.csv, result.csv and
/// audit.csv under `dir`. Throws SolverFailure if no audited solution exists.
CaseResult solve_and_write(const StudyConfig& study, const ScenarioSet& scenarios, const CaseSpec& spec,
                           const std::filesystem::path& dir, const SolverOptions& solver = {});

/// Runs lambda_sweep and writes sweep.csv (plus baseline/ case files) under `dir`.
SweepResult sweep_and_write(const StudyConfig& study, const ScenarioSet& scenarios, const CaseOptions& options,
                            const std::vector<double>& lambdas, int jobs, const std::filesystem::path& dir,
                            const SolverOptions& solver = {});

/// Reads every case directory under `run_dir` and writes ens_<case>.csv,
/// spilled_energy.csv and comparison.csv into `report_dir`. Needs at least
/// two cases, one of them `base`.
void write_report(const std::filesystem::path& run_dir, const std::filesystem::path& report_dir);

struct SolveTiming {
    std::string name;
    double seconds = 0.0;
};

/// Everything needed to replay a full run.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string config_path; // informational; the config itself is embedded
    StudyConfig study;
    std::vector<CaseSpec> cases;
    std::vector<double> lambda_grid;
    int jobs = 1;
    std::filesystem::path output_dir;
    // Filled in by run_pipeline.
    std::vector<SolveTiming> timings;
    std::vector<std::string> files; // relative to output_dir
    std::vector<std::pair<std::string, double>> eur; // case name -> EUR used
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest parse_manifest(const std::string& text);

struct PipelineOutcome {
    RunManifest manifest;
    bool sweep_ok = true;
};

/// Generate, solve every case, sweep lambda, report, then write manifest.json.
PipelineOutcome run_pipeline(RunManifest manifest, const SolverOptions& solver = {});

/// Every regular file under `dir`, relative and sorted.
std::vector<std::string> list_files(const std::filesystem::path& dir);

} // namespace mgrisk
