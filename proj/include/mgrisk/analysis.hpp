#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgrisk/formulation.hpp"
#include "mgrisk/solver.hpp"

namespace mgrisk {

class AnalysisError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// max(0, target - tens).
double passive_ur(double tens, double target);

/// Probability-weighted sum. Throws AnalysisError if the probabilities do not
/// sum to 1 within 1e-9 or the lengths differ.
double expected_over_scenarios(const std::vector<double>& values, const std::vector<double>& prob);

struct SpilledEnergy {
    double pv = 0.0;    // kWh, expected over scenarios
    double wt = 0.0;    // kWh
    double total = 0.0; // always pv + wt
};

SpilledEnergy make_spilled_energy(double pv, double wt);

/// Expected curtailment from a solved schedule. Cells where dispatch exceeds
/// availability by less than `tol` count as zero; anything larger throws.
SpilledEnergy spilled_energy(const BuiltProblem& problem, const ScenarioSet& scenarios,
                             const std::vector<double>& values, double time_step, double tol = 1e-6);

/// ceil(1.2 * expected TENS), repeated per scenario.
std::vector<double> default_targets(double expected_tens, int scenario_count);

struct CaseResult {
    std::string name;
    CaseOptions options;
    std::optional<double> lambda; // set when UR is active
    std::optional<double> eur;    // EUR used by the cap
    double big_m = 0.0;

    std::uint64_t scenario_seed = 0;
    std::vector<double> prob;
    std::vector<double> targets;
    std::vector<double> tens;       // kWh per scenario
    std::vector<double> ur;         // solver UR_s when UR is active, passive UR otherwise
    std::vector<double> passive;    // max(0, target - TENS) recomputed from TENS
    double expected_tens = 0.0;
    double expected_ur = 0.0;
    SpilledEnergy spilled;

    MipStatus status = MipStatus::Infeasible;
    double objective = 0.0;
    double gap = 0.0;
    std::int64_t nodes = 0;
    AuditReport audit;
    double solve_seconds = 0.0;

    std::shared_ptr<const BuiltProblem> problem;
    std::vector<double> values;
};

/// Builds and solves one case. Missing targets (and, with UR on, a missing
/// EUR) are filled from a baseline solve of the same case with UR off.
/// Throws SolverFailure when no audited solution is produced.
CaseResult solve_case(const MicrogridConfig& config, const ScenarioSet& scenarios, const RiskConfig& risk,
                      const CaseOptions& options, const SolverOptions& solver = {},
                      const std::string& name = "case");

class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepPoint {
    double lambda = 0.0;
    bool ok = false;
    std::string error;
    CaseResult result;
};

struct SweepResult {
    CaseResult baseline; // UR off; supplies targets and EUR
    std::vector<SweepPoint> points; // ascending lambda
    bool all_ok() const;
};

/// One UR-constrained solve per lambda, run on up to `jobs` threads. Results
/// are ordered by lambda regardless of completion order.
SweepResult lambda_sweep(const MicrogridConfig& config, const ScenarioSet& scenarios, const RiskConfig& risk,
                         const CaseOptions& options, std::vector<double> lambdas,
                         const SolverOptions& solver = {}, int jobs = 1);

struct PercentDelta {
    std::string metric;
    double base = 0.0;
    double variant = 0.0;
    std::optional<double> percent; // empty when base == 0
};

/// 100 * (variant - base) / base for expected TENS, expected UR and the three
/// spilled-energy totals. Throws AnalysisError if the scenario sets differ.
std::vector<PercentDelta> compare_cases(const CaseResult& base, const CaseResult& variant);

} // namespace mgrisk
