#pragma once

#include <stdexcept>
#include <vector>

#include "mgrisk/milp.hpp"
#include "mgrisk/model.hpp"
#include "mgrisk/scenario.hpp"

namespace mgrisk {

class FormulationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Column handles for every model quantity. Per-(t,s) families are indexed
/// [t * S + s]; per-unit families [(unit * H + t) * S + s]. Gated families
/// (drp, tens, ur, w) are empty when their option is off.
struct VariableMap {
    int generators = 0;
    int hours = 0;
    int scenarios = 0;
    int pv_units = 0;
    int wt_units = 0;

    std::vector<int> p;       // DGR output, kW
    std::vector<int> commit;  // DGR on/off
    std::vector<int> pv;      // dispatched PV, kW
    std::vector<int> wt;      // dispatched WT, kW
    std::vector<int> p_ch;    // battery charge, kW
    std::vector<int> p_disch; // battery discharge, kW
    std::vector<int> mode;    // 1 = charging allowed, 0 = discharging allowed
    std::vector<int> soc;     // kWh at end of hour
    std::vector<int> ens;     // unserved load, kW over the step
    std::vector<int> drp;     // signed load deviation, kW
    std::vector<int> tens;    // kWh per scenario
    std::vector<int> ur;      // kWh per scenario
    std::vector<int> w;       // 1 iff TENS_s <= target_s

    std::size_t ts(int t, int s) const { return static_cast<std::size_t>(t * scenarios + s); }
    std::size_t uts(int unit, int t, int s) const {
        return static_cast<std::size_t>((unit * hours + t) * scenarios + s);
    }

    int P(int g, int t, int s) const { return p[uts(g, t, s)]; }
    int U(int g, int t, int s) const { return commit[uts(g, t, s)]; }
    int PV(int i, int t, int s) const { return pv[uts(i, t, s)]; }
    int WT(int j, int t, int s) const { return wt[uts(j, t, s)]; }
    int Charge(int t, int s) const { return p_ch[ts(t, s)]; }
    int Discharge(int t, int s) const { return p_disch[ts(t, s)]; }
    int Mode(int t, int s) const { return mode[ts(t, s)]; }
    int Soc(int t, int s) const { return soc[ts(t, s)]; }
    int Ens(int t, int s) const { return ens[ts(t, s)]; }
    int Drp(int t, int s) const { return drp[ts(t, s)]; }
};

struct BuiltProblem {
    MilpModel model;
    VariableMap map;
    HourScenarioGrid load;  // load constant used in the balance (after COVID scaling)
    double big_m = 0.0;     // 0 when UR is off
};

/// PL, or (1 + cvd) * PL when the COVID transform is on.
HourScenarioGrid effective_load(const ScenarioSet& scenarios, const CaseOptions& options);

/// Assembles the full stochastic model: core columns, unit commitment,
/// battery, DRP (if on), power balance, UR (if on), expected-TENS objective.
BuiltProblem build_problem(const MicrogridConfig& config, const ScenarioSet& scenarios,
                           const RiskConfig& risk, const CaseOptions& options);

// Building blocks used by build_problem, exposed for focused tests.

/// Declares P, u, PV, WT, battery, SOC and ENS columns for every (t, s).
VariableMap declare_core_variables(MilpModel& model, const MicrogridConfig& config,
                                   const ScenarioSet& scenarios, const HourScenarioGrid& load,
                                   const CaseOptions& options);

void add_unit_commitment(MilpModel& model, const VariableMap& map, const MicrogridConfig& config);
void add_battery(MilpModel& model, const VariableMap& map, const MicrogridConfig& config);
void add_drp(MilpModel& model, VariableMap& map, const HourScenarioGrid& load, const CaseOptions& options);
void add_power_balance(MilpModel& model, const VariableMap& map, const HourScenarioGrid& load,
                       const CaseOptions& options);

/// Adds TENS_s, UR_s, W_s with the big-M indicator rows and the expected-UR
/// cap. Returns the big-M actually used.
double add_ur(MilpModel& model, VariableMap& map, const RiskConfig& risk, const ScenarioSet& scenarios,
              const HourScenarioGrid& load, const CaseOptions& options, double time_step);

void set_objective_tens(MilpModel& model, const VariableMap& map, const ScenarioSet& scenarios,
                        double time_step);

/// Upper bound on ENS_{t,s} implied by the model (balance right-hand side
/// at its largest).
double ens_upper_bound(double load, const CaseOptions& options);

/// Smallest big-M that keeps the UR linearization exact for these inputs:
/// max over s of max(target_s, TENS_s upper bound - target_s).
double required_big_m(const std::vector<double>& targets, const HourScenarioGrid& load,
                      const CaseOptions& options, double time_step);

/// Default big-M: sum over hours of the largest ENS bound + max target + 1.
double default_big_m(const std::vector<double>& targets, const HourScenarioGrid& load,
                     const CaseOptions& options, double time_step);

/// Per-scenario solved quantities pulled out of a solution vector.
struct ScheduleSolution {
    int hours = 0;
    int scenarios = 0;
    std::vector<double> tens; // kWh per scenario
    std::vector<double> ur;   // kWh per scenario (solver value when UR is on)
    std::vector<double> values;
};

ScheduleSolution extract_schedule(const BuiltProblem& problem, const std::vector<double>& values,
                                  double time_step);

} // namespace mgrisk
