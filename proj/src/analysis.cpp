#include "mgrisk/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace mgrisk {

double passive_ur(double tens, double target) {
    return std::max(0.0, target - tens);
}

double expected_over_scenarios(const std::vector<double>& values, const std::vector<double>& prob) {
    if (values.size() != prob.size())
        throw AnalysisError("expected_over_scenarios: " + std::to_string(values.size()) + " values for " +
                            std::to_string(prob.size()) + " probabilities");
    double mass = 0.0;
    double sum = 0.0;
    for (std::size_t s = 0; s < values.size(); ++s) {
        mass += prob[s];
        sum += prob[s] * values[s];
    }
    if (std::abs(mass - 1.0) > 1e-9)
        throw AnalysisError("expected_over_scenarios: probabilities sum to " + std::to_string(mass));
    return sum;
}

SpilledEnergy make_spilled_energy(double pv, double wt) {
    return {pv, wt, pv + wt};
}

SpilledEnergy spilled_energy(const BuiltProblem& problem, const ScenarioSet& scenarios,
                             const std::vector<double>& values, double time_step, double tol) {
    const auto& map = problem.map;
    if (values.size() != static_cast<std::size_t>(problem.model.num_variables()))
        throw AnalysisError("spilled_energy: solution length does not match the model");

    auto family = [&](const std::vector<HourScenarioGrid>& avail, auto handle, const char* kind) {
        double total = 0.0;
        for (int s = 0; s < map.scenarios; ++s) {
            double per_scenario = 0.0;
            for (std::size_t k = 0; k < avail.size(); ++k)
                for (int t = 0; t < map.hours; ++t) {
                    const double dispatched = values[static_cast<std::size_t>(handle(static_cast<int>(k), t, s))];
                    double spill = avail[k](t, s) - dispatched;
                    if (spill < -tol)
                        throw AnalysisError(std::string("negative spilled energy for ") + kind + " unit " +
                                            std::to_string(k) + " at t=" + std::to_string(t) +
                                            " s=" + std::to_string(s) + ": dispatch exceeds availability");
                    per_scenario += std::max(0.0, spill) * time_step;
                }
            total += scenarios.prob[static_cast<std::size_t>(s)] * per_scenario;
        }
        return total;
    };
    const double pv = family(scenarios.pv_max, [&](int i, int t, int s) { return map.PV(i, t, s); }, "PV");
    const double wt = family(scenarios.wt_max, [&](int j, int t, int s) { return map.WT(j, t, s); }, "WT");
    return make_spilled_energy(pv, wt);
}

std::vector<double> default_targets(double expected_tens, int scenario_count) {
    // Guard against values like 5.000000000001 rounding a whole kWh up.
    const double raw = 1.2 * expected_tens;
    const double target = std::ceil(raw - 1e-9);
    return std::vector<double>(static_cast<std::size_t>(scenario_count), std::max(0.0, target));
}

namespace {

CaseResult solve_built(const MicrogridConfig& config, const ScenarioSet& scenarios, const RiskConfig& risk,
                       const CaseOptions& options, const SolverOptions& solver, const std::string& name) {
    CaseResult r;
    r.name = name;
    r.options = options;
    r.scenario_seed = scenarios.seed;
    r.prob = scenarios.prob;

    auto problem = std::make_shared<BuiltProblem>(build_problem(config, scenarios, risk, options));
    r.big_m = problem->big_m;
    if (options.ur_enabled) {
        r.lambda = risk.lambda;
        r.eur = risk.eur;
    }

    const auto start = std::chrono::steady_clock::now();
    MipSolution mip = branch_and_bound(problem->model, solver);
    r.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.status = mip.status;
    r.objective = mip.objective;
    r.gap = mip.gap;
    r.nodes = mip.nodes_explored;
    if (!mip.has_incumbent())
        throw SolverFailure("case '" + name + "': " + to_string(mip.status) + " after " +
                            std::to_string(mip.nodes_explored) + " nodes, no feasible schedule");

    r.audit = audit_solution(problem->model, mip.values, solver);
    if (!r.audit.passed) {
        std::string first = r.audit.violated.empty() ? std::string("?") : r.audit.violated.front();
        throw SolverFailure("case '" + name + "': solution failed audit (max residual " +
                            std::to_string(r.audit.max_residual) + ", first violation " + first + ")");
    }

    const ScheduleSolution schedule = extract_schedule(*problem, mip.values, config.time_step);
    r.tens = schedule.tens;
    r.targets = risk.targets;
    r.passive.resize(r.tens.size());
    for (std::size_t s = 0; s < r.tens.size(); ++s) r.passive[s] = passive_ur(r.tens[s], r.targets[s]);
    r.ur = options.ur_enabled ? schedule.ur : r.passive;
    r.expected_tens = expected_over_scenarios(r.tens, r.prob);
    r.expected_ur = expected_over_scenarios(r.ur, r.prob);
    r.spilled = spilled_energy(*problem, scenarios, mip.values, config.time_step);
    r.values = std::move(mip.values);
    r.problem = std::move(problem);
    return r;
}

} // namespace

CaseResult solve_case(const MicrogridConfig& config, const ScenarioSet& scenarios, const RiskConfig& risk,
                      const CaseOptions& options, const SolverOptions& solver, const std::string& name) {
    RiskConfig filled = risk;
    const bool need_targets = filled.targets.empty();
    const bool need_eur = options.ur_enabled && !filled.eur;
    if (!need_targets && !need_eur) return solve_built(config, scenarios, filled, options, solver, name);

    CaseOptions base_options = options;
    base_options.ur_enabled = false;
    RiskConfig base_risk = filled;
    base_risk.big_m.reset();
    if (need_targets) {
        // Targets only feed the passive-UR columns of a UR-free solve, so a
        // placeholder is fine for the first pass.
        base_risk.targets.assign(static_cast<std::size_t>(scenarios.scenario_count), 0.0);
        CaseResult baseline = solve_built(config, scenarios, base_risk, base_options, solver, name + "/baseline");
        filled.targets = default_targets(baseline.expected_tens, scenarios.scenario_count);
        if (!options.ur_enabled) {
            // Same solve; only the passive columns depend on the targets.
            baseline.name = name;
            baseline.targets = filled.targets;
            for (std::size_t s = 0; s < baseline.tens.size(); ++s)
                baseline.passive[s] = passive_ur(baseline.tens[s], baseline.targets[s]);
            baseline.ur = baseline.passive;
            baseline.expected_ur = expected_over_scenarios(baseline.ur, baseline.prob);
            return baseline;
        }
        std::vector<double> passive(baseline.tens.size());
        for (std::size_t s = 0; s < passive.size(); ++s) passive[s] = passive_ur(baseline.tens[s], filled.targets[s]);
        if (need_eur) filled.eur = expected_over_scenarios(passive, baseline.prob);
    } else {
        CaseResult baseline = solve_built(config, scenarios, filled, base_options, solver, name + "/baseline");
        filled.eur = baseline.expected_ur;
    }
    return solve_built(config, scenarios, filled, options, solver, name);
}

bool SweepResult::all_ok() const {
    return std::all_of(points.begin(), points.end(), [](const SweepPoint& p) { return p.ok; });
}

SweepResult lambda_sweep(const MicrogridConfig& config, const ScenarioSet& scenarios, const RiskConfig& risk,
                         const CaseOptions& options, std::vector<double> lambdas, const SolverOptions& solver,
                         int jobs) {
    if (lambdas.empty()) throw AnalysisError("lambda_sweep: empty lambda grid");
    for (double l : lambdas)
        if (!(l >= 0.0 && l <= 1.0)) throw AnalysisError("lambda_sweep: lambda " + std::to_string(l) + " outside [0,1]");
    std::sort(lambdas.begin(), lambdas.end());

    SweepResult out;
    CaseOptions base_options = options;
    base_options.ur_enabled = false;
    RiskConfig base_risk = risk;
    base_risk.big_m.reset();
    out.baseline = solve_case(config, scenarios, base_risk, base_options, solver, "baseline");

    RiskConfig point_risk = risk;
    point_risk.targets = out.baseline.targets;
    if (!point_risk.eur) point_risk.eur = out.baseline.expected_ur;
    CaseOptions point_options = options;
    point_options.ur_enabled = true;

    out.points.resize(lambdas.size());
    for (std::size_t k = 0; k < lambdas.size(); ++k) out.points[k].lambda = lambdas[k];

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < out.points.size(); k = next++) {
            SweepPoint& point = out.points[k];
            RiskConfig r = point_risk;
            r.lambda = point.lambda;
            try {
                point.result = solve_built(config, scenarios, r, point_options, solver,
                                           "lambda=" + std::to_string(point.lambda));
                point.ok = true;
            } catch (const std::exception& e) {
                point.error = e.what();
            }
        }
    };
    const int threads = std::clamp(jobs, 1, static_cast<int>(out.points.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    return out;
}

std::vector<PercentDelta> compare_cases(const CaseResult& base, const CaseResult& variant) {
    if (base.scenario_seed != variant.scenario_seed || base.prob != variant.prob ||
        base.tens.size() != variant.tens.size())
        throw AnalysisError("compare_cases: '" + base.name + "' and '" + variant.name +
                            "' were solved on different scenario sets");
    auto delta = [](std::string metric, double b, double v) {
        PercentDelta d{std::move(metric), b, v, std::nullopt};
        if (b != 0.0) d.percent = 100.0 * (v - b) / b;
        return d;
    };
    return {
        delta("expected_tens", base.expected_tens, variant.expected_tens),
        delta("expected_ur", base.expected_ur, variant.expected_ur),
        delta("se_pv", base.spilled.pv, variant.spilled.pv),
        delta("se_wt", base.spilled.wt, variant.spilled.wt),
        delta("se_total", base.spilled.total, variant.spilled.total),
    };
}

} // namespace mgrisk
