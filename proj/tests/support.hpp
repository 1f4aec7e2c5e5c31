#pragma once

// Small seeded instances shared by the unit tests and the acceptance runner.

#include <cmath>
#include <numbers>
#include <random>

#include "mgrisk/formulation.hpp"
#include "mgrisk/scenario.hpp"

namespace mgrisk::testing {

/// One generator, one PV, one WT, a battery and `hours` hours of load.
inline MicrogridConfig tiny_config(int hours = 4, double load = 20.0) {
    MicrogridConfig c;
    c.horizon = hours;
    c.time_step = 1.0;
    c.generators = {{"G1", 4, 2.0, 20.0, 8.0, 8.0, true, 10.0}};
    c.renewables = {{"PV1", 1, RenewableKind::PV, 10.0}, {"WT1", 3, RenewableKind::WT, 10.0}};
    c.battery = Battery{.energy_capacity = 20.0, .p_ch_max = 5.0, .p_disch_max = 5.0, .eta_ch = 0.9,
                        .eta_disch = 0.9, .soc_init = 10.0, .soc_min = 2.0, .soc_max = 18.0};
    c.base_load.assign(static_cast<std::size_t>(hours), load);
    return c;
}

/// Scenario set with given loads and renewable availability, equal probabilities.
inline ScenarioSet flat_scenarios(const MicrogridConfig& c, int count, double load, double pv, double wt) {
    ScenarioSet s;
    s.scenario_count = count;
    s.prob.assign(static_cast<std::size_t>(count), 1.0 / count);
    s.load = HourScenarioGrid(c.horizon, count, load);
    for (std::size_t k = 0; k < c.units_of_kind(RenewableKind::PV).size(); ++k)
        s.pv_max.emplace_back(c.horizon, count, pv);
    for (std::size_t k = 0; k < c.units_of_kind(RenewableKind::WT).size(); ++k)
        s.wt_max.emplace_back(c.horizon, count, wt);
    return s;
}

struct OracleInstance {
    MicrogridConfig config;
    ScenarioSet scenarios;
    BuiltProblem problem;
    int free_binaries = 0;
};

/// 2 DGRs x 6 h x 2 scenarios with random ratings and loads. Battery modes
/// and the hour-0 commitments are pinned, leaving 20 free binaries.
inline OracleInstance oracle_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    auto coin = [&] { return std::bernoulli_distribution(0.5)(rng); };

    OracleInstance inst;
    MicrogridConfig& c = inst.config;
    c.horizon = 6;
    c.time_step = 1.0;
    for (int g = 0; g < 2; ++g) {
        DieselGenerator gen;
        gen.id = "G" + std::to_string(g + 1);
        gen.bus = 4 + g;
        gen.p_min = uni(2.0, 8.0);
        gen.p_max = gen.p_min + uni(8.0, 22.0);
        gen.ramp_up = uni(3.0, 12.0);
        gen.ramp_down = uni(3.0, 12.0);
        gen.initial_on = coin();
        gen.initial_power = gen.initial_on ? uni(gen.p_min, gen.p_max) : 0.0;
        c.generators.push_back(gen);
    }
    c.renewables = {{"PV1", 1, RenewableKind::PV, uni(5.0, 15.0)}, {"WT1", 3, RenewableKind::WT, uni(5.0, 15.0)}};
    const double cap = uni(8.0, 20.0);
    c.battery = Battery{.energy_capacity = cap, .p_ch_max = uni(2.0, 6.0), .p_disch_max = uni(2.0, 6.0),
                        .eta_ch = 0.95, .eta_disch = 0.95, .soc_init = 0.5 * cap, .soc_min = 0.1 * cap,
                        .soc_max = 0.9 * cap};
    for (int t = 0; t < c.horizon; ++t) c.base_load.push_back(uni(15.0, 45.0));

    StochasticProfileSpec spec = default_profile_spec(c);
    spec.sunrise = 0;
    spec.sunset = c.horizon;
    for (int t = 0; t < c.horizon; ++t)
        spec.solar_envelope[static_cast<std::size_t>(t)] = std::sin(std::numbers::pi * (t + 0.5) / c.horizon);
    inst.scenarios = generate_scenarios(c, spec, 2, seed);
    inst.problem = build_problem(c, inst.scenarios, {}, {});

    MilpModel& m = inst.problem.model;
    const VariableMap& map = inst.problem.map;
    for (int s = 0; s < 2; ++s) {
        for (int t = 0; t < c.horizon; ++t) {
            const double b = coin() ? 1.0 : 0.0;
            m.set_bounds(map.Mode(t, s), b, b);
        }
        for (int g = 0; g < 2; ++g) {
            const double on = c.generators[static_cast<std::size_t>(g)].initial_on ? 1.0 : 0.0;
            m.set_bounds(map.U(g, 0, s), on, on);
        }
    }
    for (const auto& v : m.variables())
        if (v.kind == VarKind::Binary && v.lower < v.upper) ++inst.free_binaries;
    return inst;
}

} // namespace mgrisk::testing
