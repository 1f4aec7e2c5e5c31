#include "mgrisk/formulation.hpp"

#include <algorithm>
#include <string>

namespace mgrisk {

namespace {

std::string tag(int t, int s) { return "_t" + std::to_string(t) + "_s" + std::to_string(s); }
std::string tag(const char* family, int unit, int t, int s) {
    return std::string(family) + std::to_string(unit) + tag(t, s);
}

} // namespace

HourScenarioGrid effective_load(const ScenarioSet& scenarios, const CaseOptions& options) {
    HourScenarioGrid out = scenarios.load;
    if (!options.covid_enabled) return out;
    const double factor = 1.0 + options.cvd;
    for (int t = 0; t < out.hours(); ++t)
        for (int s = 0; s < out.scenarios(); ++s) out(t, s) = factor * scenarios.load(t, s);
    return out;
}

double ens_upper_bound(double load, const CaseOptions& options) {
    if (!options.drp_enabled) return load;
    if (options.drp_literal) return options.drp_flex * load;
    return (1.0 + options.drp_flex) * load;
}

double required_big_m(const std::vector<double>& targets, const HourScenarioGrid& load,
                      const CaseOptions& options, double time_step) {
    double need = 0.0;
    for (int s = 0; s < load.scenarios(); ++s) {
        double tens_max = 0.0;
        for (int t = 0; t < load.hours(); ++t) tens_max += ens_upper_bound(load(t, s), options) * time_step;
        const double target = targets[static_cast<std::size_t>(s)];
        need = std::max({need, target, tens_max - target});
    }
    return need;
}

double default_big_m(const std::vector<double>& targets, const HourScenarioGrid& load,
                     const CaseOptions& options, double time_step) {
    double sum = 0.0;
    for (int t = 0; t < load.hours(); ++t) {
        double worst = 0.0;
        for (int s = 0; s < load.scenarios(); ++s) worst = std::max(worst, ens_upper_bound(load(t, s), options));
        sum += worst * time_step;
    }
    double max_target = 0.0;
    for (double v : targets) max_target = std::max(max_target, v);
    return sum + max_target + 1.0;
}

VariableMap declare_core_variables(MilpModel& model, const MicrogridConfig& config,
                                   const ScenarioSet& scenarios, const HourScenarioGrid& load,
                                   const CaseOptions& options) {
    VariableMap map;
    map.generators = static_cast<int>(config.generators.size());
    map.hours = config.horizon;
    map.scenarios = scenarios.scenario_count;
    map.pv_units = static_cast<int>(scenarios.pv_max.size());
    map.wt_units = static_cast<int>(scenarios.wt_max.size());
    const int G = map.generators, H = map.hours, S = map.scenarios;
    const auto unit_cells = [&](int units) { return static_cast<std::size_t>(units * H * S); };
    const auto cells = static_cast<std::size_t>(H * S);

    map.p.assign(unit_cells(G), -1);
    map.commit.assign(unit_cells(G), -1);
    map.pv.assign(unit_cells(map.pv_units), -1);
    map.wt.assign(unit_cells(map.wt_units), -1);
    map.p_ch.assign(cells, -1);
    map.p_disch.assign(cells, -1);
    map.mode.assign(cells, -1);
    map.soc.assign(cells, -1);
    map.ens.assign(cells, -1);

    const Battery& bat = config.battery;
    for (int s = 0; s < S; ++s) {
        for (int t = 0; t < H; ++t) {
            for (int g = 0; g < G; ++g) {
                const auto& gen = config.generators[static_cast<std::size_t>(g)];
                map.p[map.uts(g, t, s)] = model.add_continuous(tag("P_g", g, t, s), 0.0, gen.p_max);
                map.commit[map.uts(g, t, s)] = model.add_binary(tag("u_g", g, t, s));
            }
            for (int i = 0; i < map.pv_units; ++i)
                map.pv[map.uts(i, t, s)] =
                    model.add_continuous(tag("PV_i", i, t, s), 0.0, scenarios.pv_max[static_cast<std::size_t>(i)](t, s));
            for (int j = 0; j < map.wt_units; ++j)
                map.wt[map.uts(j, t, s)] =
                    model.add_continuous(tag("WT_j", j, t, s), 0.0, scenarios.wt_max[static_cast<std::size_t>(j)](t, s));
            map.p_ch[map.ts(t, s)] = model.add_continuous("Pch" + tag(t, s), 0.0, bat.p_ch_max);
            map.p_disch[map.ts(t, s)] = model.add_continuous("Pdis" + tag(t, s), 0.0, bat.p_disch_max);
            map.mode[map.ts(t, s)] = model.add_binary("b" + tag(t, s));
            const double soc_floor = t == H - 1 ? std::max(bat.soc_min, bat.soc_init) : bat.soc_min;
            map.soc[map.ts(t, s)] = model.add_continuous("soc" + tag(t, s), soc_floor, bat.soc_max);
            map.ens[map.ts(t, s)] =
                model.add_continuous("ENS" + tag(t, s), 0.0, ens_upper_bound(load(t, s), options));
        }
    }
    return map;
}

void add_unit_commitment(MilpModel& model, const VariableMap& map, const MicrogridConfig& config) {
    for (int s = 0; s < map.scenarios; ++s) {
        for (int g = 0; g < map.generators; ++g) {
            const auto& gen = config.generators[static_cast<std::size_t>(g)];
            for (int t = 0; t < map.hours; ++t) {
                const int P = map.P(g, t, s);
                const int U = map.U(g, t, s);
                model.add_constraint(tag("pmax_g", g, t, s), {{P, 1.0}, {U, -gen.p_max}}, Sense::LessEqual, 0.0);
                model.add_constraint(tag("pmin_g", g, t, s), {{P, 1.0}, {U, -gen.p_min}}, Sense::GreaterEqual, 0.0);

                // Ramp limits with start-up / shut-down exceptions; hour 0
                // is anchored to the initial state.
                if (t == 0) {
                    const double u_prev = gen.initial_on ? 1.0 : 0.0;
                    model.add_constraint(tag("rampup_g", g, t, s), {{P, 1.0}}, Sense::LessEqual,
                                         gen.initial_power + gen.ramp_up + gen.p_max * (1.0 - u_prev));
                    model.add_constraint(tag("rampdn_g", g, t, s), {{P, -1.0}, {U, gen.p_max}}, Sense::LessEqual,
                                         gen.ramp_down + gen.p_max - gen.initial_power);
                } else {
                    const int P_prev = map.P(g, t - 1, s);
                    const int U_prev = map.U(g, t - 1, s);
                    model.add_constraint(tag("rampup_g", g, t, s), {{P, 1.0}, {P_prev, -1.0}, {U_prev, gen.p_max}},
                                         Sense::LessEqual, gen.ramp_up + gen.p_max);
                    model.add_constraint(tag("rampdn_g", g, t, s), {{P_prev, 1.0}, {P, -1.0}, {U, gen.p_max}},
                                         Sense::LessEqual, gen.ramp_down + gen.p_max);
                }
            }
        }
    }
}

void add_battery(MilpModel& model, const VariableMap& map, const MicrogridConfig& config) {
    const Battery& bat = config.battery;
    const double dt = config.time_step;
    for (int s = 0; s < map.scenarios; ++s) {
        for (int t = 0; t < map.hours; ++t) {
            const int ch = map.Charge(t, s);
            const int dis = map.Discharge(t, s);
            const int b = map.Mode(t, s);
            const int soc = map.Soc(t, s);
            model.add_constraint("chmode" + tag(t, s), {{ch, 1.0}, {b, -bat.p_ch_max}}, Sense::LessEqual, 0.0);
            model.add_constraint("dismode" + tag(t, s), {{dis, 1.0}, {b, bat.p_disch_max}}, Sense::LessEqual,
                                 bat.p_disch_max);
            std::vector<Term> terms{{soc, 1.0}, {ch, -bat.eta_ch * dt}, {dis, dt / bat.eta_disch}};
            double rhs = 0.0;
            if (t == 0)
                rhs = bat.soc_init;
            else
                terms.push_back({map.Soc(t - 1, s), -1.0});
            model.add_constraint("socbal" + tag(t, s), std::move(terms), Sense::Equal, rhs);
        }
    }
}

void add_drp(MilpModel& model, VariableMap& map, const HourScenarioGrid& load, const CaseOptions& options) {
    if (!options.drp_enabled) return;
    map.drp.assign(static_cast<std::size_t>(map.hours * map.scenarios), -1);
    const double flex = options.drp_flex;
    for (int s = 0; s < map.scenarios; ++s) {
        for (int t = 0; t < map.hours; ++t) {
            const double pl = load(t, s);
            double lo = -flex * pl;
            double hi = flex * pl;
            if (options.drp_literal) {
                // Post-DRP load itself in [-flex*PL, flex*PL], clamped at 0.
                lo = -pl;
                hi = (flex - 1.0) * pl;
            }
            map.drp[map.ts(t, s)] = model.add_continuous("d" + tag(t, s), lo, hi);
        }
        if (options.drp_energy_neutral && !options.drp_literal) {
            std::vector<Term> terms;
            for (int t = 0; t < map.hours; ++t) terms.push_back({map.Drp(t, s), 1.0});
            model.add_constraint("drpneutral_s" + std::to_string(s), std::move(terms), Sense::Equal, 0.0);
        }
    }
}

void add_power_balance(MilpModel& model, const VariableMap& map, const HourScenarioGrid& load,
                       const CaseOptions& options) {
    const bool drp = options.drp_enabled && !map.drp.empty();
    for (int s = 0; s < map.scenarios; ++s) {
        for (int t = 0; t < map.hours; ++t) {
            std::vector<Term> terms;
            for (int g = 0; g < map.generators; ++g) terms.push_back({map.P(g, t, s), 1.0});
            for (int i = 0; i < map.pv_units; ++i) terms.push_back({map.PV(i, t, s), 1.0});
            for (int j = 0; j < map.wt_units; ++j) terms.push_back({map.WT(j, t, s), 1.0});
            terms.push_back({map.Charge(t, s), -1.0});
            terms.push_back({map.Discharge(t, s), 1.0});
            terms.push_back({map.Ens(t, s), 1.0});
            if (drp) terms.push_back({map.Drp(t, s), -1.0});
            model.add_constraint("balance" + tag(t, s), std::move(terms), Sense::Equal, load(t, s));
            if (drp)
                model.add_constraint("enscap" + tag(t, s), {{map.Ens(t, s), 1.0}, {map.Drp(t, s), -1.0}},
                                     Sense::LessEqual, load(t, s));
        }
    }
}

double add_ur(MilpModel& model, VariableMap& map, const RiskConfig& risk, const ScenarioSet& scenarios,
              const HourScenarioGrid& load, const CaseOptions& options, double time_step) {
    const int S = map.scenarios;
    if (static_cast<int>(risk.targets.size()) != S)
        throw FormulationError("UR needs one target per scenario (" + std::to_string(S) + "), got " +
                               std::to_string(risk.targets.size()));
    if (!risk.eur) throw FormulationError("UR needs an EUR value (run the baseline first)");

    const double need = required_big_m(risk.targets, load, options, time_step);
    const double big_m = risk.big_m ? *risk.big_m : default_big_m(risk.targets, load, options, time_step);
    if (!(big_m > need))
        throw FormulationError("big_m " + format_double(big_m) + " does not exceed the largest |TENS - target| (" +
                               format_double(need) + "); the UR linearization would be inexact");

    map.tens.assign(static_cast<std::size_t>(S), -1);
    map.ur.assign(static_cast<std::size_t>(S), -1);
    map.w.assign(static_cast<std::size_t>(S), -1);
    for (int s = 0; s < S; ++s) {
        const auto si = static_cast<std::size_t>(s);
        const std::string sfx = "_s" + std::to_string(s);
        const double target = risk.targets[si];
        const int tens = model.add_continuous("TENS" + sfx, 0.0, kInf);
        const int ur = model.add_continuous("UR" + sfx, 0.0, kInf);
        const int w = model.add_binary("W" + sfx);
        map.tens[si] = tens;
        map.ur[si] = ur;
        map.w[si] = w;

        std::vector<Term> def{{tens, 1.0}};
        for (int t = 0; t < map.hours; ++t) def.push_back({map.Ens(t, s), -time_step});
        model.add_constraint("tensdef" + sfx, std::move(def), Sense::Equal, 0.0);
        // 0 <= UR + (TENS - target) <= M (1 - W)
        model.add_constraint("urlo" + sfx, {{ur, 1.0}, {tens, 1.0}}, Sense::GreaterEqual, target);
        model.add_constraint("urhi" + sfx, {{ur, 1.0}, {tens, 1.0}, {w, big_m}}, Sense::LessEqual, target + big_m);
        // 0 <= UR <= M W
        model.add_constraint("urw" + sfx, {{ur, 1.0}, {w, -big_m}}, Sense::LessEqual, 0.0);
    }
    std::vector<Term> cap;
    for (int s = 0; s < S; ++s) cap.push_back({map.ur[static_cast<std::size_t>(s)], scenarios.prob[static_cast<std::size_t>(s)]});
    model.add_constraint("urcap", std::move(cap), Sense::LessEqual, risk.lambda * *risk.eur);
    return big_m;
}

void set_objective_tens(MilpModel& model, const VariableMap& map, const ScenarioSet& scenarios,
                        double time_step) {
    std::vector<Term> terms;
    for (int s = 0; s < map.scenarios; ++s)
        for (int t = 0; t < map.hours; ++t)
            terms.push_back({map.Ens(t, s), scenarios.prob[static_cast<std::size_t>(s)] * time_step});
    model.set_objective(std::move(terms));
}

BuiltProblem build_problem(const MicrogridConfig& config, const ScenarioSet& scenarios,
                           const RiskConfig& risk, const CaseOptions& options) {
    check_dimensions(config, scenarios);
    if (auto v = validate_config(config); !v.empty())
        throw ConfigError("invalid microgrid config:\n" + format_violations(v));
    {
        RiskConfig checked = risk;
        checked.big_m.reset(); // checked against the scenario loads in add_ur
        if (auto v = validate_config(config, checked, options); !v.empty())
            throw FormulationError("invalid risk/case options:\n" + format_violations(v));
    }
    if (options.ur_enabled && risk.targets.empty())
        throw FormulationError("ur_enabled requires per-scenario targets");

    BuiltProblem out;
    out.load = effective_load(scenarios, options);
    out.map = declare_core_variables(out.model, config, scenarios, out.load, options);
    add_unit_commitment(out.model, out.map, config);
    add_battery(out.model, out.map, config);
    add_drp(out.model, out.map, out.load, options);
    add_power_balance(out.model, out.map, out.load, options);
    if (options.ur_enabled)
        out.big_m = add_ur(out.model, out.map, risk, scenarios, out.load, options, config.time_step);
    set_objective_tens(out.model, out.map, scenarios, config.time_step);
    out.model.validate();
    return out;
}

ScheduleSolution extract_schedule(const BuiltProblem& problem, const std::vector<double>& values,
                                  double time_step) {
    const auto& map = problem.map;
    ScheduleSolution out;
    out.hours = map.hours;
    out.scenarios = map.scenarios;
    out.values = values;
    out.tens.assign(static_cast<std::size_t>(map.scenarios), 0.0);
    out.ur.assign(static_cast<std::size_t>(map.scenarios), 0.0);
    for (int s = 0; s < map.scenarios; ++s) {
        double sum = 0.0;
        for (int t = 0; t < map.hours; ++t) sum += values[static_cast<std::size_t>(map.Ens(t, s))] * time_step;
        out.tens[static_cast<std::size_t>(s)] = sum;
        if (!map.ur.empty()) out.ur[static_cast<std::size_t>(s)] = values[static_cast<std::size_t>(map.ur[static_cast<std::size_t>(s)])];
    }
    return out;
}

} // namespace mgrisk
