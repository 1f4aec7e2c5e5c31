#include <doctest.h>

#include <algorithm>

#include "mgrisk/analysis.hpp"
#include "mgrisk/formulation.hpp"
#include "mgrisk/solver.hpp"
#include "support.hpp"

using namespace mgrisk;
using testing::flat_scenarios;
using testing::tiny_config;

namespace {

double value(const MipSolution& sol, int var) { return sol.values[static_cast<std::size_t>(var)]; }

void fix(MilpModel& m, int var, double v) { m.set_bounds(var, v, v); }

// UR problem on the tiny system where ENS is pinned to `tens[s]` in hour 0
// and zero afterwards, so TENS_s is known.
BuiltProblem pinned_ur_problem(const std::vector<double>& tens, const std::vector<double>& targets) {
    const auto c = tiny_config(4, 20);
    const auto sc = flat_scenarios(c, static_cast<int>(tens.size()), 20, 10, 10);
    RiskConfig r;
    r.targets = targets;
    r.eur = 1000.0;
    CaseOptions o;
    o.ur_enabled = true;
    auto p = build_problem(c, sc, r, o);
    for (int s = 0; s < static_cast<int>(tens.size()); ++s)
        for (int t = 0; t < c.horizon; ++t) fix(p.model, p.map.Ens(t, s), t == 0 ? tens[static_cast<std::size_t>(s)] : 0.0);
    return p;
}

} // namespace

TEST_CASE("binary count with every option on") {
    const auto c = default_study_config();
    const auto sc = generate_scenarios(c, default_profile_spec(c), 5, 42);
    RiskConfig r;
    r.targets.assign(5, 9.0);
    r.eur = 2.0;
    r.lambda = 0.9;
    CaseOptions o;
    o.drp_enabled = o.covid_enabled = o.ur_enabled = true;
    const auto p = build_problem(c, sc, r, o);
    CHECK(p.model.num_binaries() == 3 * 24 * 5 + 24 * 5 + 5);
    CHECK(p.map.w.size() == 5);
    CHECK(p.map.drp.size() == 24 * 5);
    CHECK(p.big_m > required_big_m(r.targets, p.load, o, 1.0));
}

TEST_CASE("gated families are absent when their option is off") {
    const auto c = tiny_config();
    const auto p = build_problem(c, flat_scenarios(c, 1, 20, 5, 5), {}, {});
    CHECK(p.map.drp.empty());
    CHECK(p.map.tens.empty());
    CHECK(p.map.ur.empty());
    CHECK(p.map.w.empty());
    for (const auto& v : p.model.variables()) {
        CHECK(v.name.rfind("UR_", 0) != 0);
        CHECK(v.name.rfind("W_", 0) != 0);
        CHECK(v.name.rfind("d_", 0) != 0);
    }
    CHECK(p.model.num_binaries() == 4 + 4);
}

TEST_CASE("build errors") {
    const auto c = tiny_config();
    auto sc = flat_scenarios(c, 2, 20, 5, 5);
    CaseOptions ur;
    ur.ur_enabled = true;
    CHECK_THROWS_AS(build_problem(c, sc, {}, ur), FormulationError);

    RiskConfig r;
    r.targets = {9.0};
    r.eur = 1.0;
    CHECK_THROWS_AS(build_problem(c, sc, r, ur), FormulationError); // one target for two scenarios

    r.targets = {9.0, 9.0};
    r.eur.reset();
    CHECK_THROWS_AS(build_problem(c, sc, r, ur), FormulationError);

    sc.pv_max.clear();
    CHECK_THROWS_AS(build_problem(c, sc, {}, {}), ConfigError);
}

TEST_CASE("zero load gives zero ENS") {
    const auto c = tiny_config(4, 0.0);
    const auto p = build_problem(c, flat_scenarios(c, 3, 0.0, 4, 4), {}, {});
    const auto sol = branch_and_bound(p.model);
    REQUIRE(sol.status == MipStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(0.0));
    for (int s = 0; s < 3; ++s)
        for (int t = 0; t < 4; ++t) CHECK(value(sol, p.map.Ens(t, s)) == doctest::Approx(0.0));
}

TEST_CASE("unit commitment") {
    auto c = tiny_config(2, 50);
    c.generators[0] = {"G1", 4, 5.0, 20.0, 8.0, 8.0, true, 10.0};

    SUBCASE("an off unit produces nothing") {
        auto p = build_problem(c, flat_scenarios(c, 1, 50, 0, 0), {}, {});
        auto sol = branch_and_bound(p.model);
        REQUIRE(sol.status == MipStatus::Optimal);
        auto bad = sol.values;
        bad[static_cast<std::size_t>(p.map.U(0, 1, 0))] = 0.0;
        bad[static_cast<std::size_t>(p.map.P(0, 1, 0))] = 1.0;
        const auto report = audit_solution(p.model, bad);
        CHECK(std::find(report.violated.begin(), report.violated.end(), "pmax_g0_t1_s0") != report.violated.end());

        fix(p.model, p.map.U(0, 1, 0), 0.0);
        sol = branch_and_bound(p.model);
        CHECK(value(sol, p.map.P(0, 1, 0)) == 0.0);
    }

    SUBCASE("ramp-up limit from the previous hour") {
        auto p = build_problem(c, flat_scenarios(c, 1, 50, 0, 0), {}, {});
        fix(p.model, p.map.U(0, 0, 0), 1.0);
        fix(p.model, p.map.U(0, 1, 0), 1.0);
        fix(p.model, p.map.P(0, 0, 0), 10.0);
        p.model.set_objective({{p.map.P(0, 1, 0), -1.0}});
        const auto lp = solve_lp(p.model);
        REQUIRE(lp.status == LpStatus::Optimal);
        CHECK(lp.values[static_cast<std::size_t>(p.map.P(0, 1, 0))] == doctest::Approx(18.0));
    }

    SUBCASE("hour 0 is anchored to the initial output") {
        auto p = build_problem(c, flat_scenarios(c, 1, 50, 0, 0), {}, {});
        p.model.set_objective({{p.map.P(0, 0, 0), -1.0}});
        CHECK(branch_and_bound(p.model).objective == doctest::Approx(-18.0));
        p.model.set_objective({{p.map.P(0, 0, 0), 1.0}});
        // Shutting down is exempt from the ramp-down limit.
        CHECK(branch_and_bound(p.model).objective == doctest::Approx(0.0));
    }

    SUBCASE("start-up may jump to any level") {
        c.generators[0].initial_on = false;
        c.generators[0].initial_power = 0.0;
        auto p = build_problem(c, flat_scenarios(c, 1, 50, 0, 0), {}, {});
        p.model.set_objective({{p.map.P(0, 0, 0), -1.0}});
        CHECK(branch_and_bound(p.model).objective == doctest::Approx(-20.0));
    }

    SUBCASE("minimum output while on") {
        auto p = build_problem(c, flat_scenarios(c, 1, 50, 0, 0), {}, {});
        fix(p.model, p.map.U(0, 1, 0), 1.0);
        p.model.set_objective({{p.map.P(0, 1, 0), 1.0}});
        CHECK(branch_and_bound(p.model).objective == doctest::Approx(5.0));
    }
}

TEST_CASE("battery recursion") {
    auto c = tiny_config(2, 0.0);
    c.battery = Battery{.energy_capacity = 40, .p_ch_max = 10, .p_disch_max = 10, .eta_ch = 0.9, .eta_disch = 0.9,
                        .soc_init = 20, .soc_min = 4, .soc_max = 36};

    SUBCASE("charging 10 kW for an hour") {
        auto p = build_problem(c, flat_scenarios(c, 1, 0.0, 10, 0), {}, {});
        fix(p.model, p.map.Charge(0, 0), 10.0);
        const auto sol = branch_and_bound(p.model);
        REQUIRE(sol.status == MipStatus::Optimal);
        CHECK(value(sol, p.map.Soc(0, 0)) == doctest::Approx(29.0));
        CHECK(value(sol, p.map.Mode(0, 0)) == 1.0);
        CHECK(value(sol, p.map.Discharge(0, 0)) == 0.0);
    }

    SUBCASE("idle battery keeps its charge") {
        auto cc = c;
        cc.horizon = 24;
        cc.base_load.assign(24, 0.0);
        auto p = build_problem(cc, flat_scenarios(cc, 1, 0.0, 0, 0), {}, {});
        for (int t = 0; t < 24; ++t) {
            fix(p.model, p.map.Charge(t, 0), 0.0);
            fix(p.model, p.map.Discharge(t, 0), 0.0);
        }
        const auto sol = branch_and_bound(p.model);
        REQUIRE(sol.status == MipStatus::Optimal);
        for (int t = 0; t < 24; ++t) CHECK(value(sol, p.map.Soc(t, 0)) == doctest::Approx(20.0));
    }

    SUBCASE("mode binary forbids simultaneous flows") {
        auto p = build_problem(c, flat_scenarios(c, 1, 0.0, 10, 0), {}, {});
        fix(p.model, p.map.Charge(0, 0), 5.0);
        fix(p.model, p.map.Discharge(0, 0), 5.0);
        CHECK(branch_and_bound(p.model).status == MipStatus::Infeasible);
    }

    SUBCASE("final charge may not fall below the initial charge") {
        auto p = build_problem(c, flat_scenarios(c, 1, 0.0, 0, 0), {}, {});
        fix(p.model, p.map.Charge(0, 0), 0.0);
        fix(p.model, p.map.Discharge(1, 0), 5.0);
        CHECK(branch_and_bound(p.model).status == MipStatus::Infeasible);
    }
}

TEST_CASE("effective load") {
    ScenarioSet s;
    s.scenario_count = 2;
    s.prob = {0.5, 0.5};
    s.load = HourScenarioGrid(1, 2, 100.0);
    s.load(0, 1) = 0.0;
    CaseOptions o;
    o.covid_enabled = true;
    const auto eff = effective_load(s, o);
    CHECK(eff(0, 0) == doctest::Approx(97.12).epsilon(1e-12));
    CHECK(eff(0, 1) == 0.0);
    o.cvd = 0.0;
    CHECK(effective_load(s, o)(0, 0) == 100.0);
    o.covid_enabled = false;
    o.cvd = -0.5;
    CHECK(effective_load(s, o)(0, 0) == 100.0);
}

TEST_CASE("demand response") {
    CaseOptions drp;
    drp.drp_enabled = true;

    SUBCASE("deviation bounds scale with the load") {
        const auto c = tiny_config(3, 100);
        const auto p = build_problem(c, flat_scenarios(c, 1, 100, 0, 0), {}, drp);
        REQUIRE(p.map.drp.size() == 3);
        const auto& v = p.model.variables()[static_cast<std::size_t>(p.map.Drp(1, 0))];
        CHECK(v.lower == doctest::Approx(-15.0));
        CHECK(v.upper == doctest::Approx(15.0));
        CHECK(p.model.find_variable("d_t1_s0") == p.map.Drp(1, 0));
    }

    SUBCASE("zero flexibility reproduces the plain case") {
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            const auto inst = testing::oracle_instance(seed);
            CaseOptions flat = drp;
            flat.drp_flex = 0.0;
            const auto a = branch_and_bound(build_problem(inst.config, inst.scenarios, {}, {}).model);
            const auto b = branch_and_bound(build_problem(inst.config, inst.scenarios, {}, flat).model);
            CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
        }
    }

    SUBCASE("energy neutrality") {
        auto c = tiny_config(24, 30);
        auto p = build_problem(c, flat_scenarios(c, 1, 30, 0, 0), {}, drp);
        fix(p.model, p.map.Drp(3, 0), 4.5);
        for (int t = 0; t < 24; ++t)
            if (t != 3 && t != 19) fix(p.model, p.map.Drp(t, 0), 0.0);
        const auto sol = branch_and_bound(p.model);
        REQUIRE(sol.status == MipStatus::Optimal);
        CHECK(value(sol, p.map.Drp(19, 0)) == doctest::Approx(-4.5));

        const auto free_sol = branch_and_bound(build_problem(c, flat_scenarios(c, 1, 30, 0, 0), {}, drp).model);
        double sum = 0.0;
        for (int t = 0; t < 24; ++t) sum += free_sol.values[static_cast<std::size_t>(p.map.Drp(t, 0))];
        CHECK(sum == doctest::Approx(0.0).epsilon(1e-9));
    }

    SUBCASE("shifted load is never served as negative ENS") {
        const auto c = tiny_config(4, 30);
        const auto p = build_problem(c, flat_scenarios(c, 1, 30, 0, 0), {}, drp);
        CHECK(p.model.variables()[static_cast<std::size_t>(p.map.Ens(0, 0))].upper == doctest::Approx(34.5));
        CHECK(p.model.find_variable("ENS_t0_s0") == p.map.Ens(0, 0));
    }

    SUBCASE("DRP never hurts") {
        for (std::uint64_t seed = 10; seed < 16; ++seed) {
            const auto inst = testing::oracle_instance(seed);
            const double base = branch_and_bound(build_problem(inst.config, inst.scenarios, {}, {}).model).objective;
            const double with = branch_and_bound(build_problem(inst.config, inst.scenarios, {}, drp).model).objective;
            CHECK(with <= base + 1e-7);
        }
    }
}

TEST_CASE("COVID scaling never raises expected ENS") {
    CaseOptions covid;
    covid.covid_enabled = true;
    for (std::uint64_t seed = 20; seed < 26; ++seed) {
        const auto inst = testing::oracle_instance(seed);
        const auto p = build_problem(inst.config, inst.scenarios, {}, covid);
        CHECK(p.load(2, 1) == doctest::Approx(0.9712 * inst.scenarios.load(2, 1)).epsilon(1e-12));
        const double base = branch_and_bound(build_problem(inst.config, inst.scenarios, {}, {}).model).objective;
        CHECK(branch_and_bound(p.model).objective <= base + 1e-7);
    }
}

TEST_CASE("power balance") {
    auto c = tiny_config(2, 12);
    SUBCASE("no supply forces ENS to the load") {
        auto p = build_problem(c, flat_scenarios(c, 1, 12, 0, 0), {}, {});
        for (int t = 0; t < 2; ++t) {
            fix(p.model, p.map.U(0, t, 0), 0.0);
            fix(p.model, p.map.Discharge(t, 0), 0.0);
        }
        const auto sol = branch_and_bound(p.model);
        REQUIRE(sol.status == MipStatus::Optimal);
        CHECK(value(sol, p.map.Ens(0, 0)) == doctest::Approx(12.0));
        CHECK(value(sol, p.map.Ens(1, 0)) == doctest::Approx(12.0));
    }
    SUBCASE("renewables alone cover the load") {
        c.generators[0].initial_on = false;
        c.generators[0].initial_power = 0;
        auto p = build_problem(c, flat_scenarios(c, 1, 12, 10, 10), {}, {});
        for (int t = 0; t < 2; ++t) fix(p.model, p.map.U(0, t, 0), 0.0);
        CHECK(branch_and_bound(p.model).objective == doctest::Approx(0.0));
    }
    SUBCASE("charging draws from the bus") {
        auto p = build_problem(c, flat_scenarios(c, 1, 12, 10, 10), {}, {});
        const auto& row = p.model.constraints()[static_cast<std::size_t>(
            std::find_if(p.model.constraints().begin(), p.model.constraints().end(),
                         [](const Constraint& r) { return r.name == "balance_t0_s0"; }) -
            p.model.constraints().begin())];
        for (const auto& term : row.terms) {
            if (term.var == p.map.Charge(0, 0)) CHECK(term.coef == -1.0);
            if (term.var == p.map.Discharge(0, 0)) CHECK(term.coef == 1.0);
            if (term.var == p.map.Ens(0, 0)) CHECK(term.coef == 1.0);
        }
        CHECK(row.rhs == 12.0);
    }
}

TEST_CASE("upside risk rows") {
    SUBCASE("published rows") {
        auto p = pinned_ur_problem({8.43, 11.887}, {9.0, 9.0});
        const auto sol = branch_and_bound(p.model);
        REQUIRE(sol.status == MipStatus::Optimal);
        CHECK(value(sol, p.map.ur[0]) == doctest::Approx(0.57).epsilon(1e-9));
        CHECK(value(sol, p.map.w[0]) == 1.0);
        CHECK(value(sol, p.map.ur[1]) == doctest::Approx(0.0));
        CHECK(value(sol, p.map.w[1]) == 0.0);
        CHECK(value(sol, p.map.tens[1]) == doctest::Approx(11.887));
    }

    SUBCASE("TENS on the target") {
        auto p = pinned_ur_problem({9.0}, {9.0});
        for (double w : {0.0, 1.0}) {
            auto q = p.model;
            fix(q, p.map.w[0], w);
            const auto sol = branch_and_bound(q);
            REQUIRE(sol.status == MipStatus::Optimal);
            CHECK(value(sol, p.map.ur[0]) == doctest::Approx(0.0));
        }
    }

    SUBCASE("the oracle recovers max(0, target - TENS)") {
        auto p = pinned_ur_problem({3.0, 12.5}, {5.0, 5.0});
        const auto orc = exhaustive_oracle(p.model);
        REQUIRE(orc.status == MipStatus::Optimal);
        CHECK(value(orc, p.map.ur[0]) == doctest::Approx(2.0));
        CHECK(value(orc, p.map.ur[1]) == doctest::Approx(0.0));
    }

    SUBCASE("linearization is exact across a grid") {
        const std::vector<double> grid{0.0, 0.5, 4.0, 8.99, 9.0, 9.01, 14.0, 20.0};
        for (double a : grid)
            for (double b : {0.0, 9.0, 17.5}) {
                auto p = pinned_ur_problem({a, b}, {9.0, 9.0});
                const auto sol = branch_and_bound(p.model);
                REQUIRE(sol.status == MipStatus::Optimal);
                CHECK(value(sol, p.map.ur[0]) == doctest::Approx(passive_ur(a, 9.0)).epsilon(1e-9));
                CHECK(value(sol, p.map.ur[1]) == doctest::Approx(passive_ur(b, 9.0)).epsilon(1e-9));
            }
    }

    SUBCASE("expected UR cap") {
        const auto c = tiny_config(4, 20);
        const auto sc = flat_scenarios(c, 2, 20, 10, 10);
        RiskConfig r;
        r.targets = {9.0, 9.0};
        r.eur = 4.0;
        r.lambda = 0.5;
        CaseOptions o;
        o.ur_enabled = true;
        auto p = build_problem(c, sc, r, o);
        for (int s = 0; s < 2; ++s)
            for (int t = 0; t < 4; ++t) fix(p.model, p.map.Ens(t, s), t == 0 ? 3.0 : 0.0);
        // Passive UR would be 6 per scenario, far above 0.5 * 4.
        CHECK(branch_and_bound(p.model).status == MipStatus::Infeasible);
    }

    SUBCASE("big-M too small is rejected") {
        const auto c = tiny_config(4, 20);
        RiskConfig r;
        r.targets = {9.0};
        r.eur = 1.0;
        r.big_m = 50.0;
        CaseOptions o;
        o.ur_enabled = true;
        CHECK_THROWS_AS(build_problem(c, flat_scenarios(c, 1, 20, 0, 0), r, o), FormulationError);
        r.big_m = 80.0 + 1e-6; // 4 h x 20 kW
        CHECK_NOTHROW(build_problem(c, flat_scenarios(c, 1, 20, 0, 0), r, o));
    }
}

TEST_CASE("expected-TENS objective") {
    SUBCASE("single scenario sums ENS") {
        const auto c = tiny_config(4, 20);
        const auto p = build_problem(c, flat_scenarios(c, 1, 20, 0, 0), {}, {});
        const auto coef = p.model.objective_vector();
        double total = 0.0;
        for (double v : coef) total += v;
        CHECK(total == 4.0);
        for (int t = 0; t < 4; ++t) CHECK(coef[static_cast<std::size_t>(p.map.Ens(t, 0))] == 1.0);
    }

    SUBCASE("published scenario averages") {
        const auto c = tiny_config(2, 20);
        const auto p = build_problem(c, flat_scenarios(c, 5, 20, 0, 0), {}, {});
        const std::vector<double> tens{0.0, 8.43, 11.887, 11.78, 5.535};
        std::vector<double> x(static_cast<std::size_t>(p.model.num_variables()), 0.0);
        for (int s = 0; s < 5; ++s) {
            x[static_cast<std::size_t>(p.map.Ens(0, s))] = tens[static_cast<std::size_t>(s)] / 2;
            x[static_cast<std::size_t>(p.map.Ens(1, s))] = tens[static_cast<std::size_t>(s)] / 2;
        }
        CHECK(std::abs(p.model.evaluate_objective(x) - 7.5265) < 1e-3);
        std::fill(x.begin(), x.end(), 0.0);
        CHECK(p.model.evaluate_objective(x) == 0.0);
    }

    SUBCASE("time step scales energy") {
        auto c = tiny_config(4, 20);
        c.time_step = 0.25;
        const auto p = build_problem(c, flat_scenarios(c, 2, 20, 0, 0), {}, {});
        CHECK(p.model.objective_vector()[static_cast<std::size_t>(p.map.Ens(0, 1))] == doctest::Approx(0.125));
    }
}

TEST_CASE("schedule extraction") {
    auto p = pinned_ur_problem({2.0, 10.0}, {9.0, 9.0});
    const auto sol = branch_and_bound(p.model);
    const auto sched = extract_schedule(p, sol.values, 1.0);
    CHECK(sched.tens[0] == doctest::Approx(2.0));
    CHECK(sched.tens[1] == doctest::Approx(10.0));
    CHECK(sched.ur[0] == doctest::Approx(7.0));
    CHECK(sched.ur[1] == doctest::Approx(0.0));
}
