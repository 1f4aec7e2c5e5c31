#include <doctest.h>

#include "mgrisk/analysis.hpp"
#include "support.hpp"

using namespace mgrisk;

namespace {

CaseResult stub(double tens, double ur, SpilledEnergy se = {}) {
    CaseResult r;
    r.name = "stub";
    r.scenario_seed = 42;
    r.prob.assign(5, 0.2);
    r.tens.assign(5, tens);
    r.expected_tens = tens;
    r.expected_ur = ur;
    r.spilled = se;
    return r;
}

const PercentDelta& metric(const std::vector<PercentDelta>& d, const std::string& name) {
    for (const auto& x : d)
        if (x.metric == name) return x;
    FAIL("missing metric " << name);
    return d.front();
}

} // namespace

TEST_CASE("passive UR") {
    CHECK(passive_ur(8.43, 9) == doctest::Approx(0.57).epsilon(1e-12));
    CHECK(passive_ur(11.887, 9) == 0.0);
    CHECK(passive_ur(9, 9) == 0.0);
    CHECK(passive_ur(0, 9) == 9.0);
}

TEST_CASE("expectations over scenarios") {
    const std::vector<double> p(5, 0.2);
    CHECK(expected_over_scenarios({9, 0.57, 0, 0, 3.465}, p) == doctest::Approx(2.607).epsilon(1e-9));
    CHECK(std::abs(expected_over_scenarios({0, 8.43, 11.887, 11.78, 5.535}, p) - 7.5265) < 1e-3);
    CHECK(expected_over_scenarios({4.2, 4.2, 4.2, 4.2, 4.2}, p) == doctest::Approx(4.2));
    CHECK_THROWS_AS(expected_over_scenarios({1, 2}, {0.5, 0.6}), AnalysisError);
    CHECK_THROWS_AS(expected_over_scenarios({1, 2, 3}, {0.5, 0.5}), AnalysisError);
}

TEST_CASE("default targets") {
    CHECK(default_targets(7.5265, 3) == std::vector<double>{10, 10, 10});
    CHECK(default_targets(5.0 / 1.2, 1) == std::vector<double>{5});
    CHECK(default_targets(0.0, 2) == std::vector<double>{0, 0});
}

TEST_CASE("spilled energy") {
    SUBCASE("additivity") {
        const auto se = make_spilled_energy(594.867, 159.389);
        CHECK(se.total == doctest::Approx(754.256).epsilon(1e-12));
        CHECK(se.total == se.pv + se.wt);
    }

    const auto c = default_study_config();
    const auto sc = testing::flat_scenarios(c, 1, 50, 10, 10);
    const auto p = build_problem(c, sc, {}, {});
    std::vector<double> x(static_cast<std::size_t>(p.model.num_variables()), 0.0);

    SUBCASE("full dispatch spills nothing") {
        for (int v : p.map.pv) x[static_cast<std::size_t>(v)] = 10;
        for (int v : p.map.wt) x[static_cast<std::size_t>(v)] = 10;
        const auto se = spilled_energy(p, sc, x, 1.0);
        CHECK(se.pv == 0.0);
        CHECK(se.wt == 0.0);
        CHECK(se.total == 0.0);
    }

    SUBCASE("six PV units at 7 of 10 kW for a day") {
        for (int v : p.map.pv) x[static_cast<std::size_t>(v)] = 7;
        for (int v : p.map.wt) x[static_cast<std::size_t>(v)] = 10;
        const auto se = spilled_energy(p, sc, x, 1.0);
        CHECK(se.pv == doctest::Approx(432.0));
        CHECK(se.wt == 0.0);
        CHECK(se.total == se.pv + se.wt);
    }

    SUBCASE("dispatch above availability") {
        for (int v : p.map.pv) x[static_cast<std::size_t>(v)] = 10;
        x[static_cast<std::size_t>(p.map.WT(1, 5, 0))] = 10.5;
        CHECK_THROWS_AS(spilled_energy(p, sc, x, 1.0), AnalysisError);
        x[static_cast<std::size_t>(p.map.WT(1, 5, 0))] = 10 + 1e-9; // solver noise
        CHECK_NOTHROW(spilled_energy(p, sc, x, 1.0));
        x.pop_back();
        CHECK_THROWS_AS(spilled_energy(p, sc, x, 1.0), AnalysisError);
    }
}

TEST_CASE("case comparison") {
    SUBCASE("published DRP reduction") {
        const auto d = compare_cases(stub(7.5265, 2.607), stub(3.8988, 2.2862));
        CHECK(*metric(d, "expected_tens").percent == doctest::Approx(-48.2).epsilon(0.1 / 48.2));
    }
    SUBCASE("chained COVID ratio") {
        const auto d = compare_cases(stub(3.8988, 2.2862), stub(3.4712, 1.0));
        CHECK(*metric(d, "expected_tens").percent == doctest::Approx(-10.97).epsilon(0.01 / 10.97));
        const auto vs_base = compare_cases(stub(7.5265, 2.607), stub(3.4712, 1.0));
        CHECK(*metric(vs_base, "expected_tens").percent == doctest::Approx(-53.88).epsilon(0.01 / 53.88));
    }
    SUBCASE("identical cases") {
        const auto r = stub(5.0, 1.0, make_spilled_energy(3, 4));
        for (const auto& x : compare_cases(r, r)) {
            REQUIRE(x.percent);
            CHECK(*x.percent == 0.0);
        }
        CHECK(compare_cases(r, r).size() == 5);
    }
    SUBCASE("zero base is undefined") {
        const auto d = compare_cases(stub(0.0, 1.0), stub(2.0, 1.0));
        CHECK(!metric(d, "expected_tens").percent);
        CHECK(!metric(d, "se_wt").percent);
        CHECK(metric(d, "expected_ur").percent);
    }
    SUBCASE("different scenarios") {
        auto other = stub(3.0, 1.0);
        other.scenario_seed = 7;
        CHECK_THROWS_AS(compare_cases(stub(5.0, 1.0), other), AnalysisError);
        other = stub(3.0, 1.0);
        other.prob = {0.5, 0.5};
        CHECK_THROWS_AS(compare_cases(stub(5.0, 1.0), other), AnalysisError);
    }
}

TEST_CASE("solve_case on the study system") {
    const auto c = default_study_config();
    const auto sc = generate_scenarios(c, default_profile_spec(c), 5, 42);

    const auto base = solve_case(c, sc, {}, {}, {}, "base");
    REQUIRE(base.status == MipStatus::Optimal);
    CHECK(base.audit.passed);
    CHECK(base.targets == default_targets(base.expected_tens, 5));
    CHECK(base.expected_tens == doctest::Approx(expected_over_scenarios(base.tens, base.prob)));
    for (std::size_t s = 0; s < 5; ++s) {
        CHECK(base.ur[s] == doctest::Approx(passive_ur(base.tens[s], base.targets[s])));
        CHECK(base.passive[s] == base.ur[s]);
    }
    CHECK(base.spilled.total == base.spilled.pv + base.spilled.wt);
    CHECK(!base.lambda);

    RiskConfig r;
    r.lambda = 0.8;
    CaseOptions ur;
    ur.ur_enabled = true;
    const auto with = solve_case(c, sc, r, ur, {}, "ur");
    REQUIRE(with.eur);
    CHECK(*with.eur == doctest::Approx(base.expected_ur).epsilon(1e-9));
    CHECK(with.targets == base.targets);
    CHECK(with.expected_ur <= 0.8 * *with.eur + 1e-7);
    CHECK(with.expected_tens >= base.expected_tens - 1e-7);
    for (std::size_t s = 0; s < 5; ++s) CHECK(std::abs(with.ur[s] - with.passive[s]) <= 1e-6);

    RiskConfig bad;
    bad.lambda = 2.0;
    CHECK_THROWS(solve_case(c, sc, bad, ur));
}

TEST_CASE("lambda sweep") {
    const auto c = default_study_config();
    const auto sc = generate_scenarios(c, default_profile_spec(c), 5, 42);

    const auto sweep = lambda_sweep(c, sc, {}, {}, {1.0, 0.0, 0.5, 0.9}, {}, 2);
    REQUIRE(sweep.all_ok());
    REQUIRE(sweep.points.size() == 4);
    CHECK(sweep.points[0].lambda == 0.0);
    CHECK(sweep.points[3].lambda == 1.0);

    const auto& top = sweep.points[3].result;
    CHECK(std::abs(top.expected_tens - sweep.baseline.expected_tens) <= 1e-6);

    for (double u : sweep.points[0].result.ur) CHECK(std::abs(u) <= 1e-7);

    for (std::size_t k = 1; k < sweep.points.size(); ++k) {
        CHECK(sweep.points[k].result.expected_tens <= sweep.points[k - 1].result.expected_tens + 1e-7);
        CHECK(sweep.points[k].result.expected_ur >= sweep.points[k - 1].result.expected_ur - 1e-7);
    }

    const auto serial = lambda_sweep(c, sc, {}, {}, {0.0, 0.5, 0.9, 1.0}, {}, 1);
    for (std::size_t k = 0; k < 4; ++k) CHECK(serial.points[k].result.values == sweep.points[k].result.values);

    CHECK_THROWS_AS(lambda_sweep(c, sc, {}, {}, {}), AnalysisError);
    CHECK_THROWS_AS(lambda_sweep(c, sc, {}, {}, {0.5, 1.5}), AnalysisError);
}
