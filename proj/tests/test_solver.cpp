#include <doctest.h>

#include <random>
#include <sstream>

#include "mgrisk/solver.hpp"
#include "support.hpp"

using namespace mgrisk;

TEST_CASE("single bound LP") {
    MilpModel m;
    int x = m.add_continuous("x", 0, 10);
    m.add_constraint("c", {{x, 1}}, Sense::GreaterEqual, 3);
    m.set_objective({{x, 1}});
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(3));
    CHECK(audit_solution(m, sol.values).max_residual <= 1e-7);
}

TEST_CASE("textbook") {
    MilpModel m;
    int x = m.add_continuous("x", 0, kInf);
    int y = m.add_continuous("y", 0, kInf);
    m.add_constraint("c", {{x, 1}, {y, 1}}, Sense::LessEqual, 1);
    m.set_objective({{x, -1}, {y, -1}});
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-1));
}

TEST_CASE("infeasible and unbounded LPs") {
    MilpModel a;
    int x = a.add_continuous("x", 0, 1);
    a.add_constraint("c", {{x, 1}}, Sense::GreaterEqual, 2);
    CHECK(solve_lp(a).status == LpStatus::Infeasible);
    CHECK(branch_and_bound(a).status == MipStatus::Infeasible);

    MilpModel b;
    int y = b.add_continuous("y", 0, kInf);
    b.set_objective({{y, -1}});
    CHECK(solve_lp(b).status == LpStatus::Unbounded);
}

TEST_CASE("contradictory bounds on binaries") {
    MilpModel m;
    int p = m.add_binary("p");
    int q = m.add_binary("q");
    m.add_constraint("both", {{p, 1}, {q, 1}}, Sense::GreaterEqual, 2);
    m.add_constraint("not_both", {{p, 1}, {q, 1}}, Sense::LessEqual, 1);
    m.set_objective({{p, 1}});
    CHECK(branch_and_bound(m).status == MipStatus::Infeasible);
    CHECK(exhaustive_oracle(m).status == MipStatus::Infeasible);
}

TEST_CASE("integral root needs one node") {
    MilpModel m;
    int x = m.add_continuous("x", 0, 10);
    int b = m.add_binary("b");
    m.add_constraint("c", {{x, 1}, {b, -5}}, Sense::GreaterEqual, 0);
    m.set_objective({{x, 1}, {b, 1}});
    const auto lp = solve_lp(m);
    const auto mip = branch_and_bound(m);
    CHECK(mip.status == MipStatus::Optimal);
    CHECK(mip.nodes_explored == 1);
    CHECK(mip.objective == doctest::Approx(lp.objective));
}

TEST_CASE("oracle trivial cases") {
    MilpModel none;
    int x = none.add_continuous("x", 0, 10);
    none.add_constraint("c", {{x, 1}}, Sense::GreaterEqual, 3);
    none.set_objective({{x, 2}});
    CHECK(exhaustive_oracle(none).objective == doctest::Approx(solve_lp(none).objective));

    MilpModel one;
    int b = one.add_binary("b");
    one.set_objective({{b, 1}});
    CHECK(exhaustive_oracle(one).objective == 0.0);

    MilpModel big;
    for (int i = 0; i < kOracleBinaryCap + 1; ++i) big.add_binary("b" + std::to_string(i));
    CHECK_THROWS_AS(exhaustive_oracle(big), std::invalid_argument);
}

TEST_CASE("knapsack needs branching") {
    // max 5a + 4b + 3c s.t. 2a + 3b + c <= 5 (as a minimization)
    MilpModel m;
    int a = m.add_binary("a"), b = m.add_binary("b"), c = m.add_binary("c");
    m.add_constraint("cap", {{a, 2}, {b, 3}, {c, 1}}, Sense::LessEqual, 5);
    m.add_constraint("pick", {{a, 1}, {b, 1}, {c, 1}}, Sense::LessEqual, 2);
    m.set_objective({{a, -5}, {b, -4}, {c, -3}});
    SolverOptions o;
    o.rounding_heuristic = false;
    const auto mip = branch_and_bound(m, o);
    CHECK(mip.status == MipStatus::Optimal);
    CHECK(mip.objective == doctest::Approx(-9));
    CHECK(mip.objective == doctest::Approx(exhaustive_oracle(m).objective));
    CHECK(mip.gap <= o.mip_gap_tol);
}

namespace {

// Random mixed-binary covering problem: min c.x + f.y, sum_j a_ij x_j >= d_i,
// x_j <= U_j y_j.
MilpModel random_facility(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    MilpModel m;
    std::vector<int> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    std::vector<Term> obj;
    for (int j = 0; j < n; ++j) {
        x[static_cast<std::size_t>(j)] = m.add_continuous("x" + std::to_string(j), 0, 10);
        y[static_cast<std::size_t>(j)] = m.add_binary("y" + std::to_string(j));
        obj.push_back({x[static_cast<std::size_t>(j)], 1 + 4 * U(rng)});
        obj.push_back({y[static_cast<std::size_t>(j)], 5 + 20 * U(rng)});
        m.add_constraint("link" + std::to_string(j), {{x[static_cast<std::size_t>(j)], 1}, {y[static_cast<std::size_t>(j)], -10}},
                         Sense::LessEqual, 0);
    }
    for (int i = 0; i < 3; ++i) {
        std::vector<Term> row;
        for (int j = 0; j < n; ++j) row.push_back({x[static_cast<std::size_t>(j)], 0.2 + U(rng)});
        m.add_constraint("demand" + std::to_string(i), row, Sense::GreaterEqual, 5 + 10 * U(rng));
    }
    m.set_objective(obj);
    return m;
}

} // namespace

TEST_CASE("branch and bound matches the oracle on random instances") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const MilpModel m = random_facility(seed, 8);
        const auto bb = branch_and_bound(m);
        const auto orc = exhaustive_oracle(m);
        REQUIRE(bb.status == MipStatus::Optimal);
        CHECK(std::abs(bb.objective - orc.objective) <= 1e-6);
        CHECK(solve_lp(m).objective <= bb.objective + 1e-9);
        CHECK(audit_solution(m, bb.values).passed);
    }
}

TEST_CASE("LP relaxation never beats the MIP on formulation instances") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        const auto inst = testing::oracle_instance(seed);
        const double lp = solve_lp(inst.problem.model).objective;
        const auto mip = branch_and_bound(inst.problem.model);
        CHECK(lp <= mip.objective + 1e-7);
    }
}

TEST_CASE("oracle equivalence without decomposition or heuristics") {
    SolverOptions plain;
    plain.decompose = false;
    plain.rounding_heuristic = false;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto inst = testing::oracle_instance(seed);
        REQUIRE(inst.free_binaries == 20);
        const auto bb = branch_and_bound(inst.problem.model, plain);
        const auto orc = exhaustive_oracle(inst.problem.model);
        CHECK(std::abs(bb.objective - orc.objective) <= 1e-6);
    }
}

TEST_CASE("weak duality") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const MilpModel m = random_facility(seed, 6);
        const auto lp = solve_lp(m);
        REQUIRE(lp.status == LpStatus::Optimal);
        REQUIRE(lp.duals.size() == static_cast<std::size_t>(m.num_constraints()));
        // Dual objective: y.b + sum over columns of the bound the reduced cost pushes against.
        double dual = 0.0;
        for (std::size_t i = 0; i < lp.duals.size(); ++i) dual += lp.duals[i] * m.constraints()[i].rhs;
        const auto c = m.objective_vector();
        std::vector<double> d = c;
        for (std::size_t i = 0; i < lp.duals.size(); ++i)
            for (const auto& t : m.constraints()[i].terms) d[static_cast<std::size_t>(t.var)] -= lp.duals[i] * t.coef;
        for (std::size_t j = 0; j < d.size(); ++j) {
            const auto& v = m.variables()[j];
            const double bound = d[j] >= 0 ? v.lower : v.upper;
            if (d[j] != 0.0) dual += d[j] * bound;
        }
        CHECK(lp.objective >= dual - 1e-6);
        CHECK(lp.objective == doctest::Approx(dual).epsilon(1e-6));
    }
}

TEST_CASE("dual signs follow the minimization convention") {
    MilpModel m;
    int x = m.add_continuous("x", 0, kInf);
    int y = m.add_continuous("y", 0, kInf);
    m.add_constraint("ge", {{x, 1}, {y, 1}}, Sense::GreaterEqual, 4);
    m.add_constraint("le", {{x, 1}}, Sense::LessEqual, 1);
    m.set_objective({{x, 1}, {y, 3}});
    const auto lp = solve_lp(m);
    CHECK(lp.objective == doctest::Approx(10.0));
    CHECK(lp.duals[0] >= -1e-9); // binding >= row
    CHECK(lp.duals[1] <= 1e-9);  // binding <= row
}

TEST_CASE("determinism") {
    const auto inst = testing::oracle_instance(77);
    const auto a = branch_and_bound(inst.problem.model);
    const auto b = branch_and_bound(inst.problem.model);
    CHECK(a.values == b.values);
    CHECK(a.nodes_explored == b.nodes_explored);
    CHECK(solve_lp(inst.problem.model).values == solve_lp(inst.problem.model).values);
}

TEST_CASE("incumbents never get worse") {
    SolverOptions o;
    o.decompose = false;
    o.rounding_heuristic = false;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto mip = branch_and_bound(random_facility(seed, 10), o);
        for (std::size_t k = 1; k < mip.incumbent_history.size(); ++k)
            CHECK(mip.incumbent_history[k] <= mip.incumbent_history[k - 1]);
        if (!mip.incumbent_history.empty()) CHECK(mip.incumbent_history.back() == doctest::Approx(mip.objective));
    }
}

TEST_CASE("node limit returns the incumbent") {
    SolverOptions o;
    o.node_limit = 2;
    o.rounding_heuristic = true;
    const auto mip = branch_and_bound(random_facility(3, 12), o);
    CHECK((mip.status == MipStatus::NodeLimit || mip.status == MipStatus::Optimal));
    CHECK(mip.nodes_explored <= 2);
}

TEST_CASE("node trace is CSV") {
    std::ostringstream trace;
    SolverOptions o;
    o.node_trace = &trace;
    o.rounding_heuristic = false;
    branch_and_bound(random_facility(4, 5), o);
    const std::string text = trace.str();
    REQUIRE(!text.empty());
    CHECK(std::count(text.begin(), text.end(), '\n') >= 1);
    CHECK(text.find(',') != std::string::npos);
}

TEST_CASE("audit catches perturbations") {
    const auto inst = testing::oracle_instance(9);
    const auto mip = branch_and_bound(inst.problem.model);
    auto good = audit_solution(inst.problem.model, mip.values);
    CHECK(good.passed);
    CHECK(good.max_residual <= 1e-7);

    auto bad = mip.values;
    const int ens = inst.problem.map.Ens(2, 1);
    bad[static_cast<std::size_t>(ens)] += 1.0;
    const auto report = audit_solution(inst.problem.model, bad);
    CHECK(!report.passed);
    CHECK(report.max_residual >= 1.0 - 1e-9);
    CHECK(std::find(report.violated.begin(), report.violated.end(), "balance_t2_s1") != report.violated.end());

    auto frac = mip.values;
    frac[static_cast<std::size_t>(inst.problem.map.U(0, 3, 0))] = 0.5;
    CHECK(audit_solution(inst.problem.model, frac).max_integrality_violation == doctest::Approx(0.5));

    CHECK(!audit_solution(inst.problem.model, {}).passed);
}

TEST_CASE("connected components follow shared rows") {
    MilpModel m;
    int a = m.add_continuous("a", 0, 1), b = m.add_continuous("b", 0, 1);
    int c = m.add_continuous("c", 0, 1), d = m.add_continuous("d", 0, 1);
    m.add_constraint("ab", {{a, 1}, {b, 1}}, Sense::LessEqual, 1);
    m.add_constraint("cd", {{d, 1}, {c, 1}}, Sense::LessEqual, 1);
    auto comps = connected_components(m);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0] == std::vector<int>{a, b});
    CHECK(comps[1] == std::vector<int>{c, d});
    m.add_constraint("bc", {{b, 1}, {c, 1}}, Sense::LessEqual, 1);
    CHECK(connected_components(m).size() == 1);
}
