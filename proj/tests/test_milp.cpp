#include <doctest.h>

#include <sstream>

#include "mgrisk/formulation.hpp"
#include "mgrisk/milp.hpp"
#include "support.hpp"

using namespace mgrisk;

TEST_CASE("model invariants") {
    MilpModel m;
    const int x = m.add_continuous("x", 0, 5);
    const int b = m.add_binary("b");
    CHECK(m.num_binaries() == 1);
    CHECK(m.find_variable("b") == b);
    CHECK(m.find_variable("nope") == -1);
    CHECK_THROWS_AS(m.add_constraint("dangling", {{x, 1}, {7, 1}}, Sense::LessEqual, 1), ModelError);

    m.set_bounds(x, 4, 2);
    CHECK_THROWS_AS(m.validate(), ModelError);
    m.set_bounds(x, 0, 5);
    m.set_bounds(b, 0, 2);
    CHECK_THROWS_AS(m.validate(), ModelError);
    m.set_bounds(b, 1, 1);
    CHECK_NOTHROW(m.validate());
}

TEST_CASE("objective evaluation sums duplicate terms and the constant") {
    MilpModel m;
    const int x = m.add_continuous("x", 0, 5);
    const int y = m.add_continuous("y", 0, 5);
    m.set_objective({{x, 2}, {y, -1}, {x, 1}}, 4.0);
    const auto c = m.objective_vector();
    CHECK(c[0] == 3.0);
    CHECK(c[1] == -1.0);
    CHECK(m.evaluate_objective({1.0, 2.0}) == doctest::Approx(5.0));
    Constraint row{"r", {{x, 1}, {y, 3}}, Sense::Equal, 0};
    CHECK(row_activity(row, {2.0, 1.0}) == 5.0);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.0, 1.0, -2.5, 0.1, 32.0 / 3.0, 1e-17, 6.02e23, -0.0288})
        CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(kInf) == "inf");
    CHECK(format_double(-kInf) == "-inf");
    CHECK(format_double(3.0) == "3");
}

TEST_CASE("LP text round-trip") {
    MilpModel m;
    const int x = m.add_continuous("x", -kInf, kInf);
    const int y = m.add_continuous("y", 1.5, 32.0 / 3.0);
    const int z = m.add_binary("z");
    m.add_constraint("c1", {{x, 1}, {y, -2}, {z, 0.1}}, Sense::LessEqual, 7);
    m.add_constraint("c2", {{x, 1}}, Sense::GreaterEqual, -3);
    m.add_constraint("c3", {{y, 1}, {z, 1}}, Sense::Equal, 2);
    m.set_objective({{x, 1}, {z, -4}}, 0.0);

    const std::string text = to_lp_string(m);
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Binaries") != std::string::npos);
    const MilpModel back = parse_lp(text);
    REQUIRE(back.num_variables() == 3);
    REQUIRE(back.num_constraints() == 3);
    for (int j = 0; j < 3; ++j) {
        const auto& a = m.variables()[static_cast<std::size_t>(j)];
        const auto& b = back.variables()[static_cast<std::size_t>(j)];
        CHECK(a.name == b.name);
        CHECK(a.kind == b.kind);
        CHECK(a.lower == b.lower);
        CHECK(a.upper == b.upper);
    }
    CHECK(to_lp_string(back) == text);

    std::istringstream is(text);
    CHECK(to_lp_string(read_lp(is)) == text);
}

TEST_CASE("LP export of the full formulation is stable") {
    const auto inst = testing::oracle_instance(5);
    const std::string a = to_lp_string(inst.problem.model);
    const std::string b = to_lp_string(testing::oracle_instance(5).problem.model);
    CHECK(a == b);
    const MilpModel back = parse_lp(a);
    CHECK(back.num_variables() == inst.problem.model.num_variables());
    CHECK(back.num_constraints() == inst.problem.model.num_constraints());
    CHECK(to_lp_string(back) == a);
}

TEST_CASE("LP reader rejects what it does not support") {
    CHECK_THROWS_AS(parse_lp("Maximize\n obj: x\nSubject To\nEnd\n"), ModelError);
    CHECK_THROWS_AS(parse_lp("Minimize\n obj: x\nSubject To\n c: x <= \nEnd\n"), ModelError);
}
