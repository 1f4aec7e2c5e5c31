#pragma once

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgrisk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };
enum class Sense { LessEqual, Equal, GreaterEqual };

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = kInf;
};

struct Term {
    int var = 0;
    double coef = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Linear model with continuous and binary columns. The objective is always
/// minimized. Variables and constraints keep insertion order, which fixes the
/// order of every export and every solver tie-break.
class MilpModel {
public:
    int add_variable(std::string name, VarKind kind, double lower, double upper);
    int add_continuous(std::string name, double lower, double upper) {
        return add_variable(std::move(name), VarKind::Continuous, lower, upper);
    }
    int add_binary(std::string name) { return add_variable(std::move(name), VarKind::Binary, 0.0, 1.0); }

    int add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs);

    void set_objective(std::vector<Term> terms, double constant = 0.0);
    void add_objective_term(int var, double coef);

    /// Tightens or relaxes a column's bounds (used by branching and fixing).
    void set_bounds(int var, double lower, double upper);

    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<Term>& objective() const { return objective_; }
    double objective_constant() const { return objective_constant_; }

    int num_variables() const { return static_cast<int>(variables_.size()); }
    int num_constraints() const { return static_cast<int>(constraints_.size()); }
    int num_binaries() const;

    /// Index of a variable by name, or -1.
    int find_variable(const std::string& name) const;

    /// Dense objective coefficient vector (duplicate terms summed).
    std::vector<double> objective_vector() const;
    double evaluate_objective(const std::vector<double>& values) const;

    /// Throws ModelError when an invariant is broken: lower > upper, binary
    /// bounds outside {0,1}, dangling variable references, non-finite data.
    void validate() const;

private:
    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
    std::vector<Term> objective_;
    double objective_constant_ = 0.0;
};

double row_activity(const Constraint& row, const std::vector<double>& values);

/// Writes the model in CPLEX LP text format. Output is a pure function of
/// the model; numbers use shortest round-trip formatting.
void write_lp(const MilpModel& model, std::ostream& os);
std::string to_lp_string(const MilpModel& model);

/// Parses the LP subset produced by write_lp (Minimize, Subject To, Bounds,
/// Binaries/Generals, End). Throws ModelError on malformed input.
MilpModel read_lp(std::istream& is);
MilpModel parse_lp(const std::string& text);

std::string format_double(double value);

} // namespace mgrisk
