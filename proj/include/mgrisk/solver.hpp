#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgrisk/milp.hpp"

namespace mgrisk {

/// Thrown when the simplex cannot certify feasibility of its own answer
/// within 10x feas_tol after a fresh factorization, or runs out of pivots.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverOptions {
    double feas_tol = 1e-7;
    double integrality_tol = 1e-6;
    double mip_gap_tol = 1e-6;
    std::int64_t node_limit = 1'000'000;
    double opt_tol = 1e-9;      // reduced-cost tolerance
    int stall_limit = 50;       // degenerate pivots before switching to Bland's rule
    int refresh_interval = 100; // pivots between recomputing basics and reduced costs
    std::int64_t iteration_limit = 5'000'000;
    bool decompose = true;      // solve independent constraint blocks separately
    bool rounding_heuristic = true;
    std::ostream* node_trace = nullptr; // CSV: component,node,depth,bound,incumbent
};

enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class MipStatus { Optimal, Infeasible, Unbounded, NodeLimit };

std::string to_string(LpStatus s);
std::string to_string(MipStatus s);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> values; // per model variable
    std::vector<double> duals;  // per constraint (minimization sign convention)
    std::vector<double> reduced_costs;
    std::int64_t iterations = 0;
};

struct MipSolution {
    MipStatus status = MipStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> values;
    std::int64_t nodes_explored = 0;
    double best_bound = 0.0;
    double gap = 0.0;
    std::vector<double> incumbent_history; // objective of each accepted incumbent, in order
    bool has_incumbent() const { return !values.empty(); }
};

/// Solves the LP relaxation (binaries relaxed to their bounds within [0,1]).
LpSolution solve_lp(const MilpModel& model, const SolverOptions& options = {});

/// Same, with column bounds overridden (used by branching and enumeration).
LpSolution solve_lp(const MilpModel& model, const std::vector<double>& lower,
                    const std::vector<double>& upper, const SolverOptions& options = {});

/// Best-bound branch and bound on binary columns. Branches on the most
/// fractional binary (lowest index on ties); open nodes with equal bounds
/// are processed in creation order.
MipSolution branch_and_bound(const MilpModel& model, const SolverOptions& options = {});

/// Test oracle: enumerates every assignment of the free binaries (at most
/// 24) and keeps the best LP value. Throws std::invalid_argument above the cap.
MipSolution exhaustive_oracle(const MilpModel& model, const SolverOptions& options = {});

inline constexpr int kOracleBinaryCap = 24;

struct AuditReport {
    double max_residual = 0.0;        // worst constraint violation
    double max_bound_violation = 0.0; // worst bound violation
    double max_integrality_violation = 0.0;
    std::vector<std::string> violated; // names of rows/columns beyond tolerance
    bool passed = false;
};

/// Recomputes every row activity and bound from scratch. Passes iff all
/// violations are within feas_tol (and binaries within integrality_tol).
AuditReport audit_solution(const MilpModel& model, const std::vector<double>& values,
                           const SolverOptions& options = {});

/// Groups variables linked through shared constraints. Components are listed
/// by their lowest variable index; each holds sorted variable indices.
std::vector<std::vector<int>> connected_components(const MilpModel& model);

} // namespace mgrisk
