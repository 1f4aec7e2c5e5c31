#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>

#include "mgrisk/solver.hpp"

namespace mgrisk {

std::string to_string(MipStatus s) {
    switch (s) {
    case MipStatus::Optimal: return "optimal";
    case MipStatus::Infeasible: return "infeasible";
    case MipStatus::Unbounded: return "unbounded";
    case MipStatus::NodeLimit: return "node_limit";
    }
    return "unknown";
}

namespace {

std::size_t u(int k) { return static_cast<std::size_t>(k); }

double abs_gap_tolerance(double incumbent, const SolverOptions& opt) {
    return opt.mip_gap_tol * std::max(1.0, std::abs(incumbent));
}

double relative_gap(double incumbent, double bound) {
    return std::max(0.0, incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

Bounds model_bounds(const MilpModel& model) {
    Bounds b;
    for (const auto& v : model.variables()) {
        b.lower.push_back(v.lower);
        b.upper.push_back(v.upper);
    }
    return b;
}

std::vector<int> free_binaries(const MilpModel& model) {
    std::vector<int> out;
    for (int j = 0; j < model.num_variables(); ++j) {
        const auto& v = model.variables()[u(j)];
        if (v.kind == VarKind::Binary && v.lower < v.upper) out.push_back(j);
    }
    return out;
}

struct Node {
    double bound;
    std::int64_t seq;
    int depth;
    std::vector<std::pair<int, double>> fixes;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        // Equal bounds: dive (deeper first), then creation order.
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.seq > b.seq;
    }
};

class BranchAndBound {
public:
    BranchAndBound(const MilpModel& model, const SolverOptions& opt, int component, std::int64_t node_budget)
        : model_(model), opt_(opt), component_(component), budget_(node_budget),
          binaries_(free_binaries(model)), base_(model_bounds(model)) {}

    MipSolution run() {
        MipSolution out;
        std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
        open.push(Node{-kInf, seq_++, 0, {}});
        bool root = true;

        while (!open.empty()) {
            Node node = open.top();
            if (has_incumbent() && node.bound >= incumbent_ - abs_gap_tolerance(incumbent_, opt_)) break;
            if (out.nodes_explored >= budget_) {
                out.status = MipStatus::NodeLimit;
                break;
            }
            open.pop();
            ++out.nodes_explored;

            Bounds b = base_;
            for (auto [var, value] : node.fixes) b.lower[u(var)] = b.upper[u(var)] = value;
            const LpSolution lp = solve_lp(model_, b.lower, b.upper, opt_);

            if (lp.status == LpStatus::Unbounded) {
                out.status = MipStatus::Unbounded;
                return out;
            }
            if (lp.status == LpStatus::Infeasible) {
                trace(out.nodes_explored, node.depth, kInf);
                root = false;
                continue;
            }
            trace(out.nodes_explored, node.depth, lp.objective);
            if (has_incumbent() && lp.objective >= incumbent_ - abs_gap_tolerance(incumbent_, opt_)) {
                root = false;
                continue;
            }

            const int branch_var = most_fractional(lp.values);
            if (branch_var < 0) {
                offer_incumbent(lp.values, b);
                root = false;
                continue;
            }
            if (root && opt_.rounding_heuristic) {
                try_rounding(lp.values, b, [](double v) { return std::round(v); });
                try_rounding(lp.values, b, [](double v) { return std::ceil(v - 1e-9); });
            }
            root = false;

            // Down child first so that it wins ties in creation order.
            for (double value : {0.0, 1.0}) {
                Node child{lp.objective, seq_++, node.depth + 1, node.fixes};
                child.fixes.emplace_back(branch_var, value);
                open.push(std::move(child));
            }
        }

        double best_bound = open.empty() ? (has_incumbent() ? incumbent_ : kInf) : open.top().bound;
        if (has_incumbent()) best_bound = std::min(best_bound, incumbent_);
        if (out.status != MipStatus::NodeLimit)
            out.status = has_incumbent() ? MipStatus::Optimal : MipStatus::Infeasible;
        out.best_bound = best_bound;
        out.incumbent_history = history_;
        if (has_incumbent()) {
            out.objective = incumbent_;
            out.values = incumbent_values_;
            out.gap = relative_gap(incumbent_, best_bound);
        }
        return out;
    }

private:
    bool has_incumbent() const { return !incumbent_values_.empty(); }

    int most_fractional(const std::vector<double>& values) const {
        int best = -1;
        double best_frac = opt_.integrality_tol;
        for (int j : binaries_) {
            const double v = values[u(j)];
            const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
            if (frac > best_frac) {
                best_frac = frac;
                best = j;
            }
        }
        return best;
    }

    /// Accepts an integral LP point. Binaries within integrality_tol of 0/1
    /// are snapped and the continuous part re-solved, so the stored
    /// incumbent is exactly integral and feasible.
    void offer_incumbent(const std::vector<double>& values, const Bounds& b) {
        bool exact = true;
        for (int j : binaries_)
            if (values[u(j)] != 0.0 && values[u(j)] != 1.0) exact = false;
        if (exact) {
            accept(values);
            return;
        }
        Bounds fixed = b;
        for (int j : binaries_) fixed.lower[u(j)] = fixed.upper[u(j)] = std::round(values[u(j)]);
        const LpSolution lp = solve_lp(model_, fixed.lower, fixed.upper, opt_);
        if (lp.status == LpStatus::Optimal) accept(lp.values);
    }

    template <class Round>
    void try_rounding(const std::vector<double>& values, const Bounds& b, Round round) {
        Bounds fixed = b;
        for (int j : binaries_) {
            const double v = std::clamp(round(values[u(j)]), b.lower[u(j)], b.upper[u(j)]);
            fixed.lower[u(j)] = fixed.upper[u(j)] = v;
        }
        const LpSolution lp = solve_lp(model_, fixed.lower, fixed.upper, opt_);
        if (lp.status == LpStatus::Optimal) accept(lp.values);
    }

    void accept(const std::vector<double>& values) {
        const double obj = model_.evaluate_objective(values);
        if (has_incumbent() && obj >= incumbent_) return;
        incumbent_ = obj;
        incumbent_values_ = values;
        history_.push_back(obj);
    }

    void trace(std::int64_t node, int depth, double bound) const {
        if (!opt_.node_trace) return;
        *opt_.node_trace << component_ << ',' << node << ',' << depth << ',' << format_double(bound) << ','
                         << (has_incumbent() ? format_double(incumbent_) : std::string("inf")) << '\n';
    }

    const MilpModel& model_;
    const SolverOptions& opt_;
    int component_;
    std::int64_t budget_;
    std::vector<int> binaries_;
    Bounds base_;
    std::int64_t seq_ = 0;
    double incumbent_ = kInf;
    std::vector<double> incumbent_values_;
    std::vector<double> history_;
};

struct SubModel {
    MilpModel model;
    std::vector<int> columns; // sub column -> parent column
};

SubModel extract(const MilpModel& parent, const std::vector<int>& columns, const std::vector<int>& owner,
                 int component) {
    SubModel sub;
    sub.columns = columns;
    std::vector<int> local(parent.variables().size(), -1);
    for (int j : columns) {
        const auto& v = parent.variables()[u(j)];
        local[u(j)] = sub.model.add_variable(v.name, v.kind, v.lower, v.upper);
    }
    for (const auto& row : parent.constraints()) {
        if (row.terms.empty() || owner[u(row.terms.front().var)] != component) continue;
        std::vector<Term> terms;
        terms.reserve(row.terms.size());
        for (const auto& t : row.terms) terms.push_back({local[u(t.var)], t.coef});
        sub.model.add_constraint(row.name, std::move(terms), row.sense, row.rhs);
    }
    std::vector<Term> objective;
    for (const auto& t : parent.objective())
        if (owner[u(t.var)] == component) objective.push_back({local[u(t.var)], t.coef});
    sub.model.set_objective(std::move(objective));
    return sub;
}

bool empty_rows_feasible(const MilpModel& model, double tol) {
    for (const auto& row : model.constraints()) {
        if (!row.terms.empty()) continue;
        const bool ok = row.sense == Sense::LessEqual      ? 0.0 <= row.rhs + tol
                        : row.sense == Sense::GreaterEqual ? 0.0 >= row.rhs - tol
                                                           : std::abs(row.rhs) <= tol;
        if (!ok) return false;
    }
    return true;
}

} // namespace

std::vector<std::vector<int>> connected_components(const MilpModel& model) {
    const int n = model.num_variables();
    std::vector<int> parent(u(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[u(x)] != x) {
            parent[u(x)] = parent[u(parent[u(x)])];
            x = parent[u(x)];
        }
        return x;
    };
    for (const auto& row : model.constraints()) {
        if (row.terms.empty()) continue;
        const int a = find(row.terms.front().var);
        for (const auto& t : row.terms) {
            const int b = find(t.var);
            if (a != b) parent[u(std::max(a, b))] = std::min(a, b);
        }
    }
    std::vector<std::vector<int>> groups;
    std::vector<int> slot(u(n), -1);
    for (int j = 0; j < n; ++j) {
        const int root = find(j);
        if (slot[u(root)] < 0) {
            slot[u(root)] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[u(slot[u(root)])].push_back(j);
    }
    return groups;
}

MipSolution branch_and_bound(const MilpModel& model, const SolverOptions& options) {
    model.validate();
    if (!empty_rows_feasible(model, options.feas_tol)) return MipSolution{};

    auto components = options.decompose ? connected_components(model) : std::vector<std::vector<int>>{};
    if (components.size() <= 1) {
        return BranchAndBound(model, options, 0, options.node_limit).run();
    }

    // Independent blocks: optimal values add up, so each block is solved on
    // its own and the pieces are stitched back together.
    std::vector<int> owner(model.variables().size(), -1);
    for (std::size_t c = 0; c < components.size(); ++c)
        for (int j : components[c]) owner[u(j)] = static_cast<int>(c);

    MipSolution out;
    out.status = MipStatus::Optimal;
    out.values.assign(model.variables().size(), 0.0);
    double bound = model.objective_constant();
    std::int64_t budget = options.node_limit;
    for (std::size_t c = 0; c < components.size(); ++c) {
        const SubModel sub = extract(model, components[c], owner, static_cast<int>(c));
        MipSolution part = BranchAndBound(sub.model, options, static_cast<int>(c), std::max<std::int64_t>(budget, 0)).run();
        out.nodes_explored += part.nodes_explored;
        budget -= part.nodes_explored;
        if (part.status == MipStatus::Infeasible || part.status == MipStatus::Unbounded) {
            MipSolution fail;
            fail.status = part.status;
            fail.nodes_explored = out.nodes_explored;
            return fail;
        }
        if (part.status == MipStatus::NodeLimit) out.status = MipStatus::NodeLimit;
        bound += part.best_bound;
        if (!part.has_incumbent()) {
            out.values.clear();
            continue;
        }
        if (!out.values.empty())
            for (std::size_t k = 0; k < sub.columns.size(); ++k) out.values[u(sub.columns[k])] = part.values[k];
    }
    out.best_bound = bound;
    if (out.has_incumbent()) {
        out.objective = model.evaluate_objective(out.values);
        out.gap = relative_gap(out.objective, bound);
        out.incumbent_history = {out.objective};
    }
    return out;
}

namespace {

MipSolution enumerate_block(const MilpModel& model, const SolverOptions& options) {
    const auto binaries = free_binaries(model);
    Bounds b = model_bounds(model);
    MipSolution out;
    const std::uint64_t count = std::uint64_t{1} << binaries.size();
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        for (std::size_t k = 0; k < binaries.size(); ++k) {
            const double v = (mask >> k) & 1U ? 1.0 : 0.0;
            b.lower[u(binaries[k])] = b.upper[u(binaries[k])] = v;
        }
        const LpSolution lp = solve_lp(model, b.lower, b.upper, options);
        ++out.nodes_explored;
        if (lp.status == LpStatus::Unbounded) {
            out.status = MipStatus::Unbounded;
            out.values.clear();
            return out;
        }
        if (lp.status != LpStatus::Optimal) continue;
        if (out.values.empty() || lp.objective < out.objective) {
            out.objective = lp.objective;
            out.values = lp.values;
            out.incumbent_history.push_back(lp.objective);
        }
    }
    out.status = out.values.empty() ? MipStatus::Infeasible : MipStatus::Optimal;
    out.best_bound = out.objective;
    return out;
}

} // namespace

MipSolution exhaustive_oracle(const MilpModel& model, const SolverOptions& options) {
    model.validate();
    const auto binaries = free_binaries(model);
    if (binaries.size() > static_cast<std::size_t>(kOracleBinaryCap))
        throw std::invalid_argument("exhaustive_oracle: " + std::to_string(binaries.size()) +
                                    " free binaries exceed the cap of " + std::to_string(kOracleBinaryCap));
    if (!empty_rows_feasible(model, options.feas_tol)) return MipSolution{};

    auto components = options.decompose ? connected_components(model) : std::vector<std::vector<int>>{};
    if (components.size() <= 1) return enumerate_block(model, options);

    // Separable blocks: the best full assignment is the best assignment of
    // each block, so 2^a + 2^b enumerations replace 2^(a+b).
    std::vector<int> owner(model.variables().size(), -1);
    for (std::size_t c = 0; c < components.size(); ++c)
        for (int j : components[c]) owner[u(j)] = static_cast<int>(c);
    MipSolution out;
    out.values.assign(model.variables().size(), 0.0);
    for (std::size_t c = 0; c < components.size(); ++c) {
        const SubModel sub = extract(model, components[c], owner, static_cast<int>(c));
        const MipSolution part = enumerate_block(sub.model, options);
        out.nodes_explored += part.nodes_explored;
        if (part.status != MipStatus::Optimal) {
            MipSolution fail;
            fail.status = part.status;
            fail.nodes_explored = out.nodes_explored;
            return fail;
        }
        for (std::size_t k = 0; k < sub.columns.size(); ++k) out.values[u(sub.columns[k])] = part.values[k];
    }
    out.status = MipStatus::Optimal;
    out.objective = model.evaluate_objective(out.values);
    out.best_bound = out.objective;
    out.incumbent_history = {out.objective};
    return out;
}

AuditReport audit_solution(const MilpModel& model, const std::vector<double>& values,
                           const SolverOptions& options) {
    AuditReport report;
    if (values.size() != model.variables().size()) {
        report.violated.push_back("<value count mismatch>");
        report.max_residual = kInf;
        return report;
    }
    for (std::size_t j = 0; j < values.size(); ++j) {
        const auto& v = model.variables()[j];
        const double x = values[j];
        const double viol = std::max({0.0, v.lower - x, x - v.upper});
        report.max_bound_violation = std::max(report.max_bound_violation, viol);
        bool bad = viol > options.feas_tol || std::isnan(x);
        if (v.kind == VarKind::Binary) {
            const double frac = std::abs(x - std::round(x));
            report.max_integrality_violation = std::max(report.max_integrality_violation, frac);
            bad = bad || frac > options.integrality_tol;
        }
        if (bad) report.violated.push_back(v.name);
    }
    for (const auto& row : model.constraints()) {
        const double a = row_activity(row, values);
        double r = 0.0;
        switch (row.sense) {
        case Sense::LessEqual: r = std::max(0.0, a - row.rhs); break;
        case Sense::GreaterEqual: r = std::max(0.0, row.rhs - a); break;
        case Sense::Equal: r = std::abs(a - row.rhs); break;
        }
        if (std::isnan(a)) r = kInf;
        report.max_residual = std::max(report.max_residual, r);
        if (r > options.feas_tol) report.violated.push_back(row.name);
    }
    report.passed = report.violated.empty();
    return report;
}

} // namespace mgrisk
