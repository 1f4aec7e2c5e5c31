// Bounded-variable primal simplex on a dense tableau.
//
// Every row i gets a slack column s_i with  a_i.x + s_i = b_i,  where the
// slack bounds encode the row sense (<=: s >= 0, >=: s <= 0, =: s = 0). The
// starting basis is all slacks; rows whose slack would violate its bounds get
// a phase-1 artificial instead. Artificial columns are never stored: once an
// artificial leaves the basis it is fixed at zero for good.
//
// The tableau holds B^-1 [A I]. Its slack block is therefore B^-1 itself,
// which is what the periodic refresh of basic values and reduced costs uses.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "mgrisk/solver.hpp"

namespace mgrisk {

std::string to_string(LpStatus s) {
    switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDropTol = 1e-13;
constexpr double kHarrisTol = 1e-9;

enum class PhaseResult { Optimal, Unbounded };

class DenseSimplex {
public:
    DenseSimplex(const MilpModel& model, const std::vector<double>& lower,
                 const std::vector<double>& upper, const SolverOptions& options)
        : model_(model), opt_(options), m_(model.num_constraints()), n_(model.num_variables()),
          N_(n_ + m_) {
        build_columns();
        lo_.assign(static_cast<std::size_t>(n_ + 2 * m_), 0.0);
        hi_.assign(lo_.size(), 0.0);
        x_.assign(lo_.size(), 0.0);
        basic_.assign(lo_.size(), 0);
        for (int j = 0; j < n_; ++j) {
            lo_[u(j)] = lower[u(j)];
            hi_[u(j)] = upper[u(j)];
        }
        for (int i = 0; i < m_; ++i) {
            const auto& row = model.constraints()[u(i)];
            const int s = n_ + i;
            switch (row.sense) {
            case Sense::LessEqual: lo_[u(s)] = 0.0; hi_[u(s)] = kInf; break;
            case Sense::GreaterEqual: lo_[u(s)] = -kInf; hi_[u(s)] = 0.0; break;
            case Sense::Equal: lo_[u(s)] = 0.0; hi_[u(s)] = 0.0; break;
            }
            lo_[u(n_ + m_ + i)] = 0.0;
            hi_[u(n_ + m_ + i)] = kInf;
        }
        b_.resize(u(m_));
        for (int i = 0; i < m_; ++i) b_[u(i)] = model.constraints()[u(i)].rhs;
    }

    LpSolution solve() {
        LpSolution out;
        for (int j = 0; j < n_; ++j)
            if (lo_[u(j)] > hi_[u(j)]) {
                out.status = LpStatus::Infeasible;
                return out;
            }
        initial_basis();

        bool any_artificial = false;
        for (int i = 0; i < m_; ++i) any_artificial |= head_[u(i)] >= N_;
        if (any_artificial) {
            cost_.assign(lo_.size(), 0.0);
            for (int i = 0; i < m_; ++i) cost_[u(n_ + m_ + i)] = 1.0;
            phase_one_ = true;
            run_phase();
            phase_one_ = false;
            if (artificial_sum() > opt_.feas_tol) {
                out.status = LpStatus::Infeasible;
                out.iterations = iterations_;
                return out;
            }
            for (int i = 0; i < m_; ++i) hi_[u(n_ + m_ + i)] = 0.0;
        }

        cost_.assign(lo_.size(), 0.0);
        const auto c = model_.objective_vector();
        std::copy(c.begin(), c.end(), cost_.begin());
        if (run_phase() == PhaseResult::Unbounded) {
            out.status = LpStatus::Unbounded;
            out.iterations = iterations_;
            return out;
        }
        certify();

        out.status = LpStatus::Optimal;
        out.iterations = iterations_;
        out.values.assign(x_.begin(), x_.begin() + n_);
        out.objective = model_.evaluate_objective(out.values);
        refresh_reduced_costs();
        out.reduced_costs.assign(d_.begin(), d_.begin() + n_);
        out.duals.resize(u(m_));
        for (int i = 0; i < m_; ++i) out.duals[u(i)] = -d_[u(n_ + i)];
        return out;
    }

private:
    static std::size_t u(int k) { return static_cast<std::size_t>(k); }
    double& T(int i, int j) { return tab_[u(i) * u(N_) + u(j)]; }

    void build_columns() {
        col_start_.assign(u(n_ + 1), 0);
        for (const auto& row : model_.constraints())
            for (const auto& term : row.terms) ++col_start_[u(term.var + 1)];
        for (int j = 0; j < n_; ++j) col_start_[u(j + 1)] += col_start_[u(j)];
        col_row_.resize(u(col_start_.back()));
        col_val_.resize(col_row_.size());
        std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
        for (int i = 0; i < m_; ++i)
            for (const auto& term : model_.constraints()[u(i)].terms) {
                const int k = fill[u(term.var)]++;
                col_row_[u(k)] = i;
                col_val_[u(k)] = term.coef;
            }
    }

    void initial_basis() {
        for (int j = 0; j < n_; ++j) {
            if (std::isfinite(lo_[u(j)]))
                x_[u(j)] = lo_[u(j)];
            else if (std::isfinite(hi_[u(j)]))
                x_[u(j)] = hi_[u(j)];
            else
                x_[u(j)] = 0.0;
        }
        std::vector<double> activity(u(m_), 0.0);
        for (int j = 0; j < n_; ++j)
            if (x_[u(j)] != 0.0)
                for (int k = col_start_[u(j)]; k < col_start_[u(j + 1)]; ++k)
                    activity[u(col_row_[u(k)])] += col_val_[u(k)] * x_[u(j)];

        tab_.assign(u(m_) * u(N_), 0.0);
        head_.assign(u(m_), 0);
        beta_.assign(u(m_), 1.0);
        for (int i = 0; i < m_; ++i) {
            const int s = n_ + i;
            const double slack = b_[u(i)] - activity[u(i)];
            if (slack >= lo_[u(s)] && slack <= hi_[u(s)]) {
                head_[u(i)] = s;
                x_[u(s)] = slack;
            } else {
                const int a = n_ + m_ + i;
                beta_[u(i)] = slack > 0 ? 1.0 : -1.0;
                head_[u(i)] = a;
                x_[u(s)] = 0.0;
                x_[u(a)] = std::abs(slack);
            }
            basic_[u(head_[u(i)])] = 1;
        }
        for (int j = 0; j < n_; ++j)
            for (int k = col_start_[u(j)]; k < col_start_[u(j + 1)]; ++k) {
                const int i = col_row_[u(k)];
                T(i, j) += col_val_[u(k)] / beta_[u(i)];
            }
        for (int i = 0; i < m_; ++i) T(i, n_ + i) = 1.0 / beta_[u(i)];
    }

    double artificial_sum() const {
        double sum = 0.0;
        for (int i = 0; i < m_; ++i)
            if (head_[u(i)] >= N_) sum += std::abs(x_[u(head_[u(i)])]);
        return sum;
    }

    double phase_objective() const {
        double sum = 0.0;
        for (std::size_t j = 0; j < x_.size(); ++j)
            if (cost_[j] != 0.0) sum += cost_[j] * x_[j];
        return sum;
    }

    void refresh_reduced_costs() {
        d_.assign(u(N_), 0.0);
        std::vector<double> y(u(m_), 0.0); // c_B^T B^-1, read from the slack block
        for (int i = 0; i < m_; ++i) {
            const double cb = cost_[u(head_[u(i)])];
            if (cb == 0.0) continue;
            const double* row = &tab_[u(i) * u(N_) + u(n_)];
            for (int k = 0; k < m_; ++k) y[u(k)] += cb * row[k];
        }
        for (int j = 0; j < n_; ++j) {
            double dj = cost_[u(j)];
            for (int k = col_start_[u(j)]; k < col_start_[u(j + 1)]; ++k)
                dj -= y[u(col_row_[u(k)])] * col_val_[u(k)];
            d_[u(j)] = basic_[u(j)] ? 0.0 : dj;
        }
        for (int i = 0; i < m_; ++i) d_[u(n_ + i)] = basic_[u(n_ + i)] ? 0.0 : cost_[u(n_ + i)] - y[u(i)];
    }

    /// Right-hand side net of nonbasic columns: b - N x_N.
    std::vector<double> nonbasic_rhs() const {
        std::vector<double> w(b_);
        for (int j = 0; j < n_; ++j) {
            if (basic_[u(j)] || x_[u(j)] == 0.0) continue;
            for (int k = col_start_[u(j)]; k < col_start_[u(j + 1)]; ++k)
                w[u(col_row_[u(k)])] -= col_val_[u(k)] * x_[u(j)];
        }
        for (int i = 0; i < m_; ++i) {
            const int s = n_ + i;
            if (!basic_[u(s)]) w[u(i)] -= x_[u(s)];
            const int a = N_ + i;
            if (!basic_[u(a)]) w[u(i)] -= beta_[u(i)] * x_[u(a)];
        }
        return w;
    }

    /// Recomputes basic values from B^-1 held in the tableau. Returns the
    /// largest change versus the incrementally tracked values.
    double refresh_basics() {
        const auto w = nonbasic_rhs();
        double drift = 0.0;
        for (int i = 0; i < m_; ++i) {
            const double* row = &tab_[u(i) * u(N_) + u(n_)];
            double v = 0.0;
            for (int k = 0; k < m_; ++k) v += row[k] * w[u(k)];
            drift = std::max(drift, std::abs(v - x_[u(head_[u(i)])]));
            x_[u(head_[u(i)])] = v;
        }
        return drift;
    }

    /// Column of the original system [A I beta*I] for any column index.
    Eigen::VectorXd original_column(int j) const {
        Eigen::VectorXd col = Eigen::VectorXd::Zero(m_);
        if (j < n_) {
            for (int k = col_start_[u(j)]; k < col_start_[u(j + 1)]; ++k) col[col_row_[u(k)]] = col_val_[u(k)];
        } else if (j < N_) {
            col[j - n_] = 1.0;
        } else {
            col[j - N_] = beta_[u(j - N_)];
        }
        return col;
    }

    /// Rebuilds the whole tableau from a fresh LU factorization of the basis.
    void refactor() {
        if (m_ == 0) return;
        Eigen::MatrixXd B(m_, m_);
        for (int i = 0; i < m_; ++i) B.col(i) = original_column(head_[u(i)]);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m_, N_);
        for (int j = 0; j < N_; ++j) rhs.col(j) = original_column(j);
        Eigen::MatrixXd fresh = lu.solve(rhs);
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < N_; ++j) {
                const double v = fresh(i, j);
                T(i, j) = std::abs(v) < kDropTol ? 0.0 : v;
            }
        refresh_basics();
        refresh_reduced_costs();
    }

    bool eligible(int j, double dj) const {
        if (basic_[u(j)]) return false;
        if (lo_[u(j)] == hi_[u(j)]) return false;
        if (dj < -opt_.opt_tol && x_[u(j)] < hi_[u(j)]) return true;
        if (dj > opt_.opt_tol && x_[u(j)] > lo_[u(j)]) return true;
        return false;
    }

    int choose_entering(bool bland) const {
        int best = -1;
        double best_score = 0.0;
        for (int j = 0; j < N_; ++j) {
            const double dj = d_[u(j)];
            if (!eligible(j, dj)) continue;
            if (bland) return j;
            const double score = std::abs(dj);
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        return best;
    }

    PhaseResult run_phase() {
        refresh_reduced_costs();
        double best_objective = phase_objective();
        int stall = 0;
        bool bland = false;
        int since_refresh = 0;
        std::vector<int> nz;
        nz.reserve(u(N_));

        for (;;) {
            if (phase_one_ && artificial_sum() <= opt_.feas_tol * 1e-3) return PhaseResult::Optimal;
            if (++iterations_ > opt_.iteration_limit)
                throw NumericalError("simplex iteration limit reached");
            if (++since_refresh >= opt_.refresh_interval) {
                since_refresh = 0;
                if (refresh_basics() > opt_.feas_tol) refactor();
                refresh_reduced_costs();
            }

            const int q = choose_entering(bland);
            if (q < 0) {
                // Confirm optimality against freshly computed reduced costs.
                if (since_refresh == 0) return PhaseResult::Optimal;
                since_refresh = 0;
                if (refresh_basics() > opt_.feas_tol) refactor();
                refresh_reduced_costs();
                if (choose_entering(bland) < 0) return PhaseResult::Optimal;
                continue;
            }
            const double dir = d_[u(q)] < 0 ? 1.0 : -1.0;
            const double flip = hi_[u(q)] - lo_[u(q)];

            // Ratio test. Pass 1 (Harris) bounds the step with relaxed limits;
            // pass 2 picks the largest pivot among rows that block within it.
            double relaxed_min = kInf;
            double exact_min = kInf;
            for (int i = 0; i < m_; ++i) {
                const double a = T(i, q);
                if (std::abs(a) <= kPivotTol) continue;
                const double delta = -dir * a;
                const int j = head_[u(i)];
                double limit;
                if (delta < 0) {
                    if (!std::isfinite(lo_[u(j)])) continue;
                    limit = x_[u(j)] - lo_[u(j)];
                } else {
                    if (!std::isfinite(hi_[u(j)])) continue;
                    limit = hi_[u(j)] - x_[u(j)];
                }
                const double mag = std::abs(delta);
                relaxed_min = std::min(relaxed_min, (limit + kHarrisTol) / mag);
                exact_min = std::min(exact_min, std::max(0.0, limit) / mag);
            }

            if (!std::isfinite(flip) && !std::isfinite(exact_min)) return PhaseResult::Unbounded;

            double theta;
            int r = -1;
            if (flip <= exact_min) {
                theta = flip;
            } else {
                double best_mag = -1.0;
                for (int i = 0; i < m_; ++i) {
                    const double a = T(i, q);
                    if (std::abs(a) <= kPivotTol) continue;
                    const double delta = -dir * a;
                    const int j = head_[u(i)];
                    double limit;
                    if (delta < 0) {
                        if (!std::isfinite(lo_[u(j)])) continue;
                        limit = x_[u(j)] - lo_[u(j)];
                    } else {
                        if (!std::isfinite(hi_[u(j)])) continue;
                        limit = hi_[u(j)] - x_[u(j)];
                    }
                    const double ratio = std::max(0.0, limit) / std::abs(delta);
                    if (bland) {
                        if (ratio <= exact_min && (r < 0 || head_[u(i)] < head_[u(r)])) r = i;
                        continue;
                    }
                    if (ratio > relaxed_min) continue;
                    const double mag = std::abs(a);
                    if (mag > best_mag || (mag == best_mag && head_[u(i)] < head_[u(r)])) {
                        best_mag = mag;
                        r = i;
                    }
                }
                const int jr = head_[u(r)];
                const double delta_r = -dir * T(r, q);
                const double limit = delta_r < 0 ? x_[u(jr)] - lo_[u(jr)] : hi_[u(jr)] - x_[u(jr)];
                theta = std::max(0.0, limit) / std::abs(delta_r);
            }

            // Move.
            const double dq = d_[u(q)];
            if (theta != 0.0) {
                x_[u(q)] += dir * theta;
                for (int i = 0; i < m_; ++i) {
                    const double a = T(i, q);
                    if (a != 0.0) x_[u(head_[u(i)])] -= dir * a * theta;
                }
            }

            const double objective = best_objective + dq * dir * theta;
            if (objective < best_objective - 1e-12 * std::max(1.0, std::abs(best_objective))) {
                best_objective = objective;
                stall = 0;
                bland = false;
            } else if (++stall >= opt_.stall_limit) {
                bland = true;
            }

            if (r < 0) {
                // Bound flip: the entering column jumps to its opposite bound.
                x_[u(q)] = dir > 0 ? hi_[u(q)] : lo_[u(q)];
                continue;
            }

            const int leaving = head_[u(r)];
            const double delta_r = -dir * T(r, q);
            x_[u(leaving)] = delta_r < 0 ? lo_[u(leaving)] : hi_[u(leaving)];
            basic_[u(leaving)] = 0;
            basic_[u(q)] = 1;
            head_[u(r)] = q;
            pivot(r, q, nz);
        }
    }

    void pivot(int r, int q, std::vector<int>& nz) {
        double* prow = &tab_[u(r) * u(N_)];
        const double inv = 1.0 / prow[q];
        nz.clear();
        for (int j = 0; j < N_; ++j) {
            if (prow[j] == 0.0) continue;
            double v = prow[j] * inv;
            if (std::abs(v) < kDropTol) v = 0.0;
            prow[j] = v;
            if (v != 0.0) nz.push_back(j);
        }
        prow[q] = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* row = &tab_[u(i) * u(N_)];
            const double f = row[q];
            if (f == 0.0) continue;
            for (int j : nz) {
                const double v = row[j] - f * prow[j];
                row[j] = std::abs(v) < kDropTol ? 0.0 : v;
            }
            row[q] = 0.0;
        }
        const double f = d_[u(q)];
        if (f != 0.0)
            for (int j : nz) d_[u(j)] -= f * prow[j];
        d_[u(q)] = 0.0;
    }

    double max_violation() const {
        double worst = 0.0;
        for (int j = 0; j < n_; ++j)
            worst = std::max({worst, lo_[u(j)] - x_[u(j)], x_[u(j)] - hi_[u(j)]});
        std::vector<double> activity(u(m_), 0.0);
        for (int j = 0; j < n_; ++j)
            for (int k = col_start_[u(j)]; k < col_start_[u(j + 1)]; ++k)
                activity[u(col_row_[u(k)])] += col_val_[u(k)] * x_[u(j)];
        for (int i = 0; i < m_; ++i) {
            const auto& row = model_.constraints()[u(i)];
            const double a = activity[u(i)];
            switch (row.sense) {
            case Sense::LessEqual: worst = std::max(worst, a - row.rhs); break;
            case Sense::GreaterEqual: worst = std::max(worst, row.rhs - a); break;
            case Sense::Equal: worst = std::max(worst, std::abs(a - row.rhs)); break;
            }
        }
        return worst;
    }

    void certify() {
        refresh_basics();
        if (max_violation() <= opt_.feas_tol) return;
        refactor();
        if (max_violation() > 10.0 * opt_.feas_tol)
            throw NumericalError("simplex could not certify feasibility after refactorization");
    }

    const MilpModel& model_;
    const SolverOptions& opt_;
    int m_;
    int n_;
    int N_;
    std::vector<int> col_start_;
    std::vector<int> col_row_;
    std::vector<double> col_val_;
    std::vector<double> tab_;
    std::vector<double> lo_, hi_, x_, b_, cost_, d_, beta_;
    std::vector<int> head_;
    std::vector<char> basic_;
    bool phase_one_ = false;
    std::int64_t iterations_ = 0;
};

} // namespace

LpSolution solve_lp(const MilpModel& model, const std::vector<double>& lower,
                    const std::vector<double>& upper, const SolverOptions& options) {
    DenseSimplex simplex(model, lower, upper, options);
    return simplex.solve();
}

LpSolution solve_lp(const MilpModel& model, const SolverOptions& options) {
    model.validate();
    std::vector<double> lower, upper;
    lower.reserve(model.variables().size());
    upper.reserve(model.variables().size());
    for (const auto& v : model.variables()) {
        lower.push_back(v.lower);
        upper.push_back(v.upper);
    }
    return solve_lp(model, lower, upper, options);
}

} // namespace mgrisk
