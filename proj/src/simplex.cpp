#include "mrn/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mrn/errors.hpp"

namespace mrn {

namespace {

constexpr double kCostTol = 1e-9;   // reduced cost threshold for entering
constexpr double kPivotTol = 1e-9; // smallest usable pivot element
constexpr double kFeasTol = 1e-9;

struct Tableau {
    int rows = 0;
    int cols = 0; // structural + slack + artificial
    std::vector<double> a; // rows x (cols+1), last column is rhs
    std::vector<double> z; // cols+1 objective row (maximize)
    std::vector<int> basis;

    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * (cols + 1) + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * (cols + 1) + c]; }
    double& rhs(int r) { return a[static_cast<std::size_t>(r) * (cols + 1) + cols]; }
    double rhs(int r) const { return a[static_cast<std::size_t>(r) * (cols + 1) + cols]; }

    void pivot(int pr, int pc) {
        const double p = at(pr, pc);
        const double inv = 1.0 / p;
        double* prow = &a[static_cast<std::size_t>(pr) * (cols + 1)];
        for (int c = 0; c <= cols; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        for (int r = 0; r < rows; ++r) {
            if (r == pr) continue;
            double* row = &a[static_cast<std::size_t>(r) * (cols + 1)];
            const double f = row[pc];
            if (f == 0.0) continue;
            for (int c = 0; c <= cols; ++c) row[c] -= f * prow[c];
            row[pc] = 0.0;
        }
        const double f = z[pc];
        if (f != 0.0) {
            for (int c = 0; c <= cols; ++c) z[c] -= f * prow[c];
            z[pc] = 0.0;
        }
        basis[pr] = pc;
    }

    // Returns false when the problem is unbounded in the entering direction.
    // Slightly negative rhs values (degeneracy roundoff) are clamped to zero
    // so the step length can never go negative, which would corrupt the whole
    // tableau. Among rows within a small window of the minimum ratio the
    // largest pivot element wins for numerical stability; under Bland's rule
    // the smallest basis index wins instead so the anti-cycling argument
    // applies.
    bool ratio_leave(int pc, bool bland, int& pr_out) const {
        double theta = std::numeric_limits<double>::infinity();
        for (int r = 0; r < rows; ++r) {
            const double arc = at(r, pc);
            if (arc <= kPivotTol) continue;
            const double ratio = std::max(rhs(r), 0.0) / arc;
            if (ratio < theta) theta = ratio;
        }
        if (theta == std::numeric_limits<double>::infinity()) {
            pr_out = -1;
            return false;
        }
        const double window = theta + 1e-9 * theta + 1e-12;
        int pr = -1;
        double best_pivot = 0.0;
        for (int r = 0; r < rows; ++r) {
            const double arc = at(r, pc);
            if (arc <= kPivotTol) continue;
            if (std::max(rhs(r), 0.0) / arc > window) continue;
            const bool take = pr < 0 || (bland ? basis[r] < basis[pr] : arc > best_pivot);
            if (take) {
                pr = r;
                best_pivot = arc;
            }
        }
        pr_out = pr;
        return pr >= 0;
    }
};

// Runs simplex iterations on the current objective row. `allowed` masks the
// columns permitted to enter. Returns LpStatus::optimal or unbounded.
LpStatus optimize(Tableau& t, const std::vector<char>& allowed, int& iterations) {
    const int iteration_cap = 50000 + 50 * (t.rows + t.cols);
    bool bland = false;
    int stall = 0;
    const int stall_limit = std::max(64, 4 * t.rows);
    double best_obj = -std::numeric_limits<double>::infinity();
    while (true) {
        if (++iterations > iteration_cap) {
            throw NumericalError("simplex: iteration cap exceeded");
        }
        int pc = -1;
        if (bland) {
            for (int c = 0; c < t.cols; ++c) {
                if (allowed[c] && t.z[c] < -kCostTol) {
                    pc = c;
                    break;
                }
            }
        } else {
            double best = -kCostTol;
            for (int c = 0; c < t.cols; ++c) {
                if (allowed[c] && t.z[c] < best) {
                    best = t.z[c];
                    pc = c;
                }
            }
        }
        if (pc < 0) return LpStatus::optimal;
        int pr = -1;
        if (!t.ratio_leave(pc, bland, pr)) return LpStatus::unbounded;
        t.pivot(pr, pc);
        // Progress is measured against the best objective seen: with a
        // feasible basis the simplex objective is non-decreasing, so a long
        // run without improvement marks degeneracy and switches to Bland's
        // rule.
        const double obj = t.z[t.cols]; // invariant: rhs of the cost row carries the objective
        if (!bland) {
            if (obj <= best_obj + 1e-12) {
                if (++stall > stall_limit) bland = true;
            } else {
                stall = 0;
            }
        }
        if (obj > best_obj) best_obj = obj;
    }
}

} // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    const int n = lp.n;
    const int m_ub = static_cast<int>(lp.a_ub.size());
    const int m_eq = static_cast<int>(lp.a_eq.size());
    const int m = m_ub + m_eq;
    if (static_cast<int>(lp.c.size()) != n) throw DomainError("solve_lp: objective size mismatch");
    if (lp.b_ub.size() != lp.a_ub.size() || lp.b_eq.size() != lp.a_eq.size()) {
        throw DomainError("solve_lp: rhs size mismatch");
    }

    // Count artificials: equality rows and inequality rows with negative rhs.
    int n_art = m_eq;
    for (double b : lp.b_ub) {
        if (b < 0.0) ++n_art;
    }

    Tableau t;
    t.rows = m;
    t.cols = n + m_ub + n_art;
    t.a.assign(static_cast<std::size_t>(m) * (t.cols + 1), 0.0);
    t.basis.assign(static_cast<std::size_t>(m), -1);

    std::vector<int> art_cols;
    int next_art = n + m_ub;
    for (int r = 0; r < m_ub; ++r) {
        const bool flip = lp.b_ub[r] < 0.0;
        const double s = flip ? -1.0 : 1.0;
        for (int c = 0; c < n; ++c) t.at(r, c) = s * lp.a_ub[r][c];
        t.at(r, n + r) = s; // slack
        t.rhs(r) = s * lp.b_ub[r];
        if (flip) {
            t.at(r, next_art) = 1.0;
            t.basis[r] = next_art;
            art_cols.push_back(next_art++);
        } else {
            t.basis[r] = n + r;
        }
    }
    for (int q = 0; q < m_eq; ++q) {
        const int r = m_ub + q;
        const bool flip = lp.b_eq[q] < 0.0;
        const double s = flip ? -1.0 : 1.0;
        for (int c = 0; c < n; ++c) t.at(r, c) = s * lp.a_eq[q][c];
        t.rhs(r) = s * lp.b_eq[q];
        t.at(r, next_art) = 1.0;
        t.basis[r] = next_art;
        art_cols.push_back(next_art++);
    }

    LpSolution sol;
    std::vector<char> allowed(static_cast<std::size_t>(t.cols), 1);

    if (!art_cols.empty()) {
        // Phase 1: maximize -(sum of artificials).
        t.z.assign(static_cast<std::size_t>(t.cols) + 1, 0.0);
        for (int c : art_cols) t.z[c] = 1.0; // minimizing sum == maximizing negative
        // Eliminate basic artificials from the cost row.
        for (int r = 0; r < m; ++r) {
            const int b = t.basis[r];
            if (t.z[b] != 0.0) {
                const double f = t.z[b];
                for (int c = 0; c <= t.cols; ++c) t.z[c] -= f * t.at(r, c);
            }
        }
        const LpStatus st = optimize(t, allowed, sol.iterations);
        if (st == LpStatus::unbounded) throw NumericalError("simplex: phase 1 unbounded");
        const double infeasibility = -t.z[t.cols];
        if (infeasibility > 1e-7) {
            sol.status = LpStatus::infeasible;
            return sol;
        }
        // Remove artificials still sitting in the basis at level zero.
        for (int r = 0; r < m; ++r) {
            bool is_art = t.basis[r] >= n + m_ub;
            if (!is_art) continue;
            int pc = -1;
            for (int c = 0; c < n + m_ub; ++c) {
                if (std::abs(t.at(r, c)) > kPivotTol) {
                    pc = c;
                    break;
                }
            }
            if (pc >= 0) t.pivot(r, pc);
            // else: redundant row; harmless to leave, the artificial stays 0.
        }
        for (int c : art_cols) allowed[c] = 0;
    }

    // Phase 2 objective.
    t.z.assign(static_cast<std::size_t>(t.cols) + 1, 0.0);
    for (int c = 0; c < n; ++c) t.z[c] = -lp.c[c];
    for (int r = 0; r < m; ++r) {
        const int b = t.basis[r];
        if (b < t.cols && t.z[b] != 0.0) {
            const double f = t.z[b];
            for (int c = 0; c <= t.cols; ++c) t.z[c] -= f * t.at(r, c);
        }
    }
    const LpStatus st = optimize(t, allowed, sol.iterations);
    if (st == LpStatus::unbounded) {
        sol.status = LpStatus::unbounded;
        return sol;
    }

    sol.status = LpStatus::optimal;
    sol.x.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < m; ++r) {
        if (t.basis[r] < n) {
            const double v = t.rhs(r);
            sol.x[t.basis[r]] = (v < 0.0 && v > -kFeasTol) ? 0.0 : v;
        }
    }
    sol.objective = 0.0;
    for (int c = 0; c < n; ++c) sol.objective += lp.c[c] * sol.x[c];
    return sol;
}

std::string lp_to_text(const LinearProgram& lp) {
    std::string out = "maximize";
    char buf[64];
    auto term = [&](double v, int idx) {
        std::snprintf(buf, sizeof buf, " %+.12g*x%d", v, idx);
        out += buf;
    };
    for (int c = 0; c < lp.n; ++c) term(lp.c[c], c);
    out += "\nsubject to\n";
    for (std::size_t r = 0; r < lp.a_ub.size(); ++r) {
        for (int c = 0; c < lp.n; ++c) term(lp.a_ub[r][c], c);
        std::snprintf(buf, sizeof buf, " <= %.12g\n", lp.b_ub[r]);
        out += buf;
    }
    for (std::size_t r = 0; r < lp.a_eq.size(); ++r) {
        for (int c = 0; c < lp.n; ++c) term(lp.a_eq[r][c], c);
        std::snprintf(buf, sizeof buf, " == %.12g\n", lp.b_eq[r]);
        out += buf;
    }
    out += "x >= 0\n";
    return out;
}

} // namespace mrn
