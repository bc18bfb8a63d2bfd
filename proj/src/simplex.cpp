#include "meqroute/simplex.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

#include "meqroute/error.hpp"

namespace meq {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kReducedCostTol = 1e-9;
constexpr double kFeasibilityTol = 1e-7;

struct Tableau {
    int rows = 0;
    int cols = 0;  // variables + rhs
    std::vector<double> t;     // rows x cols, row-major
    std::vector<double> obj;   // reduced-cost row, length cols
    std::vector<int> basis;    // basic variable per row

    double& at(int r, int c) { return t[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return t[static_cast<std::size_t>(r) * cols + c]; }
    int rhs() const { return cols - 1; }

    void pivot(int pr, int pc) {
        double p = at(pr, pc);
        for (int j = 0; j < cols; ++j) at(pr, j) /= p;
        for (int r = 0; r < rows; ++r) {
            if (r == pr) continue;
            double f = at(r, pc);
            if (f == 0.0) continue;
            for (int j = 0; j < cols; ++j) at(r, j) -= f * at(pr, j);
            at(r, pc) = 0.0;
        }
        double f = obj[pc];
        if (f != 0.0) {
            for (int j = 0; j < cols; ++j) obj[j] -= f * at(pr, j);
            obj[pc] = 0.0;
        }
        basis[pr] = pc;
    }

    void drop_row(int r) {
        t.erase(t.begin() + static_cast<std::size_t>(r) * cols,
                t.begin() + static_cast<std::size_t>(r + 1) * cols);
        basis.erase(basis.begin() + r);
        --rows;
    }
};

// Returns false when no entering column exists (optimal for current costs).
bool simplex_iterate(Tableau& tab, int num_enterable) {
    int stall = 0;
    bool bland = false;
    long iterations = 0;
    const long cap = 200000;

    while (true) {
        if (++iterations > cap)
            throw Error(ErrorKind::internal, "simplex: iteration cap exceeded");

        int enter = -1;
        if (bland) {
            for (int j = 0; j < num_enterable; ++j)
                if (tab.obj[j] < -kReducedCostTol) { enter = j; break; }
        } else {
            double best = -kReducedCostTol;
            for (int j = 0; j < num_enterable; ++j)
                if (tab.obj[j] < best) { best = tab.obj[j]; enter = j; }
        }
        if (enter < 0) return true;

        int leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int r = 0; r < tab.rows; ++r) {
            double a = tab.at(r, enter);
            if (a > kPivotTol) {
                double ratio = tab.at(r, tab.rhs()) / a;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && (leave < 0 || tab.basis[r] < tab.basis[leave]))) {
                    best_ratio = ratio;
                    leave = r;
                }
            }
        }
        if (leave < 0) return false;  // unbounded direction

        double before = tab.obj[tab.rhs()];
        tab.pivot(leave, enter);
        if (std::abs(tab.obj[tab.rhs()] - before) <= 1e-14 * (1.0 + std::abs(before))) {
            if (++stall > 100) bland = true;  // degenerate run; Bland prevents cycling
        } else {
            stall = 0;
        }
    }
}

}  // namespace

LpResult solve_equality_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                           const std::vector<double>& c) {
    const int m = static_cast<int>(A.size());
    const int n = static_cast<int>(c.size());

    Tableau tab;
    tab.rows = m;
    tab.cols = n + m + 1;  // original vars, artificials, rhs
    tab.t.assign(static_cast<std::size_t>(m) * tab.cols, 0.0);
    tab.basis.resize(m);

    for (int r = 0; r < m; ++r) {
        double sign = (b[r] < 0.0) ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) tab.at(r, j) = sign * A[r][j];
        tab.at(r, n + r) = 1.0;
        tab.at(r, tab.rhs()) = sign * b[r];
        tab.basis[r] = n + r;
    }

    // Phase 1: minimize the artificial sum. Reduced costs price out the
    // all-artificial basis.
    tab.obj.assign(tab.cols, 0.0);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int r = 0; r < m; ++r) s += tab.at(r, j);
        tab.obj[j] = -s;
    }
    double b_sum = 0.0;
    for (int r = 0; r < m; ++r) b_sum += tab.at(r, tab.rhs());
    tab.obj[tab.rhs()] = -b_sum;

    simplex_iterate(tab, n);  // artificials never re-enter

    double phase1 = -tab.obj[tab.rhs()];
    if (phase1 > kFeasibilityTol * (1.0 + std::abs(b_sum))) {
        return {LpResult::Status::infeasible, {}, 0.0};
    }

    // Remove artificials from the basis: pivot them out where possible,
    // drop redundant rows otherwise.
    for (int r = tab.rows - 1; r >= 0; --r) {
        if (tab.basis[r] < n) continue;
        int col = -1;
        for (int j = 0; j < n; ++j)
            if (std::abs(tab.at(r, j)) > kPivotTol) { col = j; break; }
        if (col >= 0)
            tab.pivot(r, col);
        else
            tab.drop_row(r);
    }

    // Phase 2: original costs priced out against the current basis.
    tab.obj.assign(tab.cols, 0.0);
    for (int j = 0; j < n; ++j) tab.obj[j] = c[j];
    for (int r = 0; r < tab.rows; ++r) {
        double cb = c[tab.basis[r]];
        if (cb == 0.0) continue;
        for (int j = 0; j < tab.cols; ++j) tab.obj[j] -= cb * tab.at(r, j);
        tab.obj[tab.basis[r]] = 0.0;
    }

    if (!simplex_iterate(tab, n)) {
        return {LpResult::Status::unbounded, {}, 0.0};
    }

    LpResult result;
    result.status = LpResult::Status::optimal;
    result.x.assign(n, 0.0);
    for (int r = 0; r < tab.rows; ++r)
        if (tab.basis[r] < n) result.x[tab.basis[r]] = tab.at(r, tab.rhs());
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += c[j] * result.x[j];
    result.objective = obj;
    return result;
}

}  // namespace meq
