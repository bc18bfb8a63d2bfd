#pragma once

#include <vector>

namespace meq {

/// Dense two-phase primal simplex for
///     minimize c'x  subject to  A x = b,  x >= 0.
/// Small-scale exact workhorse behind redistribute_fixed_totals. Redundant
/// rows are dropped after phase 1; Dantzig pricing with a Bland fallback
/// guards against cycling on degenerate bases.
struct LpResult {
    enum class Status { optimal, infeasible, unbounded };
    Status status = Status::optimal;
    std::vector<double> x;
    double objective = 0.0;
};

LpResult solve_equality_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                           const std::vector<double>& c);

}  // namespace meq
