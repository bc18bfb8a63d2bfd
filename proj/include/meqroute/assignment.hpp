#pragma once

#include <utility>
#include <vector>

#include "meqroute/network.hpp"

namespace meq {

/// Per-mode objective weights; the solver requires them nonnegative with
/// sum 1 (unnormalized weights would only rescale the objective).
struct Weights {
    std::vector<double> w;

    static Weights normalized(std::vector<double> raw);

    double sum() const;
    bool valid(double tol = 1e-9) const;

    bool operator==(const Weights&) const = default;
};

/// Compliant edge flows indexed by (edge, mode, trip), plus derived totals.
struct CompliantFlows {
    int edge_count = 0;
    int mode_count = 0;
    int trip_count = 0;
    std::vector<double> x;  // [edge * M * N + mode * N + trip]

    CompliantFlows() = default;
    CompliantFlows(int edges, int modes, int trips)
        : edge_count(edges), mode_count(modes), trip_count(trips),
          x(static_cast<std::size_t>(edges) * modes * trips, 0.0) {}

    double at(int edge, int mode, int trip) const {
        return x[(static_cast<std::size_t>(edge) * mode_count + mode) * trip_count + trip];
    }
    double& at(int edge, int mode, int trip) {
        return x[(static_cast<std::size_t>(edge) * mode_count + mode) * trip_count + trip];
    }

    /// Total compliant flow per edge (all modes and trips).
    std::vector<double> edge_totals() const;
    /// Per-edge flow of a single mode.
    std::vector<double> mode_edge_totals(int mode) const;

    bool operator==(const CompliantFlows&) const = default;
};

struct SolveReport {
    double objective = 0.0;  // weighted travel time of the returned flows
    double gap = 0.0;        // Frank-Wolfe linearization (stationarity) gap
    int iterations = 0;
    bool converged = false;
};

struct SolverConfig {
    double relative_gap_tolerance = 1e-6;
    int max_iterations = 10000;
};

/// Weighted total travel time sum_m w_m sum_n sum_e t(x_e + q_e) x_{e,m,n}.
double system_objective(const Network& network, const CompliantFlows& flows,
                        const Weights& weights, const std::vector<double>& npv_totals);

/// Marginal objective cost of one more unit of (edge, mode) flow:
/// w_m t(X_e) + t'(X_e) sum_m' w_m' x_{e,m'} with X_e = x_e + q_e.
/// Trip-independent by construction.
double objective_gradient(const Network& network, const CompliantFlows& flows,
                          const Weights& weights, const std::vector<double>& npv_totals,
                          int edge, int mode);

/// Gradient for all (edge, mode) pairs, row-major [edge * M + mode].
std::vector<double> objective_gradient_all(const Network& network, const CompliantFlows& flows,
                                           const Weights& weights,
                                           const std::vector<double>& npv_totals);

/// Places each (mode, trip) demand entirely on one minimum-cost path under
/// the given per-mode edge costs (the Frank-Wolfe linear subproblem).
/// mode_costs[m] has one positive cost per edge.
CompliantFlows all_or_nothing(const Network& network, const std::vector<Trip>& trips,
                              const DemandTable& demands,
                              const std::vector<std::vector<double>>& mode_costs);

/// Convenience overload: one shared cost vector for every mode.
CompliantFlows all_or_nothing(const Network& network, const std::vector<Trip>& trips,
                              const DemandTable& demands, const std::vector<double>& edge_costs);

/// Solves the weighted system-centric assignment (fixed noncompliant flows
/// npv_totals) by Frank-Wolfe with exact line search. Deterministic: the same
/// inputs always produce bit-identical flows. On hitting the iteration cap the
/// current flows are returned with converged=false.
std::pair<CompliantFlows, SolveReport> solve_system_optimal(
    const Network& network, const std::vector<Trip>& trips, const DemandTable& demands,
    const Weights& weights, const std::vector<double>& npv_totals,
    const SolverConfig& config = {});

/// Re-assigns modes and trips to edges while keeping every per-edge compliant
/// total pinned to fixed_totals (which must come from a feasible assignment of
/// the same demands). Travel times are frozen at t(f_e + q_e), making the
/// problem a linear program; it is solved exactly with an in-repo simplex.
CompliantFlows redistribute_fixed_totals(const Network& network, const std::vector<Trip>& trips,
                                         const DemandTable& demands, const Weights& weights,
                                         const std::vector<double>& fixed_totals,
                                         const std::vector<double>& npv_totals);

/// Largest absolute violation of the demand/conservation constraints over all
/// (mode, trip) pairs and nodes; used by tests and internal checks.
double max_conservation_violation(const Network& network, const std::vector<Trip>& trips,
                                  const DemandTable& demands, const CompliantFlows& flows);

}  // namespace meq
