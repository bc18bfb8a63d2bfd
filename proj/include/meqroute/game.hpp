#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "meqroute/assignment.hpp"
#include "meqroute/cognitive.hpp"

namespace meq {

/// Which travel-time aggregation to report per (mode, trip):
///   paper - flow-weighted mean edge time, sum(t x) / sum(x)
///   path  - experienced time per unit demand, sum(t x) / demand
/// Both are kept because the flow-weighted form counts each traversed edge in
/// the denominator; see travel_times().
enum class TimeFormula { paper, path };

struct GameConfig {
    int max_iterations = 50;          // outer fixed-point iterations
    double flow_tolerance = 1e-4;     // relative to total scenario demand
    int chatter_window = 6;           // how far back cycle detection looks
    double gap_limit = std::numeric_limits<double>::infinity();  // Problem-3 bound on delta_pv
    TimeFormula time_formula = TimeFormula::paper;
    SolverConfig solver;
};

enum class GameStatus { converged, chatter_resolved, max_iterations };

std::string to_string(GameStatus status);

struct IterationRecord {
    std::vector<double> compliant_totals;
    std::vector<double> npv_totals;
    std::vector<double> totals;  // compliant + noncompliant, per edge
    double objective = 0.0;
};

struct EquilibriumResult {
    CompliantFlows compliant;
    NpvAssignment npv_assignment;
    NpvFlows npv;
    std::vector<double> edge_totals;
    std::vector<IterationRecord> trace;
    GameStatus status = GameStatus::converged;
    int iterations = 0;
    bool redistribution_applied = false;
    /// Compliant flows the redistribution replaced, when it ran.
    std::optional<CompliantFlows> pre_redistribution;
    SolveReport last_solve;
};

/// True when the latest edge-total vector matches an earlier one inside the
/// window (max-norm within tolerance) while differing from its immediate
/// predecessor: a cycle rather than convergence.
bool detect_chatter(const std::vector<std::vector<double>>& totals_trace, int window,
                    double tolerance);

/// Plays the fixed-point game between the system assignment and the cognitive
/// hierarchy, starting from zero noncompliant flow. Detects chattering and
/// resolves it with a single fixed-totals redistribution, after which the
/// recomputed noncompliant responses must be unchanged (a diagnostic error
/// otherwise).
EquilibriumResult play_game(const Network& network, const std::vector<Trip>& trips,
                            const DemandTable& demands, const Weights& weights,
                            const GameConfig& config);

/// Average travel time per (mode, trip) and per (level, trip). Pairs with no
/// demand are omitted (has_* returns false) rather than divided by zero.
struct TravelTimes {
    int mode_count = 0;
    int trip_count = 0;
    std::vector<double> compliant;  // [mode * trips + trip], NaN when absent
    std::vector<double> npv;        // [level * trips + trip], NaN when absent

    double compliant_time(int mode, int trip) const { return compliant[mode * trip_count + trip]; }
    double npv_time(int level, int trip) const { return npv[level * trip_count + trip]; }
    bool has_compliant(int mode, int trip) const;
    bool has_npv(int level, int trip) const;
};

TravelTimes travel_times(const Network& network, const std::vector<Trip>& trips,
                         const DemandTable& demands, const EquilibriumResult& result,
                         TimeFormula formula);

/// Travel times for an explicit flow state (used to compare the states before
/// and after a redistribution).
TravelTimes travel_times_for(const Network& network, const std::vector<Trip>& trips,
                             const DemandTable& demands, const CompliantFlows& compliant,
                             const NpvAssignment& npv_assignment, const NpvFlows& npv,
                             TimeFormula formula);

/// Demand-weighted mean compliant-private travel time minus demand-weighted
/// mean noncompliant travel time; 0 when there is no noncompliant demand.
/// May be negative.
double delta_pv(const TravelTimes& times, const DemandTable& demands, int cpv_mode);

/// Rescales private demand to a noncompliance rate: per trip, the base
/// private demand (current CPV rate plus all NPV rates) splits into
/// (1-ncr) CPV and ncr NPV, the latter across levels by level_split.
DemandTable split_private_demand(const DemandTable& demands, int cpv_mode, double ncr,
                                 const std::array<double, kNpvLevels>& level_split);

}  // namespace meq
