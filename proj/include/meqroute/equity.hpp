#pragma once

#include <optional>
#include <string>
#include <vector>

#include "meqroute/game.hpp"
#include "meqroute/network.hpp"

namespace meq {

enum class IndicatorKind { exact, sigmoid };

/// Essential services and the destination nodes that supply each of them.
struct ServiceMap {
    std::vector<std::string> names;
    std::vector<std::vector<NodeId>> destinations;  // per service

    int size() const { return static_cast<int>(names.size()); }

    bool operator==(const ServiceMap&) const = default;
};

/// Parameters of the mobility equity metric.
struct MemParams {
    double kappa = 1.0;               // price sensitivity
    std::vector<double> cost;         // per mode, cost per passenger mile
    std::vector<double> priority;     // per service
    std::vector<double> threshold;    // per mode, accessibility time threshold
    double slope = 2.0;               // sigmoid steepness k
    IndicatorKind indicator = IndicatorKind::exact;
    ServiceMap services;

    bool operator==(const MemParams&) const = default;
};

/// Smoothed accessibility indicator 1 - 1/(1 + exp(-k (t - tau))), strictly
/// decreasing in t and exactly 0.5 at t = tau. Evaluated in a branch form
/// that cannot overflow for large |k (t - tau)|.
double smooth_indicator(double t, double tau, double k);

/// Average number of service destinations accessible within the mode's time
/// threshold, weighted by per-origin compliant demand:
///   sigma = sum_o alpha_m^o * sum_{d in service} I(t_m^{o,d}) / sum_o alpha_m^o,
/// with I the exact or smoothed indicator per params. Origin-destination
/// pairs with no trip or no reported time count as inaccessible.
/// Throws when the mode has zero total demand (undefined average).
double sigma(const TravelTimes& times, const DemandTable& demands,
             const std::vector<Trip>& trips, const std::vector<NodeId>& origins, int mode,
             const std::vector<NodeId>& service_destinations, const MemParams& params);

/// Mobility equity metric sum_m exp(-kappa c_m) * sum_s beta^s sigma_m^s
/// for a full matrix of accessibility values sigmas[mode][service].
double mem_value(const std::vector<std::vector<double>>& sigmas, const MemParams& params);

/// One evaluated point of the weight sweep.
struct SweepRecord {
    Weights weights;
    double ncr = -1.0;  // noncompliance rate; negative when demand came from the file
    double mem = 0.0;
    double delta_pv = 0.0;
    std::vector<std::vector<double>> sigmas;  // [mode][service]
    TravelTimes times;
    GameStatus status = GameStatus::converged;
    bool feasible = false;  // delta_pv <= gap_limit
};

/// All simplex grid points with the given step for `modes` weight entries
/// (step must divide 1 into an integer number of increments).
std::vector<Weights> weight_grid(int modes, double step);

/// Plays the game at one weight point and scores it (MEM, compliance gap,
/// feasibility against gap_limit).
SweepRecord evaluate_weight_point(const Network& network, const std::vector<Trip>& trips,
                                  const DemandTable& demands, const MemParams& params,
                                  double gap_limit, const Weights& weights,
                                  const GameConfig& config, int cpv_mode);

/// Index of the feasible record with maximal MEM; ties break toward the
/// smaller pt_mode weight. Empty when nothing is feasible.
std::optional<std::size_t> select_best_record(const std::vector<SweepRecord>& records, int pt_mode);

struct SweepOutcome {
    std::vector<SweepRecord> records;        // one per grid point, grid order
    std::optional<std::size_t> best_index;   // feasible argmax of MEM, if any
};

/// Evaluates the routing game at every weight in the grid and scores MEM and
/// the compliance gap. Ties on MEM break toward the smaller weight of
/// pt_mode (the public-transport mode).
SweepOutcome run_weight_sweep(const Network& network, const std::vector<Trip>& trips,
                              const DemandTable& demands, const MemParams& params,
                              double gap_limit, const std::vector<Weights>& grid,
                              const GameConfig& config, int cpv_mode, int pt_mode);

/// Carries every evaluated record when no grid point satisfies the gap bound.
class InfeasibleSweepError : public Error {
public:
    InfeasibleSweepError(std::vector<SweepRecord> records, double gap_limit);
    const std::vector<SweepRecord>& records() const { return records_; }

private:
    std::vector<SweepRecord> records_;
};

/// Solves the weight-selection problem over the grid: maximal MEM subject to
/// delta_pv <= gap_limit. Returns the winning weights and every record;
/// throws InfeasibleSweepError (carrying all records) when nothing is
/// feasible.
std::pair<Weights, std::vector<SweepRecord>> maximize_mem(
    const Network& network, const std::vector<Trip>& trips, const DemandTable& demands,
    const MemParams& params, double gap_limit, const std::vector<Weights>& grid,
    const GameConfig& config, int cpv_mode, int pt_mode);

}  // namespace meq
