#include "meqroute/equity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace meq {

double smooth_indicator(double t, double tau, double k) {
    if (!(k > 0.0)) throw Error(ErrorKind::validation, "smooth_indicator: slope must be positive");
    double z = k * (t - tau);
    // 1 - 1/(1+e^-z) == 1/(1+e^z); pick the branch whose exponential decays
    if (z >= 0.0) {
        double ez = std::exp(-z);
        return ez / (1.0 + ez);
    }
    return 1.0 / (1.0 + std::exp(z));
}

double sigma(const TravelTimes& times, const DemandTable& demands,
             const std::vector<Trip>& trips, const std::vector<NodeId>& origins, int mode,
             const std::vector<NodeId>& service_destinations, const MemParams& params) {
    if (mode < 0 || mode >= demands.mode_count())
        throw Error(ErrorKind::validation, "sigma: invalid mode index");
    double tau = params.threshold[mode];

    double weighted = 0.0, demand_sum = 0.0;
    for (NodeId origin : origins) {
        double origin_demand = 0.0;
        for (std::size_t n = 0; n < trips.size(); ++n)
            if (trips[n].origin == origin) origin_demand += demands.compliant_rate(mode, static_cast<int>(n));
        if (origin_demand <= 0.0) continue;

        double accessible = 0.0;
        for (NodeId dest : service_destinations) {
            // find the trip for this origin-destination pair, if any
            int trip_idx = -1;
            for (std::size_t n = 0; n < trips.size(); ++n)
                if (trips[n].origin == origin && trips[n].destination == dest) {
                    trip_idx = static_cast<int>(n);
                    break;
                }
            if (trip_idx < 0 || !times.has_compliant(mode, trip_idx)) continue;
            double t = times.compliant_time(mode, trip_idx);
            if (params.indicator == IndicatorKind::exact)
                accessible += (t <= tau) ? 1.0 : 0.0;
            else
                accessible += smooth_indicator(t, tau, params.slope);
        }
        weighted += origin_demand * accessible;
        demand_sum += origin_demand;
    }
    if (demand_sum <= 0.0)
        throw Error(ErrorKind::validation,
                    "sigma: mode has zero total compliant demand; average undefined");
    return weighted / demand_sum;
}

double mem_value(const std::vector<std::vector<double>>& sigmas, const MemParams& params) {
    const int M = static_cast<int>(sigmas.size());
    const int S = params.services.size();
    if (static_cast<int>(params.cost.size()) < M)
        throw Error(ErrorKind::validation, "mem_value: missing per-mode costs");
    double total = 0.0;
    for (int m = 0; m < M; ++m) {
        double inner = 0.0;
        for (int s = 0; s < S; ++s) inner += params.priority[s] * sigmas[m][s];
        total += std::exp(-params.kappa * params.cost[m]) * inner;
    }
    return total;
}

std::vector<Weights> weight_grid(int modes, double step) {
    if (modes < 1) throw Error(ErrorKind::validation, "weight_grid: need at least one mode");
    if (!(step > 0.0) || step > 1.0)
        throw Error(ErrorKind::validation, "weight_grid: step must lie in (0, 1]");
    int divisions = static_cast<int>(std::lround(1.0 / step));
    if (std::abs(divisions * step - 1.0) > 1e-9)
        throw Error(ErrorKind::validation, "weight_grid: step must divide 1 evenly");

    std::vector<Weights> grid;
    std::vector<int> units(modes, 0);
    // enumerate all compositions of `divisions` into `modes` parts,
    // lexicographic in the leading entries
    std::function<void(int, int)> recurse = [&](int mode, int remaining) {
        if (mode == modes - 1) {
            units[mode] = remaining;
            Weights w;
            w.w.resize(modes);
            for (int m = 0; m < modes; ++m)
                w.w[m] = static_cast<double>(units[m]) / static_cast<double>(divisions);
            grid.push_back(std::move(w));
            return;
        }
        for (int u = 0; u <= remaining; ++u) {
            units[mode] = u;
            recurse(mode + 1, remaining - u);
        }
    };
    recurse(0, divisions);
    return grid;
}

SweepRecord evaluate_weight_point(const Network& network, const std::vector<Trip>& trips,
                                  const DemandTable& demands, const MemParams& params,
                                  double gap_limit, const Weights& weights,
                                  const GameConfig& config, int cpv_mode) {
    SweepRecord record;
    record.weights = weights;

    auto result = play_game(network, trips, demands, weights, config);
    record.status = result.status;
    record.times = travel_times(network, trips, demands, result, config.time_formula);

    const int M = demands.mode_count();
    const int S = params.services.size();
    record.sigmas.assign(M, std::vector<double>(S, 0.0));
    for (int m = 0; m < M; ++m)
        for (int s = 0; s < S; ++s)
            record.sigmas[m][s] = sigma(record.times, demands, trips, network.origins(), m,
                                        params.services.destinations[s], params);
    record.mem = mem_value(record.sigmas, params);
    record.delta_pv = delta_pv(record.times, demands, cpv_mode);
    record.feasible = record.delta_pv <= gap_limit;
    return record;
}

std::optional<std::size_t> select_best_record(const std::vector<SweepRecord>& records,
                                              int pt_mode) {
    std::optional<std::size_t> best_index;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (!rec.feasible) continue;
        if (!best_index) {
            best_index = i;
            continue;
        }
        const auto& best = records[*best_index];
        if (rec.mem > best.mem ||
            (rec.mem == best.mem && rec.weights.w[pt_mode] < best.weights.w[pt_mode]))
            best_index = i;
    }
    return best_index;
}

SweepOutcome run_weight_sweep(const Network& network, const std::vector<Trip>& trips,
                              const DemandTable& demands, const MemParams& params,
                              double gap_limit, const std::vector<Weights>& grid,
                              const GameConfig& config, int cpv_mode, int pt_mode) {
    if (grid.empty()) throw Error(ErrorKind::validation, "run_weight_sweep: empty weight grid");
    for (const Weights& w : grid)
        if (!w.valid())
            throw Error(ErrorKind::validation, "run_weight_sweep: grid point off the simplex");

    SweepOutcome outcome;
    outcome.records.reserve(grid.size());
    for (const Weights& w : grid)
        outcome.records.push_back(
            evaluate_weight_point(network, trips, demands, params, gap_limit, w, config, cpv_mode));
    outcome.best_index = select_best_record(outcome.records, pt_mode);
    return outcome;
}

InfeasibleSweepError::InfeasibleSweepError(std::vector<SweepRecord> records, double gap_limit)
    : Error(ErrorKind::infeasible,
            "no weight in the sweep satisfies delta_pv <= " + std::to_string(gap_limit)),
      records_(std::move(records)) {}

std::pair<Weights, std::vector<SweepRecord>> maximize_mem(
    const Network& network, const std::vector<Trip>& trips, const DemandTable& demands,
    const MemParams& params, double gap_limit, const std::vector<Weights>& grid,
    const GameConfig& config, int cpv_mode, int pt_mode) {
    SweepOutcome outcome = run_weight_sweep(network, trips, demands, params, gap_limit, grid,
                                            config, cpv_mode, pt_mode);
    if (!outcome.best_index)
        throw InfeasibleSweepError(std::move(outcome.records), gap_limit);
    Weights best = outcome.records[*outcome.best_index].weights;
    return {std::move(best), std::move(outcome.records)};
}

}  // namespace meq
