#include "meqroute/game.hpp"

#include <cmath>
#include <cstring>
#include <map>

#include "meqroute/util.hpp"

namespace meq {

std::string to_string(GameStatus status) {
    switch (status) {
        case GameStatus::converged: return "converged";
        case GameStatus::chatter_resolved: return "chatter_resolved";
        case GameStatus::max_iterations: return "max_iterations";
    }
    return "unknown";
}

bool detect_chatter(const std::vector<std::vector<double>>& totals_trace, int window,
                    double tolerance) {
    const int n = static_cast<int>(totals_trace.size());
    if (n < 3) return false;
    const auto& last = totals_trace[n - 1];
    if (max_norm_diff(last, totals_trace[n - 2]) < tolerance) return false;  // converging
    int first = std::max(0, n - 1 - window);
    for (int j = first; j <= n - 3; ++j)
        if (max_norm_diff(last, totals_trace[j]) < tolerance) return true;
    return false;
}

namespace {

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

std::string flow_key(const std::vector<double>& v) {
    return std::string(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

}  // namespace

EquilibriumResult play_game(const Network& network, const std::vector<Trip>& trips,
                            const DemandTable& demands, const Weights& weights,
                            const GameConfig& config) {
    if (config.max_iterations < 2)
        throw Error(ErrorKind::validation, "GameConfig.max_iterations must be at least 2");
    if (!(config.flow_tolerance > 0.0))
        throw Error(ErrorKind::validation, "GameConfig.flow_tolerance must be positive");
    if (config.chatter_window < 2)
        throw Error(ErrorKind::validation, "GameConfig.chatter_window must be at least 2");

    const int E = network.edge_count();
    double total_demand = demands.total_compliant() + demands.total_noncompliant();
    double eps = config.flow_tolerance * std::max(total_demand, 1e-12);

    EquilibriumResult result;

    // no noncompliant demand: the game has no feedback loop
    if (demands.total_noncompliant() <= 0.0) {
        auto [flows, report] = solve_system_optimal(network, trips, demands, weights,
                                                    std::vector<double>(E, 0.0), config.solver);
        result.compliant = std::move(flows);
        result.npv_assignment = NpvAssignment(static_cast<int>(trips.size()));
        result.npv = NpvFlows(E);
        result.edge_totals = result.compliant.edge_totals();
        result.trace.push_back({result.edge_totals, std::vector<double>(E, 0.0),
                                result.edge_totals, report.objective});
        result.status = GameStatus::converged;
        result.iterations = 1;
        result.last_solve = report;
        return result;
    }

    // Memoize system solves on the exact noncompliant flow vector. The solver
    // is deterministic, so once the responses revisit a previous flow state
    // the iteration repeats bit-identically; cycles and fixed points are then
    // detected exactly.
    std::map<std::string, std::pair<CompliantFlows, SolveReport>> solve_cache;
    auto solve_for = [&](const std::vector<double>& q) -> const std::pair<CompliantFlows, SolveReport>& {
        auto key = flow_key(q);
        auto it = solve_cache.find(key);
        if (it == solve_cache.end()) {
            auto solved = solve_system_optimal(network, trips, demands, weights, q, config.solver);
            it = solve_cache.emplace(key, std::move(solved)).first;
        }
        return it->second;
    };

    std::vector<double> q_totals(E, 0.0);
    std::vector<std::vector<double>> totals_trace;
    CompliantFlows x;
    NpvAssignment assignment;
    NpvFlows npv;
    SolveReport last_report;

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        result.iterations = iter;
        const auto& [solved, report] = solve_for(q_totals);
        x = solved;
        last_report = report;
        auto x_totals = x.edge_totals();

        auto phase = npv_phase(network, x_totals, trips, demands);
        assignment = std::move(phase.first);
        npv = std::move(phase.second);
        q_totals = npv.q_total;

        auto totals = add(x_totals, q_totals);
        totals_trace.push_back(totals);
        result.trace.push_back({std::move(x_totals), q_totals, totals, report.objective});

        if (iter >= 2 &&
            max_norm_diff(totals_trace[iter - 1], totals_trace[iter - 2]) < eps) {
            result.status = GameStatus::converged;
            break;
        }

        if (detect_chatter(totals_trace, config.chatter_window, eps)) {
            // Freeze the per-edge compliant totals of the current iterate and
            // redistribute modes across them; total flows stay put, so the
            // noncompliant responses have nothing to react to.
            auto fixed = x.edge_totals();
            CompliantFlows redistributed =
                redistribute_fixed_totals(network, trips, demands, weights, fixed, q_totals);

            auto recheck = npv_phase(network, redistributed.edge_totals(), trips, demands);
            if (!(recheck.first == assignment))
                throw Error(ErrorKind::internal,
                            "chatter resolution diagnostic: noncompliant responses changed "
                            "after fixed-totals redistribution");

            result.pre_redistribution = std::move(x);
            x = std::move(redistributed);
            assignment = std::move(recheck.first);
            npv = std::move(recheck.second);
            q_totals = npv.q_total;
            result.redistribution_applied = true;

            auto x_totals_after = x.edge_totals();
            auto totals_after = add(x_totals_after, q_totals);
            double frozen_objective = system_objective(network, x, weights, q_totals);
            result.trace.push_back(
                {std::move(x_totals_after), q_totals, std::move(totals_after), frozen_objective});
            result.status = GameStatus::chatter_resolved;
            break;
        }

        if (iter == config.max_iterations) result.status = GameStatus::max_iterations;
    }

    result.compliant = std::move(x);
    result.npv_assignment = std::move(assignment);
    result.npv = std::move(npv);
    result.edge_totals = add(result.compliant.edge_totals(), result.npv.q_total);
    result.last_solve = last_report;
    return result;
}

bool TravelTimes::has_compliant(int mode, int trip) const {
    return !std::isnan(compliant[mode * trip_count + trip]);
}

bool TravelTimes::has_npv(int level, int trip) const {
    return !std::isnan(npv[level * trip_count + trip]);
}

TravelTimes travel_times_for(const Network& network, const std::vector<Trip>& trips,
                             const DemandTable& demands, const CompliantFlows& compliant,
                             const NpvAssignment& npv_assignment, const NpvFlows& npv,
                             TimeFormula formula) {
    const int E = network.edge_count();
    const int M = demands.mode_count();
    const int N = static_cast<int>(trips.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();

    TravelTimes out;
    out.mode_count = M;
    out.trip_count = N;
    out.compliant.assign(static_cast<std::size_t>(M) * N, nan);
    out.npv.assign(static_cast<std::size_t>(kNpvLevels) * N, nan);

    auto totals = add(compliant.edge_totals(), npv.q_total);
    std::vector<double> edge_time(E);
    for (int e = 0; e < E; ++e) edge_time[e] = network.bpr_time(e, totals[e]);

    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < N; ++n) {
            double weighted = 0.0, flow_sum = 0.0;
            for (int e = 0; e < E; ++e) {
                double v = compliant.at(e, m, n);
                weighted += edge_time[e] * v;
                flow_sum += v;
            }
            if (flow_sum <= 0.0) continue;  // zero-flow pair omitted
            double denom =
                formula == TimeFormula::paper ? flow_sum : demands.compliant_rate(m, n);
            out.compliant[m * N + n] = weighted / denom;
        }
    }

    for (int level = 0; level < kNpvLevels; ++level) {
        for (int n = 0; n < N; ++n) {
            if (!npv_assignment.has(level, n)) continue;
            const auto& path = npv_assignment.path(level, n);
            double t = 0.0;
            for (std::size_t i = 0; i + 1 < path.size(); ++i)
                t += edge_time[network.edge_index(path[i], path[i + 1])];
            out.npv[level * N + n] = t;
        }
    }
    return out;
}

TravelTimes travel_times(const Network& network, const std::vector<Trip>& trips,
                         const DemandTable& demands, const EquilibriumResult& result,
                         TimeFormula formula) {
    return travel_times_for(network, trips, demands, result.compliant, result.npv_assignment,
                            result.npv, formula);
}

double delta_pv(const TravelTimes& times, const DemandTable& demands, int cpv_mode) {
    const int N = times.trip_count;
    if (cpv_mode < 0 || cpv_mode >= times.mode_count)
        throw Error(ErrorKind::validation, "delta_pv: invalid CPV mode index");

    double npv_demand = demands.total_noncompliant();
    if (npv_demand <= 0.0) return 0.0;

    double cpv_weighted = 0.0, cpv_total = 0.0;
    for (int n = 0; n < N; ++n) {
        double rate = demands.compliant_rate(cpv_mode, n);
        if (rate <= 0.0 || !times.has_compliant(cpv_mode, n)) continue;
        cpv_weighted += rate * times.compliant_time(cpv_mode, n);
        cpv_total += rate;
    }
    double npv_weighted = 0.0, npv_total = 0.0;
    for (int level = 0; level < kNpvLevels; ++level) {
        for (int n = 0; n < N; ++n) {
            double rate = demands.npv_rate(level, n);
            if (rate <= 0.0 || !times.has_npv(level, n)) continue;
            npv_weighted += rate * times.npv_time(level, n);
            npv_total += rate;
        }
    }
    if (cpv_total <= 0.0 || npv_total <= 0.0) return 0.0;
    return cpv_weighted / cpv_total - npv_weighted / npv_total;
}

DemandTable split_private_demand(const DemandTable& demands, int cpv_mode, double ncr,
                                 const std::array<double, kNpvLevels>& level_split) {
    if (ncr < 0.0 || ncr > 1.0)
        throw Error(ErrorKind::validation, "noncompliance rate must lie in [0, 1]");
    double split_sum = level_split[0] + level_split[1] + level_split[2];
    if (std::abs(split_sum - 1.0) > 1e-9 || level_split[0] < 0.0 || level_split[1] < 0.0 ||
        level_split[2] < 0.0)
        throw Error(ErrorKind::validation, "level split must be nonnegative and sum to 1");
    if (cpv_mode < 0 || cpv_mode >= demands.mode_count())
        throw Error(ErrorKind::validation, "split_private_demand: invalid CPV mode index");

    DemandTable out = demands;
    for (int n = 0; n < demands.trip_count(); ++n) {
        double base = demands.compliant_rate(cpv_mode, n);
        for (int level = 0; level < kNpvLevels; ++level) base += demands.npv_rate(level, n);
        out.compliant[cpv_mode][n] = (1.0 - ncr) * base;
        for (int level = 0; level < kNpvLevels; ++level)
            out.noncompliant[level][n] = ncr * base * level_split[level];
    }
    return out;
}

}  // namespace meq
