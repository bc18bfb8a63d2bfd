#include "meqroute/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "meqroute/cognitive.hpp"
#include "meqroute/simplex.hpp"

namespace meq {

namespace {

constexpr double kCostFloor = 1e-12;  // keeps Dijkstra costs positive for zero-weight modes

void check_npv_totals(const Network& network, const std::vector<double>& npv_totals) {
    if (npv_totals.size() != static_cast<std::size_t>(network.edge_count()))
        throw Error(ErrorKind::validation, "npv_totals size does not match edge count");
    for (double q : npv_totals)
        if (q < 0.0 || !std::isfinite(q))
            throw Error(ErrorKind::validation, "npv_totals must be nonnegative and finite");
}

void check_weights(const Weights& weights, int mode_count) {
    if (static_cast<int>(weights.w.size()) != mode_count)
        throw Error(ErrorKind::validation, "weights size does not match mode count");
    if (!weights.valid())
        throw Error(ErrorKind::validation, "weights must be nonnegative and sum to 1");
}

}  // namespace

Weights Weights::normalized(std::vector<double> raw) {
    double s = 0.0;
    for (double v : raw) {
        if (v < 0.0 || !std::isfinite(v))
            throw Error(ErrorKind::validation, "weights must be nonnegative and finite");
        s += v;
    }
    if (s <= 0.0) throw Error(ErrorKind::validation, "weights must not all be zero");
    for (double& v : raw) v /= s;
    return Weights{std::move(raw)};
}

double Weights::sum() const {
    double s = 0.0;
    for (double v : w) s += v;
    return s;
}

bool Weights::valid(double tol) const {
    for (double v : w)
        if (v < 0.0 || !std::isfinite(v)) return false;
    return std::abs(sum() - 1.0) <= tol;
}

std::vector<double> CompliantFlows::edge_totals() const {
    std::vector<double> totals(edge_count, 0.0);
    const int mn = mode_count * trip_count;
    for (int e = 0; e < edge_count; ++e) {
        double s = 0.0;
        const double* base = x.data() + static_cast<std::size_t>(e) * mn;
        for (int i = 0; i < mn; ++i) s += base[i];
        totals[e] = s;
    }
    return totals;
}

std::vector<double> CompliantFlows::mode_edge_totals(int mode) const {
    std::vector<double> totals(edge_count, 0.0);
    for (int e = 0; e < edge_count; ++e) {
        double s = 0.0;
        for (int n = 0; n < trip_count; ++n) s += at(e, mode, n);
        totals[e] = s;
    }
    return totals;
}

double system_objective(const Network& network, const CompliantFlows& flows,
                        const Weights& weights, const std::vector<double>& npv_totals) {
    check_npv_totals(network, npv_totals);
    check_weights(weights, flows.mode_count);
    const int E = flows.edge_count;
    const int M = flows.mode_count;
    const int N = flows.trip_count;
    double objective = 0.0;
    for (int e = 0; e < E; ++e) {
        double total = 0.0;
        double weighted = 0.0;
        for (int m = 0; m < M; ++m) {
            double xm = 0.0;
            for (int n = 0; n < N; ++n) xm += flows.at(e, m, n);
            total += xm;
            weighted += weights.w[m] * xm;
        }
        objective += network.bpr_time(e, total + npv_totals[e]) * weighted;
    }
    return objective;
}

double objective_gradient(const Network& network, const CompliantFlows& flows,
                          const Weights& weights, const std::vector<double>& npv_totals,
                          int edge, int mode) {
    const int M = flows.mode_count;
    const int N = flows.trip_count;
    double total = 0.0;
    double weighted = 0.0;
    for (int m = 0; m < M; ++m) {
        double xm = 0.0;
        for (int n = 0; n < N; ++n) xm += flows.at(edge, m, n);
        total += xm;
        weighted += weights.w[m] * xm;
    }
    double loaded = total + npv_totals[edge];
    return weights.w[mode] * network.bpr_time(edge, loaded) +
           network.bpr_time_derivative(edge, loaded) * weighted;
}

std::vector<double> objective_gradient_all(const Network& network, const CompliantFlows& flows,
                                           const Weights& weights,
                                           const std::vector<double>& npv_totals) {
    const int E = flows.edge_count;
    const int M = flows.mode_count;
    const int N = flows.trip_count;
    std::vector<double> g(static_cast<std::size_t>(E) * M);
    for (int e = 0; e < E; ++e) {
        double total = 0.0;
        double weighted = 0.0;
        for (int m = 0; m < M; ++m) {
            double xm = 0.0;
            for (int n = 0; n < N; ++n) xm += flows.at(e, m, n);
            total += xm;
            weighted += weights.w[m] * xm;
        }
        double loaded = total + npv_totals[e];
        double t = network.bpr_time(e, loaded);
        double dt = network.bpr_time_derivative(e, loaded);
        for (int m = 0; m < M; ++m) g[static_cast<std::size_t>(e) * M + m] = weights.w[m] * t + dt * weighted;
    }
    return g;
}

namespace {

// Shortest-path loading of every active (mode, trip) demand; writes into
// `out` (zeroed first). Costs are floored to stay positive.
void aon_into(const Network& network, const std::vector<Trip>& trips, const DemandTable& demands,
              const std::vector<std::vector<double>>& mode_costs, CompliantFlows& out) {
    const int E = network.edge_count();
    const int M = demands.mode_count();
    const int N = static_cast<int>(trips.size());
    std::fill(out.x.begin(), out.x.end(), 0.0);

    std::vector<double> floored(E);
    for (int m = 0; m < M; ++m) {
        bool mode_active = false;
        for (int n = 0; n < N && !mode_active; ++n)
            if (demands.compliant_rate(m, n) > 0.0) mode_active = true;
        if (!mode_active) continue;

        for (int e = 0; e < E; ++e) {
            double c = mode_costs[m][e];
            if (!std::isfinite(c) || c < 0.0)
                throw Error(ErrorKind::validation, "all_or_nothing: invalid edge cost");
            floored[e] = std::max(c, kCostFloor);
        }

        // one backward Dijkstra per destination serves every trip into it
        for (int n = 0; n < N; ++n) {
            if (demands.compliant_rate(m, n) <= 0.0) continue;
            bool already_done = false;
            for (int p = 0; p < n; ++p)
                if (demands.compliant_rate(m, p) > 0.0 &&
                    trips[p].destination == trips[n].destination) {
                    already_done = true;
                    break;
                }
            if (already_done) continue;

            int d_idx = network.node_index(trips[n].destination);
            auto dist = detail::distance_to(network, floored, d_idx);
            for (int k = n; k < N; ++k) {
                if (demands.compliant_rate(m, k) <= 0.0) continue;
                if (trips[k].destination != trips[n].destination) continue;
                int o_idx = network.node_index(trips[k].origin);
                if (!std::isfinite(dist[o_idx]))
                    throw Error(ErrorKind::infeasible,
                                "trip " + std::to_string(trips[k].id) + ": destination " +
                                    std::to_string(trips[k].destination) +
                                    " unreachable from origin " + std::to_string(trips[k].origin));
                auto path = detail::walk_path(network, floored, dist, o_idx, d_idx);
                double rate = demands.compliant_rate(m, k);
                for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                    int e = network.edge_index(network.nodes()[path[i]], network.nodes()[path[i + 1]]);
                    out.at(e, m, k) += rate;
                }
            }
        }
    }
}

}  // namespace

CompliantFlows all_or_nothing(const Network& network, const std::vector<Trip>& trips,
                              const DemandTable& demands,
                              const std::vector<std::vector<double>>& mode_costs) {
    if (static_cast<int>(mode_costs.size()) != demands.mode_count())
        throw Error(ErrorKind::validation, "all_or_nothing: one cost vector per mode required");
    CompliantFlows out(network.edge_count(), demands.mode_count(), static_cast<int>(trips.size()));
    aon_into(network, trips, demands, mode_costs, out);
    return out;
}

CompliantFlows all_or_nothing(const Network& network, const std::vector<Trip>& trips,
                              const DemandTable& demands, const std::vector<double>& edge_costs) {
    std::vector<std::vector<double>> per_mode(demands.mode_count(), edge_costs);
    return all_or_nothing(network, trips, demands, per_mode);
}

namespace {

struct SegmentState {
    // per-edge data for the line search along x + s (y - x)
    std::vector<double> loaded;          // x_e + q_e
    std::vector<double> delta;           // y_e - x_e
    std::vector<double> weighted;        // sum_m w_m x_{e,m}
    std::vector<double> weighted_delta;  // sum_m w_m (y_{e,m} - x_{e,m})
};

double segment_objective(const Network& network, const SegmentState& seg, double s) {
    double f = 0.0;
    const int E = static_cast<int>(seg.loaded.size());
    for (int e = 0; e < E; ++e)
        f += network.bpr_time(e, seg.loaded[e] + s * seg.delta[e]) *
             (seg.weighted[e] + s * seg.weighted_delta[e]);
    return f;
}

double segment_derivative(const Network& network, const SegmentState& seg, double s) {
    double d = 0.0;
    const int E = static_cast<int>(seg.loaded.size());
    for (int e = 0; e < E; ++e) {
        double v = seg.loaded[e] + s * seg.delta[e];
        double wv = seg.weighted[e] + s * seg.weighted_delta[e];
        d += network.bpr_time_derivative(e, v) * seg.delta[e] * wv +
             network.bpr_time(e, v) * seg.weighted_delta[e];
    }
    return d;
}

// Exact line search on [0,1]. The derivative is negative at 0 (descent
// direction); the common case has a single sign change found by bisection.
// A grid fallback covers the non-convex corner the weighted objective can
// exhibit with unequal mode weights.
double exact_line_search(const Network& network, const SegmentState& seg) {
    double d1 = segment_derivative(network, seg, 1.0);
    double candidate;
    if (d1 <= 0.0) {
        candidate = 1.0;
    } else {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 47; ++it) {
            double mid = 0.5 * (lo + hi);
            if (segment_derivative(network, seg, mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        candidate = 0.5 * (lo + hi);
    }

    double f0 = segment_objective(network, seg, 0.0);
    if (segment_objective(network, seg, candidate) <= f0) return candidate;

    // multiple stationary points: scan for the best descent interval
    double best_s = 0.0;
    double best_f = f0;
    for (int i = 1; i <= 100; ++i) {
        double s = static_cast<double>(i) / 100.0;
        double f = segment_objective(network, seg, s);
        if (f < best_f) {
            best_f = f;
            best_s = s;
        }
    }
    // refine around the grid argmin with a short golden-section pass
    double lo = std::max(0.0, best_s - 0.01), hi = std::min(1.0, best_s + 0.01);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    double fa = segment_objective(network, seg, a), fb = segment_objective(network, seg, b);
    for (int it = 0; it < 60; ++it) {
        if (fa < fb) {
            hi = b; b = a; fb = fa;
            a = hi - phi * (hi - lo);
            fa = segment_objective(network, seg, a);
        } else {
            lo = a; a = b; fa = fb;
            b = lo + phi * (hi - lo);
            fb = segment_objective(network, seg, b);
        }
    }
    double refined = 0.5 * (lo + hi);
    if (segment_objective(network, seg, refined) < best_f) return refined;
    return best_s;
}

}  // namespace

std::pair<CompliantFlows, SolveReport> solve_system_optimal(
    const Network& network, const std::vector<Trip>& trips, const DemandTable& demands,
    const Weights& weights, const std::vector<double>& npv_totals, const SolverConfig& config) {
    const int E = network.edge_count();
    const int M = demands.mode_count();
    const int N = static_cast<int>(trips.size());
    check_npv_totals(network, npv_totals);
    check_weights(weights, M);
    if (demands.trip_count() != N)
        throw Error(ErrorKind::validation, "demand table does not match trip list");

    CompliantFlows x(E, M, N);
    if (demands.total_compliant() <= 0.0)
        return {std::move(x), SolveReport{0.0, 0.0, 0, true}};

    // initial point: all-or-nothing on the zero-flow linearized costs
    std::vector<std::vector<double>> mode_costs(M, std::vector<double>(E));
    {
        for (int e = 0; e < E; ++e) {
            double t = network.bpr_time(e, npv_totals[e]);
            for (int m = 0; m < M; ++m) mode_costs[m][e] = weights.w[m] * t;
        }
        aon_into(network, trips, demands, mode_costs, x);
    }

    CompliantFlows y(E, M, N);
    SegmentState seg;
    seg.loaded.resize(E);
    seg.delta.resize(E);
    seg.weighted.resize(E);
    seg.weighted_delta.resize(E);
    std::vector<double> x_mode(static_cast<std::size_t>(E) * M);
    std::vector<double> y_mode(static_cast<std::size_t>(E) * M);

    SolveReport report;
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        report.iterations = iter;

        double objective = 0.0;
        for (int e = 0; e < E; ++e) {
            double total = 0.0;
            for (int m = 0; m < M; ++m) {
                double xm = 0.0;
                for (int n = 0; n < N; ++n) xm += x.at(e, m, n);
                x_mode[static_cast<std::size_t>(e) * M + m] = xm;
                total += xm;
            }
            double weighted = 0.0;
            for (int m = 0; m < M; ++m) weighted += weights.w[m] * x_mode[static_cast<std::size_t>(e) * M + m];
            seg.loaded[e] = total + npv_totals[e];
            seg.weighted[e] = weighted;
            double t = network.bpr_time(e, seg.loaded[e]);
            double dt = network.bpr_time_derivative(e, seg.loaded[e]);
            objective += t * weighted;
            for (int m = 0; m < M; ++m)
                mode_costs[m][e] = weights.w[m] * t + dt * weighted;
        }
        report.objective = objective;

        aon_into(network, trips, demands, mode_costs, y);

        double gap = 0.0;
        for (int e = 0; e < E; ++e) {
            double y_total = 0.0;
            for (int m = 0; m < M; ++m) {
                double ym = 0.0;
                for (int n = 0; n < N; ++n) ym += y.at(e, m, n);
                y_mode[static_cast<std::size_t>(e) * M + m] = ym;
                y_total += ym;
                gap += mode_costs[m][e] * (x_mode[static_cast<std::size_t>(e) * M + m] - ym);
            }
            seg.delta[e] = y_total + npv_totals[e] - seg.loaded[e];
            double wd = 0.0;
            for (int m = 0; m < M; ++m)
                wd += weights.w[m] * (y_mode[static_cast<std::size_t>(e) * M + m] -
                                      x_mode[static_cast<std::size_t>(e) * M + m]);
            seg.weighted_delta[e] = wd;
        }
        report.gap = std::max(gap, 0.0);

        if (gap <= config.relative_gap_tolerance * std::max(std::abs(objective), 1e-12)) {
            report.converged = true;
            break;
        }

        double s = exact_line_search(network, seg);
        if (s >= 1.0) {
            std::swap(x.x, y.x);
        } else if (s > 0.0) {
            for (std::size_t i = 0; i < x.x.size(); ++i) x.x[i] += s * (y.x[i] - x.x[i]);
        } else {
            break;  // no descent achievable along the direction; stationary
        }
    }

    if (!report.converged)
        report.objective = system_objective(network, x, weights, npv_totals);
    return {std::move(x), report};
}

CompliantFlows redistribute_fixed_totals(const Network& network, const std::vector<Trip>& trips,
                                         const DemandTable& demands, const Weights& weights,
                                         const std::vector<double>& fixed_totals,
                                         const std::vector<double>& npv_totals) {
    const int E = network.edge_count();
    const int M = demands.mode_count();
    const int N = static_cast<int>(trips.size());
    const int V = network.node_count();
    check_npv_totals(network, npv_totals);
    check_weights(weights, M);
    if (fixed_totals.size() != static_cast<std::size_t>(E))
        throw Error(ErrorKind::validation, "fixed_totals size does not match edge count");
    for (double f : fixed_totals)
        if (f < 0.0 || !std::isfinite(f))
            throw Error(ErrorKind::validation, "fixed_totals must be nonnegative and finite");

    struct Commodity {
        int mode;
        int trip;
    };
    std::vector<Commodity> commodities;
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n)
            if (demands.compliant_rate(m, n) > 0.0) commodities.push_back({m, n});
    const int K = static_cast<int>(commodities.size());

    CompliantFlows out(E, M, N);
    if (K == 0) {
        for (double f : fixed_totals)
            if (f > 1e-9)
                throw Error(ErrorKind::infeasible,
                            "fixed totals are nonzero but there is no compliant demand");
        return out;
    }

    // frozen travel times make the objective linear in the flows
    std::vector<double> frozen(E);
    for (int e = 0; e < E; ++e) frozen[e] = network.bpr_time(e, fixed_totals[e] + npv_totals[e]);

    const int nvars = K * E;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    A.reserve(static_cast<std::size_t>(K) * V + E);

    for (int k = 0; k < K; ++k) {
        const Trip& trip = trips[commodities[k].trip];
        double rate = demands.compliant_rate(commodities[k].mode, commodities[k].trip);
        int o_idx = network.node_index(trip.origin);
        int d_idx = network.node_index(trip.destination);
        for (int j = 0; j < V; ++j) {
            std::vector<double> row(nvars, 0.0);
            if (j == o_idx) {
                for (int e : network.out_edges(j)) row[k * E + e] = 1.0;
                b.push_back(rate);
            } else if (j == d_idx) {
                for (int e : network.in_edges(j)) row[k * E + e] = 1.0;
                b.push_back(rate);
            } else {
                for (int e : network.in_edges(j)) row[k * E + e] = 1.0;
                for (int e : network.out_edges(j)) row[k * E + e] -= 1.0;
                b.push_back(0.0);
            }
            A.push_back(std::move(row));
        }
    }
    for (int e = 0; e < E; ++e) {
        std::vector<double> row(nvars, 0.0);
        for (int k = 0; k < K; ++k) row[k * E + e] = 1.0;
        A.push_back(std::move(row));
        b.push_back(fixed_totals[e]);
    }

    std::vector<double> c(nvars);
    for (int k = 0; k < K; ++k)
        for (int e = 0; e < E; ++e)
            c[k * E + e] = weights.w[commodities[k].mode] * frozen[e];

    LpResult lp = solve_equality_lp(A, b, c);
    if (lp.status == LpResult::Status::infeasible)
        throw Error(ErrorKind::infeasible,
                    "redistribute_fixed_totals: fixed totals admit no feasible assignment");
    if (lp.status != LpResult::Status::optimal)
        throw Error(ErrorKind::internal, "redistribute_fixed_totals: unexpected LP status");

    for (int k = 0; k < K; ++k)
        for (int e = 0; e < E; ++e) {
            double v = lp.x[k * E + e];
            if (v < 0.0) {
                if (v < -1e-8)
                    throw Error(ErrorKind::internal, "redistribute_fixed_totals: negative flow");
                v = 0.0;
            }
            out.at(e, commodities[k].mode, commodities[k].trip) = v;
        }
    return out;
}

double max_conservation_violation(const Network& network, const std::vector<Trip>& trips,
                                  const DemandTable& demands, const CompliantFlows& flows) {
    const int M = flows.mode_count;
    const int N = flows.trip_count;
    const int V = network.node_count();
    double worst = 0.0;
    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < N; ++n) {
            double rate = demands.compliant_rate(m, n);
            if (rate <= 0.0) {
                // zero-demand pairs must carry no flow
                for (int e = 0; e < flows.edge_count; ++e)
                    worst = std::max(worst, std::abs(flows.at(e, m, n)));
                continue;
            }
            int o_idx = network.node_index(trips[n].origin);
            int d_idx = network.node_index(trips[n].destination);
            for (int j = 0; j < V; ++j) {
                double in = 0.0, out = 0.0;
                for (int e : network.in_edges(j)) in += flows.at(e, m, n);
                for (int e : network.out_edges(j)) out += flows.at(e, m, n);
                double residual;
                if (j == o_idx)
                    residual = out - rate;
                else if (j == d_idx)
                    residual = in - rate;
                else
                    residual = in - out;
                worst = std::max(worst, std::abs(residual));
            }
        }
    }
    return worst;
}

}  // namespace meq
