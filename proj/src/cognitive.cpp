#include "meqroute/cognitive.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace meq {

namespace detail {

std::vector<double> distance_to(const Network& network, const std::vector<double>& edge_costs,
                                int dest_idx) {
    const double inf = std::numeric_limits<double>::infinity();
    const int n = network.node_count();
    std::vector<double> dist(n, inf);
    std::vector<char> settled(n, 0);
    dist[dest_idx] = 0.0;

    // O(V^2) scan; the networks here are small and this keeps the
    // settle order (and thus tie behavior) trivially deterministic.
    for (int round = 0; round < n; ++round) {
        int u = -1;
        double best = inf;
        for (int i = 0; i < n; ++i) {
            if (settled[i]) continue;
            if (dist[i] < best || (dist[i] == best && u >= 0 && network.nodes()[i] < network.nodes()[u])) {
                best = dist[i];
                u = i;
            }
        }
        if (u < 0 || dist[u] == inf) break;
        settled[u] = 1;
        for (int e : network.in_edges(u)) {
            int v = network.node_index(network.edges()[e].from);
            double candidate = edge_costs[e] + dist[u];
            if (candidate < dist[v]) dist[v] = candidate;
        }
    }
    return dist;
}

std::vector<int> walk_path(const Network& network, const std::vector<double>& edge_costs,
                           const std::vector<double>& dist, int origin_idx, int dest_idx) {
    // Greedy forward walk: from each node pick the smallest-id successor that
    // lies on some minimum-cost completion. dist values were assembled from
    // the exact sums cost + dist[successor], so at least one successor
    // matches with exact floating-point equality.
    std::vector<int> path{origin_idx};
    std::vector<char> visited(network.node_count(), 0);
    visited[origin_idx] = 1;
    int u = origin_idx;
    while (u != dest_idx) {
        int next = -1;
        for (int e : network.out_edges(u)) {  // sorted by head node id
            int v = network.node_index(network.edges()[e].to);
            if (visited[v]) continue;
            if (edge_costs[e] + dist[v] == dist[u]) {
                next = v;
                break;
            }
        }
        if (next < 0)
            throw Error(ErrorKind::internal, "walk_path: no cost-consistent successor");
        visited[next] = 1;
        path.push_back(next);
        u = next;
    }
    return path;
}

}  // namespace detail

std::vector<NodeId> shortest_path(const Network& network, const std::vector<double>& edge_costs,
                                  NodeId origin, NodeId destination) {
    if (edge_costs.size() != static_cast<std::size_t>(network.edge_count()))
        throw Error(ErrorKind::validation, "shortest_path: cost vector size mismatch");
    for (double c : edge_costs)
        if (!(c > 0.0) || !std::isfinite(c))
            throw Error(ErrorKind::validation, "shortest_path: edge costs must be positive");

    int o = network.node_index(origin);
    int d = network.node_index(destination);
    if (o < 0 || d < 0)
        throw Error(ErrorKind::validation, "shortest_path: unknown origin or destination node");

    auto dist = detail::distance_to(network, edge_costs, d);
    if (!std::isfinite(dist[o]))
        throw Error(ErrorKind::infeasible,
                    "destination " + std::to_string(destination) + " unreachable from origin " +
                        std::to_string(origin));

    auto idx_path = detail::walk_path(network, edge_costs, dist, o, d);
    std::vector<NodeId> path;
    path.reserve(idx_path.size());
    for (int i : idx_path) path.push_back(network.nodes()[i]);
    return path;
}

double path_cost(const Network& network, const std::vector<double>& edge_costs,
                 const std::vector<NodeId>& path) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        int e = network.edge_index(path[i], path[i + 1]);
        if (e < 0)
            throw Error(ErrorKind::validation, "path_cost: path uses a nonexistent edge");
        total += edge_costs[e];
    }
    return total;
}

std::vector<NodeId> best_response(const Network& network,
                                  const std::vector<double>& compliant_totals,
                                  const std::vector<double>& lower_level_totals,
                                  const Trip& trip) {
    const int E = network.edge_count();
    std::vector<double> costs(E);
    for (int e = 0; e < E; ++e) {
        double anticipated = compliant_totals[e] + lower_level_totals[e];
        if (anticipated < 0.0)
            throw Error(ErrorKind::validation, "best_response: negative anticipated flow");
        costs[e] = network.bpr_time(e, anticipated);
    }
    return shortest_path(network, costs, trip.origin, trip.destination);
}

std::pair<NpvAssignment, NpvFlows> npv_phase(const Network& network,
                                             const std::vector<double>& compliant_totals,
                                             const std::vector<Trip>& trips,
                                             const DemandTable& demands) {
    const int E = network.edge_count();
    const int N = static_cast<int>(trips.size());
    NpvAssignment assignment(N);
    NpvFlows flows(E);

    std::vector<double> lower(E, 0.0);  // sum of levels strictly below the current one
    for (int level = 0; level < kNpvLevels; ++level) {
        for (int n = 0; n < N; ++n) {
            double rate = demands.npv_rate(level, n);
            if (rate <= 0.0) continue;
            auto path = best_response(network, compliant_totals, lower, trips[n]);
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                int e = network.edge_index(path[i], path[i + 1]);
                flows.q_level[level * E + e] += rate;
            }
            assignment.path(level, n) = std::move(path);
        }
        for (int e = 0; e < E; ++e) lower[e] += flows.q_level[level * E + e];
    }
    flows.q_total = lower;
    return {std::move(assignment), std::move(flows)};
}

}  // namespace meq
