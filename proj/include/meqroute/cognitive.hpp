#pragma once

#include <utility>
#include <vector>

#include "meqroute/network.hpp"

namespace meq {

/// Path assignment of the noncompliant vehicles: one simple directed path per
/// populated (level, trip) pair. Pairs with zero demand carry no path.
struct NpvAssignment {
    int trip_count = 0;
    std::vector<std::vector<NodeId>> paths;  // [level * trip_count + trip]

    NpvAssignment() = default;
    explicit NpvAssignment(int trips) : trip_count(trips), paths(kNpvLevels * trips) {}

    const std::vector<NodeId>& path(int level, int trip) const {
        return paths[level * trip_count + trip];
    }
    std::vector<NodeId>& path(int level, int trip) { return paths[level * trip_count + trip]; }
    bool has(int level, int trip) const { return !path(level, trip).empty(); }

    bool operator==(const NpvAssignment&) const = default;
};

/// Aggregated noncompliant edge flows, per level and total.
struct NpvFlows {
    int edge_count = 0;
    std::vector<double> q_level;  // [level * edge_count + edge]
    std::vector<double> q_total;  // [edge]

    NpvFlows() = default;
    explicit NpvFlows(int edges)
        : edge_count(edges), q_level(kNpvLevels * edges, 0.0), q_total(edges, 0.0) {}

    double level_flow(int level, int edge) const { return q_level[level * edge_count + edge]; }

    bool operator==(const NpvFlows&) const = default;
};

namespace detail {

/// Cost of reaching `dest_idx` from every node under positive edge costs
/// (backward Dijkstra); unreachable nodes get +infinity.
std::vector<double> distance_to(const Network& network, const std::vector<double>& edge_costs,
                                int dest_idx);

/// Reconstructs the minimum-cost path origin -> destination as node indexes,
/// choosing the lexicographically smallest node sequence among cost ties.
/// Requires dist = distance_to(network, edge_costs, dest_idx) and a finite
/// dist[origin_idx].
std::vector<int> walk_path(const Network& network, const std::vector<double>& edge_costs,
                           const std::vector<double>& dist, int origin_idx, int dest_idx);

}  // namespace detail

/// Minimum-cost path between two nodes under strictly positive edge costs.
/// Equal-cost ties resolve to the lexicographically smallest node sequence,
/// so identical inputs always give identical paths.
/// Throws ErrorKind::infeasible when the destination is unreachable.
std::vector<NodeId> shortest_path(const Network& network, const std::vector<double>& edge_costs,
                                  NodeId origin, NodeId destination);

/// Total cost of a node path under the given edge costs.
double path_cost(const Network& network, const std::vector<double>& edge_costs,
                 const std::vector<NodeId>& path);

/// Best response of one noncompliant vehicle: the minimum-time path when edge
/// times are evaluated at compliant flow plus all lower-level noncompliant
/// flow. Level 0 passes a zero lower_level_totals vector.
std::vector<NodeId> best_response(const Network& network,
                                  const std::vector<double>& compliant_totals,
                                  const std::vector<double>& lower_level_totals,
                                  const Trip& trip);

/// Runs the cognitive hierarchy: levels 0, 1, 2 in order, each best-responding
/// to compliant flow plus strictly lower levels. All vehicles of one
/// (level, trip) share a single path; flows aggregate demand along it.
std::pair<NpvAssignment, NpvFlows> npv_phase(const Network& network,
                                             const std::vector<double>& compliant_totals,
                                             const std::vector<Trip>& trips,
                                             const DemandTable& demands);

}  // namespace meq
