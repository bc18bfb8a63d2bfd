#pragma once

#include <span>
#include <string>
#include <vector>

#include "meqroute/error.hpp"

namespace meq {

using NodeId = int;

struct Edge {
    NodeId from = 0;
    NodeId to = 0;
    double t0 = 0.0;        // free-flow travel time
    double capacity = 0.0;  // road capacity (flow units)

    bool operator==(const Edge&) const = default;
};

/// BPR link-performance coefficients, t(v) = t0 * (1 + coefficient * (v/capacity)^exponent).
/// The standard values are fixed here as defaults; scenario files may override them.
struct BprParams {
    double coefficient = 0.15;
    double exponent = 4.0;

    bool operator==(const BprParams&) const = default;
};

/// Directed road network with origin and destination node sets.
/// Immutable after construction; adjacency indexes are built once and the
/// object is safe to share across concurrent workers.
class Network {
public:
    Network() = default;
    Network(std::vector<NodeId> nodes, std::vector<Edge> edges,
            std::vector<NodeId> origins, std::vector<NodeId> destinations,
            BprParams bpr = {});

    const std::vector<NodeId>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<NodeId>& origins() const { return origins_; }
    const std::vector<NodeId>& destinations() const { return destinations_; }
    const BprParams& bpr() const { return bpr_; }

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    /// Dense index of a node id, or -1 if unknown.
    int node_index(NodeId id) const;
    /// Edge index for an ordered (from, to) pair, or -1.
    int edge_index(NodeId from, NodeId to) const;

    /// Outgoing / incoming edge indexes of a dense node index, sorted by the
    /// opposite endpoint's node id (deterministic iteration order).
    std::span<const int> out_edges(int node_idx) const;
    std::span<const int> in_edges(int node_idx) const;

    /// BPR travel time of edge `edge_idx` at the given total flow.
    /// Rejects negative flow.
    double bpr_time(int edge_idx, double total_flow) const;
    /// Derivative of the BPR travel time with respect to total flow.
    double bpr_time_derivative(int edge_idx, double total_flow) const;

    bool operator==(const Network& other) const {
        return nodes_ == other.nodes_ && edges_ == other.edges_ &&
               origins_ == other.origins_ && destinations_ == other.destinations_ &&
               bpr_ == other.bpr_;
    }

private:
    std::vector<NodeId> nodes_;
    std::vector<Edge> edges_;
    std::vector<NodeId> origins_;
    std::vector<NodeId> destinations_;
    BprParams bpr_;

    // built by constructor from well-formed edges
    std::vector<std::pair<NodeId, int>> node_index_;  // sorted (id, dense idx)
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
};

/// Free-standing BPR evaluation used where no Network object exists yet.
double bpr_time(const Edge& edge, const BprParams& params, double total_flow);
double bpr_time_derivative(const Edge& edge, const BprParams& params, double total_flow);

/// One origin-destination travel demand.
struct Trip {
    int id = 0;
    NodeId origin = 0;
    NodeId destination = 0;

    bool operator==(const Trip&) const = default;
};

/// Ordered list of system-routed transportation modes.
struct ModeSet {
    std::vector<std::string> names;

    int size() const { return static_cast<int>(names.size()); }
    /// Index of a mode name, or -1.
    int index_of(const std::string& name) const;

    bool operator==(const ModeSet&) const = default;
};

inline constexpr int kNpvLevels = 3;  // cognitive hierarchy capped at level 2

/// Demand rates per trip: compliant rates per mode, noncompliant rates per
/// cognitive level (0, 1, 2).
struct DemandTable {
    std::vector<std::vector<double>> compliant;     // [mode][trip]
    std::vector<std::vector<double>> noncompliant;  // [level][trip], 3 levels

    int mode_count() const { return static_cast<int>(compliant.size()); }
    int trip_count() const { return compliant.empty() ? 0 : static_cast<int>(compliant[0].size()); }

    double compliant_rate(int mode, int trip) const { return compliant[mode][trip]; }
    double npv_rate(int level, int trip) const { return noncompliant[level][trip]; }

    double total_compliant() const;
    double total_noncompliant() const;

    static DemandTable zeros(int modes, int trips);

    bool operator==(const DemandTable&) const = default;
};

/// Checks every Network invariant and returns one message per violation,
/// naming the offending element. Empty result means the network is valid.
std::vector<std::string> validate(const Network& network);

}  // namespace meq
