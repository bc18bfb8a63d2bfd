#include "meqroute/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace meq {

Network::Network(std::vector<NodeId> nodes, std::vector<Edge> edges,
                 std::vector<NodeId> origins, std::vector<NodeId> destinations,
                 BprParams bpr)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      origins_(std::move(origins)),
      destinations_(std::move(destinations)),
      bpr_(bpr) {
    node_index_.reserve(nodes_.size());
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
        node_index_.emplace_back(nodes_[i], i);
    std::sort(node_index_.begin(), node_index_.end());

    out_.assign(nodes_.size(), {});
    in_.assign(nodes_.size(), {});
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
        int u = node_index(edges_[e].from);
        int v = node_index(edges_[e].to);
        if (u < 0 || v < 0) continue;  // dangling refs are reported by validate()
        out_[u].push_back(e);
        in_[v].push_back(e);
    }
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
        std::sort(out_[i].begin(), out_[i].end(),
                  [&](int a, int b) { return edges_[a].to < edges_[b].to; });
        std::sort(in_[i].begin(), in_[i].end(),
                  [&](int a, int b) { return edges_[a].from < edges_[b].from; });
    }
}

int Network::node_index(NodeId id) const {
    auto it = std::lower_bound(node_index_.begin(), node_index_.end(),
                               std::make_pair(id, -1));
    if (it != node_index_.end() && it->first == id) return it->second;
    return -1;
}

int Network::edge_index(NodeId from, NodeId to) const {
    int u = node_index(from);
    if (u < 0) return -1;
    for (int e : out_[u])
        if (edges_[e].to == to) return e;
    return -1;
}

std::span<const int> Network::out_edges(int node_idx) const { return out_[node_idx]; }
std::span<const int> Network::in_edges(int node_idx) const { return in_[node_idx]; }

double bpr_time(const Edge& edge, const BprParams& params, double total_flow) {
    if (total_flow < 0.0 || !std::isfinite(total_flow))
        throw Error(ErrorKind::validation, "bpr_time: negative or non-finite flow");
    double ratio = total_flow / edge.capacity;
    return edge.t0 * (1.0 + params.coefficient * std::pow(ratio, params.exponent));
}

double bpr_time_derivative(const Edge& edge, const BprParams& params, double total_flow) {
    if (total_flow < 0.0 || !std::isfinite(total_flow))
        throw Error(ErrorKind::validation, "bpr_time_derivative: negative or non-finite flow");
    if (total_flow == 0.0 && params.exponent < 1.0)
        return 0.0;
    double ratio = total_flow / edge.capacity;
    return edge.t0 * params.coefficient * params.exponent *
           std::pow(ratio, params.exponent - 1.0) / edge.capacity;
}

double Network::bpr_time(int edge_idx, double total_flow) const {
    return meq::bpr_time(edges_[edge_idx], bpr_, total_flow);
}

double Network::bpr_time_derivative(int edge_idx, double total_flow) const {
    return meq::bpr_time_derivative(edges_[edge_idx], bpr_, total_flow);
}

int ModeSet::index_of(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
        if (names[i] == name) return i;
    return -1;
}

double DemandTable::total_compliant() const {
    double t = 0.0;
    for (const auto& row : compliant)
        for (double v : row) t += v;
    return t;
}

double DemandTable::total_noncompliant() const {
    double t = 0.0;
    for (const auto& row : noncompliant)
        for (double v : row) t += v;
    return t;
}

DemandTable DemandTable::zeros(int modes, int trips) {
    DemandTable d;
    d.compliant.assign(modes, std::vector<double>(trips, 0.0));
    d.noncompliant.assign(kNpvLevels, std::vector<double>(trips, 0.0));
    return d;
}

namespace {

std::string edge_name(const Edge& e) {
    std::ostringstream os;
    os << "(" << e.from << " -> " << e.to << ")";
    return os.str();
}

}  // namespace

std::vector<std::string> validate(const Network& network) {
    std::vector<std::string> violations;
    const auto& nodes = network.nodes();
    const auto& edges = network.edges();

    std::set<NodeId> node_set(nodes.begin(), nodes.end());
    if (node_set.size() != nodes.size())
        violations.push_back("duplicate node ids in node list");

    std::set<std::pair<NodeId, NodeId>> seen;
    for (const Edge& e : edges) {
        if (!node_set.count(e.from))
            violations.push_back("edge " + edge_name(e) + " references unknown node " +
                                 std::to_string(e.from));
        if (!node_set.count(e.to))
            violations.push_back("edge " + edge_name(e) + " references unknown node " +
                                 std::to_string(e.to));
        if (e.from == e.to)
            violations.push_back("edge " + edge_name(e) + " is a self-loop");
        if (!seen.insert({e.from, e.to}).second)
            violations.push_back("duplicate edge " + edge_name(e));
        if (!(e.capacity > 0.0) || !std::isfinite(e.capacity))
            violations.push_back("edge " + edge_name(e) + " has nonpositive capacity");
        if (!(e.t0 > 0.0) || !std::isfinite(e.t0))
            violations.push_back("edge " + edge_name(e) + " has nonpositive free-flow time");
    }

    for (NodeId o : network.origins())
        if (!node_set.count(o))
            violations.push_back("origin " + std::to_string(o) + " is not a network node");
    for (NodeId d : network.destinations())
        if (!node_set.count(d))
            violations.push_back("destination " + std::to_string(d) + " is not a network node");

    // Reachability: BFS from each origin over well-formed edges.
    std::map<NodeId, std::vector<NodeId>> adj;
    for (const Edge& e : edges)
        if (node_set.count(e.from) && node_set.count(e.to) && e.from != e.to)
            adj[e.from].push_back(e.to);

    for (NodeId o : network.origins()) {
        if (!node_set.count(o)) continue;
        std::set<NodeId> reached{o};
        std::queue<NodeId> frontier;
        frontier.push(o);
        while (!frontier.empty()) {
            NodeId u = frontier.front();
            frontier.pop();
            auto it = adj.find(u);
            if (it == adj.end()) continue;
            for (NodeId v : it->second)
                if (reached.insert(v).second) frontier.push(v);
        }
        for (NodeId d : network.destinations())
            if (node_set.count(d) && !reached.count(d))
                violations.push_back("destination " + std::to_string(d) +
                                     " unreachable from origin " + std::to_string(o));
    }

    return violations;
}

}  // namespace meq
