#include "meqroute/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "meqroute/cognitive.hpp"
#include "meqroute/util.hpp"

namespace meq {

using nlohmann::json;

namespace {

double finite_nonneg(const json& value, const std::string& what) {
    if (!value.is_number())
        throw Error(ErrorKind::validation, what + " must be a number");
    double v = value.get<double>();
    if (!std::isfinite(v) || v < 0.0)
        throw Error(ErrorKind::validation, what + " must be finite and nonnegative");
    return v;
}

const json& require(const json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end())
        throw Error(ErrorKind::validation, "scenario is missing required key '" + key + "'");
    return *it;
}

int parse_index(const std::string& key, int bound, const std::string& what) {
    std::size_t pos = 0;
    int idx = -1;
    try {
        idx = std::stoi(key, &pos);
    } catch (const std::exception&) {
        throw Error(ErrorKind::validation, what + " key '" + key + "' is not an index");
    }
    if (pos != key.size() || idx < 0 || idx >= bound)
        throw Error(ErrorKind::validation, what + " key '" + key + "' is out of range");
    return idx;
}

/// Free-flow travel time per trip in the mean-edge convention used by the
/// default reporting formula; basis for the default accessibility threshold.
std::vector<double> free_flow_trip_times(const Network& network, const std::vector<Trip>& trips) {
    std::vector<double> t0(network.edge_count());
    for (int e = 0; e < network.edge_count(); ++e) t0[e] = network.edges()[e].t0;
    std::vector<double> out;
    out.reserve(trips.size());
    for (const Trip& trip : trips) {
        auto path = shortest_path(network, t0, trip.origin, trip.destination);
        double total = path_cost(network, t0, path);
        out.push_back(total / static_cast<double>(path.size() - 1));
    }
    return out;
}

MemParams parse_mem(const json& root, const Network& network, const std::vector<Trip>& trips,
                    const ModeSet& modes) {
    MemParams params;
    const json empty = json::object();
    const json& j = root.contains("mem") ? root.at("mem") : empty;

    params.kappa = j.contains("kappa") ? finite_nonneg(j.at("kappa"), "mem.kappa") : 1.0;
    params.slope = j.contains("slope") ? finite_nonneg(j.at("slope"), "mem.slope") : 2.0;
    if (!(params.slope > 0.0))
        throw Error(ErrorKind::validation, "mem.slope must be positive");

    params.indicator = IndicatorKind::exact;
    if (j.contains("indicator")) {
        std::string kind = j.at("indicator").get<std::string>();
        if (kind == "exact")
            params.indicator = IndicatorKind::exact;
        else if (kind == "sigmoid")
            params.indicator = IndicatorKind::sigmoid;
        else
            throw Error(ErrorKind::validation,
                        "mem.indicator must be 'exact' or 'sigmoid', got '" + kind + "'");
    }

    params.cost.resize(modes.size());
    for (int m = 0; m < modes.size(); ++m) {
        const std::string& name = modes.names[m];
        if (j.contains("cost") && j.at("cost").contains(name))
            params.cost[m] = finite_nonneg(j.at("cost").at(name), "mem.cost." + name);
        else if (name == "public_transit")
            params.cost[m] = 0.3;
        else
            params.cost[m] = 1.0;
    }

    double default_threshold = 0.0;
    params.threshold.resize(modes.size());
    bool need_default = false;
    for (int m = 0; m < modes.size(); ++m) {
        const std::string& name = modes.names[m];
        if (j.contains("threshold") && j.at("threshold").contains(name)) {
            params.threshold[m] = finite_nonneg(j.at("threshold").at(name), "mem.threshold." + name);
            if (!(params.threshold[m] > 0.0))
                throw Error(ErrorKind::validation, "mem.threshold." + name + " must be positive");
        } else {
            need_default = true;
        }
    }
    if (need_default) {
        default_threshold = default_accessibility_threshold(network, trips);
        for (int m = 0; m < modes.size(); ++m) {
            const std::string& name = modes.names[m];
            if (!(j.contains("threshold") && j.at("threshold").contains(name)))
                params.threshold[m] = default_threshold;
        }
    }

    if (j.contains("services")) {
        for (auto it = j.at("services").begin(); it != j.at("services").end(); ++it) {
            params.services.names.push_back(it.key());
            std::vector<NodeId> dests;
            for (const auto& node : it.value()) {
                NodeId id = node.get<NodeId>();
                if (network.node_index(id) < 0)
                    throw Error(ErrorKind::validation, "service '" + it.key() +
                                                           "' references unknown node " +
                                                           std::to_string(id));
                dests.push_back(id);
            }
            if (dests.empty())
                throw Error(ErrorKind::validation,
                            "service '" + it.key() + "' must have at least one destination");
            params.services.destinations.push_back(std::move(dests));
        }
    } else {
        params.services.names.push_back("essential");
        params.services.destinations.push_back(network.destinations());
    }

    params.priority.assign(params.services.size(), 1.0);
    if (j.contains("priority")) {
        for (auto it = j.at("priority").begin(); it != j.at("priority").end(); ++it) {
            int s = -1;
            for (int i = 0; i < params.services.size(); ++i)
                if (params.services.names[i] == it.key()) s = i;
            if (s < 0)
                throw Error(ErrorKind::validation,
                            "mem.priority names unknown service '" + it.key() + "'");
            params.priority[s] = finite_nonneg(it.value(), "mem.priority." + it.key());
        }
    }
    return params;
}

}  // namespace

Scenario load_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::validation, std::string("scenario parse failure: ") + e.what());
    }
    if (!root.is_object())
        throw Error(ErrorKind::validation, "scenario document must be a JSON object");

    std::vector<NodeId> nodes;
    for (const auto& n : require(root, "nodes")) nodes.push_back(n.get<NodeId>());

    std::vector<Edge> edges;
    for (const auto& e : require(root, "edges")) {
        Edge edge;
        edge.from = require(e, "from").get<NodeId>();
        edge.to = require(e, "to").get<NodeId>();
        std::string name = "edge (" + std::to_string(edge.from) + " -> " + std::to_string(edge.to) + ")";
        edge.t0 = finite_nonneg(require(e, "t0"), name + " t0");
        edge.capacity = finite_nonneg(require(e, "capacity"), name + " capacity");
        edges.push_back(edge);
    }

    std::vector<NodeId> origins, destinations;
    for (const auto& o : require(root, "origins")) origins.push_back(o.get<NodeId>());
    for (const auto& d : require(root, "destinations")) destinations.push_back(d.get<NodeId>());

    BprParams bpr;
    if (root.contains("bpr")) {
        const json& jb = root.at("bpr");
        if (jb.contains("coefficient"))
            bpr.coefficient = finite_nonneg(jb.at("coefficient"), "bpr.coefficient");
        if (jb.contains("exponent")) {
            bpr.exponent = finite_nonneg(jb.at("exponent"), "bpr.exponent");
            if (!(bpr.exponent > 0.0))
                throw Error(ErrorKind::validation, "bpr.exponent must be positive");
        }
    }

    Network network(std::move(nodes), std::move(edges), std::move(origins), std::move(destinations),
                    bpr);
    auto violations = validate(network);
    if (!violations.empty()) {
        std::ostringstream os;
        os << "invalid network:";
        for (const auto& v : violations) os << "\n  - " << v;
        throw Error(ErrorKind::validation, os.str());
    }

    ModeSet modes;
    for (const auto& m : require(root, "modes")) modes.names.push_back(m.get<std::string>());
    if (modes.names.empty())
        throw Error(ErrorKind::validation, "modes list must not be empty");
    {
        std::set<std::string> unique(modes.names.begin(), modes.names.end());
        if (unique.size() != modes.names.size())
            throw Error(ErrorKind::validation, "mode names must be unique");
    }

    std::vector<Trip> trips;
    std::set<std::pair<NodeId, NodeId>> trip_pairs;
    std::set<NodeId> origin_set(network.origins().begin(), network.origins().end());
    std::set<NodeId> dest_set(network.destinations().begin(), network.destinations().end());
    for (const auto& t : require(root, "trips")) {
        Trip trip;
        trip.id = static_cast<int>(trips.size());
        trip.origin = require(t, "origin").get<NodeId>();
        trip.destination = require(t, "dest").get<NodeId>();
        std::string name = "trip " + std::to_string(trip.id) + " (" + std::to_string(trip.origin) +
                           " -> " + std::to_string(trip.destination) + ")";
        if (!origin_set.count(trip.origin))
            throw Error(ErrorKind::validation, name + ": origin is not in the origin set");
        if (!dest_set.count(trip.destination))
            throw Error(ErrorKind::validation, name + ": destination is not in the destination set");
        if (trip.origin == trip.destination)
            throw Error(ErrorKind::validation, name + ": origin equals destination");
        if (!trip_pairs.insert({trip.origin, trip.destination}).second)
            throw Error(ErrorKind::validation, name + ": duplicate origin-destination pair");
        trips.push_back(trip);
    }

    const int N = static_cast<int>(trips.size());
    DemandTable demand = DemandTable::zeros(modes.size(), N);
    const json& jd = require(root, "demand");
    if (jd.contains("compliant")) {
        for (auto it = jd.at("compliant").begin(); it != jd.at("compliant").end(); ++it) {
            int m = modes.index_of(it.key());
            if (m < 0)
                throw Error(ErrorKind::validation,
                            "demand.compliant names unknown mode '" + it.key() + "'");
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
                int n = parse_index(jt.key(), N, "demand.compliant." + it.key());
                demand.compliant[m][n] =
                    finite_nonneg(jt.value(), "demand.compliant." + it.key() + "." + jt.key());
            }
        }
    }
    if (jd.contains("noncompliant")) {
        for (auto it = jd.at("noncompliant").begin(); it != jd.at("noncompliant").end(); ++it) {
            int level = parse_index(it.key(), kNpvLevels, "demand.noncompliant level");
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
                int n = parse_index(jt.key(), N, "demand.noncompliant." + it.key());
                demand.noncompliant[level][n] =
                    finite_nonneg(jt.value(), "demand.noncompliant." + it.key() + "." + jt.key());
            }
        }
    }

    Scenario scenario{std::move(network), std::move(trips), std::move(modes), std::move(demand), {}};
    scenario.mem = parse_mem(root, scenario.network, scenario.trips, scenario.modes);
    return scenario;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open scenario file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_scenario(buffer.str());
}

std::string serialize_scenario(const Scenario& scenario) {
    json root;
    root["nodes"] = scenario.network.nodes();
    json edges = json::array();
    for (const Edge& e : scenario.network.edges())
        edges.push_back({{"from", e.from}, {"to", e.to}, {"t0", e.t0}, {"capacity", e.capacity}});
    root["edges"] = edges;
    root["origins"] = scenario.network.origins();
    root["destinations"] = scenario.network.destinations();
    root["bpr"] = {{"coefficient", scenario.network.bpr().coefficient},
                   {"exponent", scenario.network.bpr().exponent}};

    json trips = json::array();
    for (const Trip& t : scenario.trips)
        trips.push_back({{"origin", t.origin}, {"dest", t.destination}});
    root["trips"] = trips;

    root["modes"] = scenario.modes.names;

    json compliant = json::object();
    for (int m = 0; m < scenario.modes.size(); ++m) {
        json per_trip = json::object();
        for (int n = 0; n < scenario.demand.trip_count(); ++n)
            if (scenario.demand.compliant[m][n] != 0.0)
                per_trip[std::to_string(n)] = scenario.demand.compliant[m][n];
        if (!per_trip.empty()) compliant[scenario.modes.names[m]] = per_trip;
    }
    json noncompliant = json::object();
    for (int level = 0; level < kNpvLevels; ++level) {
        json per_trip = json::object();
        for (int n = 0; n < scenario.demand.trip_count(); ++n)
            if (scenario.demand.noncompliant[level][n] != 0.0)
                per_trip[std::to_string(n)] = scenario.demand.noncompliant[level][n];
        if (!per_trip.empty()) noncompliant[std::to_string(level)] = per_trip;
    }
    root["demand"] = {{"compliant", compliant}, {"noncompliant", noncompliant}};

    json mem;
    mem["kappa"] = scenario.mem.kappa;
    mem["slope"] = scenario.mem.slope;
    mem["indicator"] = scenario.mem.indicator == IndicatorKind::exact ? "exact" : "sigmoid";
    json cost = json::object(), threshold = json::object();
    for (int m = 0; m < scenario.modes.size(); ++m) {
        cost[scenario.modes.names[m]] = scenario.mem.cost[m];
        threshold[scenario.modes.names[m]] = scenario.mem.threshold[m];
    }
    mem["cost"] = cost;
    mem["threshold"] = threshold;
    json services = json::object(), priority = json::object();
    for (int s = 0; s < scenario.mem.services.size(); ++s) {
        services[scenario.mem.services.names[s]] = scenario.mem.services.destinations[s];
        priority[scenario.mem.services.names[s]] = scenario.mem.priority[s];
    }
    mem["services"] = services;
    mem["priority"] = priority;
    root["mem"] = mem;

    return root.dump(2) + "\n";
}

void save_scenario_file(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write scenario file '" + path + "'");
    out << serialize_scenario(scenario);
    if (!out) throw Error(ErrorKind::io, "failed writing scenario file '" + path + "'");
}

std::string scenario_digest(const Scenario& scenario) {
    return to_hex(fnv1a64(serialize_scenario(scenario)));
}

double default_accessibility_threshold(const Network& network, const std::vector<Trip>& trips) {
    return percentile(free_flow_trip_times(network, trips), 0.6);
}

}  // namespace meq
