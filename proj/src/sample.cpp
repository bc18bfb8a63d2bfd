#include "meqroute/sample.hpp"

#include <array>

#include "meqroute/util.hpp"

namespace meq {

namespace {

// 3x4 grid, node id = 4*row + col + 1 (ids 1..12)
constexpr int kRows = 3;
constexpr int kCols = 4;

int grid_id(int row, int col) { return 4 * row + col + 1; }

}  // namespace

Scenario generate_sample_network(std::uint64_t seed, const SampleOptions& options) {
    UniformRng rng(seed);

    std::vector<NodeId> nodes;
    for (int r = 0; r < kRows; ++r)
        for (int c = 0; c < kCols; ++c) nodes.push_back(grid_id(r, c));

    // bidirectional pairs: 9 horizontal + 8 vertical + 10 diagonal = 27,
    // i.e. 54 directed edges
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::vector<bool> diagonal;
    for (int r = 0; r < kRows; ++r)
        for (int c = 0; c + 1 < kCols; ++c) {
            pairs.emplace_back(grid_id(r, c), grid_id(r, c + 1));
            diagonal.push_back(false);
        }
    for (int r = 0; r + 1 < kRows; ++r)
        for (int c = 0; c < kCols; ++c) {
            pairs.emplace_back(grid_id(r, c), grid_id(r + 1, c));
            diagonal.push_back(false);
        }
    for (int r = 0; r + 1 < kRows; ++r)
        for (int c = 0; c + 1 < kCols; ++c) {
            pairs.emplace_back(grid_id(r, c), grid_id(r + 1, c + 1));
            diagonal.push_back(true);
        }
    // four counter-diagonals keep the directed edge count at 54
    const std::array<std::pair<int, int>, 4> anti_cells{{{0, 0}, {0, 2}, {1, 0}, {1, 2}}};
    for (auto [r, c] : anti_cells) {
        pairs.emplace_back(grid_id(r, c + 1), grid_id(r + 1, c));
        diagonal.push_back(true);
    }

    std::vector<Edge> edges;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        double t0 = rng.range(options.t0_min, options.t0_max);
        if (diagonal[i]) t0 *= options.diagonal_factor;
        double capacity = rng.range(options.capacity_min, options.capacity_max);
        edges.push_back({pairs[i].first, pairs[i].second, t0, capacity});
        edges.push_back({pairs[i].second, pairs[i].first, t0, capacity});
    }

    std::vector<NodeId> origins{grid_id(0, 0), grid_id(2, 0)};
    std::vector<NodeId> destinations{grid_id(0, 3), grid_id(1, 1), grid_id(1, 3), grid_id(2, 2),
                                     grid_id(2, 3)};

    Scenario scenario;
    scenario.network = Network(std::move(nodes), std::move(edges), origins, destinations);
    scenario.modes.names = {"public_transit", "cpv"};

    for (NodeId o : origins)
        for (NodeId d : destinations)
            scenario.trips.push_back({static_cast<int>(scenario.trips.size()), o, d});

    const int N = static_cast<int>(scenario.trips.size());
    scenario.demand = DemandTable::zeros(2, N);
    for (int n = 0; n < N; ++n) {
        double transit = rng.range(options.transit_min, options.transit_max);
        double private_demand = rng.range(options.demand_min, options.demand_max);
        scenario.demand.compliant[0][n] = transit;
        scenario.demand.compliant[1][n] = (1.0 - options.base_ncr) * private_demand;
        for (int level = 0; level < kNpvLevels; ++level)
            scenario.demand.noncompliant[level][n] =
                options.base_ncr * private_demand * options.level_split[level];
    }

    scenario.mem.kappa = 1.0;
    scenario.mem.cost = {0.3, 1.0};
    double tau = default_accessibility_threshold(scenario.network, scenario.trips);
    scenario.mem.threshold = {tau, tau};
    scenario.mem.slope = 2.0;
    scenario.mem.indicator = IndicatorKind::sigmoid;
    scenario.mem.services.names = {"essential"};
    scenario.mem.services.destinations = {destinations};
    scenario.mem.priority = {1.0};
    return scenario;
}

Scenario make_chatter_scenario() {
    Scenario scenario;
    std::vector<NodeId> nodes{1, 2, 3, 4};
    std::vector<Edge> edges{
        {1, 2, 0.50, 2.0}, {2, 4, 0.50, 2.0},  // route through node 2
        {1, 3, 0.51, 2.0}, {3, 4, 0.51, 2.0},  // slightly longer route through node 3
    };
    scenario.network = Network(std::move(nodes), std::move(edges), {1}, {4});
    scenario.modes.names = {"public_transit", "cpv"};
    scenario.trips = {{0, 1, 4}};
    scenario.demand = DemandTable::zeros(2, 1);
    scenario.demand.compliant[0][0] = 1.0;     // public transit
    scenario.demand.compliant[1][0] = 2.0;     // compliant private
    scenario.demand.noncompliant[0][0] = 1.0;  // level-0 noncompliant
    scenario.mem.cost = {0.3, 1.0};
    scenario.mem.threshold = {1.2, 1.2};
    scenario.mem.indicator = IndicatorKind::sigmoid;
    scenario.mem.services.names = {"essential"};
    scenario.mem.services.destinations = {{4}};
    scenario.mem.priority = {1.0};
    return scenario;
}

}  // namespace meq
