#pragma once

#include <cstdint>

#include "meqroute/scenario.hpp"

namespace meq {

/// Knobs for the generated example network; defaults reproduce the shipped
/// sample scenario. Rates and link parameters are drawn uniformly from the
/// configured ranges with a seeded generator, so equal seeds give
/// byte-identical scenarios.
struct SampleOptions {
    double demand_min = 1.0;       // private (CPV + NPV) demand per trip
    double demand_max = 5.0;
    double transit_min = 1.0;      // public-transit demand per trip
    double transit_max = 4.0;
    double t0_min = 1.0;           // free-flow time of grid links
    double t0_max = 2.0;
    double diagonal_factor = 1.4;  // diagonal links are longer
    double capacity_min = 5.0;
    double capacity_max = 12.0;
    double base_ncr = 0.2;         // file-level split of private demand
    double level_split[3] = {0.5, 0.3, 0.2};
};

/// Builds the demonstration scenario: a 3x4 grid with bidirectional links and
/// ten diagonal shortcuts (12 nodes, 54 directed edges), two origins on the
/// west side, five destinations spread across the grid, and one trip per
/// origin-destination pair (10 trips). Passes validate() for every seed.
Scenario generate_sample_network(std::uint64_t seed, const SampleOptions& options = {});

/// Small two-route scenario tuned so that, under weights favoring public
/// transit, the routing game oscillates between assignments until the
/// fixed-totals redistribution resolves it. Shipped as a preset for the
/// iterate-demo command.
Scenario make_chatter_scenario();

}  // namespace meq
