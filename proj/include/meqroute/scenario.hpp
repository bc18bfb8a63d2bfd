#pragma once

#include <string>
#include <vector>

#include "meqroute/equity.hpp"
#include "meqroute/network.hpp"

namespace meq {

/// A complete, validated problem instance as stored in a scenario file.
struct Scenario {
    Network network;
    std::vector<Trip> trips;
    ModeSet modes;
    DemandTable demand;
    MemParams mem;

    bool operator==(const Scenario&) const = default;
};

/// Parses and fully validates a scenario document. Violated invariants raise
/// ErrorKind::validation with the offending element named; nothing partially
/// constructed escapes.
Scenario load_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

/// Canonical serialization (sorted keys, two-space indent); loading the
/// output reproduces the scenario exactly.
std::string serialize_scenario(const Scenario& scenario);
void save_scenario_file(const Scenario& scenario, const std::string& path);

/// Content digest of the canonical serialization: stable across key
/// reordering of semantically identical files.
std::string scenario_digest(const Scenario& scenario);

/// Default accessibility threshold: the 60th percentile of the free-flow
/// origin-destination times across all trips, measured in the mean-edge-time
/// convention of the default reporting formula. Applied by the loader when a
/// scenario omits mem.threshold.
double default_accessibility_threshold(const Network& network, const std::vector<Trip>& trips);

}  // namespace meq
