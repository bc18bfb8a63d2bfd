#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "meqroute/cognitive.hpp"
#include "meqroute/sample.hpp"
#include "meqroute/util.hpp"
#include "oracles.hpp"

using namespace meq;

namespace {

// origin 1, two disjoint two-hop routes to 4: via 2 and via 3
Network two_route_network(double t0_a = 1.0, double t0_b = 1.0, double cap = 5.0) {
    return Network({1, 2, 3, 4},
                   {{1, 2, t0_a / 2, cap},
                    {2, 4, t0_a / 2, cap},
                    {1, 3, t0_b / 2, cap},
                    {3, 4, t0_b / 2, cap}},
                   {1}, {4});
}

std::vector<double> zeros(const Network& net) {
    return std::vector<double>(net.edge_count(), 0.0);
}

}  // namespace

TEST_CASE("single edge path") {
    Network net({1, 2}, {{1, 2, 1.0, 1.0}}, {1}, {2});
    auto path = shortest_path(net, {3.0}, 1, 2);
    CHECK(path == std::vector<NodeId>{1, 2});
}

TEST_CASE("two hops beat an expensive direct edge") {
    Network net({1, 2, 3}, {{1, 3, 1.0, 1.0}, {1, 2, 1.0, 1.0}, {2, 3, 1.0, 1.0}}, {1}, {3});
    std::vector<double> costs(3);
    costs[net.edge_index(1, 3)] = 5.0;
    costs[net.edge_index(1, 2)] = 2.0;
    costs[net.edge_index(2, 3)] = 2.0;
    CHECK(shortest_path(net, costs, 1, 3) == std::vector<NodeId>{1, 2, 3});
}

TEST_CASE("equal-cost tie resolves to the lexicographically smallest sequence") {
    Network net({1, 2, 3}, {{1, 3, 1.0, 1.0}, {1, 2, 1.0, 1.0}, {2, 3, 1.0, 1.0}}, {1}, {3});
    std::vector<double> costs(3);
    costs[net.edge_index(1, 3)] = 4.0;
    costs[net.edge_index(1, 2)] = 2.0;
    costs[net.edge_index(2, 3)] = 2.0;
    // both routes cost 4; [1,2,3] < [1,3]
    CHECK(shortest_path(net, costs, 1, 3) == std::vector<NodeId>{1, 2, 3});
}

TEST_CASE("nonpositive costs and unreachable destinations are errors") {
    Network net({1, 2, 3}, {{1, 2, 1.0, 1.0}}, {1}, {2});
    CHECK_THROWS_AS(shortest_path(net, {0.0}, 1, 2), Error);
    try {
        shortest_path(net, {1.0}, 1, 3);
        FAIL("expected infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::infeasible);
    }
}

TEST_CASE("shortest path matches exhaustive enumeration on the sample network") {
    Scenario s = generate_sample_network(3);
    UniformRng rng(99);
    for (int round = 0; round < 5; ++round) {
        std::vector<double> costs(s.network.edge_count());
        for (double& c : costs) c = rng.range(0.1, 3.0);
        for (const Trip& trip : s.trips) {
            auto path = shortest_path(s.network, costs, trip.origin, trip.destination);
            double via_solver = path_cost(s.network, costs, path);
            double via_enum = oracle::min_path_cost(s.network, costs, trip.origin, trip.destination);
            CHECK(via_solver == doctest::Approx(via_enum).epsilon(1e-12));
        }
    }
}

TEST_CASE("level-0 best response uses free-flow times when flows are empty") {
    Network net = two_route_network(1.0, 1.4);
    auto path = best_response(net, zeros(net), zeros(net), {0, 1, 4});
    CHECK(path == std::vector<NodeId>{1, 2, 4});
}

TEST_CASE("level-0 avoids a saturated route") {
    Network net = two_route_network(1.0, 1.2, 2.0);
    std::vector<double> compliant(net.edge_count(), 0.0);
    // saturate the fast route (via node 2) with compliant flow
    compliant[net.edge_index(1, 2)] = 6.0;
    compliant[net.edge_index(2, 4)] = 6.0;
    // t_fast(6) = 1.0 * (1 + .15*(3)^4) per two half-edges >> t_slow(0) = 1.2
    auto path = best_response(net, compliant, zeros(net), {0, 1, 4});
    CHECK(path == std::vector<NodeId>{1, 3, 4});
}

TEST_CASE("level 1 switches back once level 0 crowds the alternative") {
    Network net = two_route_network(1.0, 1.2, 2.0);
    std::vector<double> compliant(net.edge_count(), 0.0);
    compliant[net.edge_index(1, 2)] = 3.0;
    compliant[net.edge_index(2, 4)] = 3.0;

    // level 0 reacts to compliant flow only: picks the slow-but-empty route
    auto level0 = best_response(net, compliant, zeros(net), {0, 1, 4});
    CHECK(level0 == std::vector<NodeId>{1, 3, 4});

    // level 1 sees level 0 stacked on the slow route and compares
    std::vector<double> lower(net.edge_count(), 0.0);
    lower[net.edge_index(1, 3)] = 4.0;
    lower[net.edge_index(3, 4)] = 4.0;
    // t_fast(3) = 1*(1+.15*1.5^4)=1.759 vs t_slow(4) = 1.2*(1+.15*2^4)=4.08
    auto level1 = best_response(net, compliant, lower, {0, 1, 4});
    CHECK(level1 == std::vector<NodeId>{1, 2, 4});
}

TEST_CASE("npv phase with zero demand yields empty assignments") {
    Scenario s = generate_sample_network(0);
    DemandTable d = DemandTable::zeros(2, static_cast<int>(s.trips.size()));
    auto [assignment, flows] = npv_phase(s.network, zeros(s.network), s.trips, d);
    for (int level = 0; level < kNpvLevels; ++level)
        for (int n = 0; n < assignment.trip_count; ++n) CHECK_FALSE(assignment.has(level, n));
    for (double q : flows.q_total) CHECK(q == 0.0);
}

TEST_CASE("single-level demand aggregates along the level-0 path") {
    Network net = two_route_network();
    std::vector<Trip> trips{{0, 1, 4}};
    DemandTable d = DemandTable::zeros(1, 1);
    d.noncompliant[0][0] = 2.5;
    auto [assignment, flows] = npv_phase(net, zeros(net), trips, d);
    REQUIRE(assignment.has(0, 0));
    const auto& path = assignment.path(0, 0);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        int e = net.edge_index(path[i], path[i + 1]);
        CHECK(flows.level_flow(0, e) == doctest::Approx(2.5));
        CHECK(flows.q_total[e] == doctest::Approx(2.5));
    }
    double total = 0.0;
    for (double q : flows.q_total) total += q;
    CHECK(total == doctest::Approx(2.5 * (path.size() - 1)));
}

TEST_CASE("npv flows equal independent re-aggregation from the returned paths") {
    Scenario s = generate_sample_network(0);
    std::vector<double> compliant(s.network.edge_count(), 0.3);
    auto [assignment, flows] = npv_phase(s.network, compliant, s.trips, s.demand);

    std::vector<double> recomputed(s.network.edge_count(), 0.0);
    for (int level = 0; level < kNpvLevels; ++level)
        for (int n = 0; n < assignment.trip_count; ++n) {
            if (!assignment.has(level, n)) continue;
            const auto& path = assignment.path(level, n);
            for (std::size_t i = 0; i + 1 < path.size(); ++i)
                recomputed[s.network.edge_index(path[i], path[i + 1])] +=
                    s.demand.npv_rate(level, n);
        }
    for (int e = 0; e < s.network.edge_count(); ++e)
        CHECK(flows.q_total[e] == doctest::Approx(recomputed[e]).epsilon(1e-12));
}

TEST_CASE("assignments form simple origin-destination paths") {
    Scenario s = generate_sample_network(1);
    std::vector<double> compliant(s.network.edge_count(), 0.5);
    auto [assignment, flows] = npv_phase(s.network, compliant, s.trips, s.demand);
    (void)flows;
    for (int level = 0; level < kNpvLevels; ++level)
        for (int n = 0; n < assignment.trip_count; ++n) {
            if (!assignment.has(level, n)) continue;
            const auto& path = assignment.path(level, n);
            CHECK(path.front() == s.trips[n].origin);
            CHECK(path.back() == s.trips[n].destination);
            std::set<NodeId> unique(path.begin(), path.end());
            CHECK(unique.size() == path.size());  // simple
            for (std::size_t i = 0; i + 1 < path.size(); ++i)
                CHECK(s.network.edge_index(path[i], path[i + 1]) >= 0);
        }
}

TEST_CASE("lower levels are blind to higher-level flows") {
    Scenario s = generate_sample_network(2);
    std::vector<double> compliant(s.network.edge_count(), 0.4);

    auto [base_assignment, base_flows] = npv_phase(s.network, compliant, s.trips, s.demand);
    (void)base_flows;

    // doubling level-2 demand must not change level-0 or level-1 paths
    DemandTable perturbed = s.demand;
    for (int n = 0; n < perturbed.trip_count(); ++n) perturbed.noncompliant[2][n] *= 2.0;
    auto [new_assignment, new_flows] = npv_phase(s.network, compliant, s.trips, perturbed);
    (void)new_flows;
    for (int level = 0; level < 2; ++level)
        for (int n = 0; n < base_assignment.trip_count; ++n)
            CHECK(base_assignment.path(level, n) == new_assignment.path(level, n));
}

TEST_CASE("npv phase is deterministic") {
    Scenario s = generate_sample_network(4);
    std::vector<double> compliant(s.network.edge_count(), 0.7);
    auto a = npv_phase(s.network, compliant, s.trips, s.demand);
    auto b = npv_phase(s.network, compliant, s.trips, s.demand);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}
