#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "meqroute/assignment.hpp"
#include "meqroute/cognitive.hpp"
#include "meqroute/sample.hpp"
#include "meqroute/util.hpp"
#include "oracles.hpp"

using namespace meq;

namespace {

Network two_route_network(double t0_a, double t0_b, double cap) {
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

Weights one_mode() { return Weights{{1.0}}; }

// random feasible flows: each (mode, trip) demand split over shortest paths
// under randomized costs
CompliantFlows random_feasible(const Scenario& s, const DemandTable& demands, UniformRng& rng) {
    CompliantFlows flows(s.network.edge_count(), demands.mode_count(),
                         static_cast<int>(s.trips.size()));
    for (int m = 0; m < demands.mode_count(); ++m)
        for (int n = 0; n < demands.trip_count(); ++n) {
            double rate = demands.compliant_rate(m, n);
            if (rate <= 0.0) continue;
            int pieces = rng.integer(1, 3);
            std::vector<double> shares(pieces);
            double total = 0.0;
            for (double& sh : shares) {
                sh = rng.range(0.1, 1.0);
                total += sh;
            }
            for (int p = 0; p < pieces; ++p) {
                std::vector<double> costs(s.network.edge_count());
                for (double& c : costs) c = rng.range(0.2, 2.0);
                auto path =
                    shortest_path(s.network, costs, s.trips[n].origin, s.trips[n].destination);
                double part = rate * shares[p] / total;
                for (std::size_t i = 0; i + 1 < path.size(); ++i)
                    flows.at(s.network.edge_index(path[i], path[i + 1]), m, n) += part;
            }
        }
    return flows;
}

}  // namespace

TEST_CASE("weights normalize and validate") {
    Weights w = Weights::normalized({2.0, 2.0});
    CHECK(w.w[0] == doctest::Approx(0.5));
    CHECK(w.valid());
    CHECK_FALSE(Weights{{0.4, 0.4}}.valid());
    CHECK_THROWS_AS(Weights::normalized({-1.0, 2.0}), Error);
    CHECK_THROWS_AS(Weights::normalized({0.0, 0.0}), Error);
}

TEST_CASE("all-or-nothing under uniform costs uses fewest hops") {
    Scenario s = generate_sample_network(0);
    std::vector<double> uniform(s.network.edge_count(), 1.0);
    CompliantFlows flows = all_or_nothing(s.network, s.trips, s.demand, uniform);
    for (int n = 0; n < static_cast<int>(s.trips.size()); ++n) {
        double hops = 0.0;
        for (int e = 0; e < s.network.edge_count(); ++e) hops += flows.at(e, 0, n);
        double rate = s.demand.compliant_rate(0, n);
        double expected = oracle::min_path_cost(s.network, uniform, s.trips[n].origin,
                                                s.trips[n].destination);
        CHECK(hops == doctest::Approx(rate * expected));
    }
}

TEST_CASE("all-or-nothing path cost equals the shortest-path distance") {
    Scenario s = generate_sample_network(5);
    UniformRng rng(7);
    std::vector<double> costs(s.network.edge_count());
    for (double& c : costs) c = rng.range(0.1, 2.0);
    CompliantFlows flows = all_or_nothing(s.network, s.trips, s.demand, costs);
    for (int m = 0; m < 2; ++m)
        for (int n = 0; n < static_cast<int>(s.trips.size()); ++n) {
            double rate = s.demand.compliant_rate(m, n);
            if (rate <= 0.0) continue;
            double loaded_cost = 0.0;
            for (int e = 0; e < s.network.edge_count(); ++e)
                loaded_cost += costs[e] * flows.at(e, m, n);
            auto reference =
                shortest_path(s.network, costs, s.trips[n].origin, s.trips[n].destination);
            CHECK(loaded_cost ==
                  doctest::Approx(rate * path_cost(s.network, costs, reference)).epsilon(1e-12));
        }
}

TEST_CASE("a cheap corridor attracts every trip") {
    Scenario s = generate_sample_network(0);
    std::vector<double> costs(s.network.edge_count(), 100.0);
    // make the top row and the two column descents nearly free
    auto cheap = [&](NodeId a, NodeId b) { costs[s.network.edge_index(a, b)] = 0.01; };
    cheap(1, 2); cheap(2, 3); cheap(3, 4);
    cheap(9, 5); cheap(5, 1);
    cheap(4, 8); cheap(8, 12); cheap(2, 6); cheap(3, 7); cheap(7, 11); cheap(6, 10); cheap(10, 11);
    cheap(11, 12); cheap(6, 7);
    CompliantFlows flows = all_or_nothing(s.network, s.trips, s.demand, costs);
    // no flow on any expensive edge except where a trip has no cheap route
    double expensive_flow = 0.0;
    auto totals = flows.edge_totals();
    for (int e = 0; e < s.network.edge_count(); ++e)
        if (costs[e] > 1.0) expensive_flow += totals[e];
    CHECK(expensive_flow == doctest::Approx(0.0));
}

TEST_CASE("gradient at zero flow is the weighted free-flow time") {
    Network net = two_route_network(1.0, 2.0, 5.0);
    std::vector<Trip> trips{{0, 1, 4}};
    DemandTable d = DemandTable::zeros(2, 1);
    CompliantFlows flows(net.edge_count(), 2, 1);
    (void)d;
    Weights w{{0.7, 0.3}};
    for (int e = 0; e < net.edge_count(); ++e) {
        CHECK(objective_gradient(net, flows, w, zeros(net), e, 0) ==
              doctest::Approx(0.7 * net.edges()[e].t0));
        CHECK(objective_gradient(net, flows, w, zeros(net), e, 1) ==
              doctest::Approx(0.3 * net.edges()[e].t0));
    }
}

TEST_CASE("gradient of a zero-weight mode is the congestion externality") {
    Network net = two_route_network(1.0, 2.0, 5.0);
    std::vector<Trip> trips{{0, 1, 4}};
    CompliantFlows flows(net.edge_count(), 2, 1);
    int e12 = net.edge_index(1, 2);
    flows.at(e12, 0, 0) = 3.0;  // weighted mode occupies the edge
    Weights w{{1.0, 0.0}};
    double expected = net.bpr_time_derivative(e12, 3.0) * 3.0;
    CHECK(objective_gradient(net, flows, w, zeros(net), e12, 1) == doctest::Approx(expected));
    // and the weighted mode's own gradient adds the travel time itself
    CHECK(objective_gradient(net, flows, w, zeros(net), e12, 0) ==
          doctest::Approx(net.bpr_time(e12, 3.0) + expected));
}

TEST_CASE("gradient matches central finite differences") {
    Scenario s = generate_sample_network(0);
    UniformRng rng(42);
    std::vector<double> q(s.network.edge_count());
    for (double& v : q) v = rng.range(0.0, 2.0);
    Weights w{{0.6, 0.4}};
    for (int round = 0; round < 3; ++round) {
        CompliantFlows flows = random_feasible(s, s.demand, rng);
        for (int probe = 0; probe < 25; ++probe) {
            int e = rng.integer(0, s.network.edge_count() - 1);
            int m = rng.integer(0, 1);
            int n = rng.integer(0, static_cast<int>(s.trips.size()) - 1);
            double h = 1e-3;
            CompliantFlows up = flows, down = flows;
            up.at(e, m, n) += h;
            down.at(e, m, n) = std::max(0.0, down.at(e, m, n) - h);
            double actual_h = (up.at(e, m, n) - down.at(e, m, n)) / 2.0;
            double fd = (system_objective(s.network, up, w, q) -
                         system_objective(s.network, down, w, q)) /
                        (2.0 * actual_h);
            double analytic = objective_gradient(s.network, flows, w, q, e, m);
            // the asymmetric clamp shifts the evaluation point by at most h/2
            CHECK(analytic == doctest::Approx(fd).epsilon(5e-4));
        }
    }
}

TEST_CASE("single-route demand lands on the only path") {
    Network net({1, 2, 3}, {{1, 2, 1.0, 2.0}, {2, 3, 1.5, 3.0}}, {1}, {3});
    std::vector<Trip> trips{{0, 1, 3}};
    DemandTable d = DemandTable::zeros(1, 1);
    d.compliant[0][0] = 2.0;
    std::vector<double> q(net.edge_count(), 0.5);
    auto [flows, report] = solve_system_optimal(net, trips, d, one_mode(), q);
    CHECK(report.converged);
    CHECK(flows.at(net.edge_index(1, 2), 0, 0) == doctest::Approx(2.0));
    CHECK(flows.at(net.edge_index(2, 3), 0, 0) == doctest::Approx(2.0));
    double expected = 2.0 * (net.bpr_time(0, 2.5) + net.bpr_time(1, 2.5));
    CHECK(report.objective == doctest::Approx(expected));
}

TEST_CASE("identical parallel routes split demand evenly") {
    Network net = two_route_network(1.0, 1.0, 4.0);
    std::vector<Trip> trips{{0, 1, 4}};
    DemandTable d = DemandTable::zeros(1, 1);
    d.compliant[0][0] = 6.0;
    auto [flows, report] = solve_system_optimal(net, trips, d, one_mode(), zeros(net));
    CHECK(report.converged);
    CHECK(flows.at(net.edge_index(1, 2), 0, 0) == doctest::Approx(3.0).epsilon(1e-4));
    CHECK(flows.at(net.edge_index(1, 3), 0, 0) == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("asymmetric routes match a one-dimensional oracle") {
    Network net = two_route_network(1.0, 2.0, 4.0);
    std::vector<Trip> trips{{0, 1, 4}};
    DemandTable d = DemandTable::zeros(1, 1);
    const double demand = 7.0;
    d.compliant[0][0] = demand;
    auto [flows, report] = solve_system_optimal(net, trips, d, one_mode(), zeros(net));

    auto objective_of_split = [&](double on_fast) {
        double a = on_fast, b = demand - on_fast;
        return a * (net.bpr_time(net.edge_index(1, 2), a) + net.bpr_time(net.edge_index(2, 4), a)) +
               b * (net.bpr_time(net.edge_index(1, 3), b) + net.bpr_time(net.edge_index(3, 4), b));
    };
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 100000; ++i)
        best = std::min(best, objective_of_split(demand * i / 100000.0));
    CHECK(report.objective == doctest::Approx(best).epsilon(1e-4));
}

TEST_CASE("solver objective is within tolerance of the path-flow oracle") {
    // diamond with a cross edge: 3 simple paths for trip 1, 2 for trip 2
    Network net({1, 2, 3, 4},
                {{1, 2, 1.0, 2.0}, {1, 3, 1.5, 3.0}, {2, 3, 0.5, 2.0}, {2, 4, 1.0, 2.0},
                 {3, 4, 1.0, 3.0}},
                {1, 2}, {4});
    std::vector<Trip> trips{{0, 1, 4}, {1, 2, 4}};
    DemandTable d = DemandTable::zeros(1, 2);
    d.compliant[0][0] = 4.0;
    d.compliant[0][1] = 3.0;

    auto [flows, report] = solve_system_optimal(net, trips, d, one_mode(), zeros(net));

    oracle::PathFlowOracle brute;
    brute.paths = {oracle::enumerate_simple_paths(net, 1, 4),
                   oracle::enumerate_simple_paths(net, 2, 4)};
    brute.demand = {4.0, 3.0};
    REQUIRE(brute.paths[0].size() == 3);
    REQUIRE(brute.paths[1].size() == 2);
    auto objective = [&](const std::vector<std::vector<double>>& path_flows) {
        std::vector<double> edge_flow(net.edge_count(), 0.0);
        for (std::size_t t = 0; t < path_flows.size(); ++t)
            for (std::size_t p = 0; p < path_flows[t].size(); ++p) {
                const auto& path = brute.paths[t][p];
                for (std::size_t i = 0; i + 1 < path.size(); ++i)
                    edge_flow[net.edge_index(path[i], path[i + 1])] += path_flows[t][p];
            }
        double obj = 0.0;
        for (int e = 0; e < net.edge_count(); ++e)
            obj += net.bpr_time(e, edge_flow[e]) * edge_flow[e];
        return obj;
    };
    double oracle_best = brute.minimize(objective);
    CHECK(report.objective == doctest::Approx(oracle_best).epsilon(1e-4));
}

TEST_CASE("frank-wolfe objective is non-increasing across iterations") {
    Scenario s = generate_sample_network(0);
    Weights w{{0.5, 0.5}};
    std::vector<double> q(s.network.edge_count(), 0.4);
    double previous = std::numeric_limits<double>::infinity();
    for (int cap : {1, 2, 3, 5, 8, 13, 21, 34}) {
        SolverConfig config;
        config.max_iterations = cap;
        auto [flows, report] = solve_system_optimal(s.network, s.trips, s.demand, w, q, config);
        (void)flows;
        CHECK(report.objective <= previous + 1e-9);
        previous = report.objective;
    }
}

TEST_CASE("reported gap is nonnegative and matches its definition") {
    Scenario s = generate_sample_network(0);
    Weights w{{0.5, 0.5}};
    std::vector<double> q(s.network.edge_count(), 0.2);
    SolverConfig config;
    config.max_iterations = 40;  // stop early so the gap is sizable
    auto [flows, report] = solve_system_optimal(s.network, s.trips, s.demand, w, q, config);
    CHECK(report.gap >= 0.0);

    auto g = objective_gradient_all(s.network, flows, w, q);
    std::vector<std::vector<double>> mode_costs(2, std::vector<double>(s.network.edge_count()));
    for (int e = 0; e < s.network.edge_count(); ++e)
        for (int m = 0; m < 2; ++m) mode_costs[m][e] = std::max(g[e * 2 + m], 1e-12);
    CompliantFlows target = all_or_nothing(s.network, s.trips, s.demand, mode_costs);
    double expected_gap = 0.0;
    for (int e = 0; e < s.network.edge_count(); ++e)
        for (int m = 0; m < 2; ++m)
            for (int n = 0; n < static_cast<int>(s.trips.size()); ++n)
                expected_gap += g[e * 2 + m] * (flows.at(e, m, n) - target.at(e, m, n));
    CHECK(report.gap == doctest::Approx(expected_gap).epsilon(1e-9));
}

TEST_CASE("solved flows conserve demand to 1e-9") {
    Scenario s = generate_sample_network(0);
    Weights w{{0.3, 0.7}};
    std::vector<double> q(s.network.edge_count(), 0.1);
    auto [flows, report] = solve_system_optimal(s.network, s.trips, s.demand, w, q);
    (void)report;
    CHECK(max_conservation_violation(s.network, s.trips, s.demand, flows) < 1e-9);
}

TEST_CASE("unreachable trips raise infeasible errors naming the trip") {
    Network net({1, 2, 3}, {{1, 2, 1.0, 1.0}, {3, 1, 1.0, 1.0}}, {1, 3}, {2, 3});
    std::vector<Trip> trips{{0, 1, 3}};  // 3 unreachable from 1
    DemandTable d = DemandTable::zeros(1, 1);
    d.compliant[0][0] = 1.0;
    try {
        solve_system_optimal(net, trips, d, one_mode(), zeros(net));
        FAIL("expected infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::infeasible);
        CHECK(std::string(e.what()).find("trip 0") != std::string::npos);
    }
}

TEST_CASE("zero-demand pairs are skipped entirely") {
    Network net = two_route_network(1.0, 1.0, 2.0);
    std::vector<Trip> trips{{0, 1, 4}};
    DemandTable d = DemandTable::zeros(2, 1);
    d.compliant[0][0] = 2.0;  // mode 1 has no demand
    auto [flows, report] = solve_system_optimal(net, trips, d, Weights{{0.5, 0.5}}, zeros(net));
    (void)report;
    for (int e = 0; e < net.edge_count(); ++e) CHECK(flows.at(e, 1, 0) == 0.0);
}

TEST_CASE("redistribution with one mode keeps the frozen objective") {
    Network net = two_route_network(1.0, 1.5, 3.0);
    std::vector<Trip> trips{{0, 1, 4}};
    DemandTable d = DemandTable::zeros(1, 1);
    d.compliant[0][0] = 4.0;
    auto [flows, report] = solve_system_optimal(net, trips, d, one_mode(), zeros(net));
    (void)report;
    auto totals = flows.edge_totals();
    CompliantFlows redistributed =
        redistribute_fixed_totals(net, trips, d, one_mode(), totals, zeros(net));

    auto frozen_objective = [&](const CompliantFlows& f) {
        double obj = 0.0;
        for (int e = 0; e < net.edge_count(); ++e)
            obj += net.bpr_time(e, totals[e]) * f.at(e, 0, 0);
        return obj;
    };
    CHECK(frozen_objective(redistributed) == doctest::Approx(frozen_objective(flows)).epsilon(1e-9));
    auto new_totals = redistributed.edge_totals();
    for (int e = 0; e < net.edge_count(); ++e)
        CHECK(std::abs(new_totals[e] - totals[e]) <= 1e-9);
}

TEST_CASE("redistribution swaps the favored mode onto the fast route") {
    Network net = two_route_network(1.0, 2.0, 3.0);  // route via 2 is fast
    std::vector<Trip> trips{{0, 1, 4}};
    DemandTable d = DemandTable::zeros(2, 1);
    d.compliant[0][0] = 1.0;  // favored mode A
    d.compliant[1][0] = 1.0;  // mode B
    Weights w{{0.9, 0.1}};

    // input: A on the slow route, B on the fast route
    CompliantFlows input(net.edge_count(), 2, 1);
    input.at(net.edge_index(1, 3), 0, 0) = 1.0;
    input.at(net.edge_index(3, 4), 0, 0) = 1.0;
    input.at(net.edge_index(1, 2), 1, 0) = 1.0;
    input.at(net.edge_index(2, 4), 1, 0) = 1.0;
    auto totals = input.edge_totals();

    CompliantFlows swapped = redistribute_fixed_totals(net, trips, d, w, totals, zeros(net));
    CHECK(swapped.at(net.edge_index(1, 2), 0, 0) == doctest::Approx(1.0));
    CHECK(swapped.at(net.edge_index(2, 4), 0, 0) == doctest::Approx(1.0));
    CHECK(swapped.at(net.edge_index(1, 3), 1, 0) == doctest::Approx(1.0));
    CHECK(swapped.at(net.edge_index(3, 4), 1, 0) == doctest::Approx(1.0));

    // totals are untouched and the frozen objective does not increase
    auto new_totals = swapped.edge_totals();
    for (int e = 0; e < net.edge_count(); ++e)
        CHECK(std::abs(new_totals[e] - totals[e]) <= 1e-9);
    double before = system_objective(net, input, w, zeros(net));
    double after = system_objective(net, swapped, w, zeros(net));
    CHECK(after <= before + 1e-12);
}

TEST_CASE("equal weights make redistribution objective-neutral") {
    Network net = two_route_network(1.0, 1.3, 3.0);
    std::vector<Trip> trips{{0, 1, 4}};
    DemandTable d = DemandTable::zeros(2, 1);
    d.compliant[0][0] = 2.0;
    d.compliant[1][0] = 1.0;
    Weights w{{0.5, 0.5}};
    auto [flows, report] = solve_system_optimal(net, trips, d, w, zeros(net));
    (void)report;
    auto totals = flows.edge_totals();
    CompliantFlows redistributed = redistribute_fixed_totals(net, trips, d, w, totals, zeros(net));
    CHECK(system_objective(net, redistributed, w, zeros(net)) ==
          doctest::Approx(system_objective(net, flows, w, zeros(net))).epsilon(1e-9));
}

TEST_CASE("infeasible fixed totals are rejected") {
    Network net = two_route_network(1.0, 1.0, 3.0);
    std::vector<Trip> trips{{0, 1, 4}};
    DemandTable d = DemandTable::zeros(1, 1);
    d.compliant[0][0] = 2.0;
    // totals that cannot carry 2 units from 1 to 4
    std::vector<double> bogus(net.edge_count(), 0.0);
    bogus[net.edge_index(1, 2)] = 2.0;  // nothing leaves node 2
    try {
        redistribute_fixed_totals(net, trips, d, one_mode(), bogus, zeros(net));
        FAIL("expected infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::infeasible);
    }
}

TEST_CASE("redistribution conserves per-commodity demand") {
    Scenario s = generate_sample_network(0);
    Weights w{{0.8, 0.2}};
    std::vector<double> q(s.network.edge_count(), 0.3);
    auto [flows, report] = solve_system_optimal(s.network, s.trips, s.demand, w, q);
    (void)report;
    auto totals = flows.edge_totals();
    CompliantFlows redistributed =
        redistribute_fixed_totals(s.network, s.trips, s.demand, w, totals, q);
    CHECK(max_conservation_violation(s.network, s.trips, s.demand, redistributed) < 1e-8);
    auto new_totals = redistributed.edge_totals();
    double drift = 0.0;
    for (int e = 0; e < s.network.edge_count(); ++e)
        drift = std::max(drift, std::abs(new_totals[e] - totals[e]));
    CHECK(drift <= 1e-9);
    CHECK(system_objective(s.network, redistributed, w, q) <=
          system_objective(s.network, flows, w, q) + 1e-9);
}
