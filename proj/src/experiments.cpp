#include "meqroute/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "meqroute/sample.hpp"
#include "meqroute/util.hpp"

namespace meq {

namespace fs = std::filesystem;
using nlohmann::json;

void NcrSpec::check() const {
    for (double r : rates)
        if (r < 0.0 || r > 1.0 || !std::isfinite(r))
            throw Error(ErrorKind::validation, "noncompliance rates must lie in [0, 1]");
    double s = level_split[0] + level_split[1] + level_split[2];
    if (level_split[0] < 0.0 || level_split[1] < 0.0 || level_split[2] < 0.0 ||
        std::abs(s - 1.0) > 1e-9)
        throw Error(ErrorKind::validation, "level split must be nonnegative and sum to 1");
}

int resolve_cpv_mode(const ModeSet& modes) {
    int idx = modes.index_of("cpv");
    return idx >= 0 ? idx : modes.size() - 1;
}

int resolve_pt_mode(const ModeSet& modes) {
    int idx = modes.index_of("public_transit");
    return idx >= 0 ? idx : 0;
}

std::string format_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

namespace {

int map_error(const Error& e, const char* context) {
    std::cerr << context << ": " << e.what() << "\n";
    switch (e.kind()) {
        case ErrorKind::validation: return exit_code::validation;
        case ErrorKind::infeasible: return exit_code::infeasible;
        case ErrorKind::io: return exit_code::io;
        case ErrorKind::internal: return exit_code::nonconvergence;
    }
    return exit_code::validation;
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create output directory '" + dir + "'");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

const char* formula_name(TimeFormula f) { return f == TimeFormula::paper ? "paper" : "path"; }

std::string travel_time_table(const Scenario& scenario, const TravelTimes& times) {
    std::ostringstream os;
    os << "trip,origin,destination,kind,time\n";
    const int N = static_cast<int>(scenario.trips.size());
    for (int n = 0; n < N; ++n) {
        const Trip& trip = scenario.trips[n];
        for (int m = 0; m < scenario.modes.size(); ++m)
            if (times.has_compliant(m, n))
                os << n << "," << trip.origin << "," << trip.destination << ","
                   << scenario.modes.names[m] << "," << format_double(times.compliant_time(m, n))
                   << "\n";
        for (int level = 0; level < kNpvLevels; ++level)
            if (times.has_npv(level, n))
                os << n << "," << trip.origin << "," << trip.destination << ",npv" << level << ","
                   << format_double(times.npv_time(level, n)) << "\n";
    }
    return os.str();
}

json times_to_json(const Scenario& scenario, const TravelTimes& times) {
    json compliant = json::object();
    for (int m = 0; m < scenario.modes.size(); ++m) {
        json per_trip = json::object();
        for (int n = 0; n < times.trip_count; ++n)
            if (times.has_compliant(m, n)) per_trip[std::to_string(n)] = times.compliant_time(m, n);
        if (!per_trip.empty()) compliant[scenario.modes.names[m]] = per_trip;
    }
    json npv = json::object();
    for (int level = 0; level < kNpvLevels; ++level) {
        json per_trip = json::object();
        for (int n = 0; n < times.trip_count; ++n)
            if (times.has_npv(level, n)) per_trip[std::to_string(n)] = times.npv_time(level, n);
        if (!per_trip.empty()) npv[std::to_string(level)] = per_trip;
    }
    return {{"compliant", compliant}, {"npv", npv}};
}

json trace_to_json(const EquilibriumResult& result) {
    json trace = json::array();
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
        const auto& rec = result.trace[i];
        trace.push_back({{"iteration", i + 1},
                         {"objective", rec.objective},
                         {"compliant_totals", rec.compliant_totals},
                         {"npv_totals", rec.npv_totals},
                         {"totals", rec.totals}});
    }
    return trace;
}

std::string weights_header(const ModeSet& modes) {
    std::string header;
    for (const auto& name : modes.names) header += "w_" + name + ",";
    return header;
}

}  // namespace

int cmd_generate(std::uint64_t seed, const std::string& out_path) {
    try {
        Scenario scenario = generate_sample_network(seed);
        save_scenario_file(scenario, out_path);
        std::cout << "wrote scenario " << out_path << " (digest " << scenario_digest(scenario)
                  << ")\n";
        return exit_code::ok;
    } catch (const Error& e) {
        return map_error(e, "generate");
    }
}

int cmd_solve(const SolveOptions& options) {
    try {
        auto start = std::chrono::steady_clock::now();
        Scenario scenario = load_scenario_file(options.scenario_path);
        int cpv_mode = resolve_cpv_mode(scenario.modes);

        DemandTable demands = scenario.demand;
        if (options.ncr)
            demands = split_private_demand(demands, cpv_mode, *options.ncr, options.level_split);

        Weights weights = options.weights.empty()
                              ? Weights::normalized(std::vector<double>(scenario.modes.size(), 1.0))
                              : Weights::normalized(options.weights);
        if (static_cast<int>(weights.w.size()) != scenario.modes.size())
            throw Error(ErrorKind::validation, "expected one weight per mode");

        GameConfig config;
        config.time_formula = options.time_formula;
        config.gap_limit = options.gap_limit;

        EquilibriumResult result =
            play_game(scenario.network, scenario.trips, demands, weights, config);
        TravelTimes times =
            travel_times(scenario.network, scenario.trips, demands, result, config.time_formula);

        const int M = scenario.modes.size();
        const int S = scenario.mem.services.size();
        std::vector<std::vector<double>> sigmas(M, std::vector<double>(S, 0.0));
        for (int m = 0; m < M; ++m)
            for (int s = 0; s < S; ++s)
                sigmas[m][s] = sigma(times, demands, scenario.trips, scenario.network.origins(), m,
                                     scenario.mem.services.destinations[s], scenario.mem);
        double mem = mem_value(sigmas, scenario.mem);
        double delta = delta_pv(times, demands, cpv_mode);

        ensure_directory(options.out_dir);
        write_text_file(options.out_dir + "/travel_times.csv", travel_time_table(scenario, times));

        json record;
        record["command"] = "solve";
        record["version"] = version();
        record["scenario_digest"] = scenario_digest(scenario);
        json params = {{"weights", weights.w},
                       {"time_formula", formula_name(options.time_formula)},
                       {"gap_limit", options.gap_limit},
                       {"level_split", options.level_split}};
        params["ncr"] = options.ncr ? json(*options.ncr) : json(nullptr);
        record["parameters"] = params;
        record["equilibrium"] = {{"status", to_string(result.status)},
                                 {"iterations", result.iterations},
                                 {"objective", result.last_solve.objective},
                                 {"solver_gap", result.last_solve.gap},
                                 {"redistribution_applied", result.redistribution_applied},
                                 {"trace", trace_to_json(result)}};
        record["travel_times"] = times_to_json(scenario, times);
        json sigma_json = json::object();
        for (int m = 0; m < M; ++m) {
            json per_service = json::object();
            for (int s = 0; s < S; ++s) per_service[scenario.mem.services.names[s]] = sigmas[m][s];
            sigma_json[scenario.modes.names[m]] = per_service;
        }
        record["mem"] = {{"value", mem},
                         {"sigma", sigma_json},
                         {"delta_pv", delta},
                         {"feasible", delta <= options.gap_limit}};
        record["timing_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_text_file(options.out_dir + "/run_record.json", record.dump(2) + "\n");

        std::cout << "status=" << to_string(result.status) << " iterations=" << result.iterations
                  << " objective=" << format_double(result.last_solve.objective)
                  << " mem=" << format_double(mem) << " delta_pv=" << format_double(delta) << "\n";

        return result.status == GameStatus::max_iterations ? exit_code::nonconvergence
                                                           : exit_code::ok;
    } catch (const Error& e) {
        return map_error(e, "solve");
    }
}

int cmd_sweep(const SweepOptions& options) {
    try {
        auto start = std::chrono::steady_clock::now();
        Scenario scenario = load_scenario_file(options.scenario_path);
        options.ncr.check();
        if (options.ncr.rates.empty())
            throw Error(ErrorKind::validation, "sweep needs at least one noncompliance rate");
        int cpv_mode = resolve_cpv_mode(scenario.modes);
        int pt_mode = resolve_pt_mode(scenario.modes);

        GameConfig config;
        config.time_formula = options.time_formula;
        config.gap_limit = options.gap_limit;

        auto grid = weight_grid(scenario.modes.size(), options.grid_step);
        std::vector<DemandTable> demands_by_ncr;
        demands_by_ncr.reserve(options.ncr.rates.size());
        for (double rate : options.ncr.rates)
            demands_by_ncr.push_back(
                split_private_demand(scenario.demand, cpv_mode, rate, options.ncr.level_split));

        const std::size_t per_ncr = grid.size();
        const std::size_t total = per_ncr * options.ncr.rates.size();
        std::vector<SweepRecord> records(total);

        int jobs = std::max(1, options.jobs);
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr first_error;
        auto worker = [&]() {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= total) return;
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (first_error) return;
                }
                try {
                    std::size_t ncr_idx = i / per_ncr;
                    const Weights& w = grid[i % per_ncr];
                    SweepRecord rec = evaluate_weight_point(
                        scenario.network, scenario.trips, demands_by_ncr[ncr_idx], scenario.mem,
                        options.gap_limit, w, config, cpv_mode);
                    rec.ncr = options.ncr.rates[ncr_idx];
                    records[i] = std::move(rec);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        if (jobs == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        if (first_error) std::rethrow_exception(first_error);

        std::ostringstream results;
        results << weights_header(scenario.modes) << "ncr,mem,delta_pv,feasible,status\n";
        for (const auto& rec : records) {
            for (double w : rec.weights.w) results << format_double(w) << ",";
            results << format_double(rec.ncr) << "," << format_double(rec.mem) << ","
                    << format_double(rec.delta_pv) << "," << (rec.feasible ? 1 : 0) << ","
                    << to_string(rec.status) << "\n";
        }

        std::ostringstream best;
        best << "ncr,found," << weights_header(scenario.modes) << "mem,delta_pv,status\n";
        for (std::size_t ncr_idx = 0; ncr_idx < options.ncr.rates.size(); ++ncr_idx) {
            std::vector<SweepRecord> slice(records.begin() + ncr_idx * per_ncr,
                                           records.begin() + (ncr_idx + 1) * per_ncr);
            auto best_idx = select_best_record(slice, pt_mode);
            best << format_double(options.ncr.rates[ncr_idx]) << ",";
            if (best_idx) {
                const auto& rec = slice[*best_idx];
                best << "1,";
                for (double w : rec.weights.w) best << format_double(w) << ",";
                best << format_double(rec.mem) << "," << format_double(rec.delta_pv) << ","
                     << to_string(rec.status) << "\n";
            } else {
                best << "0,";
                for (int m = 0; m < scenario.modes.size(); ++m) best << ",";
                best << ",,infeasible\n";
                std::cerr << "sweep: no feasible weights for ncr="
                          << format_double(options.ncr.rates[ncr_idx]) << " (gap limit "
                          << format_double(options.gap_limit) << ")\n";
            }
        }

        ensure_directory(options.out_dir);
        write_text_file(options.out_dir + "/results.csv", results.str());
        write_text_file(options.out_dir + "/best_weights.csv", best.str());

        json record;
        record["command"] = "sweep";
        record["version"] = version();
        record["scenario_digest"] = scenario_digest(scenario);
        record["parameters"] = {{"grid_step", options.grid_step},
                                {"ncr", options.ncr.rates},
                                {"level_split", options.ncr.level_split},
                                {"gap_limit", options.gap_limit},
                                {"time_formula", formula_name(options.time_formula)},
                                {"jobs", jobs}};
        record["rows"] = total;
        record["timing_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_text_file(options.out_dir + "/sweep_record.json", record.dump(2) + "\n");

        std::cout << "wrote " << total << " sweep rows to " << options.out_dir << "\n";
        return exit_code::ok;
    } catch (const Error& e) {
        return map_error(e, "sweep");
    }
}

int cmd_iterate_demo(const IterateDemoOptions& options) {
    try {
        Scenario scenario = load_scenario_file(options.scenario_path);
        int cpv_mode = resolve_cpv_mode(scenario.modes);
        int pt_mode = resolve_pt_mode(scenario.modes);
        (void)cpv_mode;

        Weights weights = Weights::normalized(options.weights);
        if (static_cast<int>(weights.w.size()) != scenario.modes.size())
            throw Error(ErrorKind::validation, "expected one weight per mode");

        GameConfig config;
        config.time_formula = options.time_formula;

        EquilibriumResult result =
            play_game(scenario.network, scenario.trips, scenario.demand, weights, config);
        TravelTimes final_times = travel_times(scenario.network, scenario.trips, scenario.demand,
                                               result, options.time_formula);

        ensure_directory(options.out_dir);
        std::ostringstream table;
        table << "phase,trip,origin,destination,kind,time\n";
        auto emit = [&](const char* phase, const TravelTimes& times) {
            const int N = static_cast<int>(scenario.trips.size());
            for (int n = 0; n < N; ++n) {
                const Trip& trip = scenario.trips[n];
                for (int m = 0; m < scenario.modes.size(); ++m)
                    if (times.has_compliant(m, n))
                        table << phase << "," << n << "," << trip.origin << ","
                              << trip.destination << "," << scenario.modes.names[m] << ","
                              << format_double(times.compliant_time(m, n)) << "\n";
                for (int level = 0; level < kNpvLevels; ++level)
                    if (times.has_npv(level, n))
                        table << phase << "," << n << "," << trip.origin << ","
                              << trip.destination << ",npv" << level << ","
                              << format_double(times.npv_time(level, n)) << "\n";
            }
        };

        if (!result.redistribution_applied) {
            emit("final", final_times);
            write_text_file(options.out_dir + "/iteration_comparison.csv", table.str());
            std::cout << "no chattering detected (status=" << to_string(result.status) << " after "
                      << result.iterations
                      << " iterations); table contains the final state only\n";
            return exit_code::ok;
        }

        const CompliantFlows& before = *result.pre_redistribution;
        TravelTimes before_times =
            travel_times_for(scenario.network, scenario.trips, scenario.demand, before,
                             result.npv_assignment, result.npv, options.time_formula);
        emit("before_redistribution", before_times);
        emit("after_redistribution", final_times);
        write_text_file(options.out_dir + "/iteration_comparison.csv", table.str());

        // invariant checks from the convergence-inducing construction
        auto before_totals = before.edge_totals();
        auto after_totals = result.compliant.edge_totals();
        double totals_drift = max_norm_diff(before_totals, after_totals);
        bool totals_ok = totals_drift <= 1e-9;

        auto recheck = npv_phase(scenario.network, after_totals, scenario.trips, scenario.demand);
        bool npv_ok = recheck.first == result.npv_assignment;

        double pt_before = 0.0, pt_after = 0.0, pt_demand = 0.0;
        for (int n = 0; n < static_cast<int>(scenario.trips.size()); ++n) {
            double rate = scenario.demand.compliant_rate(pt_mode, n);
            if (rate <= 0.0) continue;
            pt_before += rate * before_times.compliant_time(pt_mode, n);
            pt_after += rate * final_times.compliant_time(pt_mode, n);
            pt_demand += rate;
        }
        bool pt_ok = pt_demand <= 0.0 || pt_after <= pt_before + 1e-9;

        double objective_before =
            system_objective(scenario.network, before, weights, result.npv.q_total);
        double objective_after =
            system_objective(scenario.network, result.compliant, weights, result.npv.q_total);
        bool objective_ok = objective_after <= objective_before + 1e-9;

        auto report = [](const char* name, bool ok) {
            std::cout << "check " << name << ": " << (ok ? "PASS" : "FAIL") << "\n";
        };
        report("edge totals preserved", totals_ok);
        report("npv paths unchanged", npv_ok);
        report("public transit time not increased", pt_ok);
        report("weighted objective not increased", objective_ok);
        if (pt_demand > 0.0)
            std::cout << "public transit demand-weighted time: "
                      << format_double(pt_before / pt_demand) << " -> "
                      << format_double(pt_after / pt_demand) << "\n";

        bool all_ok = totals_ok && npv_ok && pt_ok && objective_ok;
        return all_ok ? exit_code::ok : exit_code::nonconvergence;
    } catch (const Error& e) {
        return map_error(e, "iterate-demo");
    }
}

ResultsTable parse_results_table(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::validation, "results table is empty");

    ResultsTable table;
    std::vector<std::string> header;
    {
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) header.push_back(cell);
    }
    std::size_t fixed_start = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i].rfind("w_", 0) == 0) {
            table.weight_columns.push_back(header[i].substr(2));
        } else {
            fixed_start = i;
            break;
        }
    }
    const std::vector<std::string> expected{"ncr", "mem", "delta_pv", "feasible", "status"};
    if (header.size() != fixed_start + expected.size())
        throw Error(ErrorKind::validation, "results table header has unexpected columns");
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (header[fixed_start + i] != expected[i])
            throw Error(ErrorKind::validation,
                        "results table header mismatch at column " + header[fixed_start + i]);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size())
            throw Error(ErrorKind::validation, "results table row has wrong cell count");
        ResultRow row;
        for (std::size_t i = 0; i < table.weight_columns.size(); ++i)
            row.weights.push_back(std::stod(cells[i]));
        std::size_t k = table.weight_columns.size();
        row.ncr = std::stod(cells[k]);
        row.mem = std::stod(cells[k + 1]);
        row.delta_pv = std::stod(cells[k + 2]);
        row.feasible = cells[k + 3] == "1";
        row.status = cells[k + 4];
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace meq
