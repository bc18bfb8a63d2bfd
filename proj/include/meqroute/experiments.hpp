#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "meqroute/equity.hpp"
#include "meqroute/scenario.hpp"

namespace meq {

/// Process exit codes of the command-line tool.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int validation = 2;
inline constexpr int infeasible = 3;
inline constexpr int nonconvergence = 4;
inline constexpr int io = 5;
}  // namespace exit_code

/// Noncompliance-rate sweep specification.
struct NcrSpec {
    std::vector<double> rates;
    std::array<double, kNpvLevels> level_split{0.5, 0.3, 0.2};

    void check() const;  // rates in [0,1]; split nonnegative, sums to 1
};

struct SolveOptions {
    std::string scenario_path;
    std::vector<double> weights;  // raw; normalized before solving
    std::optional<double> ncr;    // when set, re-splits private demand
    std::array<double, kNpvLevels> level_split{0.5, 0.3, 0.2};
    TimeFormula time_formula = TimeFormula::paper;
    double gap_limit = std::numeric_limits<double>::infinity();
    std::string out_dir;
};

struct SweepOptions {
    std::string scenario_path;
    double grid_step = 0.05;
    NcrSpec ncr{{0.2, 0.4, 0.6, 0.8}, {0.5, 0.3, 0.2}};
    TimeFormula time_formula = TimeFormula::paper;
    double gap_limit = std::numeric_limits<double>::infinity();
    int jobs = 1;
    std::string out_dir;
};

struct IterateDemoOptions {
    std::string scenario_path;
    std::vector<double> weights{0.9, 0.1};  // prioritize public transit
    TimeFormula time_formula = TimeFormula::paper;
    std::string out_dir;
};

/// Writes the seeded sample scenario to out_path.
int cmd_generate(std::uint64_t seed, const std::string& out_path);
/// Single game: writes run_record.json and travel_times.csv under out_dir.
int cmd_solve(const SolveOptions& options);
/// Weight-by-NCR sweep: writes results.csv, best_weights.csv and
/// sweep_record.json under out_dir. Rows evaluate concurrently up to jobs;
/// output order and bytes are independent of the schedule.
int cmd_sweep(const SweepOptions& options);
/// Chatter demonstration: travel times before and after the fixed-totals
/// redistribution plus the invariant checks; writes iteration_comparison.csv.
int cmd_iterate_demo(const IterateDemoOptions& options);

/// Mode conventions of the CLI: the compliant-private mode is the one named
/// "cpv" (fallback: last mode); public transit is "public_transit"
/// (fallback: first mode).
int resolve_cpv_mode(const ModeSet& modes);
int resolve_pt_mode(const ModeSet& modes);

/// Deterministic number formatting used in all emitted tables.
std::string format_double(double v);

/// Parsed form of results.csv; the independent re-scan oracle in the tests
/// uses this loader.
struct ResultRow {
    std::vector<double> weights;
    double ncr = 0.0;
    double mem = 0.0;
    double delta_pv = 0.0;
    bool feasible = false;
    std::string status;
};

struct ResultsTable {
    std::vector<std::string> weight_columns;
    std::vector<ResultRow> rows;
};

ResultsTable parse_results_table(const std::string& csv_text);

inline const char* version() { return "0.1.0"; }

}  // namespace meq
