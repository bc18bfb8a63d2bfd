#include <array>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "meqroute/experiments.hpp"

namespace {

meq::TimeFormula parse_formula(const std::string& name) {
    if (name == "paper") return meq::TimeFormula::paper;
    if (name == "path") return meq::TimeFormula::path;
    throw CLI::ValidationError("--time-formula", "must be 'paper' or 'path'");
}

std::array<double, 3> to_split(const std::vector<double>& values) {
    if (values.size() != 3)
        throw CLI::ValidationError("--level-split", "expects three fractions");
    return {values[0], values[1], values[2]};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixed-traffic routing equilibria and mobility-equity weight sweeps"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "write the seeded sample scenario");
    std::uint64_t seed = 0;
    std::string generate_out = "scenario.json";
    generate->add_option("--seed", seed, "generator seed")->capture_default_str();
    generate->add_option("--out", generate_out, "output scenario file")->capture_default_str();

    // solve
    auto* solve = app.add_subcommand("solve", "run one routing game on a scenario");
    meq::SolveOptions solve_options;
    std::vector<double> solve_weights;
    std::vector<double> solve_split{0.5, 0.3, 0.2};
    std::string solve_formula = "paper";
    double solve_ncr = -1.0;
    solve->add_option("scenario", solve_options.scenario_path, "scenario file")->required();
    solve->add_option("--weights", solve_weights, "per-mode weights (normalized)")->delimiter(',');
    solve->add_option("--ncr", solve_ncr, "noncompliance rate overriding file rates");
    solve->add_option("--level-split", solve_split, "NPV level fractions")->delimiter(',');
    solve->add_option("--time-formula", solve_formula, "paper|path")->capture_default_str();
    solve->add_option("--gap-limit", solve_options.gap_limit, "feasibility bound on delta_pv");
    solve->add_option("--out", solve_options.out_dir, "output directory")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "weight-by-NCR sweep with best-weight selection");
    meq::SweepOptions sweep_options;
    std::vector<double> sweep_ncr{0.2, 0.4, 0.6, 0.8};
    std::vector<double> sweep_split{0.5, 0.3, 0.2};
    std::string sweep_formula = "paper";
    sweep->add_option("scenario", sweep_options.scenario_path, "scenario file")->required();
    sweep->add_option("--grid-step", sweep_options.grid_step, "weight grid step")
        ->capture_default_str();
    sweep->add_option("--ncr-list", sweep_ncr, "noncompliance rates")->delimiter(',');
    sweep->add_option("--level-split", sweep_split, "NPV level fractions")->delimiter(',');
    sweep->add_option("--gap-limit", sweep_options.gap_limit, "feasibility bound on delta_pv");
    sweep->add_option("--time-formula", sweep_formula, "paper|path")->capture_default_str();
    sweep->add_option("--jobs", sweep_options.jobs, "concurrent evaluations")
        ->capture_default_str();
    sweep->add_option("--out", sweep_options.out_dir, "output directory")->required();

    // iterate-demo
    auto* demo = app.add_subcommand("iterate-demo",
                                    "before/after comparison of the chatter redistribution");
    meq::IterateDemoOptions demo_options;
    std::vector<double> demo_weights{0.9, 0.1};
    std::string demo_formula = "paper";
    demo->add_option("scenario", demo_options.scenario_path, "scenario file")->required();
    demo->add_option("--weights", demo_weights, "per-mode weights (normalized)")->delimiter(',');
    demo->add_option("--time-formula", demo_formula, "paper|path")->capture_default_str();
    demo->add_option("--out", demo_options.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : meq::exit_code::validation;
    }

    try {
        if (generate->parsed()) return meq::cmd_generate(seed, generate_out);
        if (solve->parsed()) {
            solve_options.weights = solve_weights;
            solve_options.level_split = to_split(solve_split);
            solve_options.time_formula = parse_formula(solve_formula);
            if (solve_ncr >= 0.0) solve_options.ncr = solve_ncr;
            return meq::cmd_solve(solve_options);
        }
        if (sweep->parsed()) {
            sweep_options.ncr.rates = sweep_ncr;
            sweep_options.ncr.level_split = to_split(sweep_split);
            sweep_options.time_formula = parse_formula(sweep_formula);
            return meq::cmd_sweep(sweep_options);
        }
        if (demo->parsed()) {
            demo_options.weights = demo_weights;
            demo_options.time_formula = parse_formula(demo_formula);
            return meq::cmd_iterate_demo(demo_options);
        }
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return meq::exit_code::validation;
    } catch (const meq::Error& e) {
        std::cerr << e.what() << "\n";
        return meq::exit_code::validation;
    }
    return meq::exit_code::validation;
}
