// Experiment driver: run, compare and grid verbs over a JSON config.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lmc/experiment.hpp"

namespace {

struct CommonArgs
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_workers)
{
    cmd->add_option("--config", args.config, "JSON experiment config")->required();
    cmd->add_option("--seed", args.seed, "Override the config seed");
    cmd->add_option("--out", args.out, "Override the output directory");
    if (with_workers) {
        cmd->add_option("--workers", args.workers, "Concurrent chains")
            ->check(CLI::PositiveNumber);
    }
}

lmc::ExperimentConfig resolve(const CommonArgs& args)
{
    auto cfg = lmc::load_config(args.config);
    if (args.seed) {
        cfg.seed = *args.seed;
    }
    if (args.out) {
        cfg.outputs = *args.out;
    }
    return cfg;
}

void print_summary(const lmc::ExperimentResult& result)
{
    for (const auto& run : result.runs) {
        std::cout << run.label << " chain " << run.chain_id
                  << ": acceptance=" << run.report.acceptance_rate
                  << " time_s=" << run.report.wall_time_s;
        if (run.report.mode_coverage) {
            std::cout << " mode_coverage=" << *run.report.mode_coverage;
        }
        if (run.report.tv_distance) {
            std::cout << " tv=" << *run.report.tv_distance;
        }
        std::cout << '\n';
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Langevin / HMC sampling experiments"};
    app.require_subcommand(1);

    CommonArgs run_args;
    CommonArgs compare_args;
    CommonArgs grid_args;
    auto* run = app.add_subcommand("run", "Run every configured sampler and chain");
    auto* compare = app.add_subcommand("compare", "Run samplers and write comparison.csv");
    auto* grid = app.add_subcommand("grid", "Write the analytic box density grid");
    add_common(run, run_args, true);
    add_common(compare, compare_args, true);
    add_common(grid, grid_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            print_summary(lmc::run_experiment(resolve(run_args), run_args.workers));
        } else if (compare->parsed()) {
            print_summary(
                lmc::compare_samplers(resolve(compare_args), compare_args.workers));
        } else if (grid->parsed()) {
            std::cout << lmc::emit_grid(resolve(grid_args)).string() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
