#include <CLI11.hpp>

#include "qrs/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qrs - QoS reservation and failure-recovery simulator"};
    app.require_subcommand(1);

    qrs::cli::RunArgs run_args;
    std::string run_mode;
    std::int64_t run_seed = -1;
    auto* run = app.add_subcommand("run", "simulate one scenario and write metrics");
    run->add_option("scenario", run_args.scenario_file, "scenario file")->required();
    run->add_option("--mode", run_mode, "override mode: baseline|proposed")
        ->check(CLI::IsMember({"baseline", "proposed"}));
    run->add_option("--seed", run_seed, "override the scenario seed");
    run->add_option("--out", run_args.out_dir, "output directory (env QRS_OUT overrides)");
    run->add_flag("--trace", run_args.dump_trace, "also write trace.bin");

    qrs::cli::CompareArgs cmp_args;
    std::int64_t cmp_seed = -1;
    auto* cmp = app.add_subcommand("compare", "run baseline and proposed on the same seed");
    cmp->add_option("scenario", cmp_args.scenario_file, "scenario file")->required();
    cmp->add_option("--seed", cmp_seed, "override the scenario seed");
    cmp->add_option("--out", cmp_args.out_dir, "output directory (env QRS_OUT overrides)");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (!run_mode.empty())
            run_args.mode = run_mode == "baseline" ? qrs::netsim::Mode::baseline
                                                   : qrs::netsim::Mode::proposed;
        if (run_seed >= 0) run_args.seed = static_cast<std::uint64_t>(run_seed);
        return qrs::cli::cmd_run(run_args);
    }
    if (cmp_seed >= 0) cmp_args.seed = static_cast<std::uint64_t>(cmp_seed);
    return qrs::cli::cmd_compare(cmp_args);
}
