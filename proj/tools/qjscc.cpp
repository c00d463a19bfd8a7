// Experiment driver: design, sweep, simulate and compare commands producing
// CSV artifacts from a flat key = value config.

#include <CLI11.hpp>
#include <cstdio>

#include "qjscc/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides [output] dir)");
    cmd->add_option("--seed", args.seed, "Monte Carlo seed (overrides [sim] seed)");
    cmd->add_option("--jobs", args.jobs, "worker threads (overrides [output] jobs)");
}

qjscc::ExperimentConfig load(const CommonArgs& args) {
    auto cfg = qjscc::ExperimentConfig::from_ini(qjscc::IniDoc::parse_file(args.config_path));
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed >= 0) cfg.sim.seed = static_cast<std::uint64_t>(args.seed);
    if (args.jobs > 0) cfg.jobs = args.jobs;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zero-delay source-channel designs for low-resolution ADC front ends"};
    app.require_subcommand(1);

    CommonArgs design_args, sweep_args, sim_args;
    CLI::App* design = app.add_subcommand("design", "write mapping/decoder CSVs for one scheme");
    add_common(design, design_args);
    CLI::App* sweep = app.add_subcommand("sweep", "evaluate schemes over an SNR grid");
    add_common(sweep, sweep_args);
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo check of one design point");
    add_common(simulate, sim_args);

    qjscc::CompareOptions cmp;
    CLI::App* compare = app.add_subcommand("compare", "tabulate deltas between two sweep CSVs");
    compare->add_option("file_a", cmp.file_a, "first sweep.csv")->required();
    compare->add_option("file_b", cmp.file_b, "second sweep.csv")->required();
    compare->add_flag("--expect-le", cmp.expect_le, "fail if A exceeds B anywhere");
    compare->add_option("--tolerance", cmp.tolerance, "ordering slack");
    compare->add_option("--out", cmp.out_path, "write the delta table to this CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (design->parsed()) return qjscc::cmd_design(load(design_args));
        if (sweep->parsed()) return qjscc::cmd_sweep(load(sweep_args));
        if (simulate->parsed()) return qjscc::cmd_simulate(load(sim_args));
        if (compare->parsed()) return qjscc::cmd_compare(cmp);
    } catch (const qjscc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
    return 0;
}
