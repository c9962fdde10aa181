#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

struct RawOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> horizon;
    std::optional<int> threads;
    std::string out;
    std::vector<int> trace_runs;
};

anytime::cli::CommandOptions convert(const RawOptions& raw) {
    anytime::cli::CommandOptions options;
    options.config = raw.config;
    options.overrides = {raw.seed, raw.runs, raw.horizon, raw.threads};
    if (!raw.out.empty()) options.out = raw.out;
    options.trace_runs = raw.trace_runs;
    return options;
}

void add_common(CLI::App* cmd, RawOptions& raw, bool simulation) {
    cmd->add_option("--config", raw.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", raw.out, "output directory");
    if (!simulation) return;
    cmd->add_option("--seed", raw.seed, "master seed (overrides the config)");
    cmd->add_option("--runs", raw.runs, "Monte-Carlo runs")->check(CLI::PositiveNumber);
    cmd->add_option("--horizon", raw.horizon, "steps per run")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", raw.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anytime control simulator: Monte-Carlo costs and stability certificates"};
    app.require_subcommand(1);

    RawOptions simulate_raw;
    auto* simulate = app.add_subcommand("simulate", "run a Monte-Carlo cost study for one controller");
    add_common(simulate, simulate_raw, true);
    simulate->add_option("--trace", simulate_raw.trace_runs, "run indices to write per-step trace CSVs for");

    RawOptions stability_raw;
    auto* stability = app.add_subcommand("stability", "evaluate the closed-form stability certificates");
    add_common(stability, stability_raw, false);

    RawOptions sweep_raw;
    auto* sweep = app.add_subcommand("sweep", "compare baseline, a1 and a2 across a parameter grid");
    add_common(sweep, sweep_raw, true);

    CLI11_PARSE(app, argc, argv);

    if (simulate->parsed()) return anytime::cli::cmd_simulate(convert(simulate_raw), std::cout, std::cerr);
    if (stability->parsed()) return anytime::cli::cmd_stability(convert(stability_raw), std::cout, std::cerr);
    return anytime::cli::cmd_sweep(convert(sweep_raw), std::cout, std::cerr);
}
