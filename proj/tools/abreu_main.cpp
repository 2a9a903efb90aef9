#include "abreu/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Structured-grid solver for second boundary value problems of "
                 "singular fourth-order equations of Abreu type"};
    app.require_subcommand(1);

    abreu::RunOptions opt;
    std::string config, out = ".";
    int grid = 0;
    std::uint64_t seed = 0;
    bool have_seed = false;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config, "path to the key/value config file");
        if (needs_config) c->required();
        sub->add_option("--out", out, "output directory for CSV artifacts");
        sub->add_option("--grid", grid, "override grid.nx and grid.ny");
        sub->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
            have_seed = true;
        });
    };

    add_common(app.add_subcommand("solve", "single solve at fixed penalization"), true);
    add_common(app.add_subcommand("continue", "eps-continuation toward the minimizer"), true);
    add_common(app.add_subcommand("oracle", "brute-force convexity-constrained minimization"), true);
    add_common(app.add_subcommand("compare", "continuation against the oracle"), true);
    auto* diag = app.add_subcommand("diagnose", "assumption report and boundary diagnostics");
    add_common(diag, true);
    diag->add_option("--field", opt.field_path, "field dump CSV to diagnose (defaults to phi)");
    add_common(app.add_subcommand("selftest", "built-in checks battery"), false);

    CLI11_PARSE(app, argc, argv);

    opt.command = app.get_subcommands().front()->get_name();
    opt.config_path = config;
    opt.out_dir = out;
    if (grid > 0) opt.grid_override = grid;
    if (have_seed) opt.seed_override = seed;

    return abreu::run(opt, std::cout);
}
