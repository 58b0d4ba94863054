// Command-line front end: solve / table / figure / simulate / check.
// Configuration comes from a flat key=value file plus a few overriding flags.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "contagion/commands.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    int grid_steps = -1;
    long seed = -1;
    std::string mode;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration file (key = value lines)");
        cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
        cmd->add_option("--grid-steps", grid_steps, "time grid steps (overrides solver.steps)");
        cmd->add_option("--seed", seed, "simulation master seed (overrides sim.seed)");
        cmd->add_option("--mode", mode, "alpha1 formula: derived|paper (overrides config)");
    }

    contagion::RunConfig resolve() const {
        contagion::RunConfig cfg = config_path.empty() ? contagion::RunConfig{}
                                                       : contagion::parse_config_file(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (grid_steps > 0) cfg.grid_steps = grid_steps;
        if (seed >= 0) cfg.sim.seed = static_cast<std::uint64_t>(seed);
        if (!mode.empty()) cfg.mode = contagion::parse_alpha1_mode(mode);
        cfg.validate();
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-name defaultable-portfolio cascade solver and verifier"};
    app.require_subcommand(1);

    CommonFlags flags;
    int table_id = 1;
    bool compare = false;
    int figure_id = 1;

    CLI::App* solve = app.add_subcommand("solve", "solve the cascade, emit y0/pi0/diagonal CSV");
    flags.attach(solve);
    CLI::App* table = app.add_subcommand("table", "initial-strategy table across parameter blocks");
    flags.attach(table);
    table->add_option("--id", table_id, "table id (1: intensities, 2: correlations)")->required();
    table->add_flag("--compare", compare, "append embedded reference values and deviations");
    CLI::App* figure = app.add_subcommand("figure", "plot-ready curve data (series,x,y)");
    flags.attach(figure);
    figure->add_option("--id", figure_id, "figure id (1, 2 or 3)")->required();
    CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo verification of the solution");
    flags.attach(simulate);
    CLI::App* check = app.add_subcommand("check", "run the invariant check battery");
    flags.attach(check);

    CLI11_PARSE(app, argc, argv);

    contagion::RunConfig cfg;
    try {
        cfg = flags.resolve();
    } catch (const std::exception& e) {
        std::cerr << "error (validation): " << e.what() << "\n";
        return contagion::kExitValidation;
    }

    if (solve->parsed()) return contagion::cmd_solve(cfg);
    if (table->parsed()) return contagion::cmd_table(cfg, table_id, compare);
    if (figure->parsed()) return contagion::cmd_figure(cfg, figure_id);
    if (simulate->parsed()) return contagion::cmd_simulate(cfg);
    if (check->parsed()) return contagion::cmd_check(cfg);
    return contagion::kExitValidation;
}
