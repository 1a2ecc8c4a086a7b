#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ratectl/commands.hpp"

namespace {

ratectl::RunConfig resolve_config(const std::string& config_path,
                                  const ratectl::CliOverrides& overrides) {
    ratectl::RunConfig config = config_path.empty() ? ratectl::default_run_config()
                                                    : ratectl::load_run_config(config_path);
    ratectl::apply_overrides(config, overrides);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learned service-rate control for tandem queueing networks"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int episodes = -1;
    std::string out_dir;
    bool quiet = false;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file (defaults used when absent)");
        cmd->add_option("--seed", seed, "master seed override");
        cmd->add_option("--episodes", episodes, "training episodes override");
        cmd->add_option("--out-dir", out_dir, "output directory override");
        cmd->add_flag("--quiet", quiet, "suppress progress output");
    };

    CLI::App* validate = app.add_subcommand("validate-sim", "run the simulator oracle suite");
    add_common(validate);

    CLI::App* train = app.add_subcommand("train", "train controllers for each seed");
    add_common(train);
    bool resume = false;
    train->add_flag("--resume", resume, "continue from existing checkpoints");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a trained or static policy");
    add_common(eval);
    std::string checkpoint;
    std::string static_rates;
    eval->add_option("--checkpoint", checkpoint, "agent checkpoint to evaluate");
    eval->add_option("--static-rates", static_rates,
                     "comma-separated fixed service rates (baseline policy)");

    CLI::App* sweep = app.add_subcommand("sweep", "lambda sweep (or slot-length sweep)");
    add_common(sweep);

    CLI11_PARSE(app, argc, argv);

    std::ostream null_stream(nullptr);
    std::ostream& out = quiet ? null_stream : std::cout;

    ratectl::CliOverrides overrides;
    if (app.count("--seed") || validate->count("--seed") || train->count("--seed") ||
        eval->count("--seed") || sweep->count("--seed")) {
        overrides.seed = seed;
    }
    if (episodes >= 0) overrides.episodes = episodes;
    if (!out_dir.empty()) overrides.out_dir = out_dir;
    overrides.resume = resume;

    try {
        const ratectl::RunConfig config = resolve_config(config_path, overrides);
        if (validate->parsed()) return ratectl::cmd_validate_sim(config, out);
        if (train->parsed()) return ratectl::cmd_train(config, out);
        if (eval->parsed()) return ratectl::cmd_eval(config, checkpoint, static_rates, out);
        if (sweep->parsed()) return ratectl::cmd_sweep(config, out);
    } catch (const ratectl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ratectl::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ratectl::kExitRuntimeError;
    }
    return ratectl::kExitOk;
}
