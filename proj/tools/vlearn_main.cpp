#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vlearn/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"vlearn: off-policy state-value RL experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir, variant, ckpt_path, resume_path;
    int episodes = 10;
    uint64_t seed_value = 0;

    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed_value, "seed override"); };
    auto seed_of = [&](CLI::App* sub) {
        return sub->count("--seed") > 0 ? std::optional<uint64_t>(seed_value) : std::nullopt;
    };

    CLI::App* train = app.add_subcommand("train", "run a training job");
    train->add_option("--config", config_path, "experiment config file")->required();
    train->add_option("--out", out_dir, "output directory")->required();
    train->add_option("--resume", resume_path, "checkpoint to resume from");
    add_seed(train);

    CLI::App* ablate = app.add_subcommand("ablate", "run a single-switch ablation");
    ablate->add_option("--config", config_path, "experiment config file")->required();
    ablate->add_option("--variant", variant, "no_is|ppo_loss|no_twin|eps_rho_20|vtrace|base")
        ->required();
    ablate->add_option("--out", out_dir, "output directory")->required();
    add_seed(ablate);

    CLI::App* bandit = app.add_subcommand("bandit-lab", "estimator variance sweep");
    bandit->add_option("--config", config_path, "experiment config file")->required();
    bandit->add_option("--out", out_dir, "output directory")->required();

    CLI::App* fig1 = app.add_subcommand("fig1", "emit loss-geometry curves");
    fig1->add_option("--out", out_dir, "output directory")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpointed policy");
    eval->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
    eval->add_option("--episodes", episodes, "number of evaluation episodes")->required();
    add_seed(eval);

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) {
        std::optional<std::string> resume;
        if (!resume_path.empty()) resume = resume_path;
        return vlearn::cmd_train(config_path, seed_of(train), out_dir, resume);
    }
    if (ablate->parsed()) return vlearn::cmd_ablate(config_path, variant, out_dir, seed_of(ablate));
    if (bandit->parsed()) return vlearn::cmd_bandit_lab(config_path, out_dir);
    if (fig1->parsed()) return vlearn::cmd_fig1(out_dir);
    if (eval->parsed()) return vlearn::cmd_eval(ckpt_path, episodes, seed_of(eval));
    return vlearn::kExitUsage;
}
