#include "vlearn/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "vlearn/checkpoint.hpp"
#include "vlearn/config.hpp"
#include "vlearn/critic.hpp"

namespace vlearn {

namespace {

bool log_enabled() {
    const char* v = std::getenv("VLEARN_LOG");
    return v != nullptr && std::string(v) != "" && std::string(v) != "off";
}

// Resuming may extend the step budget; every other key must match the
// checkpoint's embedded config.
bool resume_compatible(const std::string& a, const std::string& b) {
    std::istringstream sa(a), sb(b);
    std::string la, lb;
    while (true) {
        const bool ga = static_cast<bool>(std::getline(sa, la));
        const bool gb = static_cast<bool>(std::getline(sb, lb));
        if (!ga && !gb) return true;
        if (ga != gb) return false;
        if (la == lb) continue;
        if (la.rfind("train.total_steps", 0) == 0 && lb.rfind("train.total_steps", 0) == 0) {
            continue;
        }
        return false;
    }
}

void log_line(const std::string& s) {
    if (log_enabled()) std::cerr << "[vlearn] " << s << "\n";
}

int run_training(ExperimentConfig cfg, std::optional<uint64_t> seed, const std::string& out_dir,
                 const std::optional<std::string>& resume) {
    if (seed) cfg.train.seed = *seed;
    const std::string echo = cfg.resolved_text();

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory " << out_dir << ": " << ec.message()
                  << "\n";
        return kExitConfig;
    }

    {
        std::ofstream os(out_dir + "/config.resolved", std::ios::trunc);
        os << echo;
        if (!os) {
            std::cerr << "error: cannot write " << out_dir << "/config.resolved\n";
            return kExitConfig;
        }
    }

    Trainer trainer(cfg.train);
    if (resume) {
        const std::string ckpt_echo = read_checkpoint_config(*resume);
        if (!resume_compatible(ckpt_echo, echo)) {
            std::cerr << "error: resume checkpoint was written under a different config\n";
            return kExitConfig;
        }
        restore_checkpoint(*resume, trainer);
        log_line("resumed from " + *resume + " at step " + std::to_string(trainer.state().step));
    }

    std::ofstream metrics(out_dir + "/metrics.jsonl", std::ios::trunc);
    if (!metrics) {
        std::cerr << "error: cannot write " << out_dir << "/metrics.jsonl\n";
        return kExitConfig;
    }

    try {
        const FinalReport rep = trainer.train([&](const RunMetrics& m) {
            metrics << m.to_jsonl() << "\n";
            metrics.flush();
            log_line("step " + std::to_string(m.step) + " eval_return " +
                     std::to_string(m.episode_return_mean) + " wall_ms " +
                     std::to_string(m.wall_ms));
        });

        save_checkpoint(out_dir + "/checkpoint.bin", trainer, echo);

        nlohmann::json j;
        j["steps_done"] = rep.steps_done;
        j["critic_updates"] = rep.critic_updates;
        j["policy_updates"] = rep.policy_updates;
        j["final_eval_mean"] = rep.final_eval_mean;
        j["final_eval_returns"] = rep.final_eval_returns;
        j["checkpoint"] = out_dir + "/checkpoint.bin";
        {
            std::ofstream os(out_dir + "/final_report.json", std::ios::trunc);
            os << j.dump(2) << "\n";
        }
        std::cout << j.dump() << "\n";
        return kExitOk;
    } catch (const TrainAbortError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::ofstream dump(out_dir + "/nan_dump.jsonl", std::ios::trunc);
        dump << e.batch_dump;
        std::cerr << "offending batch written to " << out_dir << "/nan_dump.jsonl\n";
        return kExitNanAbort;
    }
}

}  // namespace

int cmd_train(const std::string& config_path, std::optional<uint64_t> seed,
              const std::string& out_dir, const std::optional<std::string>& resume) {
    try {
        ExperimentConfig cfg = load_experiment_config(config_path);
        return run_training(std::move(cfg), seed, out_dir, resume);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

std::string apply_ablation_variant(const std::string& config_text, const std::string& variant) {
    ExperimentConfig cfg = parse_experiment_config(config_text);
    if (variant == "no_is") {
        cfg.train.critic_loss = CriticLossKind::no_is;
    } else if (variant == "ppo_loss") {
        cfg.train.policy_loss = PolicyLossKind::ppo_clip;
    } else if (variant == "no_twin") {
        cfg.train.twin_critic = false;
    } else if (variant == "eps_rho_20") {
        cfg.train.critic.eps_rho = 20.0;
        cfg.train.policy.eps_rho = 20.0;
    } else if (variant == "vtrace") {
        cfg.train.critic_loss = CriticLossKind::vtrace1;
    } else if (variant == "base") {
        cfg.train.critic_loss = CriticLossKind::base_naive;
    } else {
        throw ConfigError("unknown ablation variant: " + variant +
                          " (expected no_is, ppo_loss, no_twin, eps_rho_20, vtrace, base)");
    }
    return cfg.resolved_text();
}

int cmd_ablate(const std::string& config_path, const std::string& variant,
               const std::string& out_dir, std::optional<uint64_t> seed) {
    try {
        std::ifstream is(config_path);
        if (!is) throw ConfigError("cannot open config file: " + config_path);
        std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        ExperimentConfig cfg = parse_experiment_config(apply_ablation_variant(text, variant));
        return run_training(std::move(cfg), seed, out_dir, {});
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_bandit_lab(const std::string& config_path, const std::string& out_dir) {
    try {
        const ExperimentConfig cfg = load_experiment_config(config_path);
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) throw ConfigError("cannot create output directory: " + out_dir);

        std::ofstream csv(out_dir + "/bandit_sweep.csv", std::ios::trunc);
        csv << "divergence,estimator,variance,bias,ess\n";
        csv.precision(17);

        const BanditLabSweep& sweep = cfg.bandit;
        for (std::size_t i = 0; i < sweep.kl_divergences.size(); ++i) {
            const double kl = sweep.kl_divergences[i];
            BanditStudyConfig study;
            study.n = sweep.n;
            study.trials = sweep.trials;
            study.behavior_mean = sweep.behavior_mean;
            study.behavior_std = sweep.behavior_std;
            // Equal stds: KL(target || behavior) = (dm)^2 / (2 sigma^2).
            study.target_mean =
                sweep.behavior_mean + sweep.behavior_std * std::sqrt(2.0 * kl);
            study.target_std = sweep.behavior_std;
            study.reward = sweep.reward;
            study.seed = cfg.train.seed + 101 * i;

            const StudyReport rep = run_variance_study(study);
            for (const auto& row : rep.rows) {
                csv << kl << "," << row.estimator << "," << row.variance << "," << row.bias << ","
                    << row.ess_mean << "\n";
            }
            std::ofstream js(out_dir + "/bandit_kl_" + std::to_string(i) + ".json",
                             std::ios::trunc);
            js << rep.to_json() << "\n";
            log_line("bandit sweep kl=" + std::to_string(kl) + " done");
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_fig1(const std::string& out_dir) {
    try {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) throw std::runtime_error("cannot create output directory: " + out_dir);

        // Scenario: Bellman target 4, target critic value -6.
        const double vbar = 4.0;
        const double v_tgt = -6.0;

        std::ofstream curves(out_dir + "/fig1_curves.csv", std::ios::trunc);
        curves << "rho,v,wis_loss,vtrace_loss\n";
        curves.precision(17);
        for (double rho : {1.0, 0.5, 0.1, 0.01}) {
            for (int i = 0; i <= 200; ++i) {
                const double v = -10.0 + 0.1 * i;
                curves << rho << "," << v << "," << wis_sample_loss(v, vbar, rho) << ","
                       << vtrace_sample_loss(v, v_tgt, vbar, rho) << "\n";
            }
        }

        std::ofstream mins(out_dir + "/fig1_minimizers.csv", std::ios::trunc);
        mins << "rho,wis_minimizer,vtrace_minimizer,wis_curvature,vtrace_curvature\n";
        mins.precision(17);
        for (double rho : {0.0, 0.01, 0.1, 0.5, 0.9, 0.99, 1.0}) {
            const double wis_min = vbar;  // any rho > 0
            const double vtrace_min = (1.0 - rho) * v_tgt + rho * vbar;
            mins << rho << "," << wis_min << "," << vtrace_min << "," << 2.0 * rho << "," << 2.0
                 << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_eval(const std::string& checkpoint_path, int episodes, std::optional<uint64_t> seed) {
    if (episodes < 1) {
        std::cerr << "error: episodes must be >= 1\n";
        return kExitUsage;
    }
    try {
        const std::string echo = read_checkpoint_config(checkpoint_path);
        const ExperimentConfig cfg = parse_experiment_config(echo);
        Trainer trainer(cfg.train);
        restore_checkpoint(checkpoint_path, trainer);

        const uint64_t eval_seed = seed ? *seed : trainer.eval_seed();
        const EvalResult res = evaluate(trainer.state().policy.spec, trainer.state().policy.phi,
                                        trainer.env(), episodes, eval_seed);

        nlohmann::json j;
        j["mean_return"] = res.mean_return;
        j["returns"] = res.returns;
        j["episodes"] = episodes;
        j["seed"] = eval_seed;
        j["step"] = trainer.state().step;
        std::cout << j.dump() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace vlearn
