#pragma once

#include <optional>
#include <string>

namespace vlearn {

// Exit codes shared by the command functions and the binary.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNanAbort = 3;

// Runs a training job: writes metrics.jsonl, checkpoint.bin, config.resolved
// and a final_report.json into out_dir. `seed` overrides the config seed;
// `resume` continues from an existing checkpoint.
int cmd_train(const std::string& config_path, std::optional<uint64_t> seed,
              const std::string& out_dir, const std::optional<std::string>& resume = {});

// Single-switch ablation of the base config; same outputs as cmd_train.
// Variants: no_is, ppo_loss, no_twin, eps_rho_20, vtrace, base.
int cmd_ablate(const std::string& config_path, const std::string& variant,
               const std::string& out_dir, std::optional<uint64_t> seed = {});

// Estimator variance sweep over the configured KL divergences; writes
// bandit_sweep.csv (divergence, estimator, variance, bias, ess) plus one
// JSON report per divergence level.
int cmd_bandit_lab(const std::string& config_path, const std::string& out_dir);

// Loss-geometry emission for the two critic losses on the (-6, 4) scenario:
// fig1_curves.csv and fig1_minimizers.csv.
int cmd_fig1(const std::string& out_dir);

// Deterministic evaluation of a checkpointed policy; prints JSON to stdout.
// Without an explicit seed, uses the run's own evaluation seed so the result
// matches the final logged eval line exactly.
int cmd_eval(const std::string& checkpoint_path, int episodes, std::optional<uint64_t> seed);

// Resolves a variant name onto a config; exposed for tests.
std::string apply_ablation_variant(const std::string& config_text, const std::string& variant);

}  // namespace vlearn
