#pragma once

#include <map>
#include <string>
#include <vector>

#include "vlearn/bandit.hpp"
#include "vlearn/trainer.hpp"

namespace vlearn {

// Bandit-lab sweep settings, carried in the same experiment file under the
// bandit.* namespace.
struct BanditLabSweep {
    int n = 32;
    int trials = 100000;
    std::vector<double> kl_divergences = {0.0, 0.125, 0.5, 2.0};
    double behavior_mean = 0.0;
    double behavior_std = 1.0;
    RewardFn reward{RewardKind::quadratic, -1.0, 1.0, 1.0};
};

struct ExperimentConfig {
    TrainConfig train;
    BanditLabSweep bandit;

    // Canonical flat key=value text with every key present, sorted; doubles
    // at full round-trip precision. Re-parsing the echo reproduces the
    // config exactly.
    std::string resolved_text() const;

    static ExperimentConfig defaults();
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses `key = value` lines ('#' comments, blank lines allowed), validates
// against the full schema, rejects unknown keys (the error lists them), and
// type-checks every value. Keys not present take defaults.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);  // ConfigError on missing file

}  // namespace vlearn
