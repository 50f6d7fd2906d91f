#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vlearn/adam.hpp"
#include "vlearn/critic.hpp"
#include "vlearn/envs.hpp"
#include "vlearn/policy_update.hpp"
#include "vlearn/projection.hpp"
#include "vlearn/replay_buffer.hpp"

namespace vlearn {

struct TrainConfig {
    EnvSpec env = EnvSpec::make(EnvId::point_mass_2d);

    std::vector<int> hidden = {32, 32};
    Activation activation = Activation::relu;
    bool layer_norm_first = false;

    uint64_t total_steps = 100000;
    uint64_t warmup_steps = 0;  // learning starts
    std::size_t batch_size = 64;
    int policy_update_interval = 2;  // critic steps per policy step
    // Policy steps per old-policy refresh. Must be > 1 for the trust region
    // to bind: refreshing after every update would make the reference equal
    // the current policy at each loss evaluation, reducing the projection to
    // the identity.
    int old_policy_interval = 10;
    uint64_t eval_every = 5000;
    int eval_episodes = 5;
    uint64_t seed = 0;

    CriticLossKind critic_loss = CriticLossKind::wis;
    PolicyLossKind policy_loss = PolicyLossKind::trpl;
    bool twin_critic = true;

    CriticHyper critic;
    PolicyHyper policy;
    TrustRegionBounds bounds;
    std::size_t buffer_capacity = 50000;

    double critic_lr = 5e-4;
    double policy_lr = 5e-4;

    void validate() const;
};

// One training-step record for the JSONL metrics stream. wall_ms is carried
// in-process only; the file writer drops it so identical seeds produce
// byte-identical streams.
struct RunMetrics {
    uint64_t step = 0;
    double episode_return_mean = 0.0;
    double critic_loss = 0.0;
    double policy_loss = 0.0;
    double mean_d_mean = 0.0;
    double mean_d_cov = 0.0;
    double mean_trunc_ratio = 0.0;
    double frac_clamped = 0.0;
    double batch_ess = 0.0;
    double wall_ms = 0.0;

    std::string to_jsonl() const;  // deterministic fields only
};

using MetricsSink = std::function<void(const RunMetrics&)>;

struct FinalReport {
    uint64_t steps_done = 0;
    uint64_t critic_updates = 0;
    uint64_t policy_updates = 0;
    double final_eval_mean = 0.0;
    std::vector<double> final_eval_returns;
};

struct EvalResult {
    double mean_return = 0.0;
    std::vector<double> returns;
};

// Deterministic evaluation: tanh of the policy mean, no sampling, no
// projection. Episode starts come from `seed` alone.
EvalResult evaluate(const MlpSpec& policy_spec, const ParamVector& phi, const Env& env,
                    int episodes, uint64_t seed);

// Raised when a loss goes non-finite; carries a dump of the offending batch.
struct TrainAbortError : std::runtime_error {
    explicit TrainAbortError(const std::string& what, std::string dump)
        : std::runtime_error(what), batch_dump(std::move(dump)) {}
    std::string batch_dump;
};

// Everything that defines a run mid-flight; the checkpoint captures it all so
// a resumed run continues the exact trajectory.
struct TrainerState {
    uint64_t step = 0;
    uint64_t critic_updates = 0;
    uint64_t policy_updates = 0;
    std::vector<double> env_state;
    int episode_step = 0;
    PolicyNet policy;
    CriticPair critics;
    AdamState adam_policy;
    std::array<AdamState, 2> adam_critic;
    RngStream rng_env;
    RngStream rng_action;
    RngStream rng_buffer;
    ReplayBuffer buffer;

    TrainerState() : buffer(BufferConfig{1, 0}) {}
};

class Trainer {
public:
    explicit Trainer(const TrainConfig& cfg);

    // Runs from state().step to cfg.total_steps, emitting metrics every
    // eval_every steps and once at the end. Throws TrainAbortError on a
    // non-finite loss.
    FinalReport train(const MetricsSink& sink);

    const TrainConfig& config() const { return cfg_; }
    TrainerState& state() { return st_; }
    const TrainerState& state() const { return st_; }
    const Env& env() const { return env_; }

    uint64_t eval_seed() const;  // derived from cfg.seed; fixed per run

private:
    void collect_step();
    double update_critics(const std::vector<Transition>& batch,
                          const std::vector<double>& ratios);

    TrainConfig cfg_;
    Env env_;
    TrainerState st_;
};

}  // namespace vlearn
