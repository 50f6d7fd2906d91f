#pragma once

#include <span>
#include <string>
#include <vector>

#include "vlearn/critic.hpp"
#include "vlearn/gaussian.hpp"
#include "vlearn/mlp.hpp"
#include "vlearn/projection.hpp"
#include "vlearn/replay_buffer.hpp"

namespace vlearn {

enum class PolicyLossKind { trpl, ppo_clip };

PolicyLossKind policy_loss_from_string(const std::string& s);
std::string to_string(PolicyLossKind k);

// Gaussian policy network: state -> [mean; log_std] concatenated heads.
// old_phi is the previous-iteration snapshot that anchors the trust region;
// it is refreshed only via snapshot_old_policy.
struct PolicyNet {
    MlpSpec spec;
    int action_dim = 1;
    ParamVector phi;
    ParamVector old_phi;

    // The log_std half of the output layer starts at exactly zero (weights
    // and bias), so the initial policy std is 1.
    static PolicyNet init(int state_dim, int action_dim, const std::vector<int>& hidden,
                          Activation activation, bool layer_norm_first, uint64_t seed);
};

// Evaluates the Gaussian head of `params` at state s. `clamped` (optional)
// reports log_std entries pinned at the clamp, whose gradient is zero.
GaussParams policy_gauss(const PolicyNet& net, const ParamVector& params,
                         std::span<const double> s, MlpWorkspace& ws,
                         std::vector<bool>* clamped = nullptr);

struct PolicyHyper {
    double alpha = 10.0;        // trust-region penalty weight
    double clip = 0.2;          // PPO clip range
    double eps_rho = 1.0;       // importance-weight truncation (shared with critic)
    bool normalize_adv = true;
    // No-IS ablation: treat every sample as on-policy by substituting the
    // current (projected) policy's log-prob for the stored behavior log-prob.
    bool assume_on_policy = false;

    void validate() const;
};

// One-step advantages r + gamma (1-done) min_i V_i(s') - min_i V_i(s).
std::vector<double> advantage(std::span<const Transition> batch, const CriticPair& pair,
                              double gamma);

// (adv - mean) / (std + 1e-8) with population std; inputs shorter than 2
// pass through unchanged.
std::vector<double> normalize_advantages(std::span<const double> adv);

struct PolicyLossResult {
    double loss = 0.0;  // negated objective (+ penalty for TRPL)
    ParamVector grad;
    // Batch diagnostics for the metrics stream.
    double mean_ratio = 0.0;      // truncated importance ratio
    double frac_clamped = 0.0;    // fraction of ratios at the truncation level
    double mean_d_mean = 0.0;     // pre-projection KL mean part vs old policy
    double mean_d_cov = 0.0;
    double penalty = 0.0;         // mean trust-region penalty (unweighted)
    double ess = 0.0;             // (sum rho)^2 / sum rho^2 on truncated ratios
};

// Vlearn policy step: maximize
//   (1/K) sum min(pi_proj(a|s)/pi_b(a|s), eps_rho) A  -  alpha d(pi, pi_proj)
// returned as a loss (negated) with its gradient w.r.t. phi. Gradients flow
// through the projection (exact mean branch, frozen-eta covariance branch);
// the penalty holds the projected distribution fixed. The truncation is a
// clamp with zero gradient in the clamped region.
PolicyLossResult trpl_policy_loss_and_grad(const PolicyNet& net,
                                           std::span<const Transition> batch,
                                           std::span<const double> adv,
                                           const TrustRegionBounds& bounds,
                                           const PolicyHyper& hyper);

// Clipped PPO surrogate against the behavior policy (no projection):
//   -(1/K) sum min(rho A, clip(rho, 1-eps, 1+eps) A).
PolicyLossResult ppo_clip_loss_and_grad(const PolicyNet& net,
                                        std::span<const Transition> batch,
                                        std::span<const double> adv,
                                        const PolicyHyper& hyper);

void snapshot_old_policy(PolicyNet& net);

}  // namespace vlearn
