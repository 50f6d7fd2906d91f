#pragma once

#include <array>
#include <span>
#include <string>

#include "vlearn/mlp.hpp"
#include "vlearn/replay_buffer.hpp"

namespace vlearn {

enum class CriticLossKind { wis, vtrace1, base_naive, no_is };

CriticLossKind critic_loss_from_string(const std::string& s);
std::string to_string(CriticLossKind k);

struct CriticHyper {
    double gamma = 0.99;   // discount factor
    double eps_rho = 1.0;  // importance-weight truncation level
    double tau = 5e-3;     // polyak weight

    void validate() const;
};

// Twin state-value critics (state -> scalar) with polyak-averaged targets.
// With twin=false only index 0 exists and the minimum degenerates to it.
struct CriticPair {
    MlpSpec spec;
    bool twin = true;
    std::array<ParamVector, 2> online;
    std::array<ParamVector, 2> target;

    int count() const { return twin ? 2 : 1; }

    static CriticPair init(const MlpSpec& spec, uint64_t seed, bool twin = true);
};

// min(exp(logp_pi - logp_b), eps_rho), evaluated in log space so large
// log-ratios clamp instead of overflowing.
double truncated_ratio(double logp_pi, double logp_b, double eps_rho);

// Per-sample loss cores. These are what the batch losses below sum; they are
// exposed so the loss-geometry emitter and tests can probe them directly.
inline double wis_sample_loss(double v, double vbar, double rho) {
    const double resid = v - vbar;
    return rho * resid * resid;
}
inline double vtrace_sample_target(double rho, double v_target_s, double vbar) {
    return (1.0 - rho) * v_target_s + rho * vbar;
}
inline double vtrace_sample_loss(double v, double v_target_s, double vbar, double rho) {
    const double resid = v - vtrace_sample_target(rho, v_target_s, vbar);
    return resid * resid;
}
inline double base_sample_loss(double v, double vbar, double rho) {
    const double resid = v - rho * vbar;
    return resid * resid;
}

struct CriticLossResult {
    double loss = 0.0;  // summed over critics
    std::array<ParamVector, 2> grads;
};

// Weighted-importance-sampling Bellman loss: the ratio multiplies the whole
// squared error. Per critic i:
//   (1/K) sum_t rho_t (V_i(s_t) - [r_t + gamma (1-done_t) Vbar_i(s'_t)])^2
// with the Bellman target computed from the frozen target network.
CriticLossResult wis_loss_and_grad(const CriticPair& pair,
                                   std::span<const Transition> batch,
                                   std::span<const double> ratios,
                                   const CriticHyper& hyper);

// 1-step V-trace loss: the target interpolates between the target critic's
// value at s and the Bellman target, with weight rho.
CriticLossResult vtrace1_loss_and_grad(const CriticPair& pair,
                                       std::span<const Transition> batch,
                                       std::span<const double> ratios,
                                       const CriticHyper& hyper);

// Importance weighting the Bellman target only (single-action Monte-Carlo
// estimate of the inner expectation).
CriticLossResult base_loss_and_grad(const CriticPair& pair,
                                    std::span<const Transition> batch,
                                    std::span<const double> ratios,
                                    const CriticHyper& hyper);

// Dispatch on kind; no_is runs the WIS form with all ratios set to 1.
CriticLossResult critic_loss_and_grad(CriticLossKind kind, const CriticPair& pair,
                                      std::span<const Transition> batch,
                                      std::span<const double> ratios,
                                      const CriticHyper& hyper);

void polyak_update(CriticPair& pair, double tau);

// min over the online critics.
double value_min(const CriticPair& pair, std::span<const double> s);

}  // namespace vlearn
