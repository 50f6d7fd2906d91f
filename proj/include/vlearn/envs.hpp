#pragma once

#include <span>
#include <string>
#include <vector>

#include "vlearn/rng.hpp"

namespace vlearn {

enum class EnvId { point_mass_2d, pendulum, nd_integrator };

EnvId env_id_from_string(const std::string& s);
std::string to_string(EnvId id);

struct EnvSpec {
    EnvId id = EnvId::point_mass_2d;
    int dim = 1;  // nd_integrator dimension; ignored otherwise
    int state_dim = 4;
    int action_dim = 2;
    int horizon = 100;
    double gamma_hint = 0.99;

    static EnvSpec make(EnvId id, int dim = 1);
};

struct StepResult {
    std::vector<double> s_next;
    double reward = 0.0;
    bool done = false;       // environment termination (never, for these envs)
    bool truncated = false;  // time limit reached
};

// Deterministic desk-scale environments with actions in [-1,1]^d. The
// dynamics object is stateless: callers hold the state vector and the step
// index within the episode. All integrate sequential (semi-implicit) Euler at
// fixed dt; stochasticity enters only through reset().
class Env {
public:
    explicit Env(const EnvSpec& spec);

    const EnvSpec& spec() const { return spec_; }

    std::vector<double> reset(RngStream& rng) const;

    // `step_index` is the 0-based index of the step being taken; the result
    // is truncated when it is the last one of the episode. Out-of-range
    // actions are clamped and counted.
    StepResult step(std::span<const double> state, std::span<const double> action,
                    int step_index) const;

    // Frozen per-env acceptance threshold, derived from the reference
    // controller rollouts in the test fixtures.
    double optimal_return_bound() const;

    long clamp_warnings() const { return clamp_warnings_; }

    // Pendulum total energy (kinetic + potential about the pivot); used by
    // the zero-torque drift check.
    static double pendulum_energy(std::span<const double> state);

private:
    EnvSpec spec_;
    mutable long clamp_warnings_ = 0;
};

// Hand-tuned baseline controllers used to derive and defend the acceptance
// thresholds. Not used by the learner.
std::vector<double> reference_controller_action(const Env& env, std::span<const double> state);

// Mean episode return of a fixed action callback over `episodes` seeded
// episodes; shared by fixtures and evaluation tests.
template <typename ActionFn>
double rollout_return(const Env& env, RngStream& rng, ActionFn&& act) {
    std::vector<double> s = env.reset(rng);
    double ret = 0.0;
    for (int t = 0; t < env.spec().horizon; ++t) {
        const std::vector<double> a = act(std::span<const double>(s));
        StepResult r = env.step(s, a, t);
        ret += r.reward;
        if (r.done || r.truncated) break;
        s = std::move(r.s_next);
    }
    return ret;
}

}  // namespace vlearn
