#include "vlearn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vlearn {

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (batch_size > buffer_capacity) {
        throw std::invalid_argument("batch_size must not exceed buffer capacity");
    }
    if (policy_update_interval < 1 || old_policy_interval < 1) {
        throw std::invalid_argument("update intervals must be >= 1");
    }
    if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
    if (eval_episodes < 1) throw std::invalid_argument("eval_episodes must be >= 1");
    if (!(critic_lr > 0.0) || !(policy_lr > 0.0)) {
        throw std::invalid_argument("learning rates must be positive");
    }
    if (hidden.empty()) throw std::invalid_argument("hidden layer list must be non-empty");
    critic.validate();
    policy.validate();
    bounds.validate();
}

std::string RunMetrics::to_jsonl() const {
    nlohmann::json j;
    j["step"] = step;
    j["episode_return_mean"] = episode_return_mean;
    j["critic_loss"] = critic_loss;
    j["policy_loss"] = policy_loss;
    j["mean_d_mean"] = mean_d_mean;
    j["mean_d_cov"] = mean_d_cov;
    j["mean_trunc_ratio"] = mean_trunc_ratio;
    j["frac_clamped"] = frac_clamped;
    j["batch_ess"] = batch_ess;
    return j.dump();
}

EvalResult evaluate(const MlpSpec& policy_spec, const ParamVector& phi, const Env& env,
                    int episodes, uint64_t seed) {
    if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
    RngStream rng(seed, static_cast<uint64_t>(StreamId::eval));
    const int action_dim = policy_spec.output_dim / 2;
    EvalResult res;
    MlpWorkspace ws;
    std::vector<double> a(action_dim);
    for (int ep = 0; ep < episodes; ++ep) {
        std::vector<double> s = env.reset(rng);
        double ret = 0.0;
        for (int t = 0; t < env.spec().horizon; ++t) {
            forward(policy_spec, phi, s, ws);
            for (int i = 0; i < action_dim; ++i) a[i] = std::tanh(ws.output()[i]);
            StepResult r = env.step(s, a, t);
            ret += r.reward;
            if (r.done || r.truncated) break;
            s = std::move(r.s_next);
        }
        res.returns.push_back(ret);
        res.mean_return += ret;
    }
    res.mean_return /= static_cast<double>(episodes);
    return res;
}

Trainer::Trainer(const TrainConfig& cfg) : cfg_(cfg), env_(cfg.env) {
    cfg_.validate();
    const int state_dim = cfg_.env.state_dim;
    const int action_dim = cfg_.env.action_dim;

    st_.policy = PolicyNet::init(state_dim, action_dim, cfg_.hidden, cfg_.activation,
                                 cfg_.layer_norm_first, cfg_.seed);
    MlpSpec critic_spec{state_dim, cfg_.hidden, 1, cfg_.activation, cfg_.layer_norm_first};
    st_.critics = CriticPair::init(critic_spec, cfg_.seed + 0x51ULL, cfg_.twin_critic);

    st_.adam_policy = AdamState::init(st_.policy.phi.size(), cfg_.policy_lr);
    for (int i = 0; i < st_.critics.count(); ++i) {
        st_.adam_critic[i] = AdamState::init(st_.critics.online[i].size(), cfg_.critic_lr);
    }

    st_.rng_env = make_stream(cfg_.seed, StreamId::env);
    st_.rng_action = make_stream(cfg_.seed, StreamId::action);
    st_.rng_buffer = make_stream(cfg_.seed, StreamId::buffer);
    st_.buffer = ReplayBuffer(BufferConfig{cfg_.buffer_capacity, cfg_.seed});

    st_.env_state = env_.reset(st_.rng_env);
    st_.episode_step = 0;
}

uint64_t Trainer::eval_seed() const {
    return RngStream(cfg_.seed, static_cast<uint64_t>(StreamId::eval)).next_u64();
}

void Trainer::collect_step() {
    MlpWorkspace ws, ws_old;
    const GaussParams p = policy_gauss(st_.policy, st_.policy.phi, st_.env_state, ws);

    // The executed distribution is the projected one; its log-density is what
    // the buffer remembers as pi_b. The PPO ablation runs unprojected.
    GaussParams exec = p;
    if (cfg_.policy_loss == PolicyLossKind::trpl) {
        const GaussParams p_old = policy_gauss(st_.policy, st_.policy.old_phi, st_.env_state, ws_old);
        exec = project(p, p_old, cfg_.bounds).params;
    }

    // The sampler's log_prob already goes through the atanh path used at
    // training time, so on-policy ratios come out as exactly one.
    const SquashedAction act = sample(exec, st_.rng_action);

    StepResult r = env_.step(st_.env_state, act.a, st_.episode_step);

    Transition t;
    t.s = st_.env_state;
    t.a = act.a;
    t.r = r.reward;
    t.s_next = r.s_next;
    t.done = r.done;
    t.logp_b = act.log_prob;
    st_.buffer.push(std::move(t));

    if (r.done || r.truncated) {
        st_.env_state = env_.reset(st_.rng_env);
        st_.episode_step = 0;
    } else {
        st_.env_state = std::move(r.s_next);
        ++st_.episode_step;
    }
}

namespace {

std::string dump_batch(const std::vector<Transition>& batch) {
    std::ostringstream os;
    for (const auto& t : batch) {
        nlohmann::json j{{"s", t.s},           {"a", t.a},       {"r", t.r},
                         {"s_next", t.s_next}, {"done", t.done}, {"logp_b", t.logp_b}};
        os << j.dump() << "\n";
    }
    return os.str();
}

}  // namespace

double Trainer::update_critics(const std::vector<Transition>& batch,
                               const std::vector<double>& ratios) {
    CriticLossResult res =
        critic_loss_and_grad(cfg_.critic_loss, st_.critics, batch, ratios, cfg_.critic);
    if (!std::isfinite(res.loss)) {
        throw TrainAbortError("critic loss is non-finite at step " + std::to_string(st_.step),
                              dump_batch(batch));
    }
    for (int i = 0; i < st_.critics.count(); ++i) {
        st_.adam_critic[i].step(st_.critics.online[i], res.grads[i]);
    }
    return res.loss;
}

FinalReport Trainer::train(const MetricsSink& sink) {
    const bool use_projection = cfg_.policy_loss == PolicyLossKind::trpl;
    const bool no_is = cfg_.critic_loss == CriticLossKind::no_is;

    double last_critic_loss = 0.0;
    PolicyLossResult last_policy;
    double last_batch_ess = 0.0;
    double last_mean_ratio = 0.0;
    double last_frac_clamped = 0.0;

    MlpWorkspace ws, ws_old;
    std::vector<double> ratios;
    auto interval_start = std::chrono::steady_clock::now();

    while (st_.step < cfg_.total_steps) {
        ++st_.step;
        collect_step();

        if (st_.step > cfg_.warmup_steps && st_.buffer.size() >= cfg_.batch_size) {
            const std::vector<Transition> batch =
                st_.buffer.sample_batch(cfg_.batch_size, st_.rng_buffer);

            // Ratios for the critic come from the projected current policy.
            ratios.assign(batch.size(), 1.0);
            if (!no_is) {
                double sr = 0.0, sr2 = 0.0, clamped_n = 0.0;
                for (std::size_t i = 0; i < batch.size(); ++i) {
                    const GaussParams p = policy_gauss(st_.policy, st_.policy.phi, batch[i].s, ws);
                    GaussParams exec = p;
                    if (use_projection) {
                        const GaussParams p_old =
                            policy_gauss(st_.policy, st_.policy.old_phi, batch[i].s, ws_old);
                        exec = project(p, p_old, cfg_.bounds).params;
                    }
                    const double logp = log_prob(exec, batch[i].a);
                    ratios[i] = truncated_ratio(logp, batch[i].logp_b, cfg_.critic.eps_rho);
                    sr += ratios[i];
                    sr2 += ratios[i] * ratios[i];
                    clamped_n +=
                        logp - batch[i].logp_b > std::log(cfg_.critic.eps_rho) ? 1.0 : 0.0;
                }
                last_mean_ratio = sr / static_cast<double>(batch.size());
                last_frac_clamped = clamped_n / static_cast<double>(batch.size());
                last_batch_ess = sr2 > 0.0 ? sr * sr / sr2 : 0.0;
            } else {
                last_mean_ratio = 1.0;
                last_frac_clamped = 0.0;
                last_batch_ess = static_cast<double>(batch.size());
            }

            last_critic_loss = update_critics(batch, ratios);
            ++st_.critic_updates;

            if (st_.critic_updates % static_cast<uint64_t>(cfg_.policy_update_interval) == 0) {
                std::vector<double> adv = advantage(batch, st_.critics, cfg_.critic.gamma);
                if (cfg_.policy.normalize_adv) adv = normalize_advantages(adv);

                PolicyHyper hyper = cfg_.policy;
                hyper.assume_on_policy = hyper.assume_on_policy || no_is;
                if (cfg_.policy_loss == PolicyLossKind::trpl) {
                    last_policy =
                        trpl_policy_loss_and_grad(st_.policy, batch, adv, cfg_.bounds, hyper);
                } else {
                    last_policy = ppo_clip_loss_and_grad(st_.policy, batch, adv, hyper);
                }
                if (!std::isfinite(last_policy.loss)) {
                    throw TrainAbortError(
                        "policy loss is non-finite at step " + std::to_string(st_.step),
                        dump_batch(batch));
                }
                st_.adam_policy.step(st_.policy.phi, last_policy.grad);
                ++st_.policy_updates;

                if (st_.policy_updates % static_cast<uint64_t>(cfg_.old_policy_interval) == 0) {
                    snapshot_old_policy(st_.policy);
                }
            }

            polyak_update(st_.critics, cfg_.critic.tau);
        }

        if (st_.step % cfg_.eval_every == 0 || st_.step == cfg_.total_steps) {
            const EvalResult ev =
                evaluate(st_.policy.spec, st_.policy.phi, env_, cfg_.eval_episodes, eval_seed());
            const auto now = std::chrono::steady_clock::now();
            RunMetrics m;
            m.step = st_.step;
            m.episode_return_mean = ev.mean_return;
            m.critic_loss = last_critic_loss;
            m.policy_loss = last_policy.loss;
            m.mean_d_mean = last_policy.mean_d_mean;
            m.mean_d_cov = last_policy.mean_d_cov;
            m.mean_trunc_ratio = last_mean_ratio;
            m.frac_clamped = last_frac_clamped;
            m.batch_ess = last_batch_ess;
            m.wall_ms =
                std::chrono::duration<double, std::milli>(now - interval_start).count();
            interval_start = now;
            if (sink) sink(m);
        }
    }

    FinalReport rep;
    rep.steps_done = st_.step;
    rep.critic_updates = st_.critic_updates;
    rep.policy_updates = st_.policy_updates;
    const EvalResult ev =
        evaluate(st_.policy.spec, st_.policy.phi, env_, cfg_.eval_episodes, eval_seed());
    rep.final_eval_mean = ev.mean_return;
    rep.final_eval_returns = ev.returns;
    return rep;
}

}  // namespace vlearn
