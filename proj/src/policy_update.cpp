#include "vlearn/policy_update.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vlearn {

PolicyLossKind policy_loss_from_string(const std::string& s) {
    if (s == "trpl") return PolicyLossKind::trpl;
    if (s == "ppo_clip") return PolicyLossKind::ppo_clip;
    throw std::invalid_argument("unknown policy loss: " + s);
}

std::string to_string(PolicyLossKind k) {
    return k == PolicyLossKind::trpl ? "trpl" : "ppo_clip";
}

void PolicyHyper::validate() const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    if (!(clip > 0.0 && clip < 1.0)) throw std::invalid_argument("clip must be in (0,1)");
    if (!(eps_rho > 0.0)) throw std::invalid_argument("eps_rho must be positive");
}

PolicyNet PolicyNet::init(int state_dim, int action_dim, const std::vector<int>& hidden,
                          Activation activation, bool layer_norm_first, uint64_t seed) {
    PolicyNet net;
    net.action_dim = action_dim;
    net.spec = MlpSpec{state_dim, hidden, 2 * action_dim, activation, layer_norm_first};
    net.spec.validate();
    net.phi = init_params(net.spec, seed);

    // Zero the log_std half of the output layer so the head emits exactly
    // log(1) until the optimizer moves it.
    const std::size_t last = net.spec.num_linear_layers() - 1;
    const int fin = net.spec.layer_fan_in(last);
    const int fout = net.spec.layer_fan_out(last);
    double* w = net.phi.data() + net.spec.layer_offset(last);
    double* b = w + static_cast<std::size_t>(fout) * fin;
    for (int o = action_dim; o < fout; ++o) {
        std::fill(w + static_cast<std::size_t>(o) * fin, w + static_cast<std::size_t>(o + 1) * fin, 0.0);
        b[o] = 0.0;
    }

    net.old_phi = net.phi;
    return net;
}

GaussParams policy_gauss(const PolicyNet& net, const ParamVector& params,
                         std::span<const double> s, MlpWorkspace& ws,
                         std::vector<bool>* clamped) {
    forward(net.spec, params, s, ws);
    return gauss_from_head(ws.output(), clamped);
}

std::vector<double> advantage(std::span<const Transition> batch, const CriticPair& pair,
                              double gamma) {
    std::vector<double> adv(batch.size());
    for (std::size_t t = 0; t < batch.size(); ++t) {
        const Transition& tr = batch[t];
        const double v_next = tr.done ? 0.0 : value_min(pair, tr.s_next);
        adv[t] = tr.r + gamma * v_next - value_min(pair, tr.s);
    }
    return adv;
}

std::vector<double> normalize_advantages(std::span<const double> adv) {
    std::vector<double> out(adv.begin(), adv.end());
    const std::size_t k = adv.size();
    if (k < 2) return out;
    double mean = 0.0;
    for (double a : adv) mean += a;
    mean /= static_cast<double>(k);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= static_cast<double>(k);
    const double denom = std::sqrt(var) + 1e-8;
    for (double& a : out) a = (a - mean) / denom;
    return out;
}

namespace {

// Shared epilogue: fold upstream (mean, log_std) gradients through the
// log_std clamp and the network backward pass.
void backprop_head(const PolicyNet& net, MlpWorkspace& ws, const std::vector<bool>& clamped,
                   std::span<const double> up_mu, std::span<const double> up_ls,
                   ParamVector& grad) {
    const int k = net.action_dim;
    std::vector<double> upstream(2 * k);
    for (int i = 0; i < k; ++i) {
        upstream[i] = up_mu[i];
        upstream[k + i] = clamped[i] ? 0.0 : up_ls[i];
    }
    backward(net.spec, net.phi, ws, upstream, &grad, nullptr);
}

}  // namespace

PolicyLossResult trpl_policy_loss_and_grad(const PolicyNet& net,
                                           std::span<const Transition> batch,
                                           std::span<const double> adv,
                                           const TrustRegionBounds& bounds,
                                           const PolicyHyper& hyper) {
    if (batch.empty()) throw std::invalid_argument("policy loss: empty batch");
    if (adv.size() != batch.size()) throw std::invalid_argument("policy loss: adv size mismatch");
    const std::size_t n = batch.size();
    const double inv_k = 1.0 / static_cast<double>(n);
    const int k = net.action_dim;

    PolicyLossResult res;
    res.grad.assign(net.spec.param_count(), 0.0);

    MlpWorkspace ws, ws_old;
    std::vector<bool> clamped;
    std::vector<double> d_mu_t(k), d_ls_t(k), up_mu_t(k), up_ls_t(k);
    std::vector<double> up_mu(k), up_ls(k), pen_mu(k), pen_ls(k);

    double objective = 0.0;
    double penalty_sum = 0.0;
    double sum_rho = 0.0, sum_rho2 = 0.0;

    for (std::size_t t = 0; t < n; ++t) {
        const Transition& tr = batch[t];
        const GaussParams p = policy_gauss(net, net.phi, tr.s, ws, &clamped);
        const GaussParams p_old = policy_gauss(net, net.old_phi, tr.s, ws_old);

        const KlParts pre_kl = kl_decomposed(p, p_old);
        res.mean_d_mean += pre_kl.mean_part;
        res.mean_d_cov += pre_kl.cov_part;

        const ProjectedGauss proj = project(p, p_old, bounds);
        const double logp = log_prob_grad(proj.params, tr.a, d_mu_t, d_ls_t);
        const double logb = hyper.assume_on_policy ? logp : tr.logp_b;
        // Gradient flows through the ratio up to and including the truncation
        // level; only strictly clamped samples are flat. Exactly on-policy
        // samples (ratio 1 at eps_rho 1) therefore keep their gradient.
        const double log_ratio = logp - logb;
        const bool trunc = log_ratio > std::log(hyper.eps_rho);
        const double rho = trunc ? hyper.eps_rho : std::exp(log_ratio);
        res.frac_clamped += trunc ? 1.0 : 0.0;
        sum_rho += rho;
        sum_rho2 += rho * rho;

        objective += rho * adv[t];
        if (!trunc) {
            // d(rho A)/d(tilde params) = A rho dlogp/d(tilde params)
            const double c = adv[t] * rho;
            for (int i = 0; i < k; ++i) {
                up_mu_t[i] = c * d_mu_t[i];
                up_ls_t[i] = c * d_ls_t[i];
            }
        } else {
            std::fill(up_mu_t.begin(), up_mu_t.end(), 0.0);
            std::fill(up_ls_t.begin(), up_ls_t.end(), 0.0);
        }
        project_backward(p, p_old, bounds, proj, up_mu_t, up_ls_t, up_mu, up_ls);

        penalty_sum += trust_region_penalty_grad(p, proj, pen_mu, pen_ls);

        // loss = -(1/K) sum rho A + alpha (1/K) sum d(pi, pi_proj)
        for (int i = 0; i < k; ++i) {
            up_mu[i] = inv_k * (-up_mu[i] + hyper.alpha * pen_mu[i]);
            up_ls[i] = inv_k * (-up_ls[i] + hyper.alpha * pen_ls[i]);
        }
        backprop_head(net, ws, clamped, up_mu, up_ls, res.grad);
    }

    res.loss = inv_k * (-objective + hyper.alpha * penalty_sum);
    res.penalty = inv_k * penalty_sum;
    res.mean_ratio = inv_k * sum_rho;
    res.frac_clamped *= inv_k;
    res.mean_d_mean *= inv_k;
    res.mean_d_cov *= inv_k;
    res.ess = sum_rho2 > 0.0 ? sum_rho * sum_rho / sum_rho2 : 0.0;
    return res;
}

PolicyLossResult ppo_clip_loss_and_grad(const PolicyNet& net,
                                        std::span<const Transition> batch,
                                        std::span<const double> adv,
                                        const PolicyHyper& hyper) {
    if (batch.empty()) throw std::invalid_argument("policy loss: empty batch");
    if (adv.size() != batch.size()) throw std::invalid_argument("policy loss: adv size mismatch");
    const std::size_t n = batch.size();
    const double inv_k = 1.0 / static_cast<double>(n);
    const int k = net.action_dim;

    PolicyLossResult res;
    res.grad.assign(net.spec.param_count(), 0.0);

    MlpWorkspace ws;
    std::vector<bool> clamped;
    std::vector<double> d_mu(k), d_ls(k), up_mu(k), up_ls(k);

    double objective = 0.0;
    double sum_rho = 0.0, sum_rho2 = 0.0;

    for (std::size_t t = 0; t < n; ++t) {
        const Transition& tr = batch[t];
        const GaussParams p = policy_gauss(net, net.phi, tr.s, ws, &clamped);
        const double logp = log_prob_grad(p, tr.a, d_mu, d_ls);
        const double logb = hyper.assume_on_policy ? logp : tr.logp_b;
        const double rho = std::exp(std::min(logp - logb, 50.0));
        const double rho_clip = std::clamp(rho, 1.0 - hyper.clip, 1.0 + hyper.clip);
        sum_rho += std::min(rho, 1.0 + hyper.clip);
        sum_rho2 += std::min(rho, 1.0 + hyper.clip) * std::min(rho, 1.0 + hyper.clip);
        res.frac_clamped += rho != rho_clip ? 1.0 : 0.0;

        const double unclipped = rho * adv[t];
        const double clipped = rho_clip * adv[t];
        objective += std::min(unclipped, clipped);

        // The pessimistic min only passes gradient through the unclipped
        // branch; the clipped branch is flat in phi wherever it is active.
        const double c = unclipped <= clipped ? adv[t] * rho : 0.0;
        for (int i = 0; i < k; ++i) {
            up_mu[i] = -inv_k * c * d_mu[i];
            up_ls[i] = -inv_k * c * d_ls[i];
        }
        backprop_head(net, ws, clamped, up_mu, up_ls, res.grad);
    }

    res.loss = -inv_k * objective;
    res.mean_ratio = inv_k * sum_rho;
    res.frac_clamped *= inv_k;
    res.ess = sum_rho2 > 0.0 ? sum_rho * sum_rho / sum_rho2 : 0.0;
    return res;
}

void snapshot_old_policy(PolicyNet& net) { net.old_phi = net.phi; }

}  // namespace vlearn
