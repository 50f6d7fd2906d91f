#include "vlearn/critic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vlearn {

CriticLossKind critic_loss_from_string(const std::string& s) {
    if (s == "wis") return CriticLossKind::wis;
    if (s == "vtrace1") return CriticLossKind::vtrace1;
    if (s == "base_naive") return CriticLossKind::base_naive;
    if (s == "no_is") return CriticLossKind::no_is;
    throw std::invalid_argument("unknown critic loss: " + s);
}

std::string to_string(CriticLossKind k) {
    switch (k) {
        case CriticLossKind::wis: return "wis";
        case CriticLossKind::vtrace1: return "vtrace1";
        case CriticLossKind::base_naive: return "base_naive";
        case CriticLossKind::no_is: return "no_is";
    }
    return "?";
}

void CriticHyper::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in [0,1)");
    if (!(eps_rho > 0.0)) throw std::invalid_argument("eps_rho must be positive");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in (0,1]");
}

CriticPair CriticPair::init(const MlpSpec& spec, uint64_t seed, bool twin) {
    if (spec.output_dim != 1) {
        throw std::invalid_argument("CriticPair: critic output must be scalar");
    }
    CriticPair pair;
    pair.spec = spec;
    pair.twin = twin;
    for (int i = 0; i < pair.count(); ++i) {
        pair.online[i] = init_params(spec, seed + 0x9e37ULL * static_cast<uint64_t>(i + 1));
        pair.target[i] = pair.online[i];
    }
    return pair;
}

double truncated_ratio(double logp_pi, double logp_b, double eps_rho) {
    const double log_ratio = logp_pi - logp_b;
    const double log_eps = std::log(eps_rho);
    if (log_ratio >= log_eps) return eps_rho;
    return std::exp(log_ratio);
}

namespace {

enum class LossForm { wis, vtrace, base };

CriticLossResult loss_and_grad_impl(LossForm form, const CriticPair& pair,
                                    std::span<const Transition> batch,
                                    std::span<const double> ratios,
                                    const CriticHyper& hyper, bool force_unit_ratio) {
    if (batch.empty()) throw std::invalid_argument("critic loss: empty batch");
    if (!force_unit_ratio && ratios.size() != batch.size()) {
        throw std::invalid_argument("critic loss: ratio/batch size mismatch");
    }
    const double inv_k = 1.0 / static_cast<double>(batch.size());

    CriticLossResult res;
    MlpWorkspace ws;
    for (int i = 0; i < pair.count(); ++i) {
        res.grads[i].assign(pair.spec.param_count(), 0.0);
        double loss_i = 0.0;
        for (std::size_t t = 0; t < batch.size(); ++t) {
            const Transition& tr = batch[t];
            const double rho = force_unit_ratio ? 1.0 : ratios[t];

            forward(pair.spec, pair.online[i], tr.s, ws);
            const double v = ws.output()[0];

            const double v_next = tr.done ? 0.0 : forward(pair.spec, pair.target[i], tr.s_next)[0];
            const double vbar = tr.r + hyper.gamma * v_next;

            double resid;       // d(sample loss)/dv = weight * 2 * resid
            double weight;      // multiplier on the squared residual
            switch (form) {
                case LossForm::wis:
                    resid = v - vbar;
                    weight = rho;
                    break;
                case LossForm::vtrace: {
                    const double v_tgt_s = forward(pair.spec, pair.target[i], tr.s)[0];
                    resid = v - vtrace_sample_target(rho, v_tgt_s, vbar);
                    weight = 1.0;
                    break;
                }
                case LossForm::base:
                    resid = v - rho * vbar;
                    weight = 1.0;
                    break;
            }
            loss_i += weight * resid * resid;

            const double upstream[1] = {inv_k * 2.0 * weight * resid};
            backward(pair.spec, pair.online[i], ws, upstream, &res.grads[i], nullptr);
        }
        res.loss += inv_k * loss_i;
    }
    return res;
}

}  // namespace

CriticLossResult wis_loss_and_grad(const CriticPair& pair, std::span<const Transition> batch,
                                   std::span<const double> ratios, const CriticHyper& hyper) {
    return loss_and_grad_impl(LossForm::wis, pair, batch, ratios, hyper, false);
}

CriticLossResult vtrace1_loss_and_grad(const CriticPair& pair, std::span<const Transition> batch,
                                       std::span<const double> ratios, const CriticHyper& hyper) {
    return loss_and_grad_impl(LossForm::vtrace, pair, batch, ratios, hyper, false);
}

CriticLossResult base_loss_and_grad(const CriticPair& pair, std::span<const Transition> batch,
                                    std::span<const double> ratios, const CriticHyper& hyper) {
    return loss_and_grad_impl(LossForm::base, pair, batch, ratios, hyper, false);
}

CriticLossResult critic_loss_and_grad(CriticLossKind kind, const CriticPair& pair,
                                      std::span<const Transition> batch,
                                      std::span<const double> ratios,
                                      const CriticHyper& hyper) {
    switch (kind) {
        case CriticLossKind::wis: return wis_loss_and_grad(pair, batch, ratios, hyper);
        case CriticLossKind::vtrace1: return vtrace1_loss_and_grad(pair, batch, ratios, hyper);
        case CriticLossKind::base_naive: return base_loss_and_grad(pair, batch, ratios, hyper);
        case CriticLossKind::no_is:
            return loss_and_grad_impl(LossForm::wis, pair, batch, ratios, hyper, true);
    }
    throw std::logic_error("unreachable critic loss kind");
}

void polyak_update(CriticPair& pair, double tau) {
    for (int i = 0; i < pair.count(); ++i) {
        for (std::size_t j = 0; j < pair.online[i].size(); ++j) {
            pair.target[i][j] = tau * pair.online[i][j] + (1.0 - tau) * pair.target[i][j];
        }
    }
}

double value_min(const CriticPair& pair, std::span<const double> s) {
    double v = forward(pair.spec, pair.online[0], s)[0];
    if (pair.twin) v = std::min(v, forward(pair.spec, pair.online[1], s)[0]);
    return v;
}

}  // namespace vlearn
