#include "vlearn/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vlearn {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLog2 = 0.6931471805599453094;

double softplus(double x) {
    // log(1 + e^x) without overflow.
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}
}  // namespace

GaussParams::GaussParams(std::vector<double> mu, std::vector<double> ls)
    : mean(std::move(mu)), log_std(std::move(ls)) {
    if (mean.size() != log_std.size()) {
        throw std::invalid_argument("GaussParams: mean/log_std size mismatch");
    }
    for (auto& v : log_std) v = std::clamp(v, kLogStdMin, kLogStdMax);
}

double GaussParams::std_dev(std::size_t i) const { return std::exp(log_std[i]); }
double GaussParams::var(std::size_t i) const { return std::exp(2.0 * log_std[i]); }

GaussParams gauss_from_head(std::span<const double> head, std::vector<bool>* clamped) {
    const std::size_t k = head.size() / 2;
    if (head.size() != 2 * k || k == 0) {
        throw std::invalid_argument("gauss_from_head: head size must be 2 * action_dim");
    }
    std::vector<double> mu(head.begin(), head.begin() + k);
    std::vector<double> ls(head.begin() + k, head.end());
    if (clamped) {
        clamped->assign(k, false);
        for (std::size_t i = 0; i < k; ++i) {
            (*clamped)[i] = ls[i] <= kLogStdMin || ls[i] >= kLogStdMax;
        }
    }
    return GaussParams(std::move(mu), std::move(ls));
}

double atanh_clamped(double a) {
    return std::atanh(std::clamp(a, -kAtanhClamp, kAtanhClamp));
}

double tanh_log_jacobian(double u) {
    return 2.0 * (kLog2 - u - softplus(-2.0 * u));
}

SquashedAction sample(const GaussParams& p, RngStream& rng) {
    const std::size_t k = p.dim();
    SquashedAction out;
    out.u.resize(k);
    out.a.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double z = rng.normal();
        const double draw = p.mean[i] + p.std_dev(i) * z;
        // Saturated draws are clamped to the invertible range so the stored
        // action always evaluates through the same atanh path as log_prob.
        out.a[i] = std::clamp(std::tanh(draw), -kAtanhClamp, kAtanhClamp);
        out.u[i] = atanh_clamped(out.a[i]);
    }
    out.log_prob = log_prob(p, out.a);
    return out;
}

double log_prob(const GaussParams& p, std::span<const double> a) {
    return log_prob_grad(p, a, {}, {});
}

double log_prob_grad(const GaussParams& p, std::span<const double> a,
                     std::span<double> d_mean, std::span<double> d_log_std) {
    const std::size_t k = p.dim();
    if (a.size() != k) {
        throw std::invalid_argument("log_prob: action dimension mismatch");
    }
    double lp = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (std::abs(a[i]) >= 1.0) {
            throw std::domain_error("log_prob: squashed action must satisfy |a| < 1");
        }
        const double u = atanh_clamped(a[i]);
        const double s = p.std_dev(i);
        const double z = (u - p.mean[i]) / s;
        lp += -0.5 * kLog2Pi - p.log_std[i] - 0.5 * z * z;
        lp -= tanh_log_jacobian(u);
        if (!d_mean.empty()) d_mean[i] = z / s;
        if (!d_log_std.empty()) d_log_std[i] = z * z - 1.0;
    }
    return lp;
}

KlParts kl_decomposed(const GaussParams& p, const GaussParams& p_old) {
    const std::size_t k = p.dim();
    if (p_old.dim() != k) {
        throw std::invalid_argument("kl_decomposed: dimension mismatch");
    }
    KlParts parts;
    for (std::size_t i = 0; i < k; ++i) {
        const double dm = p.mean[i] - p_old.mean[i];
        const double var_old = p_old.var(i);
        parts.mean_part += dm * dm / var_old;
        const double ratio = p.var(i) / var_old;
        parts.cov_part += ratio - 1.0 - std::log(ratio);
    }
    parts.mean_part *= 0.5;
    parts.cov_part *= 0.5;
    return parts;
}

double entropy(const GaussParams& p) {
    double h = 0.0;
    for (std::size_t i = 0; i < p.dim(); ++i) {
        h += 0.5 * (kLog2Pi + 1.0) + p.log_std[i];
    }
    return h;
}

}  // namespace vlearn
