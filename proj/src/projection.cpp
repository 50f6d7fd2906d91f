#include "vlearn/projection.hpp"

#include <cmath>
#include <stdexcept>

namespace vlearn {

void TrustRegionBounds::validate() const {
    if (!(eps_mu > 0.0) || !(eps_sigma > 0.0)) {
        throw std::invalid_argument("TrustRegionBounds: bounds must be positive");
    }
}

namespace {

double cov_part_interpolated(const GaussParams& p, const GaussParams& p_old, double eta) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.dim(); ++i) {
        const double var_old = p_old.var(i);
        const double var_mix = (1.0 - eta) * p.var(i) + eta * var_old;
        const double ratio = var_mix / var_old;
        acc += ratio - 1.0 - std::log(ratio);
    }
    return 0.5 * acc;
}

}  // namespace

ProjectedGauss project(const GaussParams& p, const GaussParams& p_old,
                       const TrustRegionBounds& bounds) {
    bounds.validate();
    const KlParts kl = kl_decomposed(p, p_old);
    ProjectedGauss out;
    out.params = p;

    if (kl.mean_part > bounds.eps_mu) {
        const double t = std::sqrt(bounds.eps_mu / kl.mean_part);
        for (std::size_t i = 0; i < p.dim(); ++i) {
            out.params.mean[i] = p_old.mean[i] + t * (p.mean[i] - p_old.mean[i]);
        }
        out.was_mean_projected = true;
    }

    if (kl.cov_part > bounds.eps_sigma) {
        // g(eta) = d_cov(mix(eta), Sigma_old) - eps is positive at 0 and
        // equals -eps at 1, so the root is always bracketed. The result is
        // taken from the feasible side (g <= 0), which makes reprojection an
        // exact identity.
        double lo = 0.0, hi = 1.0;
        for (int iter = 0; iter < 50; ++iter) {
            const double mid = 0.5 * (lo + hi);
            const double g = cov_part_interpolated(p, p_old, mid) - bounds.eps_sigma;
            if (g <= 0.0 && g > -1e-12) {
                hi = mid;
                break;
            }
            if (g > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        const double eta = hi;
        out.eta_cov = eta;
        for (std::size_t i = 0; i < p.dim(); ++i) {
            const double var_mix = (1.0 - eta) * p.var(i) + eta * p_old.var(i);
            out.params.log_std[i] = 0.5 * std::log(var_mix);
        }
        out.was_cov_projected = true;
    }

    return out;
}

void project_backward(const GaussParams& p, const GaussParams& p_old,
                      const TrustRegionBounds& bounds, const ProjectedGauss& proj,
                      std::span<const double> upstream_mu,
                      std::span<const double> upstream_log_std,
                      std::span<double> grad_mu, std::span<double> grad_log_std) {
    const std::size_t k = p.dim();

    if (!proj.was_mean_projected) {
        for (std::size_t i = 0; i < k; ++i) grad_mu[i] = upstream_mu[i];
    } else {
        double d_mean = 0.0;
        double up_dot_delta = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double delta = p.mean[i] - p_old.mean[i];
            d_mean += delta * delta / p_old.var(i);
            up_dot_delta += upstream_mu[i] * delta;
        }
        d_mean *= 0.5;
        const double t = std::sqrt(bounds.eps_mu / d_mean);
        // mean_proj_j = mean_old_j + t(delta_j), with t depending on all of mu.
        const double t_factor = -t / (2.0 * d_mean);
        for (std::size_t i = 0; i < k; ++i) {
            const double delta = p.mean[i] - p_old.mean[i];
            grad_mu[i] = t * upstream_mu[i] + up_dot_delta * t_factor * delta / p_old.var(i);
        }
    }

    if (!proj.was_cov_projected) {
        for (std::size_t i = 0; i < k; ++i) grad_log_std[i] = upstream_log_std[i];
    } else {
        const double eta = proj.eta_cov;
        for (std::size_t i = 0; i < k; ++i) {
            const double var = p.var(i);
            const double var_mix = (1.0 - eta) * var + eta * p_old.var(i);
            grad_log_std[i] = upstream_log_std[i] * (1.0 - eta) * var / var_mix;
        }
    }
}

double trust_region_penalty(const GaussParams& p, const ProjectedGauss& proj) {
    if (!proj.was_mean_projected && !proj.was_cov_projected) return 0.0;
    return kl_decomposed(p, proj.params).total();
}

double trust_region_penalty_grad(const GaussParams& p, const ProjectedGauss& proj,
                                 std::span<double> grad_mu, std::span<double> grad_log_std) {
    const std::size_t k = p.dim();
    if (!proj.was_mean_projected && !proj.was_cov_projected) {
        for (std::size_t i = 0; i < k; ++i) {
            grad_mu[i] = 0.0;
            grad_log_std[i] = 0.0;
        }
        return 0.0;
    }
    for (std::size_t i = 0; i < k; ++i) {
        const double var_proj = proj.params.var(i);
        grad_mu[i] = (p.mean[i] - proj.params.mean[i]) / var_proj;
        grad_log_std[i] = p.var(i) / var_proj - 1.0;
    }
    return kl_decomposed(p, proj.params).total();
}

}  // namespace vlearn
