#pragma once

#include <span>

#include "vlearn/gaussian.hpp"

namespace vlearn {

struct TrustRegionBounds {
    double eps_mu = 0.1;        // mean bound
    double eps_sigma = 0.0005;  // covariance bound

    void validate() const;
};

struct ProjectedGauss {
    GaussParams params;
    bool was_mean_projected = false;
    bool was_cov_projected = false;
    // Interpolation coefficient toward the old covariance; 0 when the
    // covariance constraint was already satisfied.
    double eta_cov = 0.0;
};

// Projects (mean, covariance) independently onto the KL-decomposed trust
// region around p_old. The mean moves along the segment toward mean_old by
// the closed-form factor sqrt(eps_mu / d_mean); the covariance interpolates
// toward Sigma_old with the coefficient found by bisection on the constraint
// residual.
ProjectedGauss project(const GaussParams& p, const GaussParams& p_old,
                       const TrustRegionBounds& bounds);

// Gradient of <upstream, (mean_proj, log_std_proj)> w.r.t. the unprojected
// (mean, log_std). The mean branch is differentiated exactly through the
// closed form; the covariance branch treats eta as locally constant.
// `proj` must come from project() on the same inputs.
void project_backward(const GaussParams& p, const GaussParams& p_old,
                      const TrustRegionBounds& bounds, const ProjectedGauss& proj,
                      std::span<const double> upstream_mu,
                      std::span<const double> upstream_log_std,
                      std::span<double> grad_mu, std::span<double> grad_log_std);

// d(pi, pi_proj) = d_mean(mean, mean_proj | Sigma_proj) + d_cov(Sigma, Sigma_proj).
// Zero when no projection occurred. The caller scales by the loss weight.
double trust_region_penalty(const GaussParams& p, const ProjectedGauss& proj);

// Penalty value plus its gradient w.r.t. (mean, log_std) of p, with the
// projected distribution held fixed.
double trust_region_penalty_grad(const GaussParams& p, const ProjectedGauss& proj,
                                 std::span<double> grad_mu, std::span<double> grad_log_std);

}  // namespace vlearn
