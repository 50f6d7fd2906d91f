#pragma once

#include <span>
#include <vector>

#include "vlearn/rng.hpp"

namespace vlearn {

inline constexpr double kLogStdMin = -10.0;
inline constexpr double kLogStdMax = 2.0;
// Stored buffer actions are pulled back through atanh; clamp keeps the
// inverse finite after serialization rounding.
inline constexpr double kAtanhClamp = 1.0 - 1e-6;

// Per-state diagonal Gaussian before tanh squashing. log_std is clamped to
// [kLogStdMin, kLogStdMax] at construction.
struct GaussParams {
    std::vector<double> mean;
    std::vector<double> log_std;

    GaussParams() = default;
    GaussParams(std::vector<double> mu, std::vector<double> ls);

    std::size_t dim() const { return mean.size(); }
    double std_dev(std::size_t i) const;
    double var(std::size_t i) const;
};

// Builds GaussParams from a network head output laid out as
// [mean; log_std] and reports which log_std entries hit the clamp (their
// gradient is zero).
GaussParams gauss_from_head(std::span<const double> head, std::vector<bool>* clamped = nullptr);

struct SquashedAction {
    std::vector<double> u;  // pre-squash Gaussian draw
    std::vector<double> a;  // tanh(u), elementwise in (-1, 1)
    double log_prob = 0.0;
};

SquashedAction sample(const GaussParams& p, RngStream& rng);

// log N(atanh(a); mean, diag(exp(2 log_std))) minus the tanh Jacobian
// correction, evaluated with the stable identity
//   log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u)).
// Throws std::domain_error when |a_i| >= 1.
double log_prob(const GaussParams& p, std::span<const double> a);

// Same value plus its gradient w.r.t. (mean, log_std); the Jacobian term does
// not depend on the parameters so only the Gaussian part contributes.
double log_prob_grad(const GaussParams& p, std::span<const double> a,
                     std::span<double> d_mean, std::span<double> d_log_std);

// KL(N(mean,Sigma) || N(mean_old,Sigma_old)) split into its mean part
// (Mahalanobis distance under Sigma_old) and covariance part. Both are
// non-negative and sum to the full Gaussian KL.
struct KlParts {
    double mean_part = 0.0;
    double cov_part = 0.0;
    double total() const { return mean_part + cov_part; }
};

KlParts kl_decomposed(const GaussParams& p, const GaussParams& p_old);

// Entropy of the pre-squash Gaussian.
double entropy(const GaussParams& p);

double atanh_clamped(double a);
double tanh_log_jacobian(double u);  // log(1 - tanh(u)^2), stable for large |u|

}  // namespace vlearn
