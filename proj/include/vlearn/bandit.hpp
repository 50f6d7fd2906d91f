#pragma once

#include <span>
#include <string>
#include <vector>

#include "vlearn/rng.hpp"

namespace vlearn {

// One bandit draw: importance weight rho = pi(a)/pi_b(a) and its reward.
struct WeightedSample {
    double rho = 0.0;
    double reward = 0.0;
};

// (sum rho_i r_i) / N -- ordinary importance sampling.
double estimate_base(std::span<const WeightedSample> samples);
// (sum rho_i r_i) / (sum rho_i) -- self-normalized.
double estimate_wis(std::span<const WeightedSample> samples);
// (sum rho_i^2 r_i) / (sum rho_i^2) -- the squared self-normalized form the
// 1-step V-trace loss optimizes toward.
double estimate_vtrace(std::span<const WeightedSample> samples);

// Effective sample size (sum w)^2 / sum w^2 with w = rho (squared=false) or
// w = rho^2 (squared=true).
double ess(std::span<const double> rhos, bool squared);

enum class RewardKind { quadratic, linear };

// Reward families with closed-form Gaussian expectations, so study bias can
// be measured against an exact oracle.
struct RewardFn {
    RewardKind kind = RewardKind::quadratic;
    double a_star = 0.0;  // quadratic center
    double scale = 1.0;   // quadratic scale
    double slope = 1.0;   // linear slope

    double operator()(double a) const;
    // E_{a ~ N(mean, std^2)}[r(a)]
    double expectation(double mean, double std_dev) const;
};

struct BanditStudyConfig {
    int n = 32;            // samples per trial
    int trials = 100000;   // Monte-Carlo repetitions
    double behavior_mean = 0.0;
    double behavior_std = 1.0;
    double target_mean = 0.5;
    double target_std = 1.0;
    RewardFn reward;
    uint64_t seed = 0;

    void validate() const;
};

struct EstimatorStats {
    std::string estimator;
    double mean = 0.0;
    double variance = 0.0;
    double bias = 0.0;
    double ess_mean = 0.0;
};

struct StudyReport {
    double true_value = 0.0;
    int n = 0;
    int trials = 0;
    std::vector<EstimatorStats> rows;  // base, wis, vtrace

    std::string to_json() const;
    std::string to_csv() const;
};

// Monte-Carlo comparison of the three estimators under the configured
// behavior/target pair. Deterministic per seed; accumulation is one-pass
// Welford so trials can stream.
StudyReport run_variance_study(const BanditStudyConfig& cfg);

}  // namespace vlearn
