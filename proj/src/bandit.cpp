#include "vlearn/bandit.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vlearn {

double estimate_base(std::span<const WeightedSample> samples) {
    if (samples.empty()) throw std::invalid_argument("estimate_base: empty sample list");
    double acc = 0.0;
    for (const auto& s : samples) acc += s.rho * s.reward;
    return acc / static_cast<double>(samples.size());
}

double estimate_wis(std::span<const WeightedSample> samples) {
    if (samples.empty()) throw std::invalid_argument("estimate_wis: empty sample list");
    double num = 0.0, den = 0.0;
    for (const auto& s : samples) {
        num += s.rho * s.reward;
        den += s.rho;
    }
    if (!(den > 0.0)) throw std::domain_error("estimate_wis: degenerate weights (sum rho = 0)");
    return num / den;
}

double estimate_vtrace(std::span<const WeightedSample> samples) {
    if (samples.empty()) throw std::invalid_argument("estimate_vtrace: empty sample list");
    double num = 0.0, den = 0.0;
    for (const auto& s : samples) {
        num += s.rho * s.rho * s.reward;
        den += s.rho * s.rho;
    }
    if (!(den > 0.0)) throw std::domain_error("estimate_vtrace: degenerate weights (sum rho^2 = 0)");
    return num / den;
}

double ess(std::span<const double> rhos, bool squared) {
    double sum_w = 0.0, sum_w2 = 0.0;
    for (double rho : rhos) {
        const double w = squared ? rho * rho : rho;
        sum_w += w;
        sum_w2 += w * w;
    }
    if (!(sum_w > 0.0)) throw std::domain_error("ess: all weights zero");
    return sum_w * sum_w / sum_w2;
}

double RewardFn::operator()(double a) const {
    if (kind == RewardKind::quadratic) {
        return -scale * (a - a_star) * (a - a_star);
    }
    return slope * a;
}

double RewardFn::expectation(double mean, double std_dev) const {
    if (kind == RewardKind::quadratic) {
        const double d = mean - a_star;
        return -scale * (d * d + std_dev * std_dev);
    }
    return slope * mean;
}

void BanditStudyConfig::validate() const {
    if (n < 1 || trials < 1) throw std::invalid_argument("bandit study: n and trials must be >= 1");
    if (!(behavior_std > 0.0) || !(target_std > 0.0)) {
        throw std::invalid_argument("bandit study: standard deviations must be positive");
    }
}

namespace {

double normal_logpdf(double x, double mean, double std_dev) {
    const double z = (x - mean) / std_dev;
    return -0.9189385332046727 - std::log(std_dev) - 0.5 * z * z;
}

struct Welford {
    long long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    double variance() const { return count > 1 ? m2 / static_cast<double>(count) : 0.0; }
};

}  // namespace

StudyReport run_variance_study(const BanditStudyConfig& cfg) {
    cfg.validate();
    RngStream rng(cfg.seed, 0xba5d17ULL);

    Welford w_base, w_wis, w_vtrace, w_ess_rho, w_ess_rho2;
    std::vector<WeightedSample> samples(cfg.n);
    std::vector<double> rhos(cfg.n);

    for (int trial = 0; trial < cfg.trials; ++trial) {
        for (int i = 0; i < cfg.n; ++i) {
            const double a = cfg.behavior_mean + cfg.behavior_std * rng.normal();
            const double rho = std::exp(normal_logpdf(a, cfg.target_mean, cfg.target_std) -
                                        normal_logpdf(a, cfg.behavior_mean, cfg.behavior_std));
            samples[i] = {rho, cfg.reward(a)};
            rhos[i] = rho;
        }
        w_base.add(estimate_base(samples));
        w_wis.add(estimate_wis(samples));
        w_vtrace.add(estimate_vtrace(samples));
        w_ess_rho.add(ess(rhos, false));
        w_ess_rho2.add(ess(rhos, true));
    }

    StudyReport rep;
    rep.true_value = cfg.reward.expectation(cfg.target_mean, cfg.target_std);
    rep.n = cfg.n;
    rep.trials = cfg.trials;
    rep.rows = {
        {"base", w_base.mean, w_base.variance(), w_base.mean - rep.true_value,
         static_cast<double>(cfg.n)},
        {"wis", w_wis.mean, w_wis.variance(), w_wis.mean - rep.true_value, w_ess_rho.mean},
        {"vtrace", w_vtrace.mean, w_vtrace.variance(), w_vtrace.mean - rep.true_value,
         w_ess_rho2.mean},
    };
    return rep;
}

std::string StudyReport::to_json() const {
    nlohmann::json j;
    j["true_value"] = true_value;
    j["n"] = n;
    j["trials"] = trials;
    j["estimators"] = nlohmann::json::array();
    for (const auto& r : rows) {
        j["estimators"].push_back({{"estimator", r.estimator},
                                   {"mean", r.mean},
                                   {"variance", r.variance},
                                   {"bias", r.bias},
                                   {"ess_mean", r.ess_mean}});
    }
    return j.dump(2);
}

std::string StudyReport::to_csv() const {
    std::ostringstream os;
    os << "estimator,mean,variance,bias,ess_mean\n";
    os.precision(17);
    for (const auto& r : rows) {
        os << r.estimator << "," << r.mean << "," << r.variance << "," << r.bias << ","
           << r.ess_mean << "\n";
    }
    return os.str();
}

}  // namespace vlearn
