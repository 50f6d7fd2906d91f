#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "vlearn/bandit.hpp"

using namespace vlearn;

TEST_CASE("estimator hand values") {
    const std::vector<WeightedSample> two{{0.5, 1.0}, {2.0, 3.0}};
    CHECK(estimate_base(two) == doctest::Approx(3.25).epsilon(1e-15));
    CHECK(estimate_wis(two) == doctest::Approx(2.6).epsilon(1e-15));
    CHECK(estimate_vtrace(two) == doctest::Approx(12.25 / 4.25).epsilon(1e-15));

    const std::vector<WeightedSample> unit{{1.0, 0.2}, {1.0, 0.4}, {1.0, 0.9}};
    const double mean = (0.2 + 0.4 + 0.9) / 3.0;
    CHECK(estimate_base(unit) == doctest::Approx(mean).epsilon(1e-15));
    CHECK(estimate_wis(unit) == doctest::Approx(mean).epsilon(1e-15));
    CHECK(estimate_vtrace(unit) == doctest::Approx(mean).epsilon(1e-15));

    const std::vector<WeightedSample> single{{0.37, -1.4}};
    CHECK(estimate_wis(single) == doctest::Approx(-1.4).epsilon(1e-15));
    CHECK(estimate_vtrace(single) == doctest::Approx(-1.4).epsilon(1e-15));

    const std::vector<WeightedSample> zeros{{0.0, 1.0}, {0.0, 2.0}};
    CHECK(estimate_base(zeros) == 0.0);
    CHECK_THROWS_AS((void)estimate_wis(zeros), std::domain_error);
    CHECK_THROWS_AS((void)estimate_vtrace(zeros), std::domain_error);

    const std::vector<WeightedSample> empty;
    CHECK_THROWS_AS((void)estimate_base(empty), std::invalid_argument);
}

TEST_CASE("effective sample size values and ordering") {
    const std::vector<double> uniform{0.4, 0.4};
    CHECK(ess(uniform, false) == 2.0);
    CHECK(ess(uniform, true) == 2.0);

    const std::vector<double> skew{1.0, 3.0};
    CHECK(ess(skew, false) == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(ess(skew, true) == doctest::Approx(100.0 / 82.0).epsilon(1e-15));

    CHECK_THROWS_AS((void)ess(std::vector<double>{0.0, 0.0}, false), std::domain_error);

    RngStream rng(3, 0);
    for (int probe = 0; probe < 2000; ++probe) {
        const std::size_t n = 2 + rng.uniform_index(63);
        std::vector<double> w(n);
        for (auto& v : w) v = std::exp(rng.uniform(-3.0, 3.0));
        CHECK(ess(w, false) >= ess(w, true));
    }
}

TEST_CASE("estimator scale behavior under weight rescaling") {
    RngStream rng(5, 0);
    std::vector<WeightedSample> samples;
    for (int i = 0; i < 20; ++i) {
        samples.push_back({std::exp(rng.uniform(-1.0, 1.0)), rng.uniform(-2.0, 2.0)});
    }
    const double c = 3.7;
    std::vector<WeightedSample> scaled = samples;
    for (auto& s : scaled) s.rho *= c;

    CHECK(estimate_wis(scaled) == doctest::Approx(estimate_wis(samples)).epsilon(1e-12));
    CHECK(estimate_vtrace(scaled) == doctest::Approx(estimate_vtrace(samples)).epsilon(1e-12));
    CHECK(estimate_base(scaled) == doctest::Approx(c * estimate_base(samples)).epsilon(1e-12));
}

TEST_CASE("WIS stays inside the reward hull, base does not") {
    const std::vector<WeightedSample> samples{{10.0, 1.0}, {0.1, 2.0}};
    const double wis = estimate_wis(samples);
    CHECK(wis >= 1.0);
    CHECK(wis <= 2.0);
    CHECK(estimate_base(samples) > 2.0);  // (10*1 + 0.2)/2 = 5.1

    RngStream rng(9, 0);
    for (int probe = 0; probe < 500; ++probe) {
        std::vector<WeightedSample> s;
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < 8; ++i) {
            const double r = rng.uniform(-3.0, 3.0);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            s.push_back({std::exp(rng.uniform(-2.0, 2.0)), r});
        }
        const double v = estimate_wis(s);
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);
        const double vt = estimate_vtrace(s);
        CHECK(vt >= lo - 1e-12);
        CHECK(vt <= hi + 1e-12);
    }
}

TEST_CASE("variance study: on-policy degeneracy") {
    BanditStudyConfig cfg;
    cfg.n = 16;
    cfg.trials = 4000;
    cfg.behavior_mean = cfg.target_mean = 0.3;
    cfg.behavior_std = cfg.target_std = 1.1;
    cfg.reward = RewardFn{RewardKind::quadratic, -1.0, 1.0, 1.0};
    cfg.seed = 12;
    const StudyReport rep = run_variance_study(cfg);
    REQUIRE(rep.rows.size() == 3);
    // With target == behavior every weight is exactly 1, so the three
    // estimators coincide trial by trial.
    CHECK(rep.rows[0].variance == doctest::Approx(rep.rows[1].variance).epsilon(1e-12));
    CHECK(rep.rows[1].variance == doctest::Approx(rep.rows[2].variance).epsilon(1e-12));
    // And all are unbiased up to Monte-Carlo error (4 sigma).
    const double se = std::sqrt(rep.rows[0].variance / cfg.trials);
    for (const auto& row : rep.rows) {
        CHECK(std::abs(row.bias) < 4.0 * se);
    }
}

TEST_CASE("variance study: WIS bias vanishes with more samples") {
    BanditStudyConfig cfg;
    cfg.trials = 20000;
    cfg.behavior_mean = 0.0;
    cfg.behavior_std = 1.0;
    cfg.target_mean = 0.5;
    cfg.target_std = 1.0;
    cfg.reward = RewardFn{RewardKind::linear, 0.0, 1.0, 1.0};
    cfg.seed = 4;

    CHECK(cfg.reward.expectation(cfg.target_mean, cfg.target_std) == 0.5);

    cfg.n = 8;
    const double bias_small = std::abs(run_variance_study(cfg).rows[1].bias);
    cfg.n = 128;
    const double bias_large = std::abs(run_variance_study(cfg).rows[1].bias);
    CHECK(bias_large < bias_small);
    CHECK(bias_large < 0.01);
}

TEST_CASE("variance study: divergent policies order WIS below V-trace") {
    BanditStudyConfig cfg;
    cfg.n = 32;
    cfg.trials = 10000;
    cfg.behavior_mean = 0.0;
    cfg.behavior_std = 1.0;
    cfg.target_mean = 1.0;  // KL = 0.5
    cfg.target_std = 1.0;
    cfg.reward = RewardFn{RewardKind::quadratic, -1.0, 1.0, 1.0};
    cfg.seed = 21;
    const StudyReport rep = run_variance_study(cfg);
    CHECK(rep.rows[1].variance <= rep.rows[2].variance);  // wis <= vtrace
    CHECK(rep.rows[1].ess_mean >= rep.rows[2].ess_mean);  // matching ESS ordering
}

TEST_CASE("variance study determinism and report emission") {
    BanditStudyConfig cfg;
    cfg.n = 8;
    cfg.trials = 500;
    cfg.target_mean = 0.7;
    cfg.seed = 99;
    const StudyReport a = run_variance_study(cfg);
    const StudyReport b = run_variance_study(cfg);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].mean == b.rows[i].mean);
        CHECK(a.rows[i].variance == b.rows[i].variance);
    }
    CHECK(a.to_csv().find("estimator,mean,variance,bias,ess_mean") == 0);
    CHECK(a.to_json().find("\"true_value\"") != std::string::npos);
}
