#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "test_support.hpp"
#include "vlearn/critic.hpp"

using namespace vlearn;

namespace {

// Critic over a 1-D state that computes V(x) = x + c for x > -10; lets tests
// pin exact values at chosen states.
CriticPair linear_pair(double c1, double c2, bool twin = true) {
    MlpSpec spec{1, {1}, 1, Activation::relu, false};
    CriticPair pair = CriticPair::init(spec, 0, twin);
    const auto set_params = [&](ParamVector& p, double c) {
        p.assign(spec.param_count(), 0.0);
        p[0] = 1.0;    // hidden weight
        p[1] = 10.0;   // hidden bias keeps relu active
        p[2] = 1.0;    // output weight
        p[3] = c - 10.0;
    };
    set_params(pair.online[0], c1);
    pair.target[0] = pair.online[0];
    if (twin) {
        set_params(pair.online[1], c2);
        pair.target[1] = pair.online[1];
    }
    return pair;
}

// Constant critic V(x) = c with target value ct.
CriticPair const_pair(double c, double ct) {
    MlpSpec spec{1, {1}, 1, Activation::relu, false};
    CriticPair pair = CriticPair::init(spec, 0, true);
    for (int i = 0; i < 2; ++i) {
        pair.online[i].assign(spec.param_count(), 0.0);
        pair.online[i][3] = c;
        pair.target[i].assign(spec.param_count(), 0.0);
        pair.target[i][3] = ct;
    }
    return pair;
}

Transition simple_transition(double r, bool done = false) {
    Transition t;
    t.s = {0.2};
    t.a = {0.0};
    t.r = r;
    t.s_next = {0.4};
    t.done = done;
    t.logp_b = 0.0;
    return t;
}

}  // namespace

TEST_CASE("truncated ratio clamps in log space") {
    CHECK(truncated_ratio(-1.3, -1.3, 1.0) == 1.0);
    CHECK(truncated_ratio(std::log(5.0), 0.0, 1.0) == 1.0);
    CHECK(truncated_ratio(1000.0, 0.0, 1.0) == 1.0);      // no overflow
    CHECK(truncated_ratio(1000.0, 0.0, 20.0) == 20.0);
    CHECK(truncated_ratio(std::log(0.25), 0.0, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("loss-geometry scenario: target critic -6, Bellman target 4") {
    // Online critic predicts -6 (equal to the target critic), Bellman target
    // r + gamma Vbar(s') = 4.
    const double gamma = 0.99;
    CriticPair pair = const_pair(-6.0, -6.0);
    CriticHyper hyper;
    hyper.gamma = gamma;
    const double r = 4.0 + gamma * 6.0;
    const std::vector<Transition> batch{simple_transition(r)};

    SUBCASE("on-policy: WIS loss 100 with dLoss/dV = -20") {
        const std::vector<double> rho{1.0};
        const auto res = wis_loss_and_grad(pair, batch, rho, hyper);
        CHECK(res.loss == doctest::Approx(200.0).epsilon(1e-12));  // summed over twins
        // Output bias is the V knob: dloss/dV = 2 (V - Vbar) = -20.
        CHECK(res.grads[0][3] == doctest::Approx(-20.0).epsilon(1e-12));
        CHECK(res.grads[1][3] == doctest::Approx(-20.0).epsilon(1e-12));

        const auto vt = vtrace1_loss_and_grad(pair, batch, rho, hyper);
        const auto base = base_loss_and_grad(pair, batch, rho, hyper);
        CHECK(vt.loss == doctest::Approx(res.loss).epsilon(1e-12));
        CHECK(base.loss == doctest::Approx(res.loss).epsilon(1e-12));
    }

    SUBCASE("zero ratio annihilates the WIS loss") {
        const std::vector<double> rho{0.0};
        const auto res = wis_loss_and_grad(pair, batch, rho, hyper);
        CHECK(res.loss == 0.0);
        for (double g : res.grads[0]) CHECK(g == 0.0);
    }

    SUBCASE("zero ratio drives the V-trace optimum to the target critic") {
        const std::vector<double> rho{0.0};
        // At V = -6 the V-trace loss is already minimal.
        const auto at_min = vtrace1_loss_and_grad(pair, batch, rho, hyper);
        CHECK(at_min.loss == doctest::Approx(0.0));
        // Move the online critic away: loss becomes (V - (-6))^2.
        CriticPair moved = const_pair(2.0, -6.0);
        const auto away = vtrace1_loss_and_grad(moved, batch, rho, hyper);
        CHECK(away.loss == doctest::Approx(2.0 * 64.0).epsilon(1e-12));
    }

    SUBCASE("interpolated V-trace target at rho = 0.5") {
        const std::vector<double> rho{0.5};
        // Optimal value is -1; check the loss vanishes there.
        CriticPair at_interp = const_pair(-1.0, -6.0);
        const auto res = vtrace1_loss_and_grad(at_interp, batch, rho, hyper);
        CHECK(res.loss == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("base loss optimum collapses toward zero for small ratios") {
        const std::vector<double> rho{0.0};
        CriticPair at_zero = const_pair(0.0, -6.0);
        const auto res = base_loss_and_grad(at_zero, batch, rho, hyper);
        CHECK(res.loss == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("per-sample loss cores reproduce the published geometry") {
    const double vbar = 4.0, v_tgt = -6.0;
    for (double rho : {1.0, 0.5, 0.1, 0.01}) {
        // WIS minimizer at 4 for every positive rho.
        double best_v = 0.0, best = 1e300;
        for (double v = -10.0; v <= 10.0; v += 0.001) {
            const double l = wis_sample_loss(v, vbar, rho);
            if (l < best) {
                best = l;
                best_v = v;
            }
        }
        CHECK(best_v == doctest::Approx(4.0).epsilon(1e-3));

        // V-trace minimizer interpolates.
        best = 1e300;
        for (double v = -10.0; v <= 10.0; v += 0.001) {
            const double l = vtrace_sample_loss(v, v_tgt, vbar, rho);
            if (l < best) {
                best = l;
                best_v = v;
            }
        }
        CHECK(best_v == doctest::Approx((1.0 - rho) * v_tgt + rho * vbar).epsilon(1e-3));

        // Curvature by second differences: WIS scales with rho, V-trace does not.
        const double h = 1e-3;
        const auto curv = [&](auto&& f, double at) {
            return (f(at + h) - 2.0 * f(at) + f(at - h)) / (h * h);
        };
        const double wis_curv =
            curv([&](double v) { return wis_sample_loss(v, vbar, rho); }, 0.0);
        const double vt_curv =
            curv([&](double v) { return vtrace_sample_loss(v, v_tgt, vbar, rho); }, 0.0);
        CHECK(wis_curv == doctest::Approx(2.0 * rho).epsilon(1e-6));
        CHECK(vt_curv == doctest::Approx(2.0).epsilon(1e-6));
    }

    // rho = 1: identical losses pointwise.
    for (double v = -10.0; v <= 10.0; v += 0.25) {
        CHECK(wis_sample_loss(v, vbar, 1.0) ==
              doctest::Approx(vtrace_sample_loss(v, v_tgt, vbar, 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("on-policy coincidence of the three batch losses") {
    MlpSpec spec{2, {6, 5}, 1, Activation::tanh, false};
    CriticPair pair = CriticPair::init(spec, 3, true);
    CriticHyper hyper;
    RngStream rng(1, 0);
    std::vector<Transition> batch;
    for (int i = 0; i < 16; ++i) {
        Transition t;
        t.s = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        t.a = {0.1};
        t.r = rng.uniform(-1.0, 1.0);
        t.s_next = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        t.done = i % 5 == 0;
        t.logp_b = 0.0;
        batch.push_back(std::move(t));
    }
    const std::vector<double> ones(batch.size(), 1.0);
    const double wis = wis_loss_and_grad(pair, batch, ones, hyper).loss;
    const double vt = vtrace1_loss_and_grad(pair, batch, ones, hyper).loss;
    const double base = base_loss_and_grad(pair, batch, ones, hyper).loss;
    CHECK(std::abs(wis - vt) < 1e-12);
    CHECK(std::abs(wis - base) < 1e-12);

    // no_is ignores the ratio vector entirely.
    std::vector<double> junk(batch.size(), 0.123);
    const double noi =
        critic_loss_and_grad(CriticLossKind::no_is, pair, batch, junk, hyper).loss;
    CHECK(std::abs(noi - wis) < 1e-12);
}

TEST_CASE("critic loss gradients match finite differences") {
    MlpSpec spec{2, {5, 4}, 1, Activation::tanh, false};
    CriticHyper hyper;
    RngStream rng(7, 0);
    std::vector<Transition> batch;
    for (int i = 0; i < 6; ++i) {
        Transition t;
        t.s = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        t.a = {0.0};
        t.r = rng.uniform(-1.0, 1.0);
        t.s_next = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        t.done = i == 2;
        t.logp_b = 0.0;
        batch.push_back(std::move(t));
    }
    std::vector<double> ratios;
    for (int i = 0; i < 6; ++i) ratios.push_back(rng.uniform(0.0, 1.0));

    for (auto kind : {CriticLossKind::wis, CriticLossKind::vtrace1, CriticLossKind::base_naive}) {
        CriticPair pair = CriticPair::init(spec, 11, true);
        const auto res = critic_loss_and_grad(kind, pair, batch, ratios, hyper);
        const auto f = [&](const ParamVector& q) {
            CriticPair probe = pair;
            probe.online[0] = q;
            return critic_loss_and_grad(kind, probe, batch, ratios, hyper).loss;
        };
        for (int probe = 0; probe < 30; ++probe) {
            const std::size_t idx = rng.uniform_index(pair.online[0].size());
            const double fd = test::central_diff(f, pair.online[0], idx);
            CHECK(test::rel_err(res.grads[0][idx], fd) < 1e-5);
        }
    }
}

TEST_CASE("polyak update arithmetic") {
    MlpSpec spec{1, {2}, 1, Activation::tanh, false};
    CriticPair pair = CriticPair::init(spec, 0, true);
    for (auto& v : pair.online[0]) v = 2.0;
    for (auto& v : pair.target[0]) v = 0.0;

    CriticPair half = pair;
    polyak_update(half, 0.5);
    for (double v : half.target[0]) CHECK(v == doctest::Approx(1.0));

    CriticPair full = pair;
    polyak_update(full, 1.0);
    CHECK(full.target[0] == full.online[0]);

    CriticPair frozen = pair;
    const ParamVector before = frozen.target[0];
    polyak_update(frozen, 1e-300);  // tau -> 0 leaves targets essentially unchanged
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(frozen.target[0][i] == doctest::Approx(before[i]));
    }
}

TEST_CASE("value_min picks the smaller critic") {
    CriticPair pair = linear_pair(0.5, 1.5);  // V1(x) = x + 0.5, V2(x) = x + 1.5
    const std::vector<double> s{1.5};
    CHECK(value_min(pair, s) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(value_min(pair, s) ==
          doctest::Approx(forward(pair.spec, pair.online[0], s)[0]).epsilon(1e-12));

    CriticPair single = linear_pair(3.0, 0.0, false);
    CHECK(single.count() == 1);
    CHECK(value_min(single, s) == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("critic losses reject an empty batch") {
    CriticPair pair = const_pair(0.0, 0.0);
    CriticHyper hyper;
    const std::vector<Transition> empty;
    const std::vector<double> none;
    CHECK_THROWS_AS((void)wis_loss_and_grad(pair, empty, none, hyper), std::invalid_argument);
}
