#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "vlearn/mlp.hpp"

namespace vlearn {

// Adam with bias correction; moments are part of the checkpointed state.
struct AdamState {
    ParamVector m;
    ParamVector v;
    uint64_t t = 0;
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(std::size_t n, double lr) {
        AdamState s;
        s.m.assign(n, 0.0);
        s.v.assign(n, 0.0);
        s.lr = lr;
        return s;
    }

    void step(ParamVector& params, const ParamVector& grad) {
        if (params.size() != m.size() || grad.size() != m.size()) {
            throw std::invalid_argument("AdamState::step: size mismatch");
        }
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    }
};

}  // namespace vlearn
