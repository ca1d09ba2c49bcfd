// SPDX-License-Identifier: Apache-2.0
#include "resinv/adam.hpp"

#include <cmath>

namespace resinv {

AdamState make_adam_state(const std::vector<Tensor>& params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Tensor& p : params) {
        s.m.push_back(Tensor::zeros(p.shape));
        s.v.push_back(Tensor::zeros(p.shape));
    }
    return s;
}

void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
               AdamState& state, float lr, const AdamConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size() || params.size() != state.v.size()) {
        throw std::invalid_argument("adam_step: params/grads/state count mismatch");
    }
    for (size_t i = 0; i < params.size(); ++i) {
        if (!params[i].same_shape(grads[i]) || !params[i].same_shape(state.m[i]) || !params[i].same_shape(state.v[i])) {
            throw std::invalid_argument("adam_step: shape mismatch at parameter " + std::to_string(i));
        }
    }
    state.steps += 1;
    const double t = static_cast<double>(state.steps);
    const float bc1 = static_cast<float>(1.0 - std::pow(static_cast<double>(cfg.beta1), t));
    const float bc2 = static_cast<float>(1.0 - std::pow(static_cast<double>(cfg.beta2), t));
    for (size_t i = 0; i < params.size(); ++i) {
        float* p = params[i].v.data();
        const float* g = grads[i].v.data();
        float* m = state.m[i].v.data();
        float* v = state.v[i].v.data();
        const size_t n = params[i].v.size();
        for (size_t j = 0; j < n; ++j) {
            m[j] = cfg.beta1 * m[j] + (1.0f - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0f - cfg.beta2) * g[j] * g[j];
            const float mhat = m[j] / bc1;
            const float vhat = v[j] / bc2;
            p[j] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace resinv
