// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "resinv/tensor.hpp"

namespace resinv {

struct AdamConfig {
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

/// First/second-moment buffers, one pair per parameter tensor.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::int64_t steps = 0;
};

AdamState make_adam_state(const std::vector<Tensor>& params);

/// In-place Adam update with bias correction. Shapes of params, grads and
/// state buffers must agree pairwise.
void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
               AdamState& state, float lr, const AdamConfig& cfg = {});

}  // namespace resinv
