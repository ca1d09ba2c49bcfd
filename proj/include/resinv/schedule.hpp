// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "resinv/tensor.hpp"

namespace resinv {

/// Variance schedule tables. Timesteps are 1-based: beta(t)/alpha(t) for
/// t in [1,T], alpha_bar(t) for t in [0,T] with alpha_bar(0) = 1 as the
/// clean-data boundary.
struct NoiseSchedule {
    std::vector<float> betas;       // betas[t-1] = beta_t
    std::vector<float> alphas;      // alphas[t-1] = 1 - beta_t
    std::vector<float> alpha_bars;  // alpha_bars[t] = prod_{s<=t} alpha_s, [0] = 1

    int steps() const { return static_cast<int>(betas.size()); }
    float beta(int t) const;
    float alpha(int t) const;
    float alpha_bar(int t) const;

    std::uint64_t hash() const;
    nlohmann::json to_json() const;
    static NoiseSchedule from_json(const nlohmann::json& j);
};

NoiseSchedule make_linear_schedule(int steps, float beta_start, float beta_end);

/// A latent sample pinned to its timestep.
struct Latent {
    Tensor values;
    int t = 0;
};

/// Coefficients of the affine DDIM transition z' = latent*z + eps*e.
struct StepCoeffs {
    float latent;
    float eps;
};

StepCoeffs ddim_step_coeffs(const NoiseSchedule& s, int t);     // z_t -> z_{t-1}
StepCoeffs ddim_inverse_coeffs(const NoiseSchedule& s, int t);  // z_{t-1} -> z_t

/// sqrt(abar_t)*x0 + sqrt(1-abar_t)*noise.
Tensor q_sample(const NoiseSchedule& s, const Tensor& x0, int t, const Tensor& noise);

/// Deterministic (eta=0) DDIM update from t to t-1.
Tensor ddim_step(const NoiseSchedule& s, const Tensor& z_t, const Tensor& eps, int t);

/// Exact algebraic inverse of ddim_step given the same eps; maps t-1 to t.
Tensor ddim_inverse_step(const NoiseSchedule& s, const Tensor& z_prev, const Tensor& eps, int t);

/// Posterior-mean style update (no noise injection):
/// z_{t-1} = (z_t - (1-alpha_t)/sqrt(1-abar_t) * eps) / sqrt(alpha_t).
Tensor ddpm_mean_step(const NoiseSchedule& s, const Tensor& z_t, const Tensor& eps, int t);

/// Solves for the unique eps with ddim_step(z_t, eps, t) == z_prev.
Tensor implied_eps(const NoiseSchedule& s, const Tensor& z_t, const Tensor& z_prev, int t);

/// eps_uncond + w * (eps_cond - eps_uncond).
Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, float w);

}  // namespace resinv
