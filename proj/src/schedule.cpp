// SPDX-License-Identifier: Apache-2.0
#include "resinv/schedule.hpp"

#include <cmath>

namespace resinv {

namespace {

void require_t(int t, int lo, int hi, const char* what) {
    if (t < lo || t > hi) {
        throw std::invalid_argument(std::string(what) + ": timestep " + std::to_string(t) +
                                    " outside [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
    }
}

}  // namespace

float NoiseSchedule::beta(int t) const {
    require_t(t, 1, steps(), "beta");
    return betas[t - 1];
}

float NoiseSchedule::alpha(int t) const {
    require_t(t, 1, steps(), "alpha");
    return alphas[t - 1];
}

float NoiseSchedule::alpha_bar(int t) const {
    require_t(t, 0, steps(), "alpha_bar");
    return alpha_bars[t];
}

std::uint64_t NoiseSchedule::hash() const {
    std::uint64_t h = fnv1a64(betas.data(), betas.size() * sizeof(float));
    const std::uint32_t n = static_cast<std::uint32_t>(betas.size());
    return fnv1a64(&n, sizeof(n), h);
}

nlohmann::json NoiseSchedule::to_json() const {
    return nlohmann::json{{"steps", steps()}, {"betas", betas}};
}

NoiseSchedule NoiseSchedule::from_json(const nlohmann::json& j) {
    const int steps = j.at("steps").get<int>();
    std::vector<float> betas = j.at("betas").get<std::vector<float>>();
    if (steps != static_cast<int>(betas.size())) {
        throw std::invalid_argument("schedule json: steps does not match betas length");
    }
    NoiseSchedule s;
    s.betas = std::move(betas);
    s.alphas.resize(s.betas.size());
    s.alpha_bars.assign(s.betas.size() + 1, 1.0f);
    double running = 1.0;
    for (size_t i = 0; i < s.betas.size(); ++i) {
        const float b = s.betas[i];
        if (!(b > 0.0f && b < 1.0f)) {
            throw std::invalid_argument("schedule json: beta out of (0,1) at step " + std::to_string(i + 1));
        }
        s.alphas[i] = 1.0f - b;
        running *= static_cast<double>(s.alphas[i]);
        s.alpha_bars[i + 1] = static_cast<float>(running);
    }
    return s;
}

NoiseSchedule make_linear_schedule(int steps, float beta_start, float beta_end) {
    if (steps < 2) throw std::invalid_argument("make_linear_schedule: need at least 2 steps");
    if (!(beta_start > 0.0f) || !(beta_start <= beta_end) || !(beta_end < 1.0f)) {
        throw std::invalid_argument("make_linear_schedule: need 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule s;
    s.betas.resize(steps);
    s.alphas.resize(steps);
    s.alpha_bars.assign(steps + 1, 1.0f);
    double running = 1.0;
    for (int i = 0; i < steps; ++i) {
        const float frac = static_cast<float>(i) / static_cast<float>(steps - 1);
        s.betas[i] = beta_start + (beta_end - beta_start) * frac;
        s.alphas[i] = 1.0f - s.betas[i];
        running *= static_cast<double>(s.alphas[i]);
        s.alpha_bars[i + 1] = static_cast<float>(running);
    }
    return s;
}

StepCoeffs ddim_step_coeffs(const NoiseSchedule& s, int t) {
    require_t(t, 1, s.steps(), "ddim_step_coeffs");
    const float ab_t = s.alpha_bar(t);
    const float ab_prev = s.alpha_bar(t - 1);
    const float a = std::sqrt(ab_prev / ab_t);
    const float b = std::sqrt(1.0f - ab_prev) - a * std::sqrt(1.0f - ab_t);
    return {a, b};
}

StepCoeffs ddim_inverse_coeffs(const NoiseSchedule& s, int t) {
    require_t(t, 1, s.steps(), "ddim_inverse_coeffs");
    const float ab_t = s.alpha_bar(t);
    const float ab_prev = s.alpha_bar(t - 1);
    const float a = std::sqrt(ab_t / ab_prev);
    const float b = std::sqrt(1.0f - ab_t) - a * std::sqrt(1.0f - ab_prev);
    return {a, b};
}

namespace {

Tensor affine_combine(const Tensor& z, const Tensor& eps, float cz, float ce, const char* what) {
    if (!z.same_shape(eps)) {
        throw std::invalid_argument(std::string(what) + ": latent/eps shape mismatch " +
                                    shape_str(z.shape) + " vs " + shape_str(eps.shape));
    }
    Tensor out = z;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = cz * z.v[i] + ce * eps.v[i];
    check_finite(out, what);
    return out;
}

}  // namespace

Tensor q_sample(const NoiseSchedule& s, const Tensor& x0, int t, const Tensor& noise) {
    require_t(t, 0, s.steps(), "q_sample");
    const float ab = s.alpha_bar(t);
    return affine_combine(x0, noise, std::sqrt(ab), std::sqrt(1.0f - ab), "q_sample");
}

Tensor ddim_step(const NoiseSchedule& s, const Tensor& z_t, const Tensor& eps, int t) {
    const StepCoeffs c = ddim_step_coeffs(s, t);
    return affine_combine(z_t, eps, c.latent, c.eps, "ddim_step");
}

Tensor ddim_inverse_step(const NoiseSchedule& s, const Tensor& z_prev, const Tensor& eps, int t) {
    const StepCoeffs c = ddim_inverse_coeffs(s, t);
    return affine_combine(z_prev, eps, c.latent, c.eps, "ddim_inverse_step");
}

Tensor ddpm_mean_step(const NoiseSchedule& s, const Tensor& z_t, const Tensor& eps, int t) {
    require_t(t, 1, s.steps(), "ddpm_mean_step");
    const float a_t = s.alpha(t);
    const float ab_t = s.alpha_bar(t);
    const float inv_sqrt_a = 1.0f / std::sqrt(a_t);
    const float eps_coef = -inv_sqrt_a * (1.0f - a_t) / std::sqrt(1.0f - ab_t);
    return affine_combine(z_t, eps, inv_sqrt_a, eps_coef, "ddpm_mean_step");
}

Tensor implied_eps(const NoiseSchedule& s, const Tensor& z_t, const Tensor& z_prev, int t) {
    const StepCoeffs c = ddim_step_coeffs(s, t);
    if (std::fabs(c.eps) < 1e-12f) {
        throw std::runtime_error("implied_eps: eps coefficient vanishes at t=" + std::to_string(t));
    }
    if (!z_t.same_shape(z_prev)) {
        throw std::invalid_argument("implied_eps: shape mismatch " + shape_str(z_t.shape) + " vs " + shape_str(z_prev.shape));
    }
    Tensor out = z_t;
    const float inv = 1.0f / c.eps;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = (z_prev.v[i] - c.latent * z_t.v[i]) * inv;
    check_finite(out, "implied_eps");
    return out;
}

Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, float w) {
    if (!eps_uncond.same_shape(eps_cond)) {
        throw std::invalid_argument("cfg_combine: shape mismatch " + shape_str(eps_uncond.shape) +
                                    " vs " + shape_str(eps_cond.shape));
    }
    Tensor out = eps_uncond;
    for (size_t i = 0; i < out.v.size(); ++i) {
        out.v[i] = eps_uncond.v[i] + w * (eps_cond.v[i] - eps_uncond.v[i]);
    }
    return out;
}

}  // namespace resinv
