// SPDX-License-Identifier: Apache-2.0
#include "resinv/tensor.hpp"

#include <cmath>
#include <sstream>

namespace resinv {

std::int64_t shape_numel(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d < 0) throw std::invalid_argument("negative dimension in shape " + shape_str(shape));
        n *= d;
    }
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<int> s, std::vector<float> data) : shape(std::move(s)), v(std::move(data)) {
    if (shape_numel(shape) != static_cast<std::int64_t>(v.size())) {
        throw std::invalid_argument("tensor data size " + std::to_string(v.size()) +
                                    " does not match shape " + shape_str(shape));
    }
}

Tensor Tensor::zeros(std::vector<int> s) {
    std::vector<float> data(static_cast<size_t>(shape_numel(s)), 0.0f);
    return Tensor(std::move(s), std::move(data));
}

Tensor Tensor::full(std::vector<int> s, float value) {
    std::vector<float> data(static_cast<size_t>(shape_numel(s)), value);
    return Tensor(std::move(s), std::move(data));
}

Tensor Tensor::scalar(float value) { return Tensor({1}, {value}); }

void check_finite(const Tensor& t, const char* what) {
    for (float x : t.v) {
        if (!std::isfinite(x)) {
            throw std::runtime_error(std::string("non-finite value in ") + what);
        }
    }
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("max_abs_diff shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    }
    float m = 0.0f;
    for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::fabs(a.v[i] - b.v[i]));
    return m;
}

float mean_sq_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("mean_sq_diff shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    }
    if (a.v.empty()) return 0.0f;
    double acc = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) {
        const double d = static_cast<double>(a.v[i]) - static_cast<double>(b.v[i]);
        acc += d * d;
    }
    return static_cast<float>(acc / static_cast<double>(a.v.size()));
}

float Rng::uniform() {
    // 53-bit mantissa draw mapped to [0,1).
    return static_cast<float>((next_u64() >> 11) * 0x1.0p-53);
}

float Rng::uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
}

float Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    float u1 = uniform();
    while (u1 <= 1e-12f) u1 = uniform();
    const float u2 = uniform();
    const float r = std::sqrt(-2.0f * std::log(u1));
    const float a = 6.28318530717958647692f * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

Tensor Rng::normal_tensor(std::vector<int> shape, float stddev) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (float& x : t.v) x = normal() * stddev;
    return t;
}

Tensor Rng::uniform_tensor(std::vector<int> shape, float lo, float hi) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (float& x : t.v) x = uniform(lo, hi);
    return t;
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace resinv
