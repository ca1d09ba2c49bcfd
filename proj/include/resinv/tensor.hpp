// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace resinv {

/// Dense row-major float32 array. Values are plain std::vector storage;
/// copies are deep, which keeps sharing rules trivial at desk scale.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> v;

    Tensor() = default;
    Tensor(std::vector<int> s, std::vector<float> data);

    static Tensor zeros(std::vector<int> s);
    static Tensor full(std::vector<int> s, float value);
    static Tensor scalar(float value);

    std::int64_t size() const { return static_cast<std::int64_t>(v.size()); }
    bool is_scalar() const { return v.size() == 1; }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    // 2-D accessors; valid only when shape has rank 2.
    int rows() const { return shape.at(0); }
    int cols() const { return shape.at(1); }
    float& at(int r, int c) { return v[static_cast<size_t>(r) * cols() + c]; }
    float at(int r, int c) const { return v[static_cast<size_t>(r) * cols() + c]; }
};

std::int64_t shape_numel(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

/// Throws std::runtime_error naming `what` if any value is NaN or Inf.
void check_finite(const Tensor& t, const char* what);

float max_abs_diff(const Tensor& a, const Tensor& b);
float mean_sq_diff(const Tensor& a, const Tensor& b);

/// Deterministic RNG. Normal variates come from an explicit Box-Muller
/// transform so streams do not depend on the standard library's
/// distribution implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }
    float uniform();                     // [0, 1)
    float uniform(float lo, float hi);   // [lo, hi)
    int uniform_int(int lo, int hi);     // inclusive range
    float normal();
    Tensor normal_tensor(std::vector<int> shape, float stddev = 1.0f);
    Tensor uniform_tensor(std::vector<int> shape, float lo, float hi);

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    float spare_ = 0.0f;
};

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace resinv
