// SPDX-License-Identifier: Apache-2.0
#include "resinv/linalg.hpp"

namespace resinv {

namespace {

void require_2d(const Tensor& t, const char* name) {
    if (t.shape.size() != 2) {
        throw std::invalid_argument(std::string(name) + " must be 2-D, got " + shape_str(t.shape));
    }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul lhs");
    require_2d(b, "matmul rhs");
    const int m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) {
        throw std::invalid_argument("matmul inner dimension mismatch " + shape_str(a.shape) + " x " + shape_str(b.shape));
    }
    Tensor c = Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i) {
        const float* arow = &a.v[static_cast<size_t>(i) * k];
        float* crow = &c.v[static_cast<size_t>(i) * n];
        for (int p = 0; p < k; ++p) {
            const float av = arow[p];
            const float* brow = &b.v[static_cast<size_t>(p) * n];
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul_nt lhs");
    require_2d(b, "matmul_nt rhs");
    const int m = a.rows(), n = a.cols(), k = b.rows();
    if (b.cols() != n) {
        throw std::invalid_argument("matmul_nt dimension mismatch " + shape_str(a.shape) + " x " + shape_str(b.shape) + "^T");
    }
    Tensor c = Tensor::zeros({m, k});
    for (int i = 0; i < m; ++i) {
        const float* arow = &a.v[static_cast<size_t>(i) * n];
        for (int j = 0; j < k; ++j) {
            const float* brow = &b.v[static_cast<size_t>(j) * n];
            float acc = 0.0f;
            for (int p = 0; p < n; ++p) acc += arow[p] * brow[p];
            c.v[static_cast<size_t>(i) * k + j] = acc;
        }
    }
    return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul_tn lhs");
    require_2d(b, "matmul_tn rhs");
    const int m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != m) {
        throw std::invalid_argument("matmul_tn dimension mismatch " + shape_str(a.shape) + "^T x " + shape_str(b.shape));
    }
    Tensor c = Tensor::zeros({k, n});
    for (int r = 0; r < m; ++r) {
        const float* arow = &a.v[static_cast<size_t>(r) * k];
        const float* brow = &b.v[static_cast<size_t>(r) * n];
        for (int i = 0; i < k; ++i) {
            const float av = arow[i];
            float* crow = &c.v[static_cast<size_t>(i) * n];
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

}  // namespace resinv
