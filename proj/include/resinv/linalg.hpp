// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "resinv/tensor.hpp"

namespace resinv {

/// C = A * B for 2-D tensors [m,k] x [k,n].
Tensor matmul(const Tensor& a, const Tensor& b);

/// C = A * B^T, shapes [m,n] x [k,n] -> [m,k].
Tensor matmul_nt(const Tensor& a, const Tensor& b);

/// C = A^T * B, shapes [m,k] x [m,n] -> [k,n].
Tensor matmul_tn(const Tensor& a, const Tensor& b);

}  // namespace resinv
