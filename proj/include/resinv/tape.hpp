// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "resinv/tensor.hpp"

namespace resinv {

/// Reverse-mode autodiff over an append-only record of primitive ops.
/// A tape is built per forward pass and discarded after backward().
/// Creation order is a topological order, so the backward sweep is a
/// single reverse pass that visits each node exactly once.
class Tape {
public:
    struct Var {
        Tensor value;
        int node = -1;  // -1 marks a constant (no gradient flows into it)
    };

    static Var constant(Tensor t) { return Var{std::move(t), -1}; }

    /// Registers a differentiable input.
    Var leaf(Tensor t);

    Var matmul(const Var& a, const Var& b);
    Var add(const Var& a, const Var& b);
    Var sub(const Var& a, const Var& b);
    Var mul(const Var& a, const Var& b);           // elementwise
    Var add_row(const Var& x, const Var& bias);    // [m,n] + [n], bias broadcast over rows
    Var scale(const Var& x, float c);
    Var silu(const Var& x);
    Var square(const Var& x);
    Var mean(const Var& x);                        // -> scalar [1]
    Var concat_cols(const std::vector<Var>& parts);
    Var gather_rows(const Var& table, const std::vector<int>& idx);
    Var repeat_row(const Var& x, int copies);      // [1,n] -> [m,n]
    /// Per-row blend: out_r = (1-w_r)*a_r + w_r*b_r. Weights are constants.
    Var row_lerp(const Var& a, const Var& b, const std::vector<float>& w);

    /// d(loss)/d(each wrt). loss must be scalar; every wrt must be a node on
    /// this tape reachable from loss (otherwise std::invalid_argument).
    std::vector<Tensor> backward(const Var& loss, const std::vector<Var>& wrt) const;

    size_t node_count() const { return nodes_.size(); }

private:
    enum class Op {
        leaf, matmul, add, sub, mul, add_row, scale, silu, square,
        mean, concat_cols, gather_rows, repeat_row, row_lerp,
    };

    struct Node {
        Op op;
        std::vector<int> src;          // input node ids, -1 for constants
        std::vector<Tensor> srcval;    // saved input values for gradient rules
        std::vector<int> out_shape;
        float scalar = 0.0f;
        std::vector<int> indices;
        std::vector<float> weights;
    };

    Var push(Node n, Tensor value);

    std::vector<Node> nodes_;
};

}  // namespace resinv
