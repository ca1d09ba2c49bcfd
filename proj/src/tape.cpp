// SPDX-License-Identifier: Apache-2.0
#include "resinv/tape.hpp"

#include <cmath>

#include "resinv/linalg.hpp"

namespace resinv {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + " shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    }
}

float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

}  // namespace

Tape::Var Tape::push(Node n, Tensor value) {
    check_finite(value, "tape op output");
    n.out_shape = value.shape;
    nodes_.push_back(std::move(n));
    return Var{std::move(value), static_cast<int>(nodes_.size()) - 1};
}

Tape::Var Tape::leaf(Tensor t) {
    Node n;
    n.op = Op::leaf;
    return push(std::move(n), std::move(t));
}

Tape::Var Tape::matmul(const Var& a, const Var& b) {
    Tensor out = resinv::matmul(a.value, b.value);
    Node n;
    n.op = Op::matmul;
    n.src = {a.node, b.node};
    n.srcval = {a.value, b.value};
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::add(const Var& a, const Var& b) {
    require_same_shape(a.value, b.value, "add");
    Tensor out = a.value;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += b.value.v[i];
    Node n;
    n.op = Op::add;
    n.src = {a.node, b.node};
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::sub(const Var& a, const Var& b) {
    require_same_shape(a.value, b.value, "sub");
    Tensor out = a.value;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] -= b.value.v[i];
    Node n;
    n.op = Op::sub;
    n.src = {a.node, b.node};
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::mul(const Var& a, const Var& b) {
    require_same_shape(a.value, b.value, "mul");
    Tensor out = a.value;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= b.value.v[i];
    Node n;
    n.op = Op::mul;
    n.src = {a.node, b.node};
    n.srcval = {a.value, b.value};
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::add_row(const Var& x, const Var& bias) {
    if (x.value.shape.size() != 2 || bias.value.shape.size() != 1 || bias.value.shape[0] != x.value.cols()) {
        throw std::invalid_argument("add_row expects [m,n] + [n], got " + shape_str(x.value.shape) + " + " + shape_str(bias.value.shape));
    }
    Tensor out = x.value;
    const int m = out.rows(), c = out.cols();
    for (int r = 0; r < m; ++r) {
        float* row = &out.v[static_cast<size_t>(r) * c];
        for (int j = 0; j < c; ++j) row[j] += bias.value.v[j];
    }
    Node n;
    n.op = Op::add_row;
    n.src = {x.node, bias.node};
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::scale(const Var& x, float c) {
    Tensor out = x.value;
    for (float& v : out.v) v *= c;
    Node n;
    n.op = Op::scale;
    n.src = {x.node};
    n.scalar = c;
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::silu(const Var& x) {
    Tensor out = x.value;
    for (float& v : out.v) v = v * sigmoid(v);
    Node n;
    n.op = Op::silu;
    n.src = {x.node};
    n.srcval = {x.value};
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::square(const Var& x) {
    Tensor out = x.value;
    for (float& v : out.v) v = v * v;
    Node n;
    n.op = Op::square;
    n.src = {x.node};
    n.srcval = {x.value};
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::mean(const Var& x) {
    if (x.value.v.empty()) throw std::invalid_argument("mean of empty tensor");
    double acc = 0.0;
    for (float v : x.value.v) acc += v;
    Tensor out = Tensor::scalar(static_cast<float>(acc / static_cast<double>(x.value.v.size())));
    Node n;
    n.op = Op::mean;
    n.src = {x.node};
    n.srcval = {x.value};
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols of nothing");
    const int m = parts[0].value.rows();
    int total = 0;
    for (const Var& p : parts) {
        if (p.value.shape.size() != 2 || p.value.rows() != m) {
            throw std::invalid_argument("concat_cols row mismatch at part shaped " + shape_str(p.value.shape));
        }
        total += p.value.cols();
    }
    Tensor out = Tensor::zeros({m, total});
    Node n;
    n.op = Op::concat_cols;
    for (const Var& p : parts) {
        n.src.push_back(p.node);
        n.indices.push_back(p.value.cols());  // part widths
    }
    for (int r = 0; r < m; ++r) {
        float* dst = &out.v[static_cast<size_t>(r) * total];
        for (const Var& p : parts) {
            const int c = p.value.cols();
            const float* srcrow = &p.value.v[static_cast<size_t>(r) * c];
            for (int j = 0; j < c; ++j) *dst++ = srcrow[j];
        }
    }
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::gather_rows(const Var& table, const std::vector<int>& idx) {
    if (table.value.shape.size() != 2) throw std::invalid_argument("gather_rows table must be 2-D");
    const int rows = table.value.rows(), c = table.value.cols();
    Tensor out = Tensor::zeros({static_cast<int>(idx.size()), c});
    for (size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] < 0 || idx[r] >= rows) {
            throw std::invalid_argument("gather_rows index " + std::to_string(idx[r]) + " out of range [0," + std::to_string(rows) + ")");
        }
        const float* srcrow = &table.value.v[static_cast<size_t>(idx[r]) * c];
        float* dst = &out.v[r * c];
        for (int j = 0; j < c; ++j) dst[j] = srcrow[j];
    }
    Node n;
    n.op = Op::gather_rows;
    n.src = {table.node};
    n.indices = idx;
    n.scalar = static_cast<float>(rows);
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::repeat_row(const Var& x, int copies) {
    if (x.value.shape.size() != 2 || x.value.rows() != 1) {
        throw std::invalid_argument("repeat_row expects [1,n], got " + shape_str(x.value.shape));
    }
    if (copies < 1) throw std::invalid_argument("repeat_row needs at least one copy");
    const int c = x.value.cols();
    Tensor out = Tensor::zeros({copies, c});
    for (int r = 0; r < copies; ++r) {
        for (int j = 0; j < c; ++j) out.v[static_cast<size_t>(r) * c + j] = x.value.v[j];
    }
    Node n;
    n.op = Op::repeat_row;
    n.src = {x.node};
    return push(std::move(n), std::move(out));
}

Tape::Var Tape::row_lerp(const Var& a, const Var& b, const std::vector<float>& w) {
    require_same_shape(a.value, b.value, "row_lerp");
    if (a.value.shape.size() != 2 || static_cast<int>(w.size()) != a.value.rows()) {
        throw std::invalid_argument("row_lerp needs one weight per row");
    }
    const int m = a.value.rows(), c = a.value.cols();
    Tensor out = Tensor::zeros({m, c});
    for (int r = 0; r < m; ++r) {
        const float wr = w[r];
        for (int j = 0; j < c; ++j) {
            const size_t i = static_cast<size_t>(r) * c + j;
            out.v[i] = (1.0f - wr) * a.value.v[i] + wr * b.value.v[i];
        }
    }
    Node n;
    n.op = Op::row_lerp;
    n.src = {a.node, b.node};
    n.weights = w;
    return push(std::move(n), std::move(out));
}

std::vector<Tensor> Tape::backward(const Var& loss, const std::vector<Var>& wrt) const {
    if (loss.node < 0 || loss.node >= static_cast<int>(nodes_.size())) {
        throw std::invalid_argument("backward: loss is not a node on this tape");
    }
    if (!loss.value.is_scalar()) {
        throw std::invalid_argument("backward: loss must be scalar, got " + shape_str(loss.value.shape));
    }
    for (const Var& v : wrt) {
        if (v.node < 0 || v.node >= static_cast<int>(nodes_.size())) {
            throw std::invalid_argument("backward: requested tensor is not a node on this tape");
        }
    }

    std::vector<Tensor> grad(nodes_.size());
    std::vector<bool> touched(nodes_.size(), false);
    grad[loss.node] = Tensor({1}, {1.0f});
    touched[loss.node] = true;

    auto accum = [&](int node, const Tensor& g) {
        if (node < 0) return;  // constant input
        if (!touched[node]) {
            grad[node] = g;
            touched[node] = true;
        } else {
            for (size_t i = 0; i < g.v.size(); ++i) grad[node].v[i] += g.v[i];
        }
    };

    for (int id = loss.node; id >= 0; --id) {
        if (!touched[id]) continue;
        const Node& n = nodes_[id];
        const Tensor& g = grad[id];
        switch (n.op) {
            case Op::leaf:
                break;
            case Op::matmul: {
                if (n.src[0] >= 0) accum(n.src[0], matmul_nt(g, n.srcval[1]));
                if (n.src[1] >= 0) accum(n.src[1], matmul_tn(n.srcval[0], g));
                break;
            }
            case Op::add: {
                accum(n.src[0], g);
                accum(n.src[1], g);
                break;
            }
            case Op::sub: {
                accum(n.src[0], g);
                if (n.src[1] >= 0) {
                    Tensor neg = g;
                    for (float& v : neg.v) v = -v;
                    accum(n.src[1], neg);
                }
                break;
            }
            case Op::mul: {
                if (n.src[0] >= 0) {
                    Tensor ga = g;
                    for (size_t i = 0; i < ga.v.size(); ++i) ga.v[i] *= n.srcval[1].v[i];
                    accum(n.src[0], ga);
                }
                if (n.src[1] >= 0) {
                    Tensor gb = g;
                    for (size_t i = 0; i < gb.v.size(); ++i) gb.v[i] *= n.srcval[0].v[i];
                    accum(n.src[1], gb);
                }
                break;
            }
            case Op::add_row: {
                accum(n.src[0], g);
                if (n.src[1] >= 0) {
                    const int m = g.rows(), c = g.cols();
                    Tensor gb = Tensor::zeros({c});
                    for (int r = 0; r < m; ++r) {
                        for (int j = 0; j < c; ++j) gb.v[j] += g.v[static_cast<size_t>(r) * c + j];
                    }
                    accum(n.src[1], gb);
                }
                break;
            }
            case Op::scale: {
                if (n.src[0] >= 0) {
                    Tensor gx = g;
                    for (float& v : gx.v) v *= n.scalar;
                    accum(n.src[0], gx);
                }
                break;
            }
            case Op::silu: {
                if (n.src[0] >= 0) {
                    Tensor gx = g;
                    for (size_t i = 0; i < gx.v.size(); ++i) {
                        const float x = n.srcval[0].v[i];
                        const float s = sigmoid(x);
                        gx.v[i] *= s * (1.0f + x * (1.0f - s));
                    }
                    accum(n.src[0], gx);
                }
                break;
            }
            case Op::square: {
                if (n.src[0] >= 0) {
                    Tensor gx = g;
                    for (size_t i = 0; i < gx.v.size(); ++i) gx.v[i] *= 2.0f * n.srcval[0].v[i];
                    accum(n.src[0], gx);
                }
                break;
            }
            case Op::mean: {
                if (n.src[0] >= 0) {
                    const Tensor& x = n.srcval[0];
                    Tensor gx = Tensor::full(x.shape, g.v[0] / static_cast<float>(x.v.size()));
                    accum(n.src[0], gx);
                }
                break;
            }
            case Op::concat_cols: {
                const int m = g.rows(), total = g.cols();
                int off = 0;
                for (size_t p = 0; p < n.src.size(); ++p) {
                    const int c = n.indices[p];
                    if (n.src[p] >= 0) {
                        Tensor gp = Tensor::zeros({m, c});
                        for (int r = 0; r < m; ++r) {
                            const float* srcrow = &g.v[static_cast<size_t>(r) * total + off];
                            float* dst = &gp.v[static_cast<size_t>(r) * c];
                            for (int j = 0; j < c; ++j) dst[j] = srcrow[j];
                        }
                        accum(n.src[p], gp);
                    }
                    off += c;
                }
                break;
            }
            case Op::gather_rows: {
                if (n.src[0] >= 0) {
                    const int rows = static_cast<int>(n.scalar);
                    const int c = g.cols();
                    Tensor gt = Tensor::zeros({rows, c});
                    for (size_t r = 0; r < n.indices.size(); ++r) {
                        float* dst = &gt.v[static_cast<size_t>(n.indices[r]) * c];
                        const float* srcrow = &g.v[r * c];
                        for (int j = 0; j < c; ++j) dst[j] += srcrow[j];
                    }
                    accum(n.src[0], gt);
                }
                break;
            }
            case Op::repeat_row: {
                if (n.src[0] >= 0) {
                    const int m = g.rows(), c = g.cols();
                    Tensor gx = Tensor::zeros({1, c});
                    for (int r = 0; r < m; ++r) {
                        for (int j = 0; j < c; ++j) gx.v[j] += g.v[static_cast<size_t>(r) * c + j];
                    }
                    accum(n.src[0], gx);
                }
                break;
            }
            case Op::row_lerp: {
                const int m = g.rows(), c = g.cols();
                if (n.src[0] >= 0) {
                    Tensor ga = g;
                    for (int r = 0; r < m; ++r) {
                        for (int j = 0; j < c; ++j) ga.v[static_cast<size_t>(r) * c + j] *= (1.0f - n.weights[r]);
                    }
                    accum(n.src[0], ga);
                }
                if (n.src[1] >= 0) {
                    Tensor gb = g;
                    for (int r = 0; r < m; ++r) {
                        for (int j = 0; j < c; ++j) gb.v[static_cast<size_t>(r) * c + j] *= n.weights[r];
                    }
                    accum(n.src[1], gb);
                }
                break;
            }
        }
    }

    std::vector<Tensor> out;
    out.reserve(wrt.size());
    for (const Var& v : wrt) {
        if (!touched[v.node]) {
            throw std::invalid_argument("backward: requested tensor is not reachable from the loss");
        }
        out.push_back(grad[v.node]);
    }
    return out;
}

}  // namespace resinv
