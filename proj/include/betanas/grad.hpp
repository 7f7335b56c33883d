#pragma once

#include <algorithm>
#include <functional>
#include <unordered_map>
#include <utility>

#include "betanas/array.hpp"

namespace betanas::grad {

// ---------------------------------------------------------------------------
// Reverse-mode autodiff over dense arrays.
//
// Graphs are define-by-run and rebuilt per optimization step: build nodes,
// call forward() once (feeding placeholders), then backward() from a scalar
// root. Node gradients are recomputed from scratch on every backward pass;
// Parameter gradients accumulate across passes until zero_grad().
// ---------------------------------------------------------------------------

// Persistent learnable value. Lives outside any Graph so optimizer state can
// survive graph rebuilds; graphs reference it via Graph::param().
struct Parameter {
    Array value;
    Array grad;

    Parameter() = default;
    explicit Parameter(Array v) : value(std::move(v)), grad(Array::zeros(value.shape)) {}

    void zero_grad() { grad.fill(0.0); }
};

enum class Op {
    Placeholder,
    Constant,
    Param,
    MatMul,
    Add,          // equal shapes, or matrix + row vector broadcast
    Scale,        // multiply by fixed scalar
    Relu,
    Identity,
    Zero,         // constant-zero output of the input's shape
    MeanPoolPairs,// mean over non-overlapping feature pairs, duplicated back
    Row,          // one row of a matrix
    Softmax,      // last axis
    LogSumExp,    // last axis
    Softplus,
    CrossEntropyLogits,
    Mse,
    WeightedSum,  // inputs: coeff vector [K], then K equal-shape arrays
    Sum,          // full reduction
    Mean,         // full reduction
};

inline const char* op_name(Op op) {
    switch (op) {
        case Op::Placeholder: return "placeholder";
        case Op::Constant: return "constant";
        case Op::Param: return "param";
        case Op::MatMul: return "matmul";
        case Op::Add: return "add";
        case Op::Scale: return "scale";
        case Op::Relu: return "relu";
        case Op::Identity: return "identity";
        case Op::Zero: return "zero";
        case Op::MeanPoolPairs: return "mean_pool_pairs";
        case Op::Row: return "row";
        case Op::Softmax: return "softmax";
        case Op::LogSumExp: return "logsumexp";
        case Op::Softplus: return "softplus";
        case Op::CrossEntropyLogits: return "cross_entropy_logits";
        case Op::Mse: return "mse";
        case Op::WeightedSum: return "weighted_sum";
        case Op::Sum: return "sum";
        case Op::Mean: return "mean";
    }
    return "?";
}

class Graph;

// Lightweight handle to a node inside a Graph.
struct Value {
    Graph* graph = nullptr;
    int id = -1;
};

class Graph {
public:
    struct Node {
        Op op;
        std::vector<int> inputs;
        Array value;
        Array grad;
        bool computed = false;
        Parameter* param = nullptr;   // Op::Param
        double coeff = 0.0;           // Op::Scale
        int index = 0;                // Op::Row
        std::vector<int> labels;      // Op::CrossEntropyLogits
        std::vector<int> out_shape;   // shape once known (leaves know at build time)
    };

    // --- leaves -------------------------------------------------------------

    Value placeholder(std::vector<int> shape) {
        Node n;
        n.op = Op::Placeholder;
        n.out_shape = std::move(shape);
        return push(std::move(n));
    }

    Value constant(Array v) {
        Node n;
        n.op = Op::Constant;
        n.out_shape = v.shape;
        n.value = std::move(v);
        return push(std::move(n));
    }

    Value param(Parameter& p) {
        Node n;
        n.op = Op::Param;
        n.param = &p;
        n.out_shape = p.value.shape;
        return push(std::move(n));
    }

    // --- op builders ---------------------------------------------------------

    Value matmul(Value a, Value b) { return binary(Op::MatMul, a, b); }
    Value add(Value a, Value b) { return binary(Op::Add, a, b); }

    Value scale(Value a, double c) {
        Node n;
        n.op = Op::Scale;
        n.inputs = {a.id};
        n.coeff = c;
        return push(std::move(n));
    }

    Value relu(Value a) { return unary(Op::Relu, a); }
    Value identity(Value a) { return unary(Op::Identity, a); }
    Value zero_like(Value a) { return unary(Op::Zero, a); }
    Value mean_pool_pairs(Value a) { return unary(Op::MeanPoolPairs, a); }
    Value softmax(Value a) { return unary(Op::Softmax, a); }
    Value logsumexp(Value a) { return unary(Op::LogSumExp, a); }
    Value softplus(Value a) { return unary(Op::Softplus, a); }
    Value sum(Value a) { return unary(Op::Sum, a); }
    Value mean(Value a) { return unary(Op::Mean, a); }

    Value row(Value m, int r) {
        Node n;
        n.op = Op::Row;
        n.inputs = {m.id};
        n.index = r;
        return push(std::move(n));
    }

    Value cross_entropy_logits(Value logits, std::vector<int> labels) {
        Node n;
        n.op = Op::CrossEntropyLogits;
        n.inputs = {logits.id};
        n.labels = std::move(labels);
        return push(std::move(n));
    }

    Value mse(Value pred, Value target) { return binary(Op::Mse, pred, target); }

    Value weighted_sum(Value coeffs, const std::vector<Value>& arrays) {
        Node n;
        n.op = Op::WeightedSum;
        n.inputs.push_back(coeffs.id);
        for (Value v : arrays) n.inputs.push_back(v.id);
        return push(std::move(n));
    }

    // --- execution -----------------------------------------------------------

    // Computes every node in id order and returns the last node's output.
    // Throws ShapeError (naming the node) on incompatible inputs and
    // NonFiniteError if any node output contains NaN/Inf.
    Array forward(const std::unordered_map<int, Array>& feeds = {}) {
        if (nodes_.empty()) throw ShapeError("forward on empty graph");
        for (size_t i = 0; i < nodes_.size(); ++i) {
            Node& n = nodes_[i];
            switch (n.op) {
                case Op::Placeholder: {
                    auto it = feeds.find(static_cast<int>(i));
                    if (it == feeds.end())
                        throw ShapeError("placeholder node " + std::to_string(i) + " not fed");
                    if (it->second.shape != n.out_shape)
                        throw ShapeError("node " + std::to_string(i) + " (placeholder): fed shape " +
                                         shape_str(it->second.shape) + " != declared " +
                                         shape_str(n.out_shape));
                    n.value = it->second;
                    break;
                }
                case Op::Constant:
                    break;
                case Op::Param:
                    n.value = n.param->value;
                    break;
                default:
                    eval(static_cast<int>(i));
            }
            if (!n.value.all_finite())
                throw NonFiniteError("node " + std::to_string(i) + " (" + op_name(n.op) +
                                     ") produced a non-finite value");
        }
        forward_done_ = true;
        return nodes_.back().value;
    }

    // Reverse pass from a scalar root. Node gradients are rebuilt from
    // scratch; Parameter.grad accumulates (call zero_grad() between steps to
    // reset). Calling backward twice without a new forward doubles the
    // accumulated parameter gradients.
    void backward(Value root) { backward(root.id); }

    void backward(int root_id = -1) {
        if (!forward_done_) throw ShapeError("backward called before forward");
        if (root_id < 0) root_id = static_cast<int>(nodes_.size()) - 1;
        Node& root = nodes_[static_cast<size_t>(root_id)];
        if (root.value.size() != 1)
            throw ShapeError("backward root must be scalar, node " + std::to_string(root_id) +
                             " has shape " + shape_str(root.value.shape));
        for (Node& n : nodes_) {
            n.grad = Array::zeros(n.value.shape);
        }
        root.grad.data[0] = 1.0;
        for (int i = root_id; i >= 0; --i) {
            propagate(i);
        }
        for (Node& n : nodes_) {
            if (n.op == Op::Param) {
                for (int k = 0; k < n.grad.size(); ++k) n.param->grad.at(k) += n.grad.at(k);
            }
        }
    }

    const Array& value_of(Value v) const { return nodes_[static_cast<size_t>(v.id)].value; }
    const Array& grad_of(Value v) const { return nodes_[static_cast<size_t>(v.id)].grad; }
    int size() const { return static_cast<int>(nodes_.size()); }

private:
    std::vector<Node> nodes_;
    bool forward_done_ = false;

    Value push(Node n) {
        nodes_.push_back(std::move(n));
        return Value{this, static_cast<int>(nodes_.size()) - 1};
    }

    Value unary(Op op, Value a) {
        Node n;
        n.op = op;
        n.inputs = {a.id};
        return push(std::move(n));
    }

    Value binary(Op op, Value a, Value b) {
        Node n;
        n.op = op;
        n.inputs = {a.id, b.id};
        return push(std::move(n));
    }

    const Array& in(const Node& n, int k) const {
        return nodes_[static_cast<size_t>(n.inputs[static_cast<size_t>(k)])].value;
    }
    Array& in_grad(const Node& n, int k) {
        return nodes_[static_cast<size_t>(n.inputs[static_cast<size_t>(k)])].grad;
    }

    [[noreturn]] void shape_fail(int id, const Node& n, const std::string& why) const {
        throw ShapeError("node " + std::to_string(id) + " (" + op_name(n.op) + "): " + why);
    }

    void eval(int id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        switch (n.op) {
            case Op::MatMul: {
                const Array& a = in(n, 0);
                const Array& b = in(n, 1);
                if (a.shape.size() != 2 || b.shape.size() != 2 || a.shape[1] != b.shape[0])
                    shape_fail(id, n, shape_str(a.shape) + " x " + shape_str(b.shape));
                int m = a.shape[0], k = a.shape[1], p = b.shape[1];
                n.value = Array::zeros({m, p});
                for (int i = 0; i < m; ++i)
                    for (int t = 0; t < k; ++t) {
                        double av = a.at(i, t);
                        if (av == 0.0) continue;
                        for (int j = 0; j < p; ++j) n.value.at(i, j) += av * b.at(t, j);
                    }
                break;
            }
            case Op::Add: {
                const Array& a = in(n, 0);
                const Array& b = in(n, 1);
                if (a.same_shape(b)) {
                    n.value = a;
                    for (int i = 0; i < b.size(); ++i) n.value.at(i) += b.at(i);
                } else if (a.shape.size() == 2 && b.shape.size() == 1 && a.shape[1] == b.shape[0]) {
                    // matrix + row vector, broadcast over rows
                    n.value = a;
                    for (int r = 0; r < a.shape[0]; ++r)
                        for (int c = 0; c < a.shape[1]; ++c) n.value.at(r, c) += b.at(c);
                } else {
                    shape_fail(id, n, shape_str(a.shape) + " + " + shape_str(b.shape));
                }
                break;
            }
            case Op::Scale: {
                n.value = in(n, 0);
                for (double& v : n.value.data) v *= n.coeff;
                break;
            }
            case Op::Relu: {
                n.value = in(n, 0);
                for (double& v : n.value.data) v = v > 0.0 ? v : 0.0;
                break;
            }
            case Op::Identity:
                n.value = in(n, 0);
                break;
            case Op::Zero:
                n.value = Array::zeros(in(n, 0).shape);
                break;
            case Op::MeanPoolPairs: {
                const Array& a = in(n, 0);
                int w = a.last_dim(), outer = a.outer_size();
                n.value = Array::zeros(a.shape);
                for (int o = 0; o < outer; ++o) {
                    const double* src = a.data.data() + static_cast<size_t>(o) * w;
                    double* dst = n.value.data.data() + static_cast<size_t>(o) * w;
                    for (int c = 0; c < w; c += 2) {
                        if (c + 1 < w) {
                            double m = 0.5 * (src[c] + src[c + 1]);
                            dst[c] = m;
                            dst[c + 1] = m;
                        } else {
                            dst[c] = src[c];  // odd width: trailing singleton group
                        }
                    }
                }
                break;
            }
            case Op::Row: {
                const Array& a = in(n, 0);
                if (a.shape.size() != 2 || n.index < 0 || n.index >= a.shape[0])
                    shape_fail(id, n, "row " + std::to_string(n.index) + " of " + shape_str(a.shape));
                int c = a.shape[1];
                n.value = Array::zeros({c});
                for (int j = 0; j < c; ++j) n.value.at(j) = a.at(n.index, j);
                break;
            }
            case Op::Softmax: {
                const Array& a = in(n, 0);
                int k = a.last_dim(), outer = a.outer_size();
                n.value = a;
                for (int o = 0; o < outer; ++o) {
                    double* r = n.value.data.data() + static_cast<size_t>(o) * k;
                    double mx = *std::max_element(r, r + k);
                    double s = 0.0;
                    for (int j = 0; j < k; ++j) {
                        r[j] = std::exp(r[j] - mx);
                        s += r[j];
                    }
                    for (int j = 0; j < k; ++j) r[j] /= s;
                }
                break;
            }
            case Op::LogSumExp: {
                const Array& a = in(n, 0);
                int k = a.last_dim(), outer = a.outer_size();
                std::vector<int> oshape(a.shape.begin(), a.shape.end() - 1);
                if (oshape.empty()) oshape = {1};
                n.value = Array::zeros(oshape);
                for (int o = 0; o < outer; ++o) {
                    const double* r = a.data.data() + static_cast<size_t>(o) * k;
                    double mx = *std::max_element(r, r + k);
                    double s = 0.0;
                    for (int j = 0; j < k; ++j) s += std::exp(r[j] - mx);
                    n.value.at(o) = mx + std::log(s);
                }
                break;
            }
            case Op::Softplus: {
                const Array& a = in(n, 0);
                n.value = a;
                for (double& v : n.value.data) {
                    // max(v,0) + log1p(exp(-|v|)) avoids overflow on both tails
                    v = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
                }
                break;
            }
            case Op::CrossEntropyLogits: {
                const Array& z = in(n, 0);
                if (z.shape.size() != 2) shape_fail(id, n, "logits must be [batch, classes]");
                int b = z.shape[0], c = z.shape[1];
                if (static_cast<int>(n.labels.size()) != b)
                    shape_fail(id, n, "label count != batch size");
                double total = 0.0;
                for (int i = 0; i < b; ++i) {
                    int y = n.labels[static_cast<size_t>(i)];
                    if (y < 0 || y >= c) shape_fail(id, n, "label out of range");
                    const double* r = z.data.data() + static_cast<size_t>(i) * c;
                    double mx = *std::max_element(r, r + c);
                    double s = 0.0;
                    for (int j = 0; j < c; ++j) s += std::exp(r[j] - mx);
                    total += mx + std::log(s) - r[y];
                }
                n.value = Array::scalar(total / b);
                break;
            }
            case Op::Mse: {
                const Array& p = in(n, 0);
                const Array& t = in(n, 1);
                if (!p.same_shape(t))
                    shape_fail(id, n, shape_str(p.shape) + " vs " + shape_str(t.shape));
                double s = 0.0;
                for (int i = 0; i < p.size(); ++i) {
                    double d = p.at(i) - t.at(i);
                    s += d * d;
                }
                n.value = Array::scalar(s / p.size());
                break;
            }
            case Op::WeightedSum: {
                const Array& c = in(n, 0);
                int k = static_cast<int>(n.inputs.size()) - 1;
                if (c.shape.size() != 1 || c.shape[0] != k)
                    shape_fail(id, n, "coefficient vector length != array count");
                if (k == 0) shape_fail(id, n, "no arrays to sum");
                const Array& first = in(n, 1);
                for (int j = 1; j < k; ++j)
                    if (!in(n, 1 + j).same_shape(first))
                        shape_fail(id, n, "arrays must share a shape");
                n.value = Array::zeros(first.shape);
                for (int j = 0; j < k; ++j) {
                    double w = c.at(j);
                    const Array& a = in(n, 1 + j);
                    for (int i = 0; i < a.size(); ++i) n.value.at(i) += w * a.at(i);
                }
                break;
            }
            case Op::Sum: {
                const Array& a = in(n, 0);
                n.value = Array::scalar(std::accumulate(a.data.begin(), a.data.end(), 0.0));
                break;
            }
            case Op::Mean: {
                const Array& a = in(n, 0);
                n.value = Array::scalar(
                    std::accumulate(a.data.begin(), a.data.end(), 0.0) / a.size());
                break;
            }
            default:
                break;
        }
    }

    void propagate(int id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        bool any = false;
        for (double g : n.grad.data)
            if (g != 0.0) { any = true; break; }
        if (!any || n.inputs.empty()) return;
        const Array& g = n.grad;
        switch (n.op) {
            case Op::MatMul: {
                const Array& a = in(n, 0);
                const Array& b = in(n, 1);
                Array& da = in_grad(n, 0);
                Array& db = in_grad(n, 1);
                int m = a.shape[0], k = a.shape[1], p = b.shape[1];
                for (int i = 0; i < m; ++i)
                    for (int t = 0; t < k; ++t) {
                        double s = 0.0;
                        for (int j = 0; j < p; ++j) s += g.at(i, j) * b.at(t, j);
                        da.at(i, t) += s;
                    }
                for (int t = 0; t < k; ++t)
                    for (int j = 0; j < p; ++j) {
                        double s = 0.0;
                        for (int i = 0; i < m; ++i) s += a.at(i, t) * g.at(i, j);
                        db.at(t, j) += s;
                    }
                break;
            }
            case Op::Add: {
                const Array& a = in(n, 0);
                const Array& b = in(n, 1);
                Array& da = in_grad(n, 0);
                Array& db = in_grad(n, 1);
                for (int i = 0; i < a.size(); ++i) da.at(i) += g.at(i);
                if (a.same_shape(b)) {
                    for (int i = 0; i < b.size(); ++i) db.at(i) += g.at(i);
                } else {
                    for (int r = 0; r < a.shape[0]; ++r)
                        for (int c = 0; c < a.shape[1]; ++c) db.at(c) += g.at(r, c);
                }
                break;
            }
            case Op::Scale: {
                Array& da = in_grad(n, 0);
                for (int i = 0; i < da.size(); ++i) da.at(i) += n.coeff * g.at(i);
                break;
            }
            case Op::Relu: {
                const Array& a = in(n, 0);
                Array& da = in_grad(n, 0);
                for (int i = 0; i < a.size(); ++i)
                    if (a.at(i) > 0.0) da.at(i) += g.at(i);
                break;
            }
            case Op::Identity: {
                Array& da = in_grad(n, 0);
                for (int i = 0; i < da.size(); ++i) da.at(i) += g.at(i);
                break;
            }
            case Op::Zero:
                break;
            case Op::MeanPoolPairs: {
                const Array& a = in(n, 0);
                Array& da = in_grad(n, 0);
                int w = a.last_dim(), outer = a.outer_size();
                for (int o = 0; o < outer; ++o) {
                    const double* go = g.data.data() + static_cast<size_t>(o) * w;
                    double* d = da.data.data() + static_cast<size_t>(o) * w;
                    for (int c = 0; c < w; c += 2) {
                        if (c + 1 < w) {
                            double s = 0.5 * (go[c] + go[c + 1]);
                            d[c] += s;
                            d[c + 1] += s;
                        } else {
                            d[c] += go[c];
                        }
                    }
                }
                break;
            }
            case Op::Row: {
                Array& da = in_grad(n, 0);
                int c = in(n, 0).shape[1];
                for (int j = 0; j < c; ++j) da.at(n.index, j) += g.at(j);
                break;
            }
            case Op::Softmax: {
                const Array& y = n.value;
                Array& da = in_grad(n, 0);
                int k = y.last_dim(), outer = y.outer_size();
                for (int o = 0; o < outer; ++o) {
                    const double* yr = y.data.data() + static_cast<size_t>(o) * k;
                    const double* gr = g.data.data() + static_cast<size_t>(o) * k;
                    double* d = da.data.data() + static_cast<size_t>(o) * k;
                    double dot = 0.0;
                    for (int j = 0; j < k; ++j) dot += gr[j] * yr[j];
                    for (int j = 0; j < k; ++j) d[j] += yr[j] * (gr[j] - dot);
                }
                break;
            }
            case Op::LogSumExp: {
                const Array& a = in(n, 0);
                Array& da = in_grad(n, 0);
                int k = a.last_dim(), outer = a.outer_size();
                for (int o = 0; o < outer; ++o) {
                    const double* r = a.data.data() + static_cast<size_t>(o) * k;
                    double* d = da.data.data() + static_cast<size_t>(o) * k;
                    double go = g.at(o);
                    double mx = *std::max_element(r, r + k);
                    double s = 0.0;
                    for (int j = 0; j < k; ++j) s += std::exp(r[j] - mx);
                    for (int j = 0; j < k; ++j) d[j] += go * std::exp(r[j] - mx) / s;
                }
                break;
            }
            case Op::Softplus: {
                const Array& a = in(n, 0);
                Array& da = in_grad(n, 0);
                for (int i = 0; i < a.size(); ++i)
                    da.at(i) += g.at(i) / (1.0 + std::exp(-a.at(i)));
                break;
            }
            case Op::CrossEntropyLogits: {
                const Array& z = in(n, 0);
                Array& dz = in_grad(n, 0);
                int b = z.shape[0], c = z.shape[1];
                double go = g.at(0) / b;
                for (int i = 0; i < b; ++i) {
                    const double* r = z.data.data() + static_cast<size_t>(i) * c;
                    double* d = dz.data.data() + static_cast<size_t>(i) * c;
                    double mx = *std::max_element(r, r + c);
                    double s = 0.0;
                    for (int j = 0; j < c; ++j) s += std::exp(r[j] - mx);
                    for (int j = 0; j < c; ++j) {
                        double p = std::exp(r[j] - mx) / s;
                        d[j] += go * (p - (j == n.labels[static_cast<size_t>(i)] ? 1.0 : 0.0));
                    }
                }
                break;
            }
            case Op::Mse: {
                const Array& p = in(n, 0);
                const Array& t = in(n, 1);
                Array& dp = in_grad(n, 0);
                Array& dt = in_grad(n, 1);
                double go = 2.0 * g.at(0) / p.size();
                for (int i = 0; i < p.size(); ++i) {
                    double d = go * (p.at(i) - t.at(i));
                    dp.at(i) += d;
                    dt.at(i) -= d;
                }
                break;
            }
            case Op::WeightedSum: {
                const Array& c = in(n, 0);
                Array& dc = in_grad(n, 0);
                int k = static_cast<int>(n.inputs.size()) - 1;
                for (int j = 0; j < k; ++j) {
                    const Array& a = in(n, 1 + j);
                    Array& da = in_grad(n, 1 + j);
                    double w = c.at(j);
                    double dot = 0.0;
                    for (int i = 0; i < a.size(); ++i) {
                        da.at(i) += w * g.at(i);
                        dot += g.at(i) * a.at(i);
                    }
                    dc.at(j) += dot;
                }
                break;
            }
            case Op::Sum: {
                Array& da = in_grad(n, 0);
                double go = g.at(0);
                for (int i = 0; i < da.size(); ++i) da.at(i) += go;
                break;
            }
            case Op::Mean: {
                Array& da = in_grad(n, 0);
                double go = g.at(0) / da.size();
                for (int i = 0; i < da.size(); ++i) da.at(i) += go;
                break;
            }
            default:
                break;
        }
    }
};

// Free-function spellings; call sites read like expressions.
inline Value matmul(Value a, Value b) { return a.graph->matmul(a, b); }
inline Value add(Value a, Value b) { return a.graph->add(a, b); }
inline Value scale(Value a, double c) { return a.graph->scale(a, c); }
inline Value relu(Value a) { return a.graph->relu(a); }
inline Value identity(Value a) { return a.graph->identity(a); }
inline Value zero_like(Value a) { return a.graph->zero_like(a); }
inline Value mean_pool_pairs(Value a) { return a.graph->mean_pool_pairs(a); }
inline Value row(Value m, int r) { return m.graph->row(m, r); }
inline Value softmax(Value a) { return a.graph->softmax(a); }
inline Value logsumexp(Value a) { return a.graph->logsumexp(a); }
inline Value softplus(Value a) { return a.graph->softplus(a); }
inline Value cross_entropy_logits(Value z, std::vector<int> labels) {
    return z.graph->cross_entropy_logits(z, std::move(labels));
}
inline Value mse(Value p, Value t) { return p.graph->mse(p, t); }
inline Value weighted_sum(Value coeffs, const std::vector<Value>& arrays) {
    return coeffs.graph->weighted_sum(coeffs, arrays);
}
inline Value sum(Value a) { return a.graph->sum(a); }
inline Value mean(Value a) { return a.graph->mean(a); }

// ---------------------------------------------------------------------------
// Central finite differences: (f(x+eps*e_i) - f(x-eps*e_i)) / 2eps.
// The independent oracle every backward implementation is checked against.
// ---------------------------------------------------------------------------
inline Array finite_difference(const std::function<double(const Array&)>& f, const Array& x,
                               double eps) {
    if (eps <= 0.0) throw ConfigError("finite_difference: eps must be positive");
    Array g = Array::zeros(x.shape);
    Array probe = x;
    for (int i = 0; i < x.size(); ++i) {
        double orig = probe.at(i);
        probe.at(i) = orig + eps;
        double hi = f(probe);
        probe.at(i) = orig - eps;
        double lo = f(probe);
        probe.at(i) = orig;
        if (!std::isfinite(hi) || !std::isfinite(lo))
            throw NonFiniteError("finite_difference: function value is not finite");
        g.at(i) = (hi - lo) / (2.0 * eps);
    }
    return g;
}

}  // namespace betanas::grad
