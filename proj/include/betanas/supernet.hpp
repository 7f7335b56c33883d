#pragma once

#include "betanas/alpha.hpp"
#include "betanas/array.hpp"
#include "betanas/grad.hpp"
#include "betanas/space.hpp"

namespace betanas::supernet {

// Learnable operation weights shared by the supernet and by every discrete
// genotype carved out of it. Weighted op-kinds own one [width, width] matrix
// per (edge, op) slot; parameter-free slots stay empty. A linear classifier
// head maps the last node's features to logits.
struct SupernetWeights {
    std::vector<std::vector<grad::Parameter>> edge_op;  // [edges][ops], empty unless weighted
    grad::Parameter classifier_w;                       // [width, classes]
    grad::Parameter classifier_b;                       // [classes]
    int width = 0;
    int classes = 0;

    static SupernetWeights init(const space::SpaceSpec& space, int classes, grad::Rng& rng) {
        if (classes < 2) throw ConfigError("classifier needs at least 2 classes");
        SupernetWeights w;
        w.width = space.width;
        w.classes = classes;
        double bound = 1.0 / std::sqrt(static_cast<double>(space.width));
        w.edge_op.resize(static_cast<size_t>(space.num_edges()));
        for (int e = 0; e < space.num_edges(); ++e) {
            auto& slots = w.edge_op[static_cast<size_t>(e)];
            slots.resize(static_cast<size_t>(space.num_ops()));
            for (int k = 0; k < space.num_ops(); ++k) {
                if (!space::op_has_weights(space.ops[static_cast<size_t>(k)])) continue;
                grad::Array m = grad::Array::zeros({space.width, space.width});
                for (double& v : m.data) v = rng.uniform(-bound, bound);
                slots[static_cast<size_t>(k)] = grad::Parameter(std::move(m));
            }
        }
        // zero-init head: logits start flat so early loss differences come
        // from the ops, not from a random readout
        w.classifier_w = grad::Parameter(grad::Array::zeros({space.width, classes}));
        w.classifier_b = grad::Parameter(grad::Array::zeros({classes}));
        return w;
    }

    std::vector<grad::Parameter*> all_params() {
        std::vector<grad::Parameter*> out;
        for (auto& slots : edge_op)
            for (auto& p : slots)
                if (p.value.size() > 0) out.push_back(&p);
        out.push_back(&classifier_w);
        out.push_back(&classifier_b);
        return out;
    }

    void zero_grad() {
        for (auto* p : all_params()) p->zero_grad();
    }
};

// One candidate op applied to the feature x flowing along edge e.
inline grad::Value apply_op(grad::Graph& g, const space::SpaceSpec& space, SupernetWeights& w,
                            int e, int k, grad::Value x) {
    switch (space.ops[static_cast<size_t>(k)]) {
        case space::OpKind::Zero: return g.zero_like(x);
        case space::OpKind::Skip: return g.identity(x);
        case space::OpKind::MeanPool: return g.mean_pool_pairs(x);
        case space::OpKind::Linear:
            return g.matmul(x, g.param(w.edge_op[static_cast<size_t>(e)][static_cast<size_t>(k)]));
        case space::OpKind::LinearReLU:
            return g.relu(
                g.matmul(x, g.param(w.edge_op[static_cast<size_t>(e)][static_cast<size_t>(k)])));
    }
    throw ConfigError("unhandled op kind");
}

// Mixture over candidate ops with explicit coefficients (one row, length
// num_ops). The output is linear in the coefficients by construction, which
// the tests exploit.
inline grad::Value mixed_edge_forward(grad::Graph& g, const space::SpaceSpec& space,
                                      SupernetWeights& w, grad::Value coeffs, int e,
                                      grad::Value x) {
    std::vector<grad::Value> outs;
    outs.reserve(static_cast<size_t>(space.num_ops()));
    for (int k = 0; k < space.num_ops(); ++k)
        outs.push_back(apply_op(g, space, w, e, k, x));
    return g.weighted_sum(coeffs, outs);
}

// Full continuous relaxation. Coefficient rows come from `mixture`, an
// [edges, ops] node: pass softmax(param(alpha)) for the usual softened
// supernet, or any explicit table to probe the mixture directly. Interior
// nodes sum their incoming edges; the last node feeds the classifier.
inline grad::Value supernet_forward_with(grad::Graph& g, const space::SpaceSpec& space,
                                         SupernetWeights& w, grad::Value mixture,
                                         grad::Value input) {
    std::vector<grad::Value> node_feat(static_cast<size_t>(space.nodes));
    std::vector<bool> has(static_cast<size_t>(space.nodes), false);
    node_feat[0] = input;
    has[0] = true;
    for (int e = 0; e < space.num_edges(); ++e) {
        const space::Edge& edge = space.edges[static_cast<size_t>(e)];
        if (!has[static_cast<size_t>(edge.from)])
            throw ConfigError("edge source node has no feature yet");
        grad::Value coeffs = g.row(mixture, e);
        grad::Value out = mixed_edge_forward(g, space, w, coeffs, e,
                                             node_feat[static_cast<size_t>(edge.from)]);
        size_t to = static_cast<size_t>(edge.to);
        node_feat[to] = has[to] ? g.add(node_feat[to], out) : out;
        has[to] = true;
    }
    grad::Value last = node_feat[static_cast<size_t>(space.nodes - 1)];
    return g.add(g.matmul(last, g.param(w.classifier_w)), g.param(w.classifier_b));
}

// Standard softened forward: mixture = row-softmax of the alpha parameter,
// differentiable through to alpha.
inline grad::Value supernet_forward(grad::Graph& g, const space::SpaceSpec& space,
                                    SupernetWeights& w, grad::Parameter& alpha,
                                    grad::Value input) {
    return supernet_forward_with(g, space, w, g.softmax(g.param(alpha)), input);
}

// Discrete architecture forward: exactly one op per edge, same weights.
inline grad::Value genotype_forward(grad::Graph& g, const space::SpaceSpec& space,
                                    SupernetWeights& w, const space::Genotype& geno,
                                    grad::Value input) {
    if (static_cast<int>(geno.choices.size()) != space.num_edges())
        throw SpaceMismatchError("genotype does not match space edge count");
    std::vector<grad::Value> node_feat(static_cast<size_t>(space.nodes));
    std::vector<bool> has(static_cast<size_t>(space.nodes), false);
    node_feat[0] = input;
    has[0] = true;
    for (int e = 0; e < space.num_edges(); ++e) {
        const space::Edge& edge = space.edges[static_cast<size_t>(e)];
        int k = space.op_index(geno.choices[static_cast<size_t>(e)]);
        if (k < 0) throw UnknownGenotypeError("genotype op not in this space");
        grad::Value out = apply_op(g, space, w, e, k,
                                   node_feat[static_cast<size_t>(edge.from)]);
        size_t to = static_cast<size_t>(edge.to);
        node_feat[to] = has[to] ? g.add(node_feat[to], out) : out;
        has[to] = true;
    }
    grad::Value last = node_feat[static_cast<size_t>(space.nodes - 1)];
    return g.add(g.matmul(last, g.param(w.classifier_w)), g.param(w.classifier_b));
}

// Trainable scalar count of a discrete net: width*width per weighted edge op
// plus the classifier head. Parameter-free ops contribute nothing.
inline long long param_count(const space::Genotype& geno, const space::SpaceSpec& space,
                             int classes) {
    long long n = static_cast<long long>(space.width) * classes + classes;
    for (space::OpKind k : geno.choices)
        if (space::op_has_weights(k)) n += static_cast<long long>(space.width) * space.width;
    return n;
}

}  // namespace betanas::supernet
