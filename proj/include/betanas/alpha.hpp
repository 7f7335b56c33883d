#pragma once

#include "betanas/array.hpp"

namespace betanas::supernet {

// Architecture parameters: one row per edge, one column per candidate op.
// AlphaTable holds raw logits; BetaTable holds the row-softmax of those
// logits. Rows are indexed in edge order (see space::SpaceSpec::edges).
struct AlphaTable {
    grad::Array values;  // [num_edges, num_ops]

    AlphaTable() = default;
    AlphaTable(int num_edges, int num_ops)
        : values(grad::Array::zeros({num_edges, num_ops})) {}

    int num_edges() const { return values.shape.empty() ? 0 : values.shape[0]; }
    int num_ops() const { return values.shape.size() < 2 ? 0 : values.shape[1]; }
    double& at(int e, int k) { return values.at(e, k); }
    double at(int e, int k) const { return values.at(e, k); }
};

struct BetaTable {
    grad::Array values;  // [num_edges, num_ops], rows sum to 1

    int num_edges() const { return values.shape.empty() ? 0 : values.shape[0]; }
    int num_ops() const { return values.shape.size() < 2 ? 0 : values.shape[1]; }
    double at(int e, int k) const { return values.at(e, k); }
};

// Row-wise stable softmax.
inline BetaTable beta_from_alpha(const AlphaTable& alpha) {
    BetaTable beta;
    beta.values = alpha.values;
    int e = alpha.num_edges(), k = alpha.num_ops();
    for (int r = 0; r < e; ++r) {
        double mx = beta.values.at(r, 0);
        for (int c = 1; c < k; ++c) mx = std::max(mx, beta.values.at(r, c));
        double s = 0.0;
        for (int c = 0; c < k; ++c) {
            double v = std::exp(beta.values.at(r, c) - mx);
            beta.values.at(r, c) = v;
            s += v;
        }
        for (int c = 0; c < k; ++c) beta.values.at(r, c) /= s;
    }
    return beta;
}

}  // namespace betanas::supernet
