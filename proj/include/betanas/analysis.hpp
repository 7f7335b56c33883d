#pragma once

#include <functional>

#include "betanas/alpha.hpp"
#include "betanas/array.hpp"
#include "betanas/regularize.hpp"
#include "betanas/space.hpp"

namespace betanas::analysis {

// Diagnostics computed from alpha snapshots: pooled alpha statistics,
// per-edge beta spread, the mixture-norm sensitivity measure, and the
// skip-domination convergence proxy phi.

struct AlphaStats {
    double mean = 0.0;
    double median = 0.0;
    double std_dev = 0.0;
};

// Pooled over every entry of every edge. Median averages the two middle
// values for even counts; std is the population form.
inline AlphaStats alpha_stats(const supernet::AlphaTable& alpha) {
    const auto& d = alpha.values.data;
    if (d.empty()) throw ConfigError("alpha_stats: empty table");
    AlphaStats s;
    double n = static_cast<double>(d.size());
    for (double v : d) s.mean += v;
    s.mean /= n;
    double acc = 0.0;
    for (double v : d) acc += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(acc / n);
    std::vector<double> sorted(d);
    std::sort(sorted.begin(), sorted.end());
    size_t m = sorted.size() / 2;
    s.median = (sorted.size() % 2 == 1) ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
    return s;
}

// Euclidean norm of one mixture row; on the probability simplex it ranges
// over [1/sqrt(K), 1), minimal at uniform, maximal toward one-hot.
inline double lipschitz_measure(const grad::Array& beta_row) {
    double s = 0.0;
    for (double v : beta_row.data) s += v * v;
    return std::sqrt(s);
}

struct BetaStats {
    std::vector<double> row_std;        // population std per edge row
    double total_std = 0.0;             // sum over edges
    std::vector<double> lipschitz;      // norm per edge row
    double lipschitz_sum = 0.0;
};

inline BetaStats beta_stats(const supernet::AlphaTable& alpha) {
    supernet::BetaTable beta = supernet::beta_from_alpha(alpha);
    BetaStats s;
    int e = beta.num_edges(), k = beta.num_ops();
    s.row_std.reserve(static_cast<size_t>(e));
    s.lipschitz.reserve(static_cast<size_t>(e));
    for (int r = 0; r < e; ++r) {
        double mean = 0.0, sq = 0.0;
        for (int c = 0; c < k; ++c) mean += beta.at(r, c);
        mean /= k;
        for (int c = 0; c < k; ++c) {
            double d = beta.at(r, c) - mean;
            sq += d * d;
        }
        double sd = std::sqrt(sq / k);
        s.row_std.push_back(sd);
        s.total_std += sd;
        double norm = 0.0;
        for (int c = 0; c < k; ++c) norm += beta.at(r, c) * beta.at(r, c);
        norm = std::sqrt(norm);
        s.lipschitz.push_back(norm);
        s.lipschitz_sum += norm;
    }
    return s;
}

inline int find_edge(const space::SpaceSpec& space, int from, int to) {
    for (int e = 0; e < space.num_edges(); ++e)
        if (space.edges[static_cast<size_t>(e)].from == from &&
            space.edges[static_cast<size_t>(e)].to == to)
            return e;
    throw SpaceMismatchError("no edge (" + std::to_string(from) + ", " + std::to_string(to) +
                             ") in this space");
}

// Convergence proxy over a chain of h nodes ending at the output node:
//   phi = sum_{i=0}^{h-2}  factor(edge(layout[i], layout[h-1]), conv)^2
//                        * prod_{t=0}^{i-1} factor(edge(layout[t], layout[i]), skip)^2
// With factor = beta this scores how much the weighted-op path into the
// output is amplified by upstream skip mass; large skip weights inflate it.
inline double phi_over(const space::SpaceSpec& space,
                       const std::function<double(int, int)>& factor,
                       const std::vector<int>& layout, int conv_index, int skip_index) {
    int h = static_cast<int>(layout.size());
    if (h < 2) throw SpaceMismatchError("phi layout needs at least 2 nodes");
    if (conv_index < 0 || conv_index >= space.num_ops() || skip_index < 0 ||
        skip_index >= space.num_ops())
        throw SpaceMismatchError("phi op index outside the candidate set");
    for (int v : layout)
        if (v < 0 || v >= space.nodes) throw SpaceMismatchError("phi layout node out of range");
    double phi = 0.0;
    int out = layout[static_cast<size_t>(h - 1)];
    for (int i = 0; i <= h - 2; ++i) {
        int e_conv = find_edge(space, layout[static_cast<size_t>(i)], out);
        double f = factor(e_conv, conv_index);
        double term = f * f;
        for (int t = 0; t < i; ++t) {
            int e_skip = find_edge(space, layout[static_cast<size_t>(t)],
                                   layout[static_cast<size_t>(i)]);
            double b = factor(e_skip, skip_index);
            term *= b * b;
        }
        phi += term;
    }
    return phi;
}

inline double convergence_phi(const space::SpaceSpec& space, const supernet::BetaTable& beta,
                              const std::vector<int>& layout, int conv_index, int skip_index) {
    if (beta.num_edges() != space.num_edges() || beta.num_ops() != space.num_ops())
        throw SpaceMismatchError("beta table does not match space");
    return phi_over(
        space, [&](int e, int k) { return beta.at(e, k); }, layout, conv_index, skip_index);
}

// Variant with each beta factor damped by its decay-step theta.
inline double convergence_phi_modulated(const space::SpaceSpec& space,
                                        const supernet::BetaTable& beta,
                                        const regularize::ThetaReport& theta,
                                        const std::vector<int>& layout, int conv_index,
                                        int skip_index) {
    if (beta.num_edges() != space.num_edges() || beta.num_ops() != space.num_ops())
        throw SpaceMismatchError("beta table does not match space");
    if (!theta.theta.same_shape(beta.values))
        throw SpaceMismatchError("theta table does not match beta table");
    return phi_over(
        space, [&](int e, int k) { return theta.theta.at(e, k) * beta.at(e, k); }, layout,
        conv_index, skip_index);
}

// Per-epoch diagnostic row, as serialized into trajectory files.
struct StatsRecord {
    double alpha_mean = 0.0;
    double alpha_median = 0.0;
    double alpha_std = 0.0;
    std::vector<double> beta_row_stds;
    double beta_total_std = 0.0;
    std::vector<double> lipschitz_per_edge;
    double lipschitz_sum = 0.0;
    double phi = 0.0;
};

// Default phi wiring for a space: full node chain 0..nodes-1, conv = first
// weighted op, skip = the skip op. Spaces missing either op report phi = 0.
inline StatsRecord stats_record(const supernet::AlphaTable& alpha,
                                const space::SpaceSpec& space) {
    StatsRecord rec;
    AlphaStats as = alpha_stats(alpha);
    rec.alpha_mean = as.mean;
    rec.alpha_median = as.median;
    rec.alpha_std = as.std_dev;
    BetaStats bs = beta_stats(alpha);
    rec.beta_row_stds = std::move(bs.row_std);
    rec.beta_total_std = bs.total_std;
    rec.lipschitz_per_edge = std::move(bs.lipschitz);
    rec.lipschitz_sum = bs.lipschitz_sum;
    int conv = -1;
    for (int k = 0; k < space.num_ops(); ++k)
        if (space::op_has_weights(space.ops[static_cast<size_t>(k)])) {
            conv = k;
            break;
        }
    int skip = space.op_index(space::OpKind::Skip);
    if (conv >= 0 && skip >= 0) {
        std::vector<int> layout(static_cast<size_t>(space.nodes));
        for (int i = 0; i < space.nodes; ++i) layout[static_cast<size_t>(i)] = i;
        rec.phi = convergence_phi(space, supernet::beta_from_alpha(alpha), layout, conv, skip);
    }
    return rec;
}

}  // namespace betanas::analysis
