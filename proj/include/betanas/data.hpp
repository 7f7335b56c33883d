#pragma once

#include <array>
#include <atomic>
#include <memory>
#include <string>

#include "betanas/array.hpp"

namespace betanas::bench {

// ---------------------------------------------------------------------------
// Synthetic datasets. Three generators:
//   blobs — Gaussian clusters around well-separated class centers (linearly
//           separable at zero noise);
//   rings — concentric annuli per class in the first two dims, with a small
//           fixed center offset so a linear probe beats chance but stays
//           well below a trained nonlinear net;
//   xor   — opposite-quadrant classes in the first two dims (2 classes).
// Features are standardized per dimension over the whole set. Samples are
// dealt into four disjoint stratified splits: the search pair (train/val for
// the bilevel loop) and the eval pair (train/test for benchmark entries).
// ---------------------------------------------------------------------------

struct DatasetSpec {
    std::string kind;
    int n = 0;
    int width = 0;
    int classes = 0;
    double noise = 0.0;
    uint64_t seed = 0;
};

enum class Split { SearchTrain = 0, SearchVal = 1, EvalTrain = 2, EvalTest = 3 };

inline const char* split_name(Split s) {
    switch (s) {
        case Split::SearchTrain: return "search_train";
        case Split::SearchVal: return "search_val";
        case Split::EvalTrain: return "eval_train";
        case Split::EvalTest: return "eval_test";
    }
    return "?";
}

struct SyntheticDataset {
    grad::Array features;  // [n, width], standardized
    std::vector<int> labels;
    std::array<std::vector<int>, 4> splits;  // disjoint indices into features
    DatasetSpec spec;
    // Counts samples handed out per split; lets tests assert the bilevel
    // loop's data hygiene. Shared across copies.
    std::shared_ptr<std::array<std::atomic<long long>, 4>> access =
        std::make_shared<std::array<std::atomic<long long>, 4>>();

    const std::vector<int>& split(Split s) const { return splits[static_cast<size_t>(s)]; }

    long long accesses(Split s) const { return (*access)[static_cast<size_t>(s)].load(); }

    // Assembles a batch from positions WITHIN the given split (not raw
    // dataset indices) and bumps that split's access counter.
    std::pair<grad::Array, std::vector<int>> gather(Split s,
                                                    const std::vector<int>& positions) const {
        const std::vector<int>& idx = split(s);
        int b = static_cast<int>(positions.size());
        if (b == 0) throw ConfigError("gather: empty batch");
        grad::Array x = grad::Array::zeros({b, spec.width});
        std::vector<int> y(static_cast<size_t>(b));
        for (int i = 0; i < b; ++i) {
            int p = positions[static_cast<size_t>(i)];
            if (p < 0 || p >= static_cast<int>(idx.size()))
                throw ConfigError("gather: position outside split");
            int row = idx[static_cast<size_t>(p)];
            for (int c = 0; c < spec.width; ++c) x.at(i, c) = features.at(row, c);
            y[static_cast<size_t>(i)] = labels[static_cast<size_t>(row)];
        }
        (*access)[static_cast<size_t>(s)].fetch_add(b);
        return {std::move(x), std::move(y)};
    }

    // Whole split as one batch.
    std::pair<grad::Array, std::vector<int>> full_split(Split s) const {
        const std::vector<int>& idx = split(s);
        int b = static_cast<int>(idx.size());
        if (b == 0) throw ConfigError("full_split: empty split");
        grad::Array x = grad::Array::zeros({b, spec.width});
        std::vector<int> y(static_cast<size_t>(b));
        for (int i = 0; i < b; ++i) {
            int row = idx[static_cast<size_t>(i)];
            for (int c = 0; c < spec.width; ++c) x.at(i, c) = features.at(row, c);
            y[static_cast<size_t>(i)] = labels[static_cast<size_t>(row)];
        }
        (*access)[static_cast<size_t>(s)].fetch_add(b);
        return {std::move(x), std::move(y)};
    }
};

inline SyntheticDataset make_dataset(const std::string& kind, int n, int width, int classes,
                                     double noise, uint64_t seed) {
    if (kind != "blobs" && kind != "rings" && kind != "xor")
        throw ConfigError("unknown dataset kind '" + kind + "' (expected blobs|rings|xor)");
    if (classes < 2) throw ConfigError("dataset needs at least 2 classes");
    if (n < 4 * classes) throw ConfigError("dataset needs n >= 4 * classes");
    if (width < 2) throw ConfigError("dataset needs width >= 2");
    if (noise < 0.0) throw ConfigError("noise must be non-negative");
    if (kind == "xor" && classes != 2) throw ConfigError("xor dataset supports exactly 2 classes");

    SyntheticDataset d;
    d.spec = DatasetSpec{kind, n, width, classes, noise, seed};
    d.features = grad::Array::zeros({n, width});
    d.labels.resize(static_cast<size_t>(n));
    grad::Rng rng(seed);
    grad::Rng gen = rng.fork(1);

    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int i = 0; i < n; ++i) {
        int c = i % classes;  // round-robin keeps class counts within 1
        d.labels[static_cast<size_t>(i)] = c;
        if (kind == "blobs") {
            // centers at +-3 along alternating axes
            int axis = (c / 2) % width;
            double sign = (c % 2 == 0) ? 1.0 : -1.0;
            for (int k = 0; k < width; ++k) {
                double center = (k == axis) ? 3.0 * sign : 0.0;
                d.features.at(i, k) = center + noise * gen.normal();
            }
        } else if (kind == "rings") {
            double radius = 1.0 + 1.2 * c + noise * gen.normal();
            double angle = two_pi * gen.uniform();
            double shift = (c % 2 == 1) ? 0.45 : 0.0;  // offset ring so a linear
                                                       // probe beats chance
            d.features.at(i, 0) = radius * std::cos(angle) + shift;
            d.features.at(i, 1) = radius * std::sin(angle);
            for (int k = 2; k < width; ++k) d.features.at(i, k) = noise * gen.normal();
        } else {  // xor
            int quadrant = (i / classes) % 2;  // class 0: (+,+)/(-,-); class 1: (+,-)/(-,+)
            double sx = (quadrant == 0) ? 1.0 : -1.0;
            double sy = (c == 0) ? sx : -sx;
            d.features.at(i, 0) = sx * gen.uniform(0.25, 1.25) + noise * gen.normal();
            d.features.at(i, 1) = sy * gen.uniform(0.25, 1.25) + noise * gen.normal();
            for (int k = 2; k < width; ++k) d.features.at(i, k) = noise * gen.normal();
        }
    }

    // standardize per dimension (constant dims are centered only)
    for (int k = 0; k < width; ++k) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += d.features.at(i, k);
        mean /= n;
        double var = 0.0;
        for (int i = 0; i < n; ++i) {
            double v = d.features.at(i, k) - mean;
            var += v * v;
        }
        double sd = std::sqrt(var / n);
        for (int i = 0; i < n; ++i) {
            double v = d.features.at(i, k) - mean;
            d.features.at(i, k) = sd > 1e-12 ? v / sd : v;
        }
    }

    // stratified deal into 4 splits: shuffle within class, round-robin
    grad::Rng split_rng = rng.fork(2);
    for (int c = 0; c < classes; ++c) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (d.labels[static_cast<size_t>(i)] == c) members.push_back(i);
        split_rng.shuffle(members);
        for (size_t j = 0; j < members.size(); ++j)
            d.splits[j % 4].push_back(members[j]);
    }
    for (auto& s : d.splits) std::sort(s.begin(), s.end());
    return d;
}

// Fraction of rows whose argmax logit matches the label.
inline double accuracy(const grad::Array& logits, const std::vector<int>& labels) {
    if (logits.shape.size() != 2 || logits.shape[0] != static_cast<int>(labels.size()))
        throw ShapeError("accuracy: logits/labels mismatch");
    int b = logits.shape[0], c = logits.shape[1];
    int hits = 0;
    for (int i = 0; i < b; ++i) {
        int best = 0;
        for (int j = 1; j < c; ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        if (best == labels[static_cast<size_t>(i)]) ++hits;
    }
    return static_cast<double>(hits) / b;
}

}  // namespace betanas::bench
