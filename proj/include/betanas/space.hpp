#pragma once

#include <array>
#include <map>
#include <sstream>
#include <string>

#include "betanas/alpha.hpp"
#include "betanas/array.hpp"

namespace betanas::space {

// ---------------------------------------------------------------------------
// Cell-structured search space: a DAG on `nodes` feature nodes where every
// ordered pair (i, j), i < j, carries one edge, and each edge picks one op
// from a fixed candidate list. Node 0 is the input; later nodes sum their
// incoming edge outputs; the last node feeds the classifier.
// ---------------------------------------------------------------------------

enum class OpKind { Zero, Skip, MeanPool, Linear, LinearReLU };

// Zero/Skip/MeanPool carry no weights; Linear/LinearReLU own a width x width
// matrix per edge.
inline bool op_has_weights(OpKind k) {
    return k == OpKind::Linear || k == OpKind::LinearReLU;
}

inline const char* op_token(OpKind k) {
    switch (k) {
        case OpKind::Zero: return "zero";
        case OpKind::Skip: return "skip";
        case OpKind::MeanPool: return "pool";
        case OpKind::Linear: return "linear";
        case OpKind::LinearReLU: return "linrelu";
    }
    return "?";
}

inline OpKind op_from_token(const std::string& t) {
    if (t == "zero") return OpKind::Zero;
    if (t == "skip") return OpKind::Skip;
    if (t == "pool") return OpKind::MeanPool;
    if (t == "linear") return OpKind::Linear;
    if (t == "linrelu") return OpKind::LinearReLU;
    throw ParseError("unknown op token '" + t + "'");
}

struct Edge {
    int from = 0;
    int to = 0;
};

struct SpaceSpec {
    int nodes = 0;
    int width = 0;                // feature dimension carried by every node
    std::vector<OpKind> ops;      // candidate list, shared by all edges
    std::vector<Edge> edges;      // ordered: (0,1), (0,2), (1,2), (0,3), ...

    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_ops() const { return static_cast<int>(ops.size()); }

    int op_index(OpKind k) const {
        for (int i = 0; i < num_ops(); ++i)
            if (ops[static_cast<size_t>(i)] == k) return i;
        return -1;
    }

    bool operator==(const SpaceSpec& o) const {
        return nodes == o.nodes && width == o.width && ops == o.ops;
    }
    bool operator!=(const SpaceSpec& o) const { return !(*this == o); }

    // Total genotypes = ops^edges; guarded so enumeration stays cheap.
    long long num_genotypes() const {
        long long n = 1;
        for (int e = 0; e < num_edges(); ++e) {
            n *= num_ops();
            if (n > (1LL << 40)) return n;  // already far past any cap
        }
        return n;
    }
};

// Edges ordered by destination node, then source: all edges into node 1,
// then into node 2, and so on. (0,1), (0,2), (1,2), (0,3), (1,3), (2,3)...
inline SpaceSpec build_space(int nodes, int width, std::vector<OpKind> ops) {
    if (nodes < 2 || nodes > 5)
        throw ConfigError("node count must be in [2, 5], got " + std::to_string(nodes));
    if (width < 2 || width > 64)
        throw ConfigError("width must be in [2, 64], got " + std::to_string(width));
    if (ops.empty()) throw ConfigError("space needs at least one candidate op");
    for (size_t i = 0; i < ops.size(); ++i)
        for (size_t j = i + 1; j < ops.size(); ++j)
            if (ops[i] == ops[j]) throw ConfigError("duplicate candidate op");
    SpaceSpec s;
    s.nodes = nodes;
    s.width = width;
    s.ops = std::move(ops);
    for (int to = 1; to < nodes; ++to)
        for (int from = 0; from < to; ++from) s.edges.push_back({from, to});
    return s;
}

// One discrete architecture: an op choice per edge, in edge order.
struct Genotype {
    std::vector<OpKind> choices;

    bool operator==(const Genotype& o) const { return choices == o.choices; }
    bool operator<(const Genotype& o) const { return choices < o.choices; }
};

inline std::string encode_genotype(const Genotype& g) {
    std::string out;
    for (size_t i = 0; i < g.choices.size(); ++i) {
        if (i) out += '|';
        out += op_token(g.choices[i]);
    }
    return out;
}

inline Genotype decode_genotype(const std::string& text, const SpaceSpec& space) {
    Genotype g;
    std::string token;
    std::istringstream in(text);
    int pos = 0;
    while (std::getline(in, token, '|')) {
        OpKind k;
        try {
            k = op_from_token(token);
        } catch (const ParseError&) {
            throw ParseError("genotype position " + std::to_string(pos) + ": unknown op token '" +
                             token + "'");
        }
        if (space.op_index(k) < 0)
            throw UnknownGenotypeError("genotype position " + std::to_string(pos) + ": op '" +
                                       token + "' not in this space");
        g.choices.push_back(k);
        ++pos;
    }
    if (static_cast<int>(g.choices.size()) != space.num_edges())
        throw UnknownGenotypeError("genotype '" + text + "' has " +
                                   std::to_string(g.choices.size()) + " choices, space has " +
                                   std::to_string(space.num_edges()) + " edges");
    return g;
}

// Every genotype in deterministic lexicographic order over op indices:
// the last edge's index varies fastest. Refuses spaces past the cap.
inline std::vector<Genotype> enumerate_genotypes(const SpaceSpec& space,
                                                 long long cap = 4096) {
    long long total = space.num_genotypes();
    if (total > cap)
        throw CapError("space has " + std::to_string(total) + " genotypes, cap is " +
                       std::to_string(cap));
    std::vector<Genotype> out;
    out.reserve(static_cast<size_t>(total));
    int e = space.num_edges(), k = space.num_ops();
    std::vector<int> idx(static_cast<size_t>(e), 0);
    for (long long t = 0; t < total; ++t) {
        Genotype g;
        g.choices.reserve(static_cast<size_t>(e));
        for (int i = 0; i < e; ++i) g.choices.push_back(space.ops[static_cast<size_t>(idx[static_cast<size_t>(i)])]);
        out.push_back(std::move(g));
        for (int i = e - 1; i >= 0; --i) {
            if (++idx[static_cast<size_t>(i)] < k) break;
            idx[static_cast<size_t>(i)] = 0;
        }
    }
    return out;
}

// Argmax per row; ties go to the lowest op index, so the result is a pure
// function of the table (no RNG involved).
inline Genotype discretize(const supernet::AlphaTable& alpha, const SpaceSpec& space) {
    if (alpha.num_edges() != space.num_edges() || alpha.num_ops() != space.num_ops())
        throw SpaceMismatchError("alpha table is " + std::to_string(alpha.num_edges()) + "x" +
                                 std::to_string(alpha.num_ops()) + ", space wants " +
                                 std::to_string(space.num_edges()) + "x" +
                                 std::to_string(space.num_ops()));
    for (double v : alpha.values.data)
        if (std::isnan(v)) throw NonFiniteError("discretize: alpha contains NaN");
    Genotype g;
    for (int e = 0; e < space.num_edges(); ++e) {
        int best = 0;
        for (int k = 1; k < space.num_ops(); ++k)
            if (alpha.at(e, k) > alpha.at(e, best)) best = k;
        g.choices.push_back(space.ops[static_cast<size_t>(best)]);
    }
    return g;
}

}  // namespace betanas::space
