#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "betanas/supernet.hpp"

using namespace betanas;
using grad::Array;
using space::OpKind;

namespace {

space::SpaceSpec full_space() {
    return space::build_space(3, 4,
                              {OpKind::Zero, OpKind::Skip, OpKind::MeanPool, OpKind::LinearReLU});
}

Array random_batch(grad::Rng& rng, int b, int w) {
    Array x = Array::zeros({b, w});
    for (double& v : x.data) v = rng.normal();
    return x;
}

bool grad_close(double got, double want, double rel, double abs_floor) {
    double diff = std::abs(got - want);
    if (std::abs(want) < 1e-3) return diff < abs_floor;
    return diff / std::abs(want) < rel;
}

}  // namespace

TEST_CASE("weight init fills exactly the weighted slots") {
    space::SpaceSpec s = full_space();
    grad::Rng rng(1);
    supernet::SupernetWeights w = supernet::SupernetWeights::init(s, 3, rng);
    REQUIRE(w.width == 4);
    REQUIRE(w.classes == 3);
    double bound = 0.5;  // 1/sqrt(4)
    for (int e = 0; e < s.num_edges(); ++e) {
        for (int k = 0; k < s.num_ops(); ++k) {
            const grad::Parameter& p = w.edge_op[static_cast<size_t>(e)][static_cast<size_t>(k)];
            if (space::op_has_weights(s.ops[static_cast<size_t>(k)])) {
                REQUIRE(p.value.shape == std::vector<int>{4, 4});
                for (double v : p.value.data) {
                    REQUIRE(v >= -bound);
                    REQUIRE(v <= bound);
                }
            } else {
                REQUIRE(p.value.size() == 0);
            }
        }
    }
    REQUIRE(w.classifier_w.value.shape == std::vector<int>{4, 3});
    REQUIRE(w.classifier_b.value.shape == std::vector<int>{3});
    for (double v : w.classifier_w.value.data) REQUIRE(v == 0.0);
    for (double v : w.classifier_b.value.data) REQUIRE(v == 0.0);
    // 3 edges x 1 weighted op + classifier w + b
    REQUIRE(w.all_params().size() == 5);
    REQUIRE_THROWS_AS(supernet::SupernetWeights::init(s, 1, rng), ConfigError);
}

TEST_CASE("candidate ops compute their defining maps") {
    space::SpaceSpec s = full_space();
    grad::Rng rng(2);
    supernet::SupernetWeights w = supernet::SupernetWeights::init(s, 2, rng);
    Array x = random_batch(rng, 3, 4);

    grad::Graph g;
    grad::Value in = g.constant(x);
    grad::Value z = supernet::apply_op(g, s, w, 0, s.op_index(OpKind::Zero), in);
    grad::Value sk = supernet::apply_op(g, s, w, 0, s.op_index(OpKind::Skip), in);
    grad::Value pool = supernet::apply_op(g, s, w, 0, s.op_index(OpKind::MeanPool), in);
    grad::Value lin = supernet::apply_op(g, s, w, 0, s.op_index(OpKind::LinearReLU), in);
    g.forward();

    for (int i = 0; i < x.size(); ++i) {
        REQUIRE(g.value_of(z).at(i) == 0.0);
        REQUIRE(g.value_of(sk).at(i) == x.at(i));
    }
    for (int b = 0; b < 3; ++b) {
        double m01 = 0.5 * (x.at(b, 0) + x.at(b, 1));
        REQUIRE(g.value_of(pool).at(b, 0) == m01);
        REQUIRE(g.value_of(pool).at(b, 1) == m01);
    }
    const Array& wm =
        w.edge_op[0][static_cast<size_t>(s.op_index(OpKind::LinearReLU))].value;
    for (int b = 0; b < 3; ++b)
        for (int j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (int i = 0; i < 4; ++i) acc += x.at(b, i) * wm.at(i, j);
            REQUIRE(g.value_of(lin).at(b, j) == Catch::Approx(std::max(acc, 0.0)).epsilon(1e-12));
        }
}

TEST_CASE("the mixed edge output is linear in the mixture coefficients") {
    space::SpaceSpec s = full_space();
    grad::Rng rng(3);
    supernet::SupernetWeights w = supernet::SupernetWeights::init(s, 2, rng);
    Array x = random_batch(rng, 2, 4);
    Array coeffs = Array::zeros({1, 4});
    coeffs.at(0) = 0.1;
    coeffs.at(1) = 0.2;
    coeffs.at(2) = 0.3;
    coeffs.at(3) = 0.4;

    grad::Graph g;
    grad::Value in = g.constant(x);
    std::vector<grad::Value> parts;
    for (int k = 0; k < 4; ++k) parts.push_back(supernet::apply_op(g, s, w, 1, k, in));
    grad::Value mixed =
        supernet::mixed_edge_forward(g, s, w, g.row(g.constant(coeffs), 0), 1, in);
    g.forward();

    for (int i = 0; i < x.size(); ++i) {
        double want = 0.0;
        for (int k = 0; k < 4; ++k)
            want += coeffs.at(k) * g.value_of(parts[static_cast<size_t>(k)]).at(i);
        REQUIRE(g.value_of(mixed).at(i) == Catch::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("a one-hot mixture reproduces the discrete genotype network exactly") {
    space::SpaceSpec s = full_space();
    grad::Rng rng(4);
    supernet::SupernetWeights w = supernet::SupernetWeights::init(s, 3, rng);
    Array x = random_batch(rng, 5, 4);
    space::Genotype geno = space::decode_genotype("linrelu|skip|pool", s);

    Array mixture = Array::zeros({s.num_edges(), s.num_ops()});
    for (int e = 0; e < s.num_edges(); ++e)
        mixture.at(e, s.op_index(geno.choices[static_cast<size_t>(e)])) = 1.0;

    grad::Graph g;
    grad::Value soft =
        supernet::supernet_forward_with(g, s, w, g.constant(mixture), g.constant(x));
    grad::Value hard = supernet::genotype_forward(g, s, w, geno, g.constant(x));
    g.forward();
    for (int i = 0; i < g.value_of(hard).size(); ++i)
        REQUIRE(g.value_of(soft).at(i) == g.value_of(hard).at(i));
}

TEST_CASE("alpha gradients through the supernet match finite differences") {
    space::SpaceSpec s = full_space();
    grad::Rng rng(5);
    supernet::SupernetWeights w = supernet::SupernetWeights::init(s, 3, rng);
    Array x = random_batch(rng, 6, 4);
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) labels.push_back(rng.below(3));

    Array a0 = Array::zeros({s.num_edges(), s.num_ops()});
    for (double& v : a0.data) v = 0.3 * rng.normal();
    grad::Parameter alpha(a0);

    grad::Graph g;
    grad::Value logits = supernet::supernet_forward(g, s, w, alpha, g.constant(x));
    grad::Value loss = g.cross_entropy_logits(logits, labels);
    g.forward();
    g.backward(loss);
    Array got = alpha.grad;

    Array fd = grad::finite_difference(
        [&](const Array& a) {
            alpha.value = a;
            g.forward();
            return g.value_of(loss).at(0);
        },
        a0, 1e-5);
    alpha.value = a0;

    REQUIRE(got.shape == fd.shape);
    for (int i = 0; i < got.size(); ++i) {
        INFO("alpha grad index " << i << ": got " << got.at(i) << ", want " << fd.at(i));
        REQUIRE(grad_close(got.at(i), fd.at(i), 1e-4, 1e-6));
    }
}

TEST_CASE("network weight gradients match finite differences") {
    space::SpaceSpec s = full_space();
    grad::Rng rng(6);
    supernet::SupernetWeights w = supernet::SupernetWeights::init(s, 2, rng);
    Array x = random_batch(rng, 4, 4);
    std::vector<int> labels{0, 1, 1, 0};

    Array a0 = Array::zeros({s.num_edges(), s.num_ops()});
    for (double& v : a0.data) v = 0.2 * rng.normal();
    grad::Parameter alpha(a0);

    grad::Graph g;
    grad::Value logits = supernet::supernet_forward(g, s, w, alpha, g.constant(x));
    grad::Value loss = g.cross_entropy_logits(logits, labels);
    g.forward();
    g.backward(loss);

    grad::Parameter& probe =
        w.edge_op[0][static_cast<size_t>(s.op_index(OpKind::LinearReLU))];
    Array w0 = probe.value;
    Array got = probe.grad;
    Array fd = grad::finite_difference(
        [&](const Array& m) {
            probe.value = m;
            g.forward();
            return g.value_of(loss).at(0);
        },
        w0, 1e-5);
    probe.value = w0;
    for (int i = 0; i < got.size(); ++i) {
        INFO("edge weight grad index " << i);
        REQUIRE(grad_close(got.at(i), fd.at(i), 1e-4, 1e-6));
    }

    Array c0 = w.classifier_w.value;
    Array got_c = w.classifier_w.grad;
    Array fd_c = grad::finite_difference(
        [&](const Array& m) {
            w.classifier_w.value = m;
            g.forward();
            return g.value_of(loss).at(0);
        },
        c0, 1e-5);
    w.classifier_w.value = c0;
    for (int i = 0; i < got_c.size(); ++i) {
        INFO("classifier grad index " << i);
        REQUIRE(grad_close(got_c.at(i), fd_c.at(i), 1e-4, 1e-6));
    }
}

TEST_CASE("param_count charges width-squared per weighted choice plus the head") {
    space::SpaceSpec s = full_space();
    // head: 4*3 + 3 = 15; each linrelu adds 16
    REQUIRE(supernet::param_count(space::decode_genotype("zero|skip|pool", s), s, 3) == 15);
    REQUIRE(supernet::param_count(space::decode_genotype("linrelu|skip|pool", s), s, 3) == 31);
    REQUIRE(supernet::param_count(space::decode_genotype("linrelu|linrelu|linrelu", s), s, 3) ==
            63);
}

TEST_CASE("genotype_forward rejects mismatched genotypes") {
    space::SpaceSpec s = full_space();
    grad::Rng rng(7);
    supernet::SupernetWeights w = supernet::SupernetWeights::init(s, 2, rng);
    grad::Graph g;
    grad::Value in = g.constant(random_batch(rng, 2, 4));
    space::Genotype g_short;
    g_short.choices = {OpKind::Zero, OpKind::Skip};
    REQUIRE_THROWS_AS(supernet::genotype_forward(g, s, w, g_short, in), SpaceMismatchError);
    space::SpaceSpec other = space::build_space(3, 4, {OpKind::Zero, OpKind::Skip,
                                                       OpKind::Linear});
    space::Genotype foreign = space::decode_genotype("linear|zero|skip", other);
    REQUIRE_THROWS_AS(supernet::genotype_forward(g, s, w, foreign, in), UnknownGenotypeError);
}
