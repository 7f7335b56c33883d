#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "betanas/bench.hpp"
#include "betanas/search.hpp"

using namespace betanas;
using grad::Array;
using space::OpKind;

namespace {

space::SpaceSpec tiny_space() {
    return space::build_space(3, 4, {OpKind::Skip, OpKind::LinearReLU});
}

bench::SyntheticDataset blobs() { return bench::make_dataset("blobs", 96, 4, 2, 0.4, 3); }

bench::TrainerConfig quick_trainer() {
    bench::TrainerConfig t;
    t.epochs = 30;
    t.eta = 0.05;
    return t;
}

}  // namespace

TEST_CASE("dataset construction validates its arguments") {
    REQUIRE_THROWS_AS(bench::make_dataset("spiral", 64, 4, 2, 0.1, 0), ConfigError);
    REQUIRE_THROWS_AS(bench::make_dataset("blobs", 7, 4, 2, 0.1, 0), ConfigError);
    REQUIRE_THROWS_AS(bench::make_dataset("blobs", 64, 1, 2, 0.1, 0), ConfigError);
    REQUIRE_THROWS_AS(bench::make_dataset("blobs", 64, 4, 1, 0.1, 0), ConfigError);
    REQUIRE_THROWS_AS(bench::make_dataset("blobs", 64, 4, 2, -0.1, 0), ConfigError);
    REQUIRE_THROWS_AS(bench::make_dataset("xor", 64, 4, 3, 0.1, 0), ConfigError);
    REQUIRE_NOTHROW(bench::make_dataset("xor", 64, 4, 2, 0.1, 0));
    REQUIRE_NOTHROW(bench::make_dataset("rings", 64, 4, 3, 0.1, 0));
}

TEST_CASE("datasets are standardized, balanced, and seed-deterministic") {
    bench::SyntheticDataset d = bench::make_dataset("rings", 128, 4, 2, 0.2, 9);
    REQUIRE(d.features.shape == std::vector<int>{128, 4});
    REQUIRE(d.labels.size() == 128);
    for (int c = 0; c < 4; ++c) {
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < 128; ++i) mean += d.features.at(i, c);
        mean /= 128.0;
        for (int i = 0; i < 128; ++i)
            var += (d.features.at(i, c) - mean) * (d.features.at(i, c) - mean);
        var /= 128.0;
        REQUIRE(std::abs(mean) < 1e-12);
        REQUIRE(std::sqrt(var) == Catch::Approx(1.0).epsilon(1e-9));
    }
    int ones = 0;
    for (int y : d.labels) ones += y;
    REQUIRE(std::abs(2 * ones - 128) <= 1);

    bench::SyntheticDataset same = bench::make_dataset("rings", 128, 4, 2, 0.2, 9);
    REQUIRE(d.features.data == same.features.data);
    REQUIRE(d.labels == same.labels);
    for (int s = 0; s < 4; ++s)
        REQUIRE(d.splits[static_cast<size_t>(s)] == same.splits[static_cast<size_t>(s)]);

    bench::SyntheticDataset other = bench::make_dataset("rings", 128, 4, 2, 0.2, 10);
    REQUIRE(d.features.data != other.features.data);
}

TEST_CASE("splits are disjoint, exhaustive, sorted, and class-stratified") {
    bench::SyntheticDataset d = bench::make_dataset("blobs", 120, 4, 3, 0.2, 5);
    std::set<int> seen;
    size_t total = 0;
    for (int s = 0; s < 4; ++s) {
        const auto& idx = d.splits[static_cast<size_t>(s)];
        REQUIRE(!idx.empty());
        REQUIRE(std::is_sorted(idx.begin(), idx.end()));
        total += idx.size();
        for (int i : idx) {
            REQUIRE(i >= 0);
            REQUIRE(i < 120);
            seen.insert(i);
        }
        // stratified: every class appears in every split
        std::set<int> classes;
        for (int i : idx) classes.insert(d.labels[static_cast<size_t>(i)]);
        REQUIRE(classes.size() == 3);
    }
    REQUIRE(seen.size() == 120);
    REQUIRE(total == 120);
}

TEST_CASE("gather and full_split hand out samples and count accesses") {
    bench::SyntheticDataset d = blobs();
    auto [x, y] = d.gather(bench::Split::SearchTrain, {0, 1, 2});
    REQUIRE(x.shape == std::vector<int>{3, 4});
    REQUIRE(y.size() == 3);
    REQUIRE(d.accesses(bench::Split::SearchTrain) == 3);
    auto [fx, fy] = d.full_split(bench::Split::EvalTest);
    REQUIRE(fx.shape[0] == static_cast<int>(d.split(bench::Split::EvalTest).size()));
    REQUIRE(d.accesses(bench::Split::EvalTest) == fx.shape[0]);
    REQUIRE_THROWS_AS(d.gather(bench::Split::SearchTrain, {9999}), ConfigError);
    REQUIRE_THROWS_AS(d.gather(bench::Split::SearchTrain, {}), ConfigError);
}

TEST_CASE("accuracy scores argmax agreement") {
    Array logits = Array::zeros({4, 2});
    logits.at(0, 0) = 1.0;  // predicts 0
    logits.at(1, 1) = 1.0;  // predicts 1
    logits.at(2, 0) = 1.0;  // predicts 0
    logits.at(3, 1) = 1.0;  // predicts 1
    REQUIRE(bench::accuracy(logits, {0, 1, 1, 0}) == 0.5);
    REQUIRE(bench::accuracy(logits, {0, 1, 0, 1}) == 1.0);
    REQUIRE_THROWS_AS(bench::accuracy(logits, {0, 1}), ShapeError);
}

TEST_CASE("acc quantization keeps six decimal places") {
    REQUIRE(bench::quantize_acc(0.1234564) == 0.123456);
    REQUIRE(bench::quantize_acc(0.1234566) == 0.123457);
    REQUIRE(bench::quantize_acc(1.0) == 1.0);
    REQUIRE(bench::quantize_acc(0.0) == 0.0);
}

TEST_CASE("trainer config is validated") {
    bench::TrainerConfig t;
    t.epochs = 0;
    REQUIRE_THROWS_AS(bench::validate(t), ConfigError);
    t = bench::TrainerConfig{};
    t.eta = -1.0;
    REQUIRE_THROWS_AS(bench::validate(t), ConfigError);
    t = bench::TrainerConfig{};
    t.momentum = 1.0;
    REQUIRE_THROWS_AS(bench::validate(t), ConfigError);
}

TEST_CASE("entry seeds depend on genotype, repeat, and base seed") {
    uint64_t a = bench::entry_seed(0, "skip|skip|skip", 0);
    REQUIRE(a != bench::entry_seed(0, "skip|skip|skip", 1));
    REQUIRE(a != bench::entry_seed(0, "skip|skip|linrelu", 0));
    REQUIRE(a != bench::entry_seed(1, "skip|skip|skip", 0));
    REQUIRE(a == bench::entry_seed(0, "skip|skip|skip", 0));
}

TEST_CASE("training a genotype is deterministic and split-disciplined") {
    space::SpaceSpec s = tiny_space();
    bench::SyntheticDataset d = blobs();
    space::Genotype g = space::decode_genotype("linrelu|skip|linrelu", s);
    bench::SeedOutcome a = bench::train_genotype(s, d, g, quick_trainer(), 77);
    bench::SeedOutcome b = bench::train_genotype(s, d, g, quick_trainer(), 77);
    REQUIRE(a.val_acc == b.val_acc);
    REQUIRE(a.test_acc == b.test_acc);
    REQUIRE(a.diverged == b.diverged);
    REQUIRE_FALSE(a.diverged);
    REQUIRE(a.val_acc >= 0.0);
    REQUIRE(a.val_acc <= 1.0);
    // ground-truth training never reads the search-train split
    REQUIRE(d.accesses(bench::Split::SearchTrain) == 0);
    REQUIRE(d.accesses(bench::Split::EvalTrain) > 0);
    REQUIRE(d.accesses(bench::Split::SearchVal) > 0);
    REQUIRE(d.accesses(bench::Split::EvalTest) > 0);
}

TEST_CASE("a blown-up learning rate flags the entry instead of crashing") {
    space::SpaceSpec s = tiny_space();
    bench::SyntheticDataset d = blobs();
    space::Genotype g = space::decode_genotype("linrelu|linrelu|linrelu", s);
    bench::TrainerConfig t = quick_trainer();
    t.eta = 1e9;
    bench::SeedOutcome o = bench::train_genotype(s, d, g, t, 5);
    REQUIRE(o.diverged);
    REQUIRE(std::isfinite(o.val_acc));
    REQUIRE(std::isfinite(o.test_acc));
}

TEST_CASE("the benchmark table covers the whole space with consistent metrics") {
    space::SpaceSpec s = tiny_space();
    bench::SyntheticDataset d = blobs();
    bench::BenchmarkTable table = bench::generate_benchmark(s, d, quick_trainer(), 2, 0);
    REQUIRE(table.entries.size() == 8);
    for (const auto& g : space::enumerate_genotypes(s)) {
        std::string key = space::encode_genotype(g);
        REQUIRE(table.entries.count(key) == 1);
        const bench::EntryMetrics& m = table.entries.at(key);
        REQUIRE(m.params == supernet::param_count(g, s, 2));
        REQUIRE(m.val_acc_mean >= 0.0);
        REQUIRE(m.val_acc_mean <= 1.0);
        REQUIRE(m.test_acc_mean >= 0.0);
        REQUIRE(m.test_acc_mean <= 1.0);
        REQUIRE(m.val_acc_std >= 0.0);
        REQUIRE(m.test_acc_std >= 0.0);
    }
    // best() returns the max mean test accuracy
    bench::BenchmarkTable::Best best = table.best();
    for (const auto& [key, m] : table.entries)
        REQUIRE(m.test_acc_mean <= best.test_acc);
    REQUIRE(table.entries.at(best.genotype).test_acc_mean == best.test_acc);
}

TEST_CASE("entry metrics equal a hand-rolled mean and std over repeat seeds") {
    space::SpaceSpec s = tiny_space();
    bench::SyntheticDataset d = blobs();
    space::Genotype g = space::decode_genotype("skip|linrelu|skip", s);
    std::string key = space::encode_genotype(g);
    bench::TrainerConfig t = quick_trainer();
    int seeds = 3;
    double vm = 0.0, tm = 0.0;
    std::vector<bench::SeedOutcome> outs;
    for (int r = 0; r < seeds; ++r) {
        outs.push_back(bench::train_genotype(s, d, g, t, bench::entry_seed(0, key, r)));
        vm += outs.back().val_acc;
        tm += outs.back().test_acc;
    }
    vm /= seeds;
    tm /= seeds;
    double vv = 0.0, tv = 0.0;
    for (const auto& o : outs) {
        vv += (o.val_acc - vm) * (o.val_acc - vm);
        tv += (o.test_acc - tm) * (o.test_acc - tm);
    }
    bench::EntryMetrics m = bench::summarize_entry(s, d, g, t, seeds, 0);
    REQUIRE(m.val_acc_mean == bench::quantize_acc(vm));
    REQUIRE(m.test_acc_mean == bench::quantize_acc(tm));
    REQUIRE(m.val_acc_std == bench::quantize_acc(std::sqrt(vv / seeds)));
    REQUIRE(m.test_acc_std == bench::quantize_acc(std::sqrt(tv / seeds)));
}

TEST_CASE("worker count does not change the table") {
    space::SpaceSpec s = tiny_space();
    bench::SyntheticDataset d = blobs();
    bench::TrainerConfig t = quick_trainer();
    t.epochs = 10;
    bench::BenchmarkTable one = bench::generate_benchmark(s, d, t, 2, 4, 1);
    bench::BenchmarkTable four = bench::generate_benchmark(s, d, t, 2, 4, 4);
    REQUIRE(one.entries.size() == four.entries.size());
    for (const auto& [key, m] : one.entries) {
        const bench::EntryMetrics& o = four.entries.at(key);
        REQUIRE(m.val_acc_mean == o.val_acc_mean);
        REQUIRE(m.val_acc_std == o.val_acc_std);
        REQUIRE(m.test_acc_mean == o.test_acc_mean);
        REQUIRE(m.test_acc_std == o.test_acc_std);
        REQUIRE(m.params == o.params);
        REQUIRE(m.flagged == o.flagged);
    }
}

TEST_CASE("queries resolve genotypes and reject unknown ones") {
    space::SpaceSpec s = tiny_space();
    bench::SyntheticDataset d = blobs();
    bench::TrainerConfig t = quick_trainer();
    t.epochs = 5;
    bench::BenchmarkTable table = bench::generate_benchmark(s, d, t, 1, 0);
    space::Genotype g = space::decode_genotype("skip|skip|skip", s);
    REQUIRE(bench::query(table, g).params == supernet::param_count(g, s, 2));
    REQUIRE_THROWS_AS(bench::query(table, "pool|pool|pool"), UnknownGenotypeError);
}

TEST_CASE("trajectory evaluation tracks regret against the table") {
    space::SpaceSpec s = tiny_space();
    bench::SyntheticDataset d = blobs();
    bench::TrainerConfig t = quick_trainer();
    bench::BenchmarkTable table = bench::generate_benchmark(s, d, t, 2, 0);

    search::SearchConfig cfg;
    cfg.epochs = 6;
    cfg.batch_size = 8;
    cfg.eta_alpha = 0.02;
    cfg.eta_w = 0.05;
    cfg.sched = schedule::LambdaSchedule::constant(0.0, 6);
    search::Trajectory traj = search::search(s, d, cfg);

    bench::TrajectoryEval ev = bench::trajectory_eval(table, traj);
    REQUIRE(ev.points.size() == 6);
    REQUIRE(ev.best_genotype == table.best().genotype);
    REQUIRE(ev.best_test_acc == table.best().test_acc);
    double min_regret = 1e9;
    for (size_t i = 0; i < ev.points.size(); ++i) {
        const bench::EvalPoint& p = ev.points[i];
        REQUIRE(p.epoch == static_cast<int>(i) + 1);
        REQUIRE(p.regret >= 0.0);
        std::string key = space::encode_genotype(traj.records[i].genotype);
        REQUIRE(p.test_acc == table.entries.at(key).test_acc_mean);
        REQUIRE(p.regret == Catch::Approx(ev.best_test_acc - p.test_acc).margin(1e-12));
        min_regret = std::min(min_regret, p.regret);
    }
    REQUIRE(ev.min_regret == min_regret);
    REQUIRE(ev.first_optimum_epoch >= 1);
    REQUIRE(ev.first_optimum_epoch <= 6);
    REQUIRE(ev.points[static_cast<size_t>(ev.first_optimum_epoch - 1)].regret == min_regret);
    for (int e = 1; e < ev.first_optimum_epoch; ++e)
        REQUIRE(ev.points[static_cast<size_t>(e - 1)].regret > min_regret);
}

TEST_CASE("trajectory evaluation rejects mismatched spaces and missing entries") {
    space::SpaceSpec s = tiny_space();
    bench::SyntheticDataset d = blobs();
    bench::TrainerConfig t = quick_trainer();
    t.epochs = 5;
    bench::BenchmarkTable table = bench::generate_benchmark(s, d, t, 1, 0);

    search::SearchConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.sched = schedule::LambdaSchedule::constant(0.0, 3);
    search::Trajectory traj = search::search(s, d, cfg);

    bench::BenchmarkTable wrong = table;
    wrong.space = space::build_space(3, 8, {OpKind::Skip, OpKind::LinearReLU});
    REQUIRE_THROWS_AS(bench::trajectory_eval(wrong, traj), SpaceMismatchError);

    bench::BenchmarkTable gutted = table;
    gutted.entries.erase(space::encode_genotype(traj.final_record().genotype));
    try {
        bench::trajectory_eval(gutted, traj);
        FAIL("expected UnknownGenotypeError");
    } catch (const UnknownGenotypeError& e) {
        REQUIRE(std::string(e.what()).find("epoch") != std::string::npos);
    }
}
