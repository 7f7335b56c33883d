#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "betanas/betanas.hpp"

using namespace betanas;
using grad::Array;
using space::OpKind;

namespace {

space::SpaceSpec chain3() {
    return space::build_space(3, 4, {OpKind::Zero, OpKind::Skip, OpKind::LinearReLU});
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("alpha statistics pool every entry") {
    supernet::AlphaTable a(2, 2);
    a.at(0, 0) = 1.0;
    a.at(0, 1) = 2.0;
    a.at(1, 0) = 3.0;
    a.at(1, 1) = 4.0;
    analysis::AlphaStats s = analysis::alpha_stats(a);
    REQUIRE(s.mean == Catch::Approx(2.5).epsilon(1e-15));
    // even count: median averages the two middle sorted entries
    REQUIRE(s.median == 2.5);
    REQUIRE(s.std_dev == Catch::Approx(std::sqrt(1.25)).epsilon(1e-14));

    supernet::AlphaTable odd(1, 3);
    odd.at(0, 0) = 5.0;
    odd.at(0, 1) = -1.0;
    odd.at(0, 2) = 2.0;
    REQUIRE(analysis::alpha_stats(odd).median == 2.0);
}

TEST_CASE("the lipschitz measure is the row norm with known bounds") {
    Array uniform = Array::full({3}, 1.0 / 3.0);
    REQUIRE(analysis::lipschitz_measure(uniform) ==
            Catch::Approx(0.5773502691896258).epsilon(1e-14));
    Array hot = Array::zeros({3});
    hot.at(0) = 1.0;
    REQUIRE(analysis::lipschitz_measure(hot) == 1.0);
    // row norms of softmax rows live in [1/sqrt(K), 1)
    grad::Rng rng(31);
    for (int it = 0; it < 200; ++it) {
        int k = 2 + rng.below(6);
        supernet::AlphaTable a(1, k);
        for (double& v : a.values.data) v = 2.0 * rng.normal();
        supernet::BetaTable b = supernet::beta_from_alpha(a);
        Array row = Array::zeros({k});
        for (int i = 0; i < k; ++i) row.at(i) = b.at(0, i);
        double l = analysis::lipschitz_measure(row);
        REQUIRE(l >= 1.0 / std::sqrt(static_cast<double>(k)) - 1e-12);
        REQUIRE(l < 1.0);
    }
}

TEST_CASE("beta statistics aggregate per-row dispersion") {
    supernet::AlphaTable a(2, 2);
    a.at(0, 0) = 1.0;  // softmax (0.731..., 0.268...)
    analysis::BetaStats s = analysis::beta_stats(a);
    double p = 0.7310585786300049;
    REQUIRE(s.row_std[0] == Catch::Approx(p - 0.5).epsilon(1e-12));
    REQUIRE(s.row_std[1] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(s.total_std == Catch::Approx(s.row_std[0] + s.row_std[1]).epsilon(1e-14));
    REQUIRE(s.lipschitz[0] ==
            Catch::Approx(std::sqrt(p * p + (1 - p) * (1 - p))).epsilon(1e-14));
    REQUIRE(s.lipschitz[1] == Catch::Approx(std::sqrt(0.5)).epsilon(1e-14));
    REQUIRE(s.lipschitz_sum ==
            Catch::Approx(s.lipschitz[0] + s.lipschitz[1]).epsilon(1e-14));
}

TEST_CASE("find_edge resolves endpoints and rejects absent pairs") {
    space::SpaceSpec s = chain3();
    REQUIRE(analysis::find_edge(s, 0, 1) == 0);
    REQUIRE(analysis::find_edge(s, 0, 2) == 1);
    REQUIRE(analysis::find_edge(s, 1, 2) == 2);
    REQUIRE_THROWS_AS(analysis::find_edge(s, 2, 1), SpaceMismatchError);
}

TEST_CASE("the convergence proxy hits its uniform closed form") {
    space::SpaceSpec s = chain3();
    supernet::AlphaTable a(s.num_edges(), s.num_ops());  // zeros: uniform beta 1/3
    supernet::BetaTable b = supernet::beta_from_alpha(a);
    std::vector<int> layout{0, 1, 2};
    int conv = s.op_index(OpKind::LinearReLU);
    int skip = s.op_index(OpKind::Skip);
    // (1/3)^2 + (1/3)^2 * (1/3)^2
    REQUIRE(analysis::convergence_phi(s, b, layout, conv, skip) ==
            Catch::Approx(0.12345679012345678).epsilon(1e-15));
}

TEST_CASE("phi grows with the skip share feeding later cells") {
    space::SpaceSpec s = chain3();
    std::vector<int> layout{0, 1, 2};
    int conv = s.op_index(OpKind::LinearReLU);
    int skip = s.op_index(OpKind::Skip);

    supernet::AlphaTable low(s.num_edges(), s.num_ops());
    supernet::AlphaTable high = low;
    high.at(0, skip) = 3.0;  // edge (0,1) skip-dominant
    supernet::BetaTable bl = supernet::beta_from_alpha(low);
    supernet::BetaTable bh = supernet::beta_from_alpha(high);
    REQUIRE(analysis::convergence_phi(s, bh, layout, conv, skip) >
            analysis::convergence_phi(s, bl, layout, conv, skip));
}

TEST_CASE("theta modulation scales the proxy factors") {
    space::SpaceSpec s = chain3();
    supernet::AlphaTable a(s.num_edges(), s.num_ops());
    supernet::BetaTable b = supernet::beta_from_alpha(a);
    std::vector<int> layout{0, 1, 2};
    int conv = s.op_index(OpKind::LinearReLU);
    int skip = s.op_index(OpKind::Skip);

    regularize::ThetaReport ones;
    ones.theta = Array::full({s.num_edges(), s.num_ops()}, 1.0);
    REQUIRE(analysis::convergence_phi_modulated(s, b, ones, layout, conv, skip) ==
            Catch::Approx(analysis::convergence_phi(s, b, layout, conv, skip)).epsilon(1e-15));

    regularize::ThetaReport zeros;
    zeros.theta = Array::zeros({s.num_edges(), s.num_ops()});
    REQUIRE(analysis::convergence_phi_modulated(s, b, zeros, layout, conv, skip) == 0.0);
}

TEST_CASE("phi wiring validates its inputs") {
    space::SpaceSpec s = chain3();
    supernet::AlphaTable a(s.num_edges(), s.num_ops());
    supernet::BetaTable b = supernet::beta_from_alpha(a);
    int conv = s.op_index(OpKind::LinearReLU);
    int skip = s.op_index(OpKind::Skip);
    REQUIRE_THROWS_AS(analysis::convergence_phi(s, b, {0}, conv, skip),
                      SpaceMismatchError);
    REQUIRE_THROWS_AS(analysis::convergence_phi(s, b, {0, 2, 1}, conv, skip),
                      SpaceMismatchError);
    REQUIRE_THROWS_AS(analysis::convergence_phi(s, b, {0, 1, 2}, 99, skip),
                      SpaceMismatchError);
    supernet::AlphaTable small(1, 2);
    REQUIRE_THROWS_AS(
        analysis::convergence_phi(s, supernet::beta_from_alpha(small), {0, 1, 2}, conv, skip),
        SpaceMismatchError);
}

TEST_CASE("stats_record wires phi when the space has both skip and a weighted op") {
    space::SpaceSpec s = chain3();
    supernet::AlphaTable a(s.num_edges(), s.num_ops());
    analysis::StatsRecord r = analysis::stats_record(a, s);
    REQUIRE(r.phi == Catch::Approx(0.12345679012345678).epsilon(1e-15));
    REQUIRE(r.alpha_mean == 0.0);
    REQUIRE(r.alpha_std == 0.0);
    REQUIRE(r.beta_row_stds.size() == 3);
    REQUIRE(r.lipschitz_per_edge.size() == 3);

    // no skip op: phi is defined as zero
    space::SpaceSpec noskip = space::build_space(3, 4, {OpKind::Zero, OpKind::LinearReLU});
    supernet::AlphaTable a2(noskip.num_edges(), noskip.num_ops());
    REQUIRE(analysis::stats_record(a2, noskip).phi == 0.0);
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

TEST_CASE("csv numbers survive a round trip exactly") {
    grad::Rng rng(32);
    for (int it = 0; it < 200; ++it) {
        double x = std::exp(rng.uniform(-20.0, 20.0)) * (rng.below(2) ? 1.0 : -1.0);
        REQUIRE(std::stod(io::csv_num(x)) == x);
    }
    REQUIRE(std::stod(io::csv_num(0.1)) == 0.1);
    REQUIRE(std::stod(io::csv_num(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("op lists round-trip through their csv form") {
    space::SpaceSpec s = space::build_space(
        3, 4, {OpKind::Zero, OpKind::Skip, OpKind::MeanPool, OpKind::LinearReLU});
    REQUIRE(io::ops_csv(s) == "zero,skip,pool,linrelu");
    REQUIRE(io::ops_from_csv(io::ops_csv(s)) == s.ops);
    REQUIRE_THROWS_AS(io::ops_from_csv("zero,conv"), ParseError);
}

TEST_CASE("the trajectory header is the stable documented column set") {
    REQUIRE(std::string(io::trajectory_header()) ==
            "epoch,lambda,train_loss,val_loss,reg_loss,genotype,alpha_mean,alpha_median,"
            "alpha_std,beta_total_std,lipschitz_sum,phi");
}

namespace {

search::Trajectory sample_trajectory(int epochs = 4) {
    space::SpaceSpec s = chain3();
    bench::SyntheticDataset d = bench::make_dataset("blobs", 64, 4, 2, 0.3, 2);
    search::SearchConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = 8;
    cfg.eta_alpha = 0.02;
    cfg.eta_w = 0.05;
    cfg.reg = search::RegChoice::BetaDecay;
    cfg.sched = schedule::LambdaSchedule::linear_up(0.0, 4.0, epochs);
    cfg.seed = 6;
    return search::search(s, d, cfg);
}

}  // namespace

TEST_CASE("trajectories round-trip through csv") {
    search::Trajectory traj = sample_trajectory();
    std::string path = temp_path("betanas_traj_roundtrip.csv");
    io::write_trajectory_csv(path, traj);
    search::Trajectory back = io::read_trajectory_csv(path);
    REQUIRE(back.space == traj.space);
    REQUIRE(back.records.size() == traj.records.size());
    for (size_t i = 0; i < traj.records.size(); ++i) {
        const auto& a = traj.records[i];
        const auto& b = back.records[i];
        REQUIRE(b.epoch == a.epoch);
        REQUIRE(b.lambda == a.lambda);
        REQUIRE(b.train_loss == a.train_loss);
        REQUIRE(b.val_loss == a.val_loss);
        REQUIRE(b.reg_loss == a.reg_loss);
        REQUIRE(b.genotype == a.genotype);
        REQUIRE(b.stats.alpha_mean == a.stats.alpha_mean);
        REQUIRE(b.stats.alpha_median == a.stats.alpha_median);
        REQUIRE(b.stats.alpha_std == a.stats.alpha_std);
        REQUIRE(b.stats.beta_total_std == a.stats.beta_total_std);
        REQUIRE(b.stats.lipschitz_sum == a.stats.lipschitz_sum);
        REQUIRE(b.stats.phi == a.stats.phi);
    }
    std::remove(path.c_str());
}

TEST_CASE("csv parse errors name the file and line") {
    search::Trajectory traj = sample_trajectory(2);
    std::string text = io::trajectory_csv(traj);
    std::string path = temp_path("betanas_traj_corrupt.csv");
    io::write_text(path, text + "7,not_a_number,0,0,0,zero|zero|zero,0,0,0,0,0,0\n");
    try {
        io::read_trajectory_csv(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        std::string msg = e.what();
        REQUIRE(msg.find(path + ":") != std::string::npos);
        REQUIRE(msg.find("not_a_number") != std::string::npos);
    }
    std::remove(path.c_str());
    REQUIRE_THROWS_AS(io::read_trajectory_csv(temp_path("betanas_missing.csv")), ConfigError);
}

TEST_CASE("alpha snapshots round-trip through jsonl") {
    search::Trajectory traj = sample_trajectory();
    std::string path = temp_path("betanas_snap_roundtrip.jsonl");
    io::write_alpha_snapshots(path, traj);
    io::SnapshotFile back = io::read_alpha_snapshots(path);
    REQUIRE(back.space == traj.space);
    REQUIRE(back.classes == traj.classes);
    REQUIRE(back.seed == traj.config.seed);
    REQUIRE(back.epochs.size() == traj.records.size());
    for (size_t i = 0; i < traj.records.size(); ++i) {
        REQUIRE(back.epochs[i].first == traj.records[i].epoch);
        REQUIRE(back.epochs[i].second.values.data == traj.records[i].alpha.values.data);
    }
    std::remove(path.c_str());
}

TEST_CASE("snapshot parse errors carry line numbers") {
    std::string path = temp_path("betanas_snap_corrupt.jsonl");
    search::Trajectory traj = sample_trajectory(2);
    std::string text = io::alpha_snapshots_jsonl(traj);
    io::write_text(path, text + "{broken\n");
    try {
        io::read_alpha_snapshots(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(std::string(e.what()).find("line") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("benchmark tables round-trip through jsonl") {
    space::SpaceSpec s = space::build_space(3, 4, {OpKind::Skip, OpKind::LinearReLU});
    bench::SyntheticDataset d = bench::make_dataset("blobs", 64, 4, 2, 0.3, 4);
    bench::TrainerConfig t;
    t.epochs = 5;
    bench::BenchmarkTable table = bench::generate_benchmark(s, d, t, 2, 9);
    std::string path = temp_path("betanas_bench_roundtrip.jsonl");
    io::write_benchmark(path, table);
    bench::BenchmarkTable back = io::read_benchmark(path);
    REQUIRE(back.space == table.space);
    REQUIRE(back.seeds == table.seeds);
    REQUIRE(back.base_seed == table.base_seed);
    REQUIRE(back.dataset.kind == table.dataset.kind);
    REQUIRE(back.dataset.seed == table.dataset.seed);
    REQUIRE(back.trainer.epochs == table.trainer.epochs);
    REQUIRE(back.trainer.eta == table.trainer.eta);
    REQUIRE(back.entries.size() == table.entries.size());
    for (const auto& [key, m] : table.entries) {
        const bench::EntryMetrics& o = back.entries.at(key);
        REQUIRE(o.val_acc_mean == m.val_acc_mean);
        REQUIRE(o.val_acc_std == m.val_acc_std);
        REQUIRE(o.test_acc_mean == m.test_acc_mean);
        REQUIRE(o.test_acc_std == m.test_acc_std);
        REQUIRE(o.params == m.params);
        REQUIRE(o.flagged == m.flagged);
    }
    // identical bytes when rewritten
    std::string again = io::benchmark_jsonl(back);
    REQUIRE(again == io::benchmark_jsonl(table));
    std::remove(path.c_str());
}

TEST_CASE("svg charts are self-contained and carry the series") {
    io::Series s1;
    s1.name = "run_a";
    io::Series s2;
    s2.name = "run_b";
    for (int i = 0; i < 10; ++i) {
        s1.points.emplace_back(i, std::sin(0.3 * i));
        s2.points.emplace_back(i, std::cos(0.3 * i));
    }
    std::string svg = io::svg_chart("dispersion per epoch", "epoch", "std", {s1, s2});
    REQUIRE(svg.find("<svg") != std::string::npos);
    REQUIRE(svg.find("</svg>") != std::string::npos);
    REQUIRE(svg.find("polyline") != std::string::npos);
    REQUIRE(svg.find("run_a") != std::string::npos);
    REQUIRE(svg.find("run_b") != std::string::npos);
    REQUIRE(svg.find("dispersion per epoch") != std::string::npos);
    REQUIRE(svg.find("<script") == std::string::npos);
    REQUIRE(svg.find("href=") == std::string::npos);  // nothing fetched from elsewhere
    REQUIRE_THROWS_AS(io::svg_chart("t", "x", "y", {}), ConfigError);
}
