// Command-line front end: benchmark generation, search runs, trajectory
// evaluation against a benchmark table, and snapshot analysis.
//
// Exit codes: 0 ok, 2 config/usage error, 3 resource or cap exceeded,
// 4 numeric divergence.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "betanas/betanas.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace betanas;

namespace {

struct SpaceOpts {
    int nodes = 3;
    int width = 8;
    std::string ops = "zero,skip,pool,linrelu";
};

struct DataOpts {
    std::string kind = "rings";
    int n = 256;
    int classes = 2;
    double noise = 0.1;
    uint64_t seed = 7;
};

space::SpaceSpec make_space(const SpaceOpts& s) {
    return space::build_space(s.nodes, s.width, io::ops_from_csv(s.ops));
}

bench::SyntheticDataset make_data(const DataOpts& d, int width) {
    return bench::make_dataset(d.kind, d.n, width, d.classes, d.noise, d.seed);
}

std::string default_out_root() {
    const char* env = std::getenv("BETANAS_OUT_ROOT");
    return env ? std::string(env) : std::string(".");
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw ConfigError("cannot create directory '" + path + "': " + ec.message());
}

std::vector<uint64_t> parse_seed_list(const std::string& text) {
    std::vector<uint64_t> seeds;
    for (const auto& tok : io::detail::split(text, ',')) {
        try {
            seeds.push_back(std::stoull(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad seed '" + tok + "' in seed list");
        }
    }
    if (seeds.empty()) throw ConfigError("empty seed list");
    return seeds;
}

// ---------------------------------------------------------------------------
// search run configuration: defaults -> optional config file -> explicit flags
// ---------------------------------------------------------------------------

struct SearchRun {
    SpaceOpts space;
    DataOpts data;
    search::SearchConfig cfg;
    std::string schedule = "constant";
    double lambda_start = 0.0;
    double lambda_end = 0.0;
    std::vector<uint64_t> seeds;  // one run per seed
    std::string out;
    std::string bench_path;
    int jobs = 1;
};

void require_known_keys(const json& j, const std::string& scope,
                        const std::vector<std::string>& known) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : known)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError("unknown config key '" +
                              (scope.empty() ? it.key() : scope + "." + it.key()) + "'");
    }
}

void apply_config_file(SearchRun& run, const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_text(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    require_known_keys(j, "", {"space", "dataset", "search", "out"});
    if (j.contains("space")) {
        const json& s = j["space"];
        require_known_keys(s, "space", {"nodes", "width", "ops"});
        if (s.contains("nodes")) run.space.nodes = s["nodes"].get<int>();
        if (s.contains("width")) run.space.width = s["width"].get<int>();
        if (s.contains("ops")) {
            std::string ops;
            for (const auto& t : s["ops"]) ops += (ops.empty() ? "" : ",") + t.get<std::string>();
            run.space.ops = ops;
        }
    }
    if (j.contains("dataset")) {
        const json& d = j["dataset"];
        require_known_keys(d, "dataset", {"kind", "n", "classes", "noise", "seed"});
        if (d.contains("kind")) run.data.kind = d["kind"].get<std::string>();
        if (d.contains("n")) run.data.n = d["n"].get<int>();
        if (d.contains("classes")) run.data.classes = d["classes"].get<int>();
        if (d.contains("noise")) run.data.noise = d["noise"].get<double>();
        if (d.contains("seed")) run.data.seed = d["seed"].get<uint64_t>();
    }
    if (j.contains("search")) {
        const json& s = j["search"];
        require_known_keys(
            s, "search",
            {"epochs", "batch_size", "eta_alpha", "adam_beta1", "adam_beta2", "adam_eps", "eta_w",
             "momentum", "reg", "lambda", "schedule", "lambda_start", "lambda_end",
             "beta_zero_log_sigmoid", "seed", "alpha_init_std", "divergence_threshold"});
        if (s.contains("epochs")) run.cfg.epochs = s["epochs"].get<int>();
        if (s.contains("batch_size")) run.cfg.batch_size = s["batch_size"].get<int>();
        if (s.contains("eta_alpha")) run.cfg.eta_alpha = s["eta_alpha"].get<double>();
        if (s.contains("adam_beta1")) run.cfg.adam_beta1 = s["adam_beta1"].get<double>();
        if (s.contains("adam_beta2")) run.cfg.adam_beta2 = s["adam_beta2"].get<double>();
        if (s.contains("adam_eps")) run.cfg.adam_eps = s["adam_eps"].get<double>();
        if (s.contains("eta_w")) run.cfg.eta_w = s["eta_w"].get<double>();
        if (s.contains("momentum")) run.cfg.momentum = s["momentum"].get<double>();
        if (s.contains("reg")) run.cfg.reg = search::reg_from_token(s["reg"].get<std::string>());
        if (s.contains("lambda")) run.cfg.lambda = s["lambda"].get<double>();
        if (s.contains("schedule")) run.schedule = s["schedule"].get<std::string>();
        if (s.contains("lambda_start")) run.lambda_start = s["lambda_start"].get<double>();
        if (s.contains("lambda_end")) run.lambda_end = s["lambda_end"].get<double>();
        if (s.contains("beta_zero_log_sigmoid"))
            run.cfg.log_sigmoid_variant = s["beta_zero_log_sigmoid"].get<bool>();
        if (s.contains("seed")) run.seeds = {s["seed"].get<uint64_t>()};
        if (s.contains("alpha_init_std")) run.cfg.alpha_init_std = s["alpha_init_std"].get<double>();
        if (s.contains("divergence_threshold"))
            run.cfg.divergence_threshold = s["divergence_threshold"].get<double>();
    }
    if (j.contains("out")) run.out = j["out"].get<std::string>();
}

json resolved_config(const SearchRun& run, uint64_t seed, const std::string& out_dir) {
    json j;
    j["space"] = {{"nodes", run.space.nodes},
                  {"width", run.space.width},
                  {"ops", io::detail::split(run.space.ops, ',')}};
    j["dataset"] = {{"kind", run.data.kind},
                    {"n", run.data.n},
                    {"classes", run.data.classes},
                    {"noise", run.data.noise},
                    {"seed", run.data.seed}};
    j["search"] = {{"epochs", run.cfg.epochs},
                   {"batch_size", run.cfg.batch_size},
                   {"eta_alpha", run.cfg.eta_alpha},
                   {"adam_beta1", run.cfg.adam_beta1},
                   {"adam_beta2", run.cfg.adam_beta2},
                   {"adam_eps", run.cfg.adam_eps},
                   {"eta_w", run.cfg.eta_w},
                   {"momentum", run.cfg.momentum},
                   {"reg", search::reg_token(run.cfg.reg)},
                   {"lambda", run.cfg.lambda},
                   {"schedule", run.schedule},
                   {"lambda_start", run.lambda_start},
                   {"lambda_end", run.lambda_end},
                   {"beta_zero_log_sigmoid", run.cfg.log_sigmoid_variant},
                   {"seed", seed},
                   {"alpha_init_std", run.cfg.alpha_init_std},
                   {"divergence_threshold", run.cfg.divergence_threshold}};
    j["out"] = out_dir;
    return j;
}

search::SearchConfig build_config(const SearchRun& run, uint64_t seed) {
    search::SearchConfig cfg = run.cfg;
    cfg.seed = seed;
    cfg.sched = schedule::LambdaSchedule::make(schedule::schedule_from_token(run.schedule),
                                               run.lambda_start, run.lambda_end, cfg.epochs);
    search::validate(cfg);
    return cfg;
}

// One search run: writes trajectory.csv, alpha_snapshots.jsonl,
// final_genotype.txt, resolved_config.json into out_dir.
search::Trajectory run_one_search(const SearchRun& run, uint64_t seed,
                                  const std::string& out_dir) {
    space::SpaceSpec sp = make_space(run.space);
    bench::SyntheticDataset data = make_data(run.data, sp.width);
    search::SearchConfig cfg = build_config(run, seed);
    search::Trajectory traj = search::search(sp, data, cfg);
    ensure_dir(out_dir);
    io::write_trajectory_csv(out_dir + "/trajectory.csv", traj);
    io::write_alpha_snapshots(out_dir + "/alpha_snapshots.jsonl", traj);
    io::write_text(out_dir + "/final_genotype.txt",
                   space::encode_genotype(traj.final_record().genotype) + "\n");
    io::write_text(out_dir + "/resolved_config.json",
                   resolved_config(run, seed, out_dir).dump(2) + "\n");
    return traj;
}

int cmd_search(SearchRun& run, bool config_loaded) {
    if (run.out.empty()) run.out = default_out_root() + "/run";
    if (run.seeds.empty()) run.seeds = {0};
    (void)config_loaded;

    struct Done {
        uint64_t seed;
        std::string dir;
        search::Trajectory traj;
    };
    std::vector<Done> done(run.seeds.size());

    bool multi = run.seeds.size() > 1;
    auto dir_for = [&](uint64_t seed) {
        return multi ? run.out + "/seed" + std::to_string(seed) : run.out;
    };

    // fail-fast validation before any fan-out
    for (uint64_t seed : run.seeds) build_config(run, seed);

    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            uint64_t seed = run.seeds[i];
            std::string dir = dir_for(seed);
            done[i] = Done{seed, dir, run_one_search(run, seed, dir)};
        }
    };
    int workers = std::min<int>(run.jobs, static_cast<int>(run.seeds.size()));
    if (workers <= 1) {
        work(0, run.seeds.size());
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
        size_t chunk = (run.seeds.size() + static_cast<size_t>(workers) - 1) /
                       static_cast<size_t>(workers);
        for (int t = 0; t < workers; ++t) {
            size_t begin = static_cast<size_t>(t) * chunk;
            size_t end = std::min(run.seeds.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back([&, t, begin, end] {
                try {
                    work(begin, end);
                } catch (...) {
                    errors[static_cast<size_t>(t)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    bench::BenchmarkTable table;
    bool have_table = false;
    if (!run.bench_path.empty()) {
        table = io::read_benchmark(run.bench_path);
        have_table = true;
    }
    for (const auto& d : done) {
        std::string geno = space::encode_genotype(d.traj.final_record().genotype);
        std::cout << "seed " << d.seed << ": final genotype " << geno << " -> " << d.dir << "\n";
        if (have_table) {
            const bench::EntryMetrics& m = bench::query(table, geno);
            std::cout << "  benchmark: val_acc " << m.val_acc_mean << " +- " << m.val_acc_std
                      << ", test_acc " << m.test_acc_mean << " +- " << m.test_acc_std
                      << ", params " << m.params << (m.flagged ? " (flagged)" : "") << "\n";
        }
    }
    return 0;
}

int cmd_gen_bench(const SpaceOpts& sopt, const DataOpts& dopt, bench::TrainerConfig trainer,
                  int seeds, uint64_t base_seed, long long cap, int jobs, std::string out) {
    space::SpaceSpec sp = make_space(sopt);
    bench::SyntheticDataset data = make_data(dopt, sp.width);
    bench::BenchmarkTable table = bench::generate_benchmark(sp, data, trainer, seeds, base_seed,
                                                            jobs, cap);
    if (out.empty()) out = default_out_root() + "/bench.jsonl";
    if (out.find('/') != std::string::npos)
        ensure_dir(fs::path(out).parent_path().string());
    io::write_benchmark(out, table);
    bench::BenchmarkTable::Best best = table.best();
    std::cout << "wrote " << table.entries.size() << " entries -> " << out << "\n";
    std::cout << "best: " << best.genotype << " test_acc " << best.test_acc << "\n";
    return 0;
}

int cmd_eval(const std::vector<std::string>& traj_paths, const std::string& bench_path,
             const std::string& out_dir, bool svg) {
    if (bench_path.empty())
        throw ConfigError("eval needs --bench <table.jsonl> (generate one with gen-bench)");
    bench::BenchmarkTable table = io::read_benchmark(bench_path);
    struct RunEval {
        std::string name;
        bench::TrajectoryEval ev;
        std::string final_genotype;
    };
    std::vector<RunEval> runs;
    for (const auto& path : traj_paths) {
        search::Trajectory traj = io::read_trajectory_csv(path);
        RunEval r;
        r.name = fs::path(path).parent_path().filename().string();
        if (r.name.empty()) r.name = fs::path(path).stem().string();
        r.ev = bench::trajectory_eval(table, traj);
        r.final_genotype = space::encode_genotype(traj.final_record().genotype);
        runs.push_back(std::move(r));
    }

    std::cout << "benchmark best: " << table.best().genotype << " test_acc "
              << table.best().test_acc << "\n";
    for (const auto& r : runs) {
        const auto& last = r.ev.points.back();
        std::cout << r.name << ": final " << r.final_genotype << " test_acc " << last.test_acc
                  << " regret " << last.regret << " first_optimum_epoch "
                  << r.ev.first_optimum_epoch << "\n";
    }
    if (runs.size() > 1) {
        auto agg = [&](auto pick) {
            double mean = 0.0;
            for (const auto& r : runs) mean += pick(r);
            mean /= static_cast<double>(runs.size());
            double var = 0.0;
            for (const auto& r : runs) var += (pick(r) - mean) * (pick(r) - mean);
            return std::pair<double, double>(mean,
                                             std::sqrt(var / static_cast<double>(runs.size())));
        };
        auto [fm, fs_] = agg([](const RunEval& r) { return r.ev.points.back().test_acc; });
        auto [rm, rs] = agg([](const RunEval& r) { return r.ev.points.back().regret; });
        auto [om, os] = agg([](const RunEval& r) {
            return static_cast<double>(r.ev.first_optimum_epoch);
        });
        std::cout << "aggregate over " << runs.size() << " runs: final test_acc " << fm << " +- "
                  << fs_ << ", final regret " << rm << " +- " << rs << ", first_optimum_epoch "
                  << om << " +- " << os << "\n";
    }

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        std::string csv = "run,epoch,val_acc,test_acc,regret\n";
        for (const auto& r : runs)
            for (const auto& p : r.ev.points)
                csv += r.name + "," + std::to_string(p.epoch) + "," + io::csv_num(p.val_acc) +
                       "," + io::csv_num(p.test_acc) + "," + io::csv_num(p.regret) + "\n";
        io::write_text(out_dir + "/eval.csv", csv);
        if (svg) {
            std::vector<io::Series> series;
            for (const auto& r : runs) {
                io::Series s;
                s.name = r.name;
                for (const auto& p : r.ev.points)
                    s.points.emplace_back(static_cast<double>(p.epoch), p.regret);
                series.push_back(std::move(s));
            }
            io::write_svg_chart(out_dir + "/regret.svg", "ground-truth regret per epoch",
                                "epoch", "regret", series);
        }
        std::cout << "eval exports -> " << out_dir << "\n";
    }
    return 0;
}

int cmd_analyze(const std::vector<std::string>& snapshot_paths, const std::string& out_dir,
                bool svg) {
    struct RunStats {
        std::string name;
        std::vector<std::pair<int, analysis::StatsRecord>> rows;
    };
    std::vector<RunStats> runs;
    for (const auto& path : snapshot_paths) {
        io::SnapshotFile file = io::read_alpha_snapshots(path);
        RunStats r;
        r.name = fs::path(path).parent_path().filename().string();
        if (r.name.empty()) r.name = fs::path(path).stem().string();
        for (const auto& [epoch, table] : file.epochs)
            r.rows.emplace_back(epoch, analysis::stats_record(table, file.space));
        runs.push_back(std::move(r));
    }

    std::string csv =
        "run,epoch,alpha_mean,alpha_median,alpha_std,beta_total_std,lipschitz_sum,phi\n";
    for (const auto& r : runs)
        for (const auto& [epoch, s] : r.rows)
            csv += r.name + "," + std::to_string(epoch) + "," + io::csv_num(s.alpha_mean) + "," +
                   io::csv_num(s.alpha_median) + "," + io::csv_num(s.alpha_std) + "," +
                   io::csv_num(s.beta_total_std) + "," + io::csv_num(s.lipschitz_sum) + "," +
                   io::csv_num(s.phi) + "\n";

    for (const auto& r : runs) {
        const auto& first = r.rows.front().second;
        const auto& last = r.rows.back().second;
        std::cout << r.name << ": epochs " << r.rows.size() << ", alpha_std "
                  << first.alpha_std << " -> " << last.alpha_std << ", beta_total_std "
                  << first.beta_total_std << " -> " << last.beta_total_std << ", phi "
                  << first.phi << " -> " << last.phi << "\n";
    }

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        io::write_text(out_dir + "/stats.csv", csv);
        if (svg) {
            auto chart = [&](const std::string& file, const std::string& title,
                             auto pick) {
                std::vector<io::Series> series;
                for (const auto& r : runs) {
                    io::Series s;
                    s.name = r.name;
                    for (const auto& [epoch, rec] : r.rows)
                        s.points.emplace_back(static_cast<double>(epoch), pick(rec));
                    series.push_back(std::move(s));
                }
                io::write_svg_chart(out_dir + "/" + file, title, "epoch", title, series);
            };
            chart("alpha_std.svg", "alpha_std",
                  [](const analysis::StatsRecord& s) { return s.alpha_std; });
            chart("beta_total_std.svg", "beta_total_std",
                  [](const analysis::StatsRecord& s) { return s.beta_total_std; });
        }
        std::cout << "analyze exports -> " << out_dir << "\n";
    } else {
        std::cout << csv;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale differentiable architecture search with decay regularization"};
    app.require_subcommand(1);

    // --- gen-bench ---
    auto* gen = app.add_subcommand("gen-bench", "train every genotype, write a benchmark table");
    SpaceOpts g_space;
    DataOpts g_data;
    bench::TrainerConfig g_trainer;
    int g_seeds = 3;
    uint64_t g_base_seed = 0;
    long long g_cap = 4096;
    int g_jobs = 1;
    std::string g_out;
    gen->add_option("--nodes", g_space.nodes, "cell nodes (2-5)");
    gen->add_option("--width", g_space.width, "feature width (2-64)");
    gen->add_option("--ops", g_space.ops, "candidate ops, comma list of zero|skip|pool|linear|linrelu");
    gen->add_option("--data", g_data.kind, "dataset kind: blobs|rings|xor");
    gen->add_option("--n", g_data.n, "dataset size");
    gen->add_option("--classes", g_data.classes, "class count");
    gen->add_option("--noise", g_data.noise, "dataset noise level");
    gen->add_option("--data-seed", g_data.seed, "dataset seed");
    gen->add_option("--trainer-epochs", g_trainer.epochs, "entry training epochs");
    gen->add_option("--trainer-eta", g_trainer.eta, "entry training learning rate");
    gen->add_option("--trainer-momentum", g_trainer.momentum, "entry training momentum");
    gen->add_option("--seeds", g_seeds, "training repeats per genotype");
    gen->add_option("--seed", g_base_seed, "base seed for entry training");
    gen->add_option("--cap", g_cap, "max genotypes to enumerate");
    gen->add_option("--jobs", g_jobs, "worker threads");
    gen->add_option("--out", g_out, "output file (default $BETANAS_OUT_ROOT/bench.jsonl)");

    // --- search ---
    auto* se = app.add_subcommand("search", "run the bilevel architecture search");
    SearchRun run;
    std::string config_path, seed_list;
    uint64_t single_seed = 0;
    se->add_option("--config", config_path, "JSON run config (flags override it)");
    auto* o_nodes = se->add_option("--nodes", run.space.nodes, "cell nodes (2-5)");
    auto* o_width = se->add_option("--width", run.space.width, "feature width (2-64)");
    auto* o_ops = se->add_option("--ops", run.space.ops, "candidate ops, comma list");
    auto* o_kind = se->add_option("--data", run.data.kind, "dataset kind: blobs|rings|xor");
    auto* o_n = se->add_option("--n", run.data.n, "dataset size");
    auto* o_classes = se->add_option("--classes", run.data.classes, "class count");
    auto* o_noise = se->add_option("--noise", run.data.noise, "dataset noise level");
    auto* o_dseed = se->add_option("--data-seed", run.data.seed, "dataset seed");
    auto* o_epochs = se->add_option("--epochs", run.cfg.epochs, "search epochs");
    auto* o_batch = se->add_option("--batch", run.cfg.batch_size, "batch size");
    auto* o_ea = se->add_option("--eta-alpha", run.cfg.eta_alpha, "alpha learning rate");
    auto* o_b1 = se->add_option("--adam-beta1", run.cfg.adam_beta1, "alpha optimizer beta1");
    auto* o_b2 = se->add_option("--adam-beta2", run.cfg.adam_beta2, "alpha optimizer beta2");
    auto* o_eps = se->add_option("--adam-eps", run.cfg.adam_eps, "alpha optimizer epsilon");
    auto* o_ew = se->add_option("--eta-w", run.cfg.eta_w, "weight learning rate");
    auto* o_mom = se->add_option("--momentum", run.cfg.momentum, "weight momentum");
    std::string reg_token_str = "none";
    auto* o_reg = se->add_option("--reg", reg_token_str,
                                 "regularizer: none|l2_adaptive|weight_decay|beta_decay|"
                                 "beta_global|beta_zero");
    auto* o_lambda = se->add_option("--lambda", run.cfg.lambda,
                                    "fixed coefficient for l2_adaptive/weight_decay");
    auto* o_sched = se->add_option("--schedule", run.schedule,
                                   "lambda schedule for beta_* losses: linear_up|constant|linear_down");
    auto* o_ls = se->add_option("--lambda-start", run.lambda_start, "schedule start value");
    auto* o_le = se->add_option("--lambda-end", run.lambda_end, "schedule end value");
    auto* o_var = se->add_flag("--beta-zero-log-sigmoid", run.cfg.log_sigmoid_variant,
                               "use the log-sigmoid sign variant of the beta_zero penalty");
    auto* o_seed = se->add_option("--seed", single_seed, "run seed");
    auto* o_seeds = se->add_option("--seeds", seed_list, "comma list of seeds (multi-run)");
    auto* o_ainit = se->add_option("--alpha-init-std", run.cfg.alpha_init_std,
                                   "stddev of the alpha init (0 = exact zeros)");
    se->add_option("--bench", run.bench_path, "benchmark table to report final metrics against");
    se->add_option("--jobs", run.jobs, "worker threads for multi-seed runs");
    auto* o_out = se->add_option("--out", run.out, "output directory");

    // --- eval ---
    auto* ev = app.add_subcommand("eval", "score trajectories against a benchmark table");
    std::vector<std::string> ev_trajs;
    std::string ev_bench, ev_out;
    bool ev_svg = false;
    ev->add_option("--trajectory", ev_trajs, "trajectory.csv paths")->required();
    ev->add_option("--bench", ev_bench, "benchmark table (jsonl)");
    ev->add_option("--out", ev_out, "export directory for eval.csv / regret.svg");
    ev->add_flag("--svg", ev_svg, "also write an SVG regret chart");

    // --- analyze ---
    auto* an = app.add_subcommand("analyze", "per-epoch statistics from alpha snapshots");
    std::vector<std::string> an_snaps;
    std::string an_out;
    bool an_svg = false;
    an->add_option("--snapshots", an_snaps, "alpha_snapshots.jsonl paths")->required();
    an->add_option("--out", an_out, "export directory for stats.csv / charts");
    an->add_flag("--svg", an_svg, "also write SVG stat charts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen_bench(g_space, g_data, g_trainer, g_seeds, g_base_seed, g_cap, g_jobs,
                                 g_out);
        if (se->parsed()) {
            bool config_loaded = !config_path.empty();
            if (config_loaded) {
                // parse already wrote flag values into `run`; keep them, load the
                // config over fresh defaults, then re-apply whatever was passed
                SearchRun flags = run;
                run = SearchRun{};
                run.bench_path = flags.bench_path;
                run.jobs = flags.jobs;
                apply_config_file(run, config_path);
                auto passed = [](const CLI::Option* o) { return o->count() > 0; };
                if (passed(o_nodes)) run.space.nodes = flags.space.nodes;
                if (passed(o_width)) run.space.width = flags.space.width;
                if (passed(o_ops)) run.space.ops = flags.space.ops;
                if (passed(o_kind)) run.data.kind = flags.data.kind;
                if (passed(o_n)) run.data.n = flags.data.n;
                if (passed(o_classes)) run.data.classes = flags.data.classes;
                if (passed(o_noise)) run.data.noise = flags.data.noise;
                if (passed(o_dseed)) run.data.seed = flags.data.seed;
                if (passed(o_epochs)) run.cfg.epochs = flags.cfg.epochs;
                if (passed(o_batch)) run.cfg.batch_size = flags.cfg.batch_size;
                if (passed(o_ea)) run.cfg.eta_alpha = flags.cfg.eta_alpha;
                if (passed(o_b1)) run.cfg.adam_beta1 = flags.cfg.adam_beta1;
                if (passed(o_b2)) run.cfg.adam_beta2 = flags.cfg.adam_beta2;
                if (passed(o_eps)) run.cfg.adam_eps = flags.cfg.adam_eps;
                if (passed(o_ew)) run.cfg.eta_w = flags.cfg.eta_w;
                if (passed(o_mom)) run.cfg.momentum = flags.cfg.momentum;
                if (passed(o_lambda)) run.cfg.lambda = flags.cfg.lambda;
                if (passed(o_sched)) run.schedule = flags.schedule;
                if (passed(o_ls)) run.lambda_start = flags.lambda_start;
                if (passed(o_le)) run.lambda_end = flags.lambda_end;
                if (passed(o_var)) run.cfg.log_sigmoid_variant = flags.cfg.log_sigmoid_variant;
                if (passed(o_ainit)) run.cfg.alpha_init_std = flags.cfg.alpha_init_std;
                if (passed(o_out)) run.out = flags.out;
                if (passed(o_reg)) run.cfg.reg = search::reg_from_token(reg_token_str);
                if (passed(o_seed)) run.seeds = {single_seed};
                if (passed(o_seeds)) run.seeds = parse_seed_list(seed_list);
            } else {
                auto passed = [](const CLI::Option* o) { return o->count() > 0; };
                if (passed(o_reg)) run.cfg.reg = search::reg_from_token(reg_token_str);
                if (passed(o_seed)) run.seeds = {single_seed};
                if (passed(o_seeds)) run.seeds = parse_seed_list(seed_list);
            }
            return cmd_search(run, config_loaded);
        }
        if (ev->parsed()) return cmd_eval(ev_trajs, ev_bench, ev_out, ev_svg);
        if (an->parsed()) return cmd_analyze(an_snaps, an_out, an_svg);
    } catch (const CapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const NonFiniteError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
