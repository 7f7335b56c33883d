#pragma once

#include <map>
#include <thread>

#include "betanas/data.hpp"
#include "betanas/search.hpp"
#include "betanas/space.hpp"
#include "betanas/supernet.hpp"

namespace betanas::bench {

// ---------------------------------------------------------------------------
// Brute-force tabular benchmark: every genotype in the space is trained from
// scratch (several seeds) and its ground-truth accuracies are stored in a
// table keyed by genotype string. Search trajectories are then scored by
// lookup instead of retraining.
// ---------------------------------------------------------------------------

struct TrainerConfig {
    int epochs = 200;
    double eta = 0.05;
    double momentum = 0.9;
    double divergence_threshold = 1e6;
};

inline void validate(const TrainerConfig& t) {
    if (t.epochs < 1) throw ConfigError("trainer epochs must be >= 1");
    if (t.eta <= 0.0) throw ConfigError("trainer eta must be > 0");
    if (t.momentum < 0.0 || t.momentum >= 1.0)
        throw ConfigError("trainer momentum must lie in [0, 1)");
    if (t.divergence_threshold <= 0.0) throw ConfigError("divergence_threshold must be > 0");
}

// Stored at 6 decimal places; one quantization step = 1e-6.
inline double quantize_acc(double x) { return std::round(x * 1e6) / 1e6; }

struct EntryMetrics {
    double val_acc_mean = 0.0;
    double val_acc_std = 0.0;
    double test_acc_mean = 0.0;
    double test_acc_std = 0.0;
    long long params = 0;
    bool flagged = false;  // some seed diverged; accuracies taken at abort
};

struct BenchmarkTable {
    space::SpaceSpec space;
    DatasetSpec dataset;
    TrainerConfig trainer;
    int seeds = 0;
    uint64_t base_seed = 0;
    std::map<std::string, EntryMetrics> entries;

    struct Best {
        std::string genotype;
        double test_acc = 0.0;
    };

    // Highest mean test accuracy; ties resolve to the lexicographically
    // smallest genotype (map order).
    Best best() const {
        if (entries.empty()) throw ConfigError("benchmark table is empty");
        Best b{entries.begin()->first, entries.begin()->second.test_acc_mean};
        for (const auto& [geno, m] : entries)
            if (m.test_acc_mean > b.test_acc) b = {geno, m.test_acc_mean};
        return b;
    }
};

inline const EntryMetrics& query(const BenchmarkTable& table, const std::string& genotype) {
    auto it = table.entries.find(genotype);
    if (it == table.entries.end())
        throw UnknownGenotypeError("genotype '" + genotype + "' not in benchmark table");
    return it->second;
}

inline const EntryMetrics& query(const BenchmarkTable& table, const space::Genotype& g) {
    return query(table, space::encode_genotype(g));
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
    uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    return x ^ (x >> 31);
}

// Seed for one (genotype, repeat) cell; independent of enumeration order.
inline uint64_t entry_seed(uint64_t base, const std::string& genotype, int repeat) {
    return mix_seed(mix_seed(base, grad::fnv1a(genotype)),
                    static_cast<uint64_t>(repeat) + 0x51ed270b5ULL);
}

struct SeedOutcome {
    double val_acc = 0.0;
    double test_acc = 0.0;
    bool diverged = false;
};

// Full-batch momentum training of one discrete net on the eval-train split;
// eta is halved at epochs 100 and 150. Divergence stops training early and
// scores whatever weights exist at that point.
inline SeedOutcome train_genotype(const space::SpaceSpec& space, const SyntheticDataset& data,
                                  const space::Genotype& geno, const TrainerConfig& trainer,
                                  uint64_t seed) {
    grad::Rng rng(seed);
    supernet::SupernetWeights weights =
        supernet::SupernetWeights::init(space, data.spec.classes, rng);
    std::vector<grad::Parameter*> params = weights.all_params();
    std::vector<search::MomentumState> states(params.size());

    auto [xt, yt] = data.full_split(Split::EvalTrain);
    SeedOutcome out;
    for (int epoch = 1; epoch <= trainer.epochs; ++epoch) {
        double eta = trainer.eta;
        if (epoch >= 100) eta *= 0.5;
        if (epoch >= 150) eta *= 0.5;
        try {
            grad::Graph g;
            grad::Value x = g.placeholder(xt.shape);
            grad::Value logits = supernet::genotype_forward(g, space, weights, geno, x);
            grad::Value ce = g.cross_entropy_logits(logits, yt);
            g.forward({{x.id, xt}});
            double loss = g.value_of(ce).scalar_value();
            if (!std::isfinite(loss) || loss > trainer.divergence_threshold) {
                out.diverged = true;
                break;
            }
            weights.zero_grad();
            g.backward(ce);
            for (size_t i = 0; i < params.size(); ++i)
                search::momentum_w_step(states[i], params[i]->value, params[i]->grad, eta,
                                        trainer.momentum);
        } catch (const NonFiniteError&) {
            out.diverged = true;
            break;
        }
    }

    auto eval_on = [&](Split s) {
        auto [x, y] = data.full_split(s);
        grad::Graph g;
        grad::Value xv = g.placeholder(x.shape);
        grad::Value logits = supernet::genotype_forward(g, space, weights, geno, xv);
        g.forward({{xv.id, x}});
        return accuracy(g.value_of(logits), y);
    };
    out.val_acc = eval_on(Split::SearchVal);
    out.test_acc = eval_on(Split::EvalTest);
    return out;
}

inline EntryMetrics summarize_entry(const space::SpaceSpec& space, const SyntheticDataset& data,
                                    const space::Genotype& geno, const TrainerConfig& trainer,
                                    int seeds, uint64_t base_seed) {
    std::string key = space::encode_genotype(geno);
    std::vector<double> vals, tests;
    EntryMetrics m;
    for (int s = 0; s < seeds; ++s) {
        SeedOutcome o = train_genotype(space, data, geno, trainer, entry_seed(base_seed, key, s));
        vals.push_back(o.val_acc);
        tests.push_back(o.test_acc);
        if (o.diverged) m.flagged = true;
    }
    auto mean_std = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        return std::pair<double, double>(mean, std::sqrt(var / static_cast<double>(xs.size())));
    };
    auto [vm, vs] = mean_std(vals);
    auto [tm, ts] = mean_std(tests);
    m.val_acc_mean = quantize_acc(vm);
    m.val_acc_std = quantize_acc(vs);
    m.test_acc_mean = quantize_acc(tm);
    m.test_acc_std = quantize_acc(ts);
    m.params = supernet::param_count(geno, space, data.spec.classes);
    return m;
}

// Trains every genotype in the space. `jobs` bounds worker threads; entries
// land in a sorted map, so output is independent of worker scheduling.
inline BenchmarkTable generate_benchmark(const space::SpaceSpec& space,
                                         const SyntheticDataset& data,
                                         const TrainerConfig& trainer, int seeds,
                                         uint64_t base_seed, int jobs = 1,
                                         long long cap = 4096) {
    validate(trainer);
    if (seeds < 1) throw ConfigError("benchmark needs seeds >= 1");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (data.spec.width != space.width)
        throw SpaceMismatchError("dataset width " + std::to_string(data.spec.width) +
                                 " != space width " + std::to_string(space.width));
    std::vector<space::Genotype> genos = space::enumerate_genotypes(space, cap);

    std::vector<EntryMetrics> results(genos.size());
    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i)
            results[i] = summarize_entry(space, data, genos[i], trainer, seeds, base_seed);
    };
    int workers = std::min<int>(jobs, static_cast<int>(genos.size()));
    if (workers <= 1) {
        work(0, genos.size());
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (genos.size() + static_cast<size_t>(workers) - 1) /
                       static_cast<size_t>(workers);
        for (int t = 0; t < workers; ++t) {
            size_t begin = static_cast<size_t>(t) * chunk;
            size_t end = std::min(genos.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    BenchmarkTable table;
    table.space = space;
    table.dataset = data.spec;
    table.trainer = trainer;
    table.seeds = seeds;
    table.base_seed = base_seed;
    for (size_t i = 0; i < genos.size(); ++i)
        table.entries[space::encode_genotype(genos[i])] = results[i];
    return table;
}

// --- trajectory scoring ---------------------------------------------------------

struct EvalPoint {
    int epoch = 0;
    double val_acc = 0.0;
    double test_acc = 0.0;
    double regret = 0.0;  // table best test acc minus this genotype's
};

struct TrajectoryEval {
    std::vector<EvalPoint> points;
    int first_optimum_epoch = 0;  // first epoch attaining the trajectory's minimum regret
    double min_regret = 0.0;
    std::string best_genotype;  // table-wide best
    double best_test_acc = 0.0;
};

inline TrajectoryEval trajectory_eval(const BenchmarkTable& table,
                                      const search::Trajectory& traj) {
    if (table.space != traj.space)
        throw SpaceMismatchError("trajectory space does not match benchmark space");
    TrajectoryEval ev;
    BenchmarkTable::Best best = table.best();
    ev.best_genotype = best.genotype;
    ev.best_test_acc = best.test_acc;
    for (const auto& rec : traj.records) {
        std::string key = space::encode_genotype(rec.genotype);
        auto it = table.entries.find(key);
        if (it == table.entries.end())
            throw UnknownGenotypeError("epoch " + std::to_string(rec.epoch) + ": genotype '" +
                                       key + "' not in benchmark table");
        EvalPoint p;
        p.epoch = rec.epoch;
        p.val_acc = it->second.val_acc_mean;
        p.test_acc = it->second.test_acc_mean;
        p.regret = best.test_acc - it->second.test_acc_mean;
        ev.points.push_back(p);
    }
    if (ev.points.empty()) throw ConfigError("trajectory has no records");
    ev.min_regret = ev.points.front().regret;
    for (const auto& p : ev.points) ev.min_regret = std::min(ev.min_regret, p.regret);
    for (const auto& p : ev.points)
        if (p.regret == ev.min_regret) {
            ev.first_optimum_epoch = p.epoch;
            break;
        }
    return ev;
}

}  // namespace betanas::bench
