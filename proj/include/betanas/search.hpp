#pragma once

#include <string>

#include "betanas/alpha.hpp"
#include "betanas/analysis.hpp"
#include "betanas/array.hpp"
#include "betanas/data.hpp"
#include "betanas/grad.hpp"
#include "betanas/regularize.hpp"
#include "betanas/schedule.hpp"
#include "betanas/space.hpp"
#include "betanas/supernet.hpp"

namespace betanas::search {

// Regularizer wiring for the alpha objective. The first three act through
// the optimizer update (nothing added to the loss); the beta_* choices add a
// scheduled penalty term to the validation loss.
enum class RegChoice { None, L2Adaptive, WeightDecay, BetaDecay, BetaGlobal, BetaZero };

inline const char* reg_token(RegChoice r) {
    switch (r) {
        case RegChoice::None: return "none";
        case RegChoice::L2Adaptive: return "l2_adaptive";
        case RegChoice::WeightDecay: return "weight_decay";
        case RegChoice::BetaDecay: return "beta_decay";
        case RegChoice::BetaGlobal: return "beta_global";
        case RegChoice::BetaZero: return "beta_zero";
    }
    return "?";
}

inline RegChoice reg_from_token(const std::string& t) {
    if (t == "none") return RegChoice::None;
    if (t == "l2_adaptive") return RegChoice::L2Adaptive;
    if (t == "weight_decay") return RegChoice::WeightDecay;
    if (t == "beta_decay") return RegChoice::BetaDecay;
    if (t == "beta_global") return RegChoice::BetaGlobal;
    if (t == "beta_zero") return RegChoice::BetaZero;
    throw ConfigError("unknown regularizer '" + t +
                      "' (expected none|l2_adaptive|weight_decay|beta_decay|beta_global|beta_zero)");
}

inline bool is_beta_loss(RegChoice r) {
    return r == RegChoice::BetaDecay || r == RegChoice::BetaGlobal || r == RegChoice::BetaZero;
}

struct SearchConfig {
    int epochs = 50;
    int batch_size = 64;
    // alpha optimizer (adaptive moments)
    double eta_alpha = 3e-4;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // weight optimizer (classical momentum)
    double eta_w = 0.025;
    double momentum = 0.9;
    // regularization
    RegChoice reg = RegChoice::None;
    double lambda = 0.0;  // fixed coefficient for l2_adaptive / weight_decay
    schedule::LambdaSchedule sched =
        schedule::LambdaSchedule::constant(0.0, 50);  // lambda_e for beta_* losses
    bool log_sigmoid_variant = false;
    // run control
    uint64_t seed = 0;
    double alpha_init_std = 0.0;  // 0 gives the exact-uniform zero init
    double divergence_threshold = 1e6;
};

inline void validate(const SearchConfig& c) {
    if (c.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (c.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (c.eta_alpha < 0.0 || c.eta_w < 0.0) throw ConfigError("learning rates must be >= 0");
    if (c.adam_beta1 < 0.0 || c.adam_beta1 >= 1.0 || c.adam_beta2 < 0.0 || c.adam_beta2 >= 1.0)
        throw ConfigError("adaptive moment factors must lie in [0, 1)");
    if (c.adam_eps <= 0.0) throw ConfigError("adam_eps must be > 0");
    if (c.momentum < 0.0 || c.momentum >= 1.0) throw ConfigError("momentum must lie in [0, 1)");
    if (c.lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (c.alpha_init_std < 0.0) throw ConfigError("alpha_init_std must be >= 0");
    if (c.divergence_threshold <= 0.0) throw ConfigError("divergence_threshold must be > 0");
    if (is_beta_loss(c.reg) && c.sched.total_epochs != c.epochs)
        throw ConfigError("schedule covers " + std::to_string(c.sched.total_epochs) +
                          " epochs but the run has " + std::to_string(c.epochs));
}

// --- optimizer steps ----------------------------------------------------------

struct AdamState {
    grad::Array m, v;
    long t = 0;
};

// Bias-corrected adaptive moment step on alpha. coupled_l2 adds lambda*alpha
// to the gradient before the moment update; decoupled_wd subtracts
// eta*lambda*alpha (pre-step value) after it.
inline void adaptive_alpha_step(AdamState& st, grad::Array& alpha, const grad::Array& grads,
                                double eta, double b1, double b2, double eps,
                                double coupled_l2 = 0.0, double decoupled_wd = 0.0) {
    if (!grads.same_shape(alpha)) throw ShapeError("adaptive_alpha_step: gradient shape mismatch");
    if (st.t == 0) {
        st.m = grad::Array::zeros(alpha.shape);
        st.v = grad::Array::zeros(alpha.shape);
    }
    ++st.t;
    double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
    double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
    grad::Array pre = alpha;
    for (int i = 0; i < alpha.size(); ++i) {
        double g = grads.at(i) + coupled_l2 * pre.at(i);
        st.m.at(i) = b1 * st.m.at(i) + (1.0 - b1) * g;
        st.v.at(i) = b2 * st.v.at(i) + (1.0 - b2) * g * g;
        double mhat = st.m.at(i) / c1;
        double vhat = st.v.at(i) / c2;
        alpha.at(i) -= eta * mhat / (std::sqrt(vhat) + eps);
    }
    if (decoupled_wd != 0.0)
        for (int i = 0; i < alpha.size(); ++i) alpha.at(i) -= eta * decoupled_wd * pre.at(i);
}

struct MomentumState {
    grad::Array v;
};

inline void momentum_w_step(MomentumState& st, grad::Array& w, const grad::Array& grads,
                            double eta, double mu) {
    if (!grads.same_shape(w)) throw ShapeError("momentum_w_step: gradient shape mismatch");
    if (st.v.size() == 0) st.v = grad::Array::zeros(w.shape);
    for (int i = 0; i < w.size(); ++i) {
        st.v.at(i) = mu * st.v.at(i) + grads.at(i);
        w.at(i) -= eta * st.v.at(i);
    }
}

// --- trajectory ---------------------------------------------------------------

struct EpochRecord {
    int epoch = 0;  // 1-based
    double lambda = 0.0;
    supernet::AlphaTable alpha;  // snapshot at epoch end
    double train_loss = 0.0;
    double val_loss = 0.0;
    double reg_loss = 0.0;  // lambda_e * penalty, 0 when nothing is added to the loss
    space::Genotype genotype;
    analysis::StatsRecord stats;
};

struct Trajectory {
    space::SpaceSpec space;
    SearchConfig config;
    int classes = 0;
    std::vector<EpochRecord> records;

    const EpochRecord& final_record() const {
        if (records.empty()) throw ConfigError("trajectory has no records");
        return records.back();
    }
};

// --- the bilevel loop -----------------------------------------------------------

inline Trajectory search(const space::SpaceSpec& space, const bench::SyntheticDataset& data,
                         const SearchConfig& cfg) {
    validate(cfg);
    if (data.spec.width != space.width)
        throw SpaceMismatchError("dataset width " + std::to_string(data.spec.width) +
                                 " != space width " + std::to_string(space.width));
    int classes = data.spec.classes;

    grad::Rng rng(cfg.seed);
    grad::Rng init_rng = rng.fork(10);
    grad::Rng alpha_rng = rng.fork(11);
    grad::Rng shuffle_rng = rng.fork(12);

    supernet::SupernetWeights weights = supernet::SupernetWeights::init(space, classes, init_rng);
    grad::Parameter alpha(grad::Array::zeros({space.num_edges(), space.num_ops()}));
    if (cfg.alpha_init_std > 0.0)
        for (double& v : alpha.value.data) v = cfg.alpha_init_std * alpha_rng.normal();

    AdamState alpha_state;
    std::vector<grad::Parameter*> wparams = weights.all_params();
    std::vector<MomentumState> wstates(wparams.size());

    int n_train = static_cast<int>(data.split(bench::Split::SearchTrain).size());
    int n_val = static_cast<int>(data.split(bench::Split::SearchVal).size());
    int shorter = std::min(n_train, n_val);
    if (shorter < 1) throw ConfigError("search splits are empty");
    int batch = std::min(cfg.batch_size, shorter);
    int n_batches = std::max(1, shorter / batch);

    double coupled_l2 = cfg.reg == RegChoice::L2Adaptive ? cfg.lambda : 0.0;
    double decoupled_wd = cfg.reg == RegChoice::WeightDecay ? cfg.lambda : 0.0;

    Trajectory traj;
    traj.space = space;
    traj.config = cfg;
    traj.classes = classes;
    traj.records.reserve(static_cast<size_t>(cfg.epochs));

    std::vector<int> perm_train(static_cast<size_t>(n_train));
    std::vector<int> perm_val(static_cast<size_t>(n_val));
    for (int i = 0; i < n_train; ++i) perm_train[static_cast<size_t>(i)] = i;
    for (int i = 0; i < n_val; ++i) perm_val[static_cast<size_t>(i)] = i;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double lambda_e = 0.0;
        if (is_beta_loss(cfg.reg))
            lambda_e = schedule::lambda_at(cfg.sched, epoch);
        else if (cfg.reg != RegChoice::None)
            lambda_e = cfg.lambda;

        shuffle_rng.shuffle(perm_train);
        shuffle_rng.shuffle(perm_val);

        double sum_train = 0.0, sum_val = 0.0, sum_reg = 0.0;
        for (int b = 0; b < n_batches; ++b) {
            std::vector<int> val_pos(perm_val.begin() + static_cast<long>(b) * batch,
                                     perm_val.begin() + static_cast<long>(b) * batch + batch);
            auto [xv, yv] = data.gather(bench::Split::SearchVal, val_pos);

            // alpha step on the validation objective
            try {
                grad::Graph g;
                grad::Value a = g.param(alpha);
                grad::Value mix = g.softmax(a);
                grad::Value x = g.placeholder({batch, space.width});
                grad::Value logits = supernet::supernet_forward_with(g, space, weights, mix, x);
                grad::Value ce = g.cross_entropy_logits(logits, yv);
                grad::Value root = ce;
                grad::Value reg_term{};
                bool has_reg = is_beta_loss(cfg.reg) && lambda_e != 0.0;
                if (has_reg) {
                    grad::Value penalty{};
                    if (cfg.reg == RegChoice::BetaDecay)
                        penalty = regularize::beta_decay_term(g, a);
                    else if (cfg.reg == RegChoice::BetaGlobal)
                        penalty = regularize::beta_global_term(g, a);
                    else
                        penalty = regularize::beta_zero_term(g, a, cfg.log_sigmoid_variant);
                    reg_term = g.scale(penalty, lambda_e);
                    root = g.add(ce, reg_term);
                }
                g.forward({{x.id, xv}});
                double val_loss = g.value_of(ce).scalar_value();
                if (!std::isfinite(val_loss) || val_loss > cfg.divergence_threshold)
                    throw DivergenceError("validation loss diverged at epoch " +
                                              std::to_string(epoch) + " batch " +
                                              std::to_string(b),
                                          epoch, b);
                sum_val += val_loss;
                if (has_reg) sum_reg += g.value_of(reg_term).scalar_value();
                alpha.zero_grad();
                weights.zero_grad();
                g.backward(root);
                adaptive_alpha_step(alpha_state, alpha.value, alpha.grad, cfg.eta_alpha,
                                    cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, coupled_l2,
                                    decoupled_wd);
            } catch (const NonFiniteError& err) {
                throw DivergenceError(std::string(err.what()) + " at epoch " +
                                          std::to_string(epoch) + " batch " + std::to_string(b),
                                      epoch, b);
            }

            std::vector<int> train_pos(perm_train.begin() + static_cast<long>(b) * batch,
                                       perm_train.begin() + static_cast<long>(b) * batch + batch);
            auto [xt, yt] = data.gather(bench::Split::SearchTrain, train_pos);

            // weight step on the training objective, alpha frozen
            try {
                grad::Graph g;
                grad::Value mix = g.softmax(g.constant(alpha.value));
                grad::Value x = g.placeholder({batch, space.width});
                grad::Value logits = supernet::supernet_forward_with(g, space, weights, mix, x);
                grad::Value ce = g.cross_entropy_logits(logits, yt);
                g.forward({{x.id, xt}});
                double train_loss = g.value_of(ce).scalar_value();
                if (!std::isfinite(train_loss) || train_loss > cfg.divergence_threshold)
                    throw DivergenceError("training loss diverged at epoch " +
                                              std::to_string(epoch) + " batch " +
                                              std::to_string(b),
                                          epoch, b);
                sum_train += train_loss;
                weights.zero_grad();
                g.backward(ce);
                for (size_t i = 0; i < wparams.size(); ++i)
                    momentum_w_step(wstates[i], wparams[i]->value, wparams[i]->grad, cfg.eta_w,
                                    cfg.momentum);
            } catch (const NonFiniteError& err) {
                throw DivergenceError(std::string(err.what()) + " at epoch " +
                                          std::to_string(epoch) + " batch " + std::to_string(b),
                                      epoch, b);
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lambda = lambda_e;
        rec.alpha.values = alpha.value;
        rec.train_loss = sum_train / n_batches;
        rec.val_loss = sum_val / n_batches;
        rec.reg_loss = sum_reg / n_batches;
        rec.genotype = space::discretize(rec.alpha, space);
        rec.stats = analysis::stats_record(rec.alpha, space);
        traj.records.push_back(std::move(rec));
    }
    return traj;
}

}  // namespace betanas::search
