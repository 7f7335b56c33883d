#pragma once

#include "betanas/alpha.hpp"
#include "betanas/array.hpp"
#include "betanas/grad.hpp"

namespace betanas::regularize {

// ---------------------------------------------------------------------------
// Decay families and their analytic effect on the mixture weights.
//
// Every family fits one update shape:
//     alpha_next = alpha - eta * grad - eta * lambda * F(alpha)
// and differs only in the mapping F (and, for the adaptive-L2 family, in how
// the gradient itself is rescaled). `predicted_beta_ratio` evaluates the
// closed-form per-op ratio softmax(alpha_next) / softmax(alpha - eta*grad);
// `simulate_ratio` recomputes the same quantity by brute force from the two
// softmaxes and serves as the oracle the closed form is tested against.
// ---------------------------------------------------------------------------

enum class DecayFamily { NoDecay, L2Adaptive, WeightDecay, BetaDecay, BetaZero };

inline const char* family_token(DecayFamily f) {
    switch (f) {
        case DecayFamily::NoDecay: return "none";
        case DecayFamily::L2Adaptive: return "l2_adaptive";
        case DecayFamily::WeightDecay: return "weight_decay";
        case DecayFamily::BetaDecay: return "beta_decay";
        case DecayFamily::BetaZero: return "beta_zero";
    }
    return "?";
}

inline DecayFamily family_from_token(const std::string& t) {
    for (DecayFamily f : {DecayFamily::NoDecay, DecayFamily::L2Adaptive,
                          DecayFamily::WeightDecay, DecayFamily::BetaDecay,
                          DecayFamily::BetaZero})
        if (t == family_token(f)) return f;
    throw ParseError("unknown decay family '" + t + "'");
}

struct DecayMapping {
    DecayFamily family = DecayFamily::NoDecay;
    // Adaptive-gradient scaling floor, used by the L2Adaptive family only.
    double adaptive_eps = 1e-8;
    // Swaps the smoothmax(0, a) penalty for its log-sigmoid sign variant
    // -log(1 + exp(-a)); the two push alpha in opposite directions.
    bool log_sigmoid_variant = false;
};

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

// --- losses over whole tables ----------------------------------------------

// Mean over edges of logsumexp(alpha row). Gradient of each row is
// softmax(row) / num_edges.
inline double beta_decay_loss(const supernet::AlphaTable& alpha) {
    if (!alpha.values.all_finite()) throw NonFiniteError("beta_decay_loss: non-finite alpha");
    int e = alpha.num_edges(), k = alpha.num_ops();
    double total = 0.0;
    for (int r = 0; r < e; ++r) {
        double mx = alpha.at(r, 0);
        for (int c = 1; c < k; ++c) mx = std::max(mx, alpha.at(r, c));
        double s = 0.0;
        for (int c = 0; c < k; ++c) s += std::exp(alpha.at(r, c) - mx);
        total += mx + std::log(s);
    }
    return total / e;
}

// Logsumexp over every entry of the table jointly. Gradient is the softmax
// over the flattened table (sums to 1 overall).
inline double beta_global_loss(const supernet::AlphaTable& alpha) {
    if (!alpha.values.all_finite()) throw NonFiniteError("beta_global_loss: non-finite alpha");
    const auto& d = alpha.values.data;
    double mx = *std::max_element(d.begin(), d.end());
    double s = 0.0;
    for (double v : d) s += std::exp(v - mx);
    return mx + std::log(s);
}

// Mean over all entries of softplus(alpha) = smoothmax(0, alpha); the
// log-sigmoid variant uses -log(1 + exp(-alpha)) instead.
inline double beta_zero_loss(const supernet::AlphaTable& alpha, bool log_sigmoid_variant = false) {
    if (!alpha.values.all_finite()) throw NonFiniteError("beta_zero_loss: non-finite alpha");
    double total = 0.0;
    for (double v : alpha.values.data) {
        double sp = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
        total += log_sigmoid_variant ? v - sp : sp;  // v - softplus(v) == -log(1+e^-v)
    }
    return total / alpha.values.size();
}

// --- graph builders (for in-loss regularization during search) --------------

inline grad::Value beta_decay_term(grad::Graph& g, grad::Value alpha) {
    return g.mean(g.logsumexp(alpha));
}

inline grad::Value beta_global_term(grad::Graph& g, grad::Value alpha) {
    return g.logsumexp(g.logsumexp(alpha));
}

inline grad::Value beta_zero_term(grad::Graph& g, grad::Value alpha,
                                  bool log_sigmoid_variant = false) {
    if (!log_sigmoid_variant) return g.mean(g.softplus(alpha));
    return g.scale(g.mean(g.softplus(g.scale(alpha, -1.0))), -1.0);
}

// --- per-row closed forms ----------------------------------------------------

inline grad::Array softmax_row(const grad::Array& a) {
    grad::Array out = a;
    double mx = *std::max_element(out.data.begin(), out.data.end());
    double s = 0.0;
    for (double& v : out.data) {
        v = std::exp(v - mx);
        s += v;
    }
    for (double& v : out.data) v /= s;
    return out;
}

// The mapping F(alpha) for one row. The L2Adaptive direction is defined from
// the adaptive optimizer's own scaling: with g' = g + lambda*alpha,
//   F = [g'/(|g'|+eps) - g/(|g|+eps)] / lambda
// so that the unified update with this F reproduces the optimizer's first
// step exactly. For lambda == 0 it degenerates to zero.
inline grad::Array decay_direction(const DecayMapping& m, const grad::Array& alpha,
                                   const grad::Array& grad, double lambda) {
    grad::Array f = grad::Array::zeros(alpha.shape);
    switch (m.family) {
        case DecayFamily::NoDecay:
            break;
        case DecayFamily::WeightDecay:
            f = alpha;
            break;
        case DecayFamily::BetaDecay:
            f = softmax_row(alpha);
            break;
        case DecayFamily::BetaZero:
            for (int i = 0; i < alpha.size(); ++i)
                f.at(i) = m.log_sigmoid_variant ? sigmoid(-alpha.at(i)) : sigmoid(alpha.at(i));
            break;
        case DecayFamily::L2Adaptive: {
            if (lambda == 0.0) break;
            if (!grad.same_shape(alpha))
                throw ShapeError("decay_direction: grad shape != alpha shape");
            for (int i = 0; i < alpha.size(); ++i) {
                double g = grad.at(i);
                double gp = g + lambda * alpha.at(i);
                double scaled_gp = gp / (std::abs(gp) + m.adaptive_eps);
                double scaled_g = g / (std::abs(g) + m.adaptive_eps);
                f.at(i) = (scaled_gp - scaled_g) / lambda;
            }
            break;
        }
    }
    return f;
}

// Effective gradient entering the update: plain for every family except
// L2Adaptive, which moves by the adaptive-scaled gradient.
inline grad::Array effective_grad(const DecayMapping& m, const grad::Array& grad) {
    if (m.family != DecayFamily::L2Adaptive) return grad;
    grad::Array out = grad;
    for (double& v : out.data) v = v / (std::abs(v) + m.adaptive_eps);
    return out;
}

// Closed-form per-op ratio softmax(alpha_next)_k / softmax(alpha_plus)_k where
// alpha_plus = alpha - eta*eff_grad and alpha_next = alpha_plus - eta*lambda*F.
// Algebra: the softmax denominators cancel into
//   ratio_k = sum_j exp(a+_j) / sum_j exp(a+_j + eta*lambda*(F_k - F_j))
// computed with max subtraction for stability.
inline grad::Array predicted_beta_ratio(const grad::Array& alpha, const grad::Array& grad,
                                        double eta, double lambda, const DecayMapping& m) {
    if (eta <= 0.0) throw ConfigError("predicted_beta_ratio: eta must be positive");
    if (lambda < 0.0) throw ConfigError("predicted_beta_ratio: lambda must be non-negative");
    if (!grad.same_shape(alpha)) throw ShapeError("predicted_beta_ratio: shape mismatch");
    int k = alpha.size();
    grad::Array ratio = grad::Array::zeros(alpha.shape);
    if (lambda == 0.0 || m.family == DecayFamily::NoDecay) {
        ratio.fill(1.0);
        return ratio;
    }
    grad::Array eff = effective_grad(m, grad);
    grad::Array f = decay_direction(m, alpha, grad, lambda);
    grad::Array plus = alpha;
    for (int i = 0; i < k; ++i) plus.at(i) -= eta * eff.at(i);
    double mx = *std::max_element(plus.data.begin(), plus.data.end());
    double num = 0.0;
    for (int i = 0; i < k; ++i) num += std::exp(plus.at(i) - mx);
    for (int i = 0; i < k; ++i) {
        double den = 0.0;
        for (int j = 0; j < k; ++j)
            den += std::exp(plus.at(j) - mx + eta * lambda * (f.at(i) - f.at(j)));
        ratio.at(i) = num / den;
    }
    return ratio;
}

// Brute-force oracle: apply the update, take both softmaxes, divide. The
// L2Adaptive branch steps by the optimizer's actual scaled gradients rather
// than going through F at all.
inline grad::Array simulate_ratio(const grad::Array& alpha, const grad::Array& grad, double eta,
                                  double lambda, const DecayMapping& m) {
    if (eta <= 0.0) throw ConfigError("simulate_ratio: eta must be positive");
    if (lambda < 0.0) throw ConfigError("simulate_ratio: lambda must be non-negative");
    if (!grad.same_shape(alpha)) throw ShapeError("simulate_ratio: shape mismatch");
    int k = alpha.size();
    grad::Array plus = alpha;
    grad::Array next = alpha;
    if (m.family == DecayFamily::L2Adaptive) {
        for (int i = 0; i < k; ++i) {
            double g = grad.at(i);
            double gp = g + lambda * alpha.at(i);
            plus.at(i) -= eta * g / (std::abs(g) + m.adaptive_eps);
            next.at(i) -= eta * gp / (std::abs(gp) + m.adaptive_eps);
        }
    } else {
        grad::Array f = decay_direction(m, alpha, grad, lambda);
        for (int i = 0; i < k; ++i) {
            plus.at(i) -= eta * grad.at(i);
            next.at(i) = plus.at(i) - eta * lambda * f.at(i);
        }
    }
    grad::Array b_plus = softmax_row(plus);
    grad::Array b_next = softmax_row(next);
    grad::Array ratio = grad::Array::zeros(alpha.shape);
    for (int i = 0; i < k; ++i) ratio.at(i) = b_next.at(i) / b_plus.at(i);
    return ratio;
}

// Unified one-step update for a whole table; rows are independent.
inline supernet::AlphaTable decayed_step(const supernet::AlphaTable& alpha,
                                         const grad::Array& grad_table, double eta,
                                         double lambda, const DecayMapping& m) {
    if (!grad_table.same_shape(alpha.values)) throw ShapeError("decayed_step: shape mismatch");
    supernet::AlphaTable out = alpha;
    int e = alpha.num_edges(), k = alpha.num_ops();
    for (int r = 0; r < e; ++r) {
        grad::Array arow = grad::Array::zeros({k});
        grad::Array grow = grad::Array::zeros({k});
        for (int c = 0; c < k; ++c) {
            arow.at(c) = alpha.at(r, c);
            grow.at(c) = grad_table.at(r, c);
        }
        if (m.family == DecayFamily::L2Adaptive) {
            for (int c = 0; c < k; ++c) {
                double g = grow.at(c);
                double gp = g + lambda * arow.at(c);
                out.at(r, c) = arow.at(c) - eta * gp / (std::abs(gp) + m.adaptive_eps);
            }
        } else {
            grad::Array f = decay_direction(m, arow, grow, lambda);
            for (int c = 0; c < k; ++c)
                out.at(r, c) = arow.at(c) - eta * grow.at(c) - eta * lambda * f.at(c);
        }
    }
    return out;
}

// --- theta factors -----------------------------------------------------------

// Per-edge multiplicative effect of one BetaDecay step on the mixture
// weights: beta_next = theta * beta_plus elementwise.
struct ThetaReport {
    grad::Array theta;  // [edges, ops]
    double lambda = 0.0;
    double eta = 0.0;
    int step = 0;
};

inline ThetaReport theta_factors(const supernet::AlphaTable& alpha, const grad::Array& grad_table,
                                 double eta, double lambda, int step = 0) {
    if (!grad_table.same_shape(alpha.values)) throw ShapeError("theta_factors: shape mismatch");
    ThetaReport rep;
    rep.lambda = lambda;
    rep.eta = eta;
    rep.step = step;
    rep.theta = grad::Array::zeros(alpha.values.shape);
    DecayMapping m;
    m.family = DecayFamily::BetaDecay;
    int e = alpha.num_edges(), k = alpha.num_ops();
    for (int r = 0; r < e; ++r) {
        grad::Array arow = grad::Array::zeros({k});
        grad::Array grow = grad::Array::zeros({k});
        for (int c = 0; c < k; ++c) {
            arow.at(c) = alpha.at(r, c);
            grow.at(c) = grad_table.at(r, c);
        }
        grad::Array ratio = predicted_beta_ratio(arow, grow, eta, lambda, m);
        for (int c = 0; c < k; ++c) rep.theta.at(r, c) = ratio.at(c);
    }
    return rep;
}

}  // namespace betanas::regularize
