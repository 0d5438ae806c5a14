#pragma once

#include "colact/common.hpp"
#include "colact/datasets.hpp"
#include "colact/mlp.hpp"
#include "colact/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

namespace colact {

enum class Optimizer { adam, sgd };
enum class Algorithm { erm, jtt, lff, cvar };
enum class StoppingRule { max_val_accuracy, max_val_success, last };

struct TrainConfig {
    Optimizer optimizer = Optimizer::adam;
    double learning_rate = 5e-4;
    std::size_t batch_size = 128;
    std::size_t epochs = 0;
    std::uint64_t seed = 0;
    Algorithm algorithm = Algorithm::erm;
    std::vector<std::size_t> hidden = {64, 32, 16};
    std::size_t jtt_first_stage_steps = 500;  // minibatch steps, not epochs
    double jtt_lambda = 6.0;                  // upweight on the error set
    double lff_q = 0.7;
    double cvar_keep = 0.5;  // fraction of each batch kept (largest losses)

    void validate() const {
        if (learning_rate <= 0.0) throw DomainError("train config: learning_rate must be positive");
        if (batch_size < 1) throw DomainError("train config: batch_size must be positive");
        if (jtt_lambda < 1.0) throw DomainError("train config: jtt_lambda must be at least 1");
        if (jtt_first_stage_steps < 1)
            throw DomainError("train config: jtt_first_stage_steps must be at least 1");
        if (lff_q <= 0.0 || lff_q > 1.0) throw DomainError("train config: lff_q outside (0, 1]");
        if (cvar_keep <= 0.0 || cvar_keep > 1.0)
            throw DomainError("train config: cvar_keep outside (0, 1]");
    }
};

struct EpochStats {
    double train_accuracy = 0.0;
    double val_accuracy = std::numeric_limits<double>::quiet_NaN();
    double success = std::numeric_limits<double>::quiet_NaN();
};

struct TrainTrace {
    std::vector<EpochStats> epochs;
};

/// Optional per-epoch measurements: accuracy on a validation set and
/// collective success on held-out base samples pushed through the signal.
struct EvalContext {
    const LabeledSet* validation = nullptr;
    const LabeledSet* success_base = nullptr;
    const ContinuousStrategy* strategy = nullptr;
};

inline std::size_t class_of(int label) { return label > 0 ? 1 : 0; }

inline Matrix features_matrix(const LabeledSet& set) {
    if (set.size() == 0) throw DomainError("empty sample set");
    const std::size_t d = set.samples.front().features.size();
    Matrix x(set.size(), d);
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) x.at(i, j) = set.samples[i].features[j];
    return x;
}

inline std::vector<std::size_t> class_labels(const LabeledSet& set) {
    std::vector<std::size_t> y(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) y[i] = class_of(set.samples[i].label);
    return y;
}

inline std::vector<std::size_t> predict_classes(const MlpModel& model, const Matrix& x) {
    auto probs = forward(model, x);
    std::vector<std::size_t> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < probs.cols; ++j)
            if (probs.at(i, j) > probs.at(i, best)) best = j;
        out[i] = best;
    }
    return out;
}

inline double model_accuracy(const MlpModel& model, const Matrix& x,
                             const std::vector<std::size_t>& y) {
    auto pred = predict_classes(model, x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (pred[i] == y[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(y.size());
}

/// Empirical success: fraction of held-out base samples whose transformed
/// features are classified as the target label.
inline double evaluate_success(const MlpModel& model, const LabeledSet& base_samples,
                               const ContinuousStrategy& strategy) {
    if (base_samples.size() == 0) throw DomainError("evaluate_success: empty sample set");
    const std::size_t d = base_samples.samples.front().features.size();
    Matrix x(base_samples.size(), d);
    for (std::size_t i = 0; i < base_samples.size(); ++i) {
        auto g = strategy.transform(base_samples.samples[i].features);
        for (std::size_t j = 0; j < d; ++j) x.at(i, j) = g[j];
    }
    auto pred = predict_classes(model, x);
    const std::size_t target = class_of(strategy.target_label);
    std::size_t hits = 0;
    for (std::size_t p : pred)
        if (p == target) ++hits;
    return static_cast<double>(hits) / static_cast<double>(base_samples.size());
}

namespace detail {

struct Evaluator {
    Matrix train_x;
    std::vector<std::size_t> train_y;
    Matrix val_x;
    std::vector<std::size_t> val_y;
    Matrix success_x;
    std::size_t success_target = 0;
    bool has_val = false;
    bool has_success = false;

    Evaluator(const LabeledSet& set, const EvalContext& eval)
        : train_x(features_matrix(set)), train_y(class_labels(set)) {
        if (eval.validation && eval.validation->size() > 0) {
            val_x = features_matrix(*eval.validation);
            val_y = class_labels(*eval.validation);
            has_val = true;
        }
        if (eval.success_base && eval.strategy && eval.success_base->size() > 0) {
            const std::size_t d = eval.success_base->samples.front().features.size();
            success_x = Matrix(eval.success_base->size(), d);
            for (std::size_t i = 0; i < eval.success_base->size(); ++i) {
                auto g = eval.strategy->transform(eval.success_base->samples[i].features);
                for (std::size_t j = 0; j < d; ++j) success_x.at(i, j) = g[j];
            }
            success_target = class_of(eval.strategy->target_label);
            has_success = true;
        }
    }

    EpochStats measure(const MlpModel& model) const {
        EpochStats s;
        s.train_accuracy = model_accuracy(model, train_x, train_y);
        if (has_val) s.val_accuracy = model_accuracy(model, val_x, val_y);
        if (has_success) {
            auto pred = predict_classes(model, success_x);
            std::size_t hits = 0;
            for (std::size_t p : pred)
                if (p == success_target) ++hits;
            s.success = static_cast<double>(hits) / static_cast<double>(pred.size());
        }
        return s;
    }
};

struct Stepper {
    Optimizer kind;
    AdamParams params;
    AdamState state;

    Stepper(const MlpModel& model, const TrainConfig& cfg)
        : kind(cfg.optimizer), state(model) {
        params.learning_rate = cfg.learning_rate;
    }

    void step(MlpModel& model, const Gradients& g) {
        if (kind == Optimizer::adam)
            adam_step(model, g, state, params);
        else
            sgd_step(model, g, params.learning_rate);
    }
};

inline Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), x.cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < x.cols; ++j) out.at(i, j) = x.at(idx[i], j);
    return out;
}

inline std::vector<std::size_t> make_layer_sizes(std::size_t input, const TrainConfig& cfg) {
    std::vector<std::size_t> sizes{input};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(2);
    return sizes;
}

}  // namespace detail

/// Largest-loss selection for the iterative reweighting step: keeps the
/// ceil(keep * b) largest entries, resolving ties toward the lower index.
inline std::vector<bool> cvar_keep_mask(const std::vector<double>& losses, double keep) {
    if (keep <= 0.0 || keep > 1.0) throw DomainError("cvar_keep_mask: keep outside (0, 1]");
    const std::size_t b = losses.size();
    const auto m = static_cast<std::size_t>(
        std::ceil(keep * static_cast<double>(b) - 1e-12));
    std::vector<std::size_t> order(b);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
        return losses[a] > losses[c];
    });
    std::vector<bool> kept(b, false);
    for (std::size_t i = 0; i < m && i < b; ++i) kept[order[i]] = true;
    return kept;
}

/// Plain minibatch training on the (optionally weighted) cross entropy.
/// Weight semantics: per-batch gradients are weighted means, so constant
/// rescaling of the weights changes nothing.
inline std::pair<MlpModel, TrainTrace> train_weighted_erm(
    const LabeledSet& set, const TrainConfig& cfg, const EvalContext& eval,
    const std::vector<double>& sample_weights, std::uint64_t init_stream) {
    cfg.validate();
    detail::Evaluator evaluator(set, eval);
    MlpModel model =
        init_mlp(detail::make_layer_sizes(evaluator.train_x.cols, cfg),
                 derive_seed(cfg.seed, init_stream));
    detail::Stepper stepper(model, cfg);
    Rng shuffle_rng(derive_seed(cfg.seed, init_stream + 1));
    TrainTrace trace;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto order = shuffle_rng.permutation(set.size());
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + stop);
            Matrix bx = detail::gather_rows(evaluator.train_x, idx);
            std::vector<std::size_t> by(idx.size());
            std::vector<double> bw(idx.size());
            double wsum = 0.0;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                by[i] = evaluator.train_y[idx[i]];
                bw[i] = sample_weights[idx[i]];
                wsum += bw[i];
            }
            if (wsum <= 0.0) continue;  // batch carries no weight
            stepper.step(model, grad_ce(model, bx, by, bw));
        }
        trace.epochs.push_back(evaluator.measure(model));
    }
    return {std::move(model), std::move(trace)};
}

inline std::pair<MlpModel, TrainTrace> train_erm(const LabeledSet& set, const TrainConfig& cfg,
                                                 const EvalContext& eval = {}) {
    return train_weighted_erm(set, cfg, eval, std::vector<double>(set.size(), 1.0), 0);
}

struct JttResult {
    MlpModel model;
    TrainTrace trace;
    std::vector<bool> error_set;  // first-stage misclassifications
};

/// Two-stage training: a short identification run, then a fresh model
/// trained with the error set upweighted by lambda.
inline JttResult train_jtt(const LabeledSet& set, const TrainConfig& cfg,
                           const EvalContext& eval = {}) {
    cfg.validate();
    detail::Evaluator evaluator(set, eval);
    MlpModel first = init_mlp(detail::make_layer_sizes(evaluator.train_x.cols, cfg),
                              derive_seed(cfg.seed, 0));
    detail::Stepper stepper(first, cfg);
    Rng shuffle_rng(derive_seed(cfg.seed, 1));
    std::size_t steps = 0;
    while (steps < cfg.jtt_first_stage_steps) {
        auto order = shuffle_rng.permutation(set.size());
        for (std::size_t start = 0;
             start < order.size() && steps < cfg.jtt_first_stage_steps;
             start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + stop);
            Matrix bx = detail::gather_rows(evaluator.train_x, idx);
            std::vector<std::size_t> by(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) by[i] = evaluator.train_y[idx[i]];
            stepper.step(first, grad_ce(first, bx, by, std::vector<double>(idx.size(), 1.0)));
            ++steps;
        }
    }

    auto pred = predict_classes(first, evaluator.train_x);
    std::vector<bool> error_set(set.size());
    std::vector<double> weights(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        error_set[i] = pred[i] != evaluator.train_y[i];
        weights[i] = error_set[i] ? cfg.jtt_lambda : 1.0;
    }

    auto [model, trace] = train_weighted_erm(set, cfg, eval, weights, 2);
    return {std::move(model), std::move(trace), std::move(error_set)};
}

/// Effective collective size realized by a concrete weighting of the
/// training set (weights lambda on the error set, 1 elsewhere).
inline double empirical_alpha_eff(const std::vector<bool>& error_set,
                                  const std::vector<bool>& collective_mask, double lambda) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < error_set.size(); ++i) {
        const double w = error_set[i] ? lambda : 1.0;
        den += w;
        if (collective_mask[i]) num += w;
    }
    if (den <= 0.0) throw DegenerateWeightError("empirical_alpha_eff: zero total weight");
    return num / den;
}

struct LffResult {
    MlpModel biased;
    MlpModel debiased;
    TrainTrace trace;  // measured on the debiased model
};

/// Simultaneous pair training: the biased net follows the generalized cross
/// entropy, the debiased net follows relative-difficulty-weighted cross
/// entropy computed on the same minibatch (biased update first).
inline LffResult train_lff(const LabeledSet& set, const TrainConfig& cfg,
                           const EvalContext& eval = {}) {
    cfg.validate();
    detail::Evaluator evaluator(set, eval);
    const auto sizes = detail::make_layer_sizes(evaluator.train_x.cols, cfg);
    MlpModel biased = init_mlp(sizes, derive_seed(cfg.seed, 0));
    MlpModel debiased = init_mlp(sizes, derive_seed(cfg.seed, 2));
    detail::Stepper step_b(biased, cfg);
    detail::Stepper step_d(debiased, cfg);
    Rng shuffle_rng(derive_seed(cfg.seed, 1));
    TrainTrace trace;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto order = shuffle_rng.permutation(set.size());
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + stop);
            Matrix bx = detail::gather_rows(evaluator.train_x, idx);
            std::vector<std::size_t> by(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) by[i] = evaluator.train_y[idx[i]];

            step_b.step(biased, grad_gce(biased, bx, by, cfg.lff_q));

            auto probs_b = forward(biased, bx);
            auto probs_d = forward(debiased, bx);
            std::vector<double> w(idx.size());
            double wsum = 0.0;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                w[i] = lff_weight(cross_entropy(probs_b.at(i, by[i])),
                                  cross_entropy(probs_d.at(i, by[i])));
                wsum += w[i];
            }
            if (wsum > 0.0) step_d.step(debiased, grad_ce(debiased, bx, by, w));
        }
        trace.epochs.push_back(evaluator.measure(debiased));
    }
    return {std::move(biased), std::move(debiased), std::move(trace)};
}

/// Iterative reweighting: each minibatch drops its smallest-loss fraction
/// and steps on the mean over the kept samples.
inline std::pair<MlpModel, TrainTrace> train_cvar(const LabeledSet& set, const TrainConfig& cfg,
                                                  const EvalContext& eval = {}) {
    cfg.validate();
    detail::Evaluator evaluator(set, eval);
    MlpModel model = init_mlp(detail::make_layer_sizes(evaluator.train_x.cols, cfg),
                              derive_seed(cfg.seed, 0));
    detail::Stepper stepper(model, cfg);
    Rng shuffle_rng(derive_seed(cfg.seed, 1));
    TrainTrace trace;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto order = shuffle_rng.permutation(set.size());
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + stop);
            Matrix bx = detail::gather_rows(evaluator.train_x, idx);
            std::vector<std::size_t> by(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) by[i] = evaluator.train_y[idx[i]];

            auto probs = forward(model, bx);
            std::vector<double> losses(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i)
                losses[i] = cross_entropy(probs.at(i, by[i]));
            auto kept = cvar_keep_mask(losses, cfg.cvar_keep);
            std::vector<double> w(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) w[i] = kept[i] ? 1.0 : 0.0;
            stepper.step(model, grad_ce(model, bx, by, w));
        }
        trace.epochs.push_back(evaluator.measure(model));
    }
    return {std::move(model), std::move(trace)};
}

/// Checkpoint choice: argmax of the rule's column, earliest epoch on ties.
inline std::size_t select_checkpoint(const TrainTrace& trace, StoppingRule rule) {
    if (trace.epochs.empty()) throw DomainError("select_checkpoint: empty trace");
    if (rule == StoppingRule::last) return trace.epochs.size() - 1;
    auto column = [rule](const EpochStats& s) {
        const double v = rule == StoppingRule::max_val_accuracy ? s.val_accuracy : s.success;
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    };
    std::size_t best = 0;
    for (std::size_t t = 1; t < trace.epochs.size(); ++t)
        if (column(trace.epochs[t]) > column(trace.epochs[best])) best = t;
    return best;
}

inline std::string format_sig6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
}

inline void write_trace_csv(std::ostream& os, const TrainTrace& trace) {
    os << "epoch,train_acc,val_acc,success\n";
    for (std::size_t t = 0; t < trace.epochs.size(); ++t) {
        const auto& e = trace.epochs[t];
        os << t << ',' << format_sig6(e.train_accuracy) << ',' << format_sig6(e.val_accuracy)
           << ',' << format_sig6(e.success) << '\n';
    }
}

}  // namespace colact
