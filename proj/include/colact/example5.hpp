#pragma once

#include "colact/bounds.hpp"
#include "colact/common.hpp"
#include "colact/discrete.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace colact {

/// Two perfectly label-correlated categorical features, ten values each.
/// Feature ids are "a{i}b{j}"; the first half of each range belongs to the
/// positive class. The planted signal collapses the second coordinate to
/// j = 0 with target label "neg". A two-stage learner that fits the first
/// coordinate and then memorizes its error set ends up predicting "neg" on
/// the whole j = 0 column, which a surrogate with an almost-unique second
/// coordinate turns into a near-1 success bound.
template <class R>
struct TwoFeatureInstance {
    DiscreteJoint<R> base;
    SignalStrategy strategy;
    Classifier biased;  // output of the two-stage learner on the mixture
    R alpha;
};

inline std::string pair_feature_id(std::size_t i, std::size_t j) {
    return "a" + std::to_string(i) + "b" + std::to_string(j);
}

/// The classifier the two-stage learner converges to: target label on the
/// signal column, first-coordinate rule elsewhere.
inline Classifier two_stage_classifier(std::size_t n_first, std::size_t n_second) {
    Classifier h;
    for (std::size_t i = 0; i < n_first; ++i)
        for (std::size_t j = 0; j < n_second; ++j)
            h.decision[pair_feature_id(i, j)] =
                (j == 0) ? "neg" : (i < n_first / 2 ? "pos" : "neg");
    return h;
}

template <class R>
TwoFeatureInstance<R> make_two_feature_instance() {
    constexpr std::size_t n = 10;
    TwoFeatureInstance<R> inst;
    inst.base.labels = {"pos", "neg"};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            inst.base.features.push_back(pair_feature_id(i, j));
    inst.base.mass.assign(inst.base.features.size() * 2, scalar_traits<R>::zero());
    const R cell = R(1) / R(50);  // 1/2 * 1/5 * 1/5
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t f = i * n + j;
            if (i < n / 2 && j < n / 2) inst.base.at(f, 0) = cell;
            if (i >= n / 2 && j >= n / 2) inst.base.at(f, 1) = cell;
        }
    }
    inst.base.validate();

    inst.strategy.target_label = "neg";
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            inst.strategy.transform[pair_feature_id(i, j)] = pair_feature_id(i, 0);

    inst.biased = two_stage_classifier(n, n);
    inst.alpha = R(1) / R(10);
    return inst;
}

/// Surrogate with the same first-coordinate conditionals but a uniform,
/// label-independent second coordinate over n_second values. Larger
/// n_second makes the signal column arbitrarily unique.
template <class R>
DiscreteJoint<R> make_surrogate(std::size_t n_second) {
    constexpr std::size_t n_first = 10;
    DiscreteJoint<R> q;
    q.labels = {"pos", "neg"};
    for (std::size_t i = 0; i < n_first; ++i)
        for (std::size_t j = 0; j < n_second; ++j)
            q.features.push_back(pair_feature_id(i, j));
    q.mass.assign(q.features.size() * 2, scalar_traits<R>::zero());
    const R cell = R(1) / (R(10) * R(static_cast<long long>(n_second)));
    for (std::size_t i = 0; i < n_first; ++i)
        for (std::size_t j = 0; j < n_second; ++j)
            q.at(i * n_second + j, i < n_first / 2 ? 0 : 1) = cell;
    q.validate();
    return q;
}

template <class R>
SignalStrategy surrogate_strategy(std::size_t n_second) {
    SignalStrategy s;
    s.target_label = "neg";
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < n_second; ++j)
            s.transform[pair_feature_id(i, j)] = pair_feature_id(i, 0);
    return s;
}

/// All published constants of the worked example, recomputed from scratch.
template <class R>
struct TwoFeatureReport {
    R xi;
    R delta;
    R thm1;
    R biased_success;
    struct SurrogateRow {
        std::size_t n_second;
        R omega_q;
        R xi_q;
        R delta_q;
        R oblivious;
    };
    std::vector<SurrogateRow> surrogates;
};

template <class R>
TwoFeatureReport<R> evaluate_two_feature_instance(const std::vector<std::size_t>& n_values) {
    const auto inst = make_two_feature_instance<R>();
    TwoFeatureReport<R> rep;
    rep.xi = uniqueness(inst.base, inst.strategy);
    rep.delta = suboptimality_gap(inst.base, inst.strategy);
    rep.thm1 = success_lower_bound(inst.alpha, rep.xi, rep.delta, scalar_traits<R>::zero());
    rep.biased_success = classifier_success(inst.biased, inst.base, inst.strategy);

    for (std::size_t n : n_values) {
        if (n < 10) throw DomainError("surrogate second coordinate needs at least 10 values");
        const auto q = make_surrogate<R>(n);
        const auto strat_q = surrogate_strategy<R>(n);
        const auto coll_q = collective_from_strategy(q, strat_q);
        const auto q_alpha = mixture(q, coll_q, inst.alpha);
        const Classifier f_q = bayes_optimal(q_alpha);
        const Classifier h_q = two_stage_classifier(10, n);
        typename TwoFeatureReport<R>::SurrogateRow row;
        row.n_second = n;
        row.omega_q = omega(coll_q, h_q, f_q);
        row.xi_q = uniqueness(q, strat_q);
        row.delta_q = suboptimality_gap(q, strat_q);
        row.oblivious = oblivious_bound_value(inst.alpha, row.omega_q, row.xi_q, row.delta_q);
        rep.surrogates.push_back(row);
    }
    return rep;
}

}  // namespace colact
