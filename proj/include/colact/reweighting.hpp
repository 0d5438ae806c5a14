#pragma once

#include "colact/common.hpp"
#include "colact/discrete.hpp"

#include <json.hpp>

#include <cstddef>
#include <vector>

namespace colact {

/// Subgroup decomposition p = sum_a alpha_a p_a with simplex weights.
struct GroupFamily {
    std::vector<DiscreteJoint<double>> components;
    std::vector<double> base_weights;

    void validate() const {
        if (components.empty() || components.size() != base_weights.size())
            throw DomainError("group family: components and weights must match and be nonempty");
        double sum = 0.0;
        for (double w : base_weights) {
            if (w < 0.0) throw DomainError("group family: negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw DomainError("group family: weights must sum to 1");
        for (const auto& c : components) detail::require_shared_spaces(components.front(), c);
    }

    DiscreteJoint<double> mixture_distribution() const {
        DiscreteJoint<double> out{components.front().features, components.front().labels,
                                  std::vector<double>(components.front().mass.size(), 0.0)};
        for (std::size_t a = 0; a < components.size(); ++a)
            for (std::size_t i = 0; i < out.mass.size(); ++i)
                out.mass[i] += base_weights[a] * components[a].mass[i];
        return out;
    }
};

/// 0-1 loss of f under dist.
inline double zero_one_loss(const DiscreteJoint<double>& dist, const Classifier& f) {
    double loss = 0.0;
    for (std::size_t x = 0; x < dist.feature_count(); ++x)
        for (std::size_t y = 0; y < dist.label_count(); ++y)
            if (dist.labels[y] != f(dist.features[x])) loss += dist.at(x, y);
    return loss;
}

inline double accuracy(const DiscreteJoint<double>& dist, const Classifier& f) {
    return 1.0 - zero_one_loss(dist, f);
}

/// Adversarial pick over the subgroup simplex. The maximum of a linear
/// objective over the simplex sits at a vertex, so this returns the index
/// of the component with maximal 0-1 loss; ties go to the lowest index.
inline std::size_t worst_group(const GroupFamily& family, const Classifier& f) {
    family.validate();
    std::size_t best = 0;
    double best_loss = zero_one_loss(family.components[0], f);
    for (std::size_t a = 1; a < family.components.size(); ++a) {
        double loss = zero_one_loss(family.components[a], f);
        if (loss > best_loss) {
            best = a;
            best_loss = loss;
        }
    }
    return best;
}

/// Record of the idealized reweighting run.
struct ReweightTrace {
    std::vector<Classifier> classifiers;        // f_0 .. f_T
    std::vector<std::size_t> adversarial_picks;  // length T
    std::vector<double> validation_scores;      // accuracy on the validation dist
    std::size_t selected = 0;                   // argmax validation score, earliest tie

    const Classifier& selected_classifier() const { return classifiers[selected]; }
};

/// Idealized iterative reweighting: f_0 is Bayes optimal on the family
/// mixture; each f_t is Bayes optimal on the group where f_{t-1} loses the
/// most; the returned checkpoint maximizes validation accuracy (earliest
/// epoch on ties).
inline ReweightTrace ideal_continuous_reweighting(const GroupFamily& family,
                                                  const DiscreteJoint<double>& validation,
                                                  std::size_t horizon) {
    family.validate();
    detail::require_shared_spaces(family.components.front(), validation);
    ReweightTrace trace;
    trace.classifiers.push_back(bayes_optimal(family.mixture_distribution()));
    trace.validation_scores.push_back(accuracy(validation, trace.classifiers.back()));
    for (std::size_t t = 1; t <= horizon; ++t) {
        const std::size_t pick = worst_group(family, trace.classifiers.back());
        trace.adversarial_picks.push_back(pick);
        trace.classifiers.push_back(bayes_optimal(family.components[pick]));
        trace.validation_scores.push_back(accuracy(validation, trace.classifiers.back()));
    }
    trace.selected = 0;
    for (std::size_t t = 1; t < trace.validation_scores.size(); ++t)
        if (trace.validation_scores[t] > trace.validation_scores[trace.selected])
            trace.selected = t;
    return trace;
}

inline nlohmann::json to_json(const ReweightTrace& trace,
                              const std::vector<std::string>& feature_order) {
    nlohmann::json j;
    j["adversarial_picks"] = trace.adversarial_picks;
    j["validation_scores"] = trace.validation_scores;
    j["selected"] = trace.selected;
    nlohmann::json cls = nlohmann::json::array();
    for (const auto& f : trace.classifiers) {
        nlohmann::json m;
        for (const auto& feat : feature_order) m[feat] = f(feat);
        cls.push_back(std::move(m));
    }
    j["classifiers"] = std::move(cls);
    return j;
}

}  // namespace colact
