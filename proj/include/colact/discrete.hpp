#pragma once

#include "colact/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace colact {

/// Exact finite joint distribution over features x labels.
///
/// Mass is stored row-major (one row per feature id, one column per label
/// id). The scalar type R is double for the numeric backend or Rational for
/// exact arithmetic; every operation below is a pure function of its inputs.
template <class R>
struct DiscreteJoint {
    std::vector<std::string> features;
    std::vector<std::string> labels;
    std::vector<R> mass;  // features.size() * labels.size(), row-major

    std::size_t feature_count() const { return features.size(); }
    std::size_t label_count() const { return labels.size(); }

    const R& at(std::size_t f, std::size_t l) const { return mass[f * labels.size() + l]; }
    R& at(std::size_t f, std::size_t l) { return mass[f * labels.size() + l]; }

    R feature_marginal(std::size_t f) const {
        R s = scalar_traits<R>::zero();
        for (std::size_t l = 0; l < labels.size(); ++l) s += at(f, l);
        return s;
    }

    std::size_t feature_index(const std::string& id) const {
        for (std::size_t i = 0; i < features.size(); ++i)
            if (features[i] == id) return i;
        throw DomainError("unknown feature id: " + id);
    }

    std::size_t label_index(const std::string& id) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == id) return i;
        throw DomainError("unknown label id: " + id);
    }

    /// Validates the type invariants: unique ids, nonnegative entries,
    /// total mass 1 (exactly on the exact backend, within tolerance otherwise).
    void validate() const {
        if (mass.size() != features.size() * labels.size())
            throw DomainError("mass table size does not match feature/label spaces");
        std::unordered_set<std::string> seen(features.begin(), features.end());
        if (seen.size() != features.size()) throw DomainError("duplicate feature ids");
        seen.clear();
        seen.insert(labels.begin(), labels.end());
        if (seen.size() != labels.size()) throw DomainError("duplicate label ids");
        R sum = scalar_traits<R>::zero();
        for (const R& m : mass) {
            if (m < scalar_traits<R>::zero()) throw DomainError("negative mass entry");
            sum += m;
        }
        if (scalar_abs(sum - scalar_traits<R>::one()) > scalar_traits<R>::sum_tolerance())
            throw DomainError("mass does not sum to 1");
    }
};

/// Feature transform g plus target label y*; the planted signal.
struct SignalStrategy {
    std::unordered_map<std::string, std::string> transform;  // total on the feature set
    std::string target_label;

    const std::string& apply(const std::string& feature) const {
        auto it = transform.find(feature);
        if (it == transform.end())
            throw DomainError("strategy transform not total: missing feature " + feature);
        return it->second;
    }
};

/// Per-sample weight w(x, y), laid out like the distribution it applies to.
template <class R>
struct WeightFunction {
    std::vector<std::string> features;
    std::vector<std::string> labels;
    std::vector<R> weight;  // row-major, same layout as DiscreteJoint

    const R& at(std::size_t f, std::size_t l) const { return weight[f * labels.size() + l]; }
    R& at(std::size_t f, std::size_t l) { return weight[f * labels.size() + l]; }

    static WeightFunction uniform(const DiscreteJoint<R>& d) {
        return WeightFunction{d.features, d.labels,
                              std::vector<R>(d.mass.size(), scalar_traits<R>::one())};
    }
};

/// Deterministic decision rule, total on the feature set it is used with.
struct Classifier {
    std::unordered_map<std::string, std::string> decision;

    const std::string& operator()(const std::string& feature) const {
        auto it = decision.find(feature);
        if (it == decision.end())
            throw DomainError("classifier not total: missing feature " + feature);
        return it->second;
    }
};

/// The four scalar properties of a planted signal.
struct SignalStats {
    double alpha = 0.0;    // collective fraction
    double xi = 0.0;       // uniqueness, base mass of the signal codomain
    double delta = 0.0;    // sub-optimality gap
    double epsilon = 0.0;  // learner sub-optimality (minimal TV)
};

namespace detail {

template <class R>
void require_shared_spaces(const DiscreteJoint<R>& a, const DiscreteJoint<R>& b) {
    if (a.features != b.features || a.labels != b.labels)
        throw SpaceMismatchError("distributions do not share feature/label spaces");
}

template <class R>
void require_shared_spaces(const DiscreteJoint<R>& a, const WeightFunction<R>& w) {
    if (a.features != w.features || a.labels != w.labels)
        throw SpaceMismatchError("weight function does not share the distribution's spaces");
}

}  // namespace detail

/// P_alpha = alpha * collective + (1 - alpha) * base, entry-wise.
template <class R>
DiscreteJoint<R> mixture(const DiscreteJoint<R>& base, const DiscreteJoint<R>& collective,
                         const R& alpha) {
    detail::require_shared_spaces(base, collective);
    if (alpha < scalar_traits<R>::zero() || alpha > scalar_traits<R>::one())
        throw DomainError("mixture: alpha outside [0, 1]");
    DiscreteJoint<R> out{base.features, base.labels, std::vector<R>(base.mass.size())};
    const R rest = scalar_traits<R>::one() - alpha;
    for (std::size_t i = 0; i < base.mass.size(); ++i)
        out.mass[i] = alpha * collective.mass[i] + rest * base.mass[i];
    return out;
}

/// Pushforward of the base feature marginal through g, all mass on y*.
template <class R>
DiscreteJoint<R> collective_from_strategy(const DiscreteJoint<R>& base,
                                          const SignalStrategy& strategy) {
    DiscreteJoint<R> out{base.features, base.labels,
                         std::vector<R>(base.mass.size(), scalar_traits<R>::zero())};
    const std::size_t target = base.label_index(strategy.target_label);
    for (std::size_t f = 0; f < base.feature_count(); ++f) {
        R marg = base.feature_marginal(f);
        if (marg == scalar_traits<R>::zero()) continue;
        out.at(base.feature_index(strategy.apply(base.features[f])), target) += marg;
    }
    return out;
}

/// Conditional-argmax decision per feature. Ties break toward the lowest
/// label index; zero-marginal features map to the first label.
template <class R>
Classifier bayes_optimal(const DiscreteJoint<R>& dist) {
    Classifier f;
    for (std::size_t x = 0; x < dist.feature_count(); ++x) {
        std::size_t best = 0;
        for (std::size_t y = 1; y < dist.label_count(); ++y)
            if (dist.at(x, y) > dist.at(x, best)) best = y;
        f.decision[dist.features[x]] = dist.labels[best];
    }
    return f;
}

/// S = P0[f(g(x)) = y*], summed exactly over the base feature marginal.
template <class R>
R classifier_success(const Classifier& f, const DiscreteJoint<R>& base,
                     const SignalStrategy& strategy) {
    R s = scalar_traits<R>::zero();
    for (std::size_t x = 0; x < base.feature_count(); ++x) {
        R marg = base.feature_marginal(x);
        if (marg == scalar_traits<R>::zero()) continue;
        if (f(strategy.apply(base.features[x])) == strategy.target_label) s += marg;
    }
    return s;
}

/// Signal uniqueness: base feature-marginal mass of the codomain X* of g.
template <class R>
R uniqueness(const DiscreteJoint<R>& base, const SignalStrategy& strategy) {
    std::unordered_set<std::string> image;
    for (const auto& feature : base.features) image.insert(strategy.apply(feature));
    R s = scalar_traits<R>::zero();
    for (std::size_t x = 0; x < base.feature_count(); ++x)
        if (image.count(base.features[x])) s += base.feature_marginal(x);
    return s;
}

/// Delta = max over x in X* (positive marginal only) of
/// max_y P(y|x) - P(y*|x); 0 when X* carries no base mass.
template <class R>
R suboptimality_gap(const DiscreteJoint<R>& base, const SignalStrategy& strategy) {
    std::unordered_set<std::string> image;
    for (const auto& feature : base.features) image.insert(strategy.apply(feature));
    const std::size_t target = base.label_index(strategy.target_label);
    bool any = false;
    R best = scalar_traits<R>::zero();
    for (std::size_t x = 0; x < base.feature_count(); ++x) {
        if (!image.count(base.features[x])) continue;
        R marg = base.feature_marginal(x);
        if (marg == scalar_traits<R>::zero()) continue;
        R top = base.at(x, 0);
        for (std::size_t y = 1; y < base.label_count(); ++y)
            if (base.at(x, y) > top) top = base.at(x, y);
        R gap = (top - base.at(x, target)) / marg;
        if (!any || gap > best) {
            best = gap;
            any = true;
        }
    }
    return any ? best : scalar_traits<R>::zero();
}

/// Total variation distance: half the entry-wise L1 distance.
template <class R>
R tv_distance(const DiscreteJoint<R>& p, const DiscreteJoint<R>& q) {
    detail::require_shared_spaces(p, q);
    R s = scalar_traits<R>::zero();
    for (std::size_t i = 0; i < p.mass.size(); ++i) s += scalar_abs(p.mass[i] - q.mass[i]);
    return s / R(2);
}

enum class Divergence { kl, chi2, tv };

/// D_f(p || q) for f = t log t (KL), (t-1)^2 (chi-square), |t-1|/2 (TV).
/// KL and chi-square require p absolutely continuous w.r.t. q.
inline double f_divergence(const DiscreteJoint<double>& p, const DiscreteJoint<double>& q,
                           Divergence kind) {
    detail::require_shared_spaces(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.mass.size(); ++i) {
        const double pi = p.mass[i];
        const double qi = q.mass[i];
        switch (kind) {
            case Divergence::kl:
                if (pi > 0.0) {
                    if (qi <= 0.0)
                        throw DivergenceUndefinedError("KL undefined: p not dominated by q");
                    s += pi * std::log(pi / qi);
                }
                break;
            case Divergence::chi2:
                if (qi > 0.0) {
                    s += (pi - qi) * (pi - qi) / qi;
                } else if (pi > 0.0) {
                    throw DivergenceUndefinedError("chi2 undefined: p not dominated by q");
                }
                break;
            case Divergence::tv:
                s += 0.5 * std::abs(pi - qi);
                break;
        }
    }
    return s;
}

/// Expected weight E_P[w].
template <class R>
R expected_weight(const DiscreteJoint<R>& dist, const WeightFunction<R>& w) {
    detail::require_shared_spaces(dist, w);
    R s = scalar_traits<R>::zero();
    for (std::size_t i = 0; i < dist.mass.size(); ++i) s += dist.mass[i] * w.weight[i];
    return s;
}

/// P^(w) = w * P / E_P[w].
template <class R>
DiscreteJoint<R> weighted(const DiscreteJoint<R>& dist, const WeightFunction<R>& w) {
    const R norm = expected_weight(dist, w);
    if (norm <= scalar_traits<R>::zero())
        throw DegenerateWeightError("weighted: expected weight is zero on the support");
    DiscreteJoint<R> out{dist.features, dist.labels, std::vector<R>(dist.mass.size())};
    for (std::size_t i = 0; i < dist.mass.size(); ++i)
        out.mass[i] = dist.mass[i] * w.weight[i] / norm;
    return out;
}

/// Effective collective size alpha_eff(w) = alpha * E_{P*}[w] / E_{P_alpha}[w].
///
/// Membership of a sample in the collective is resolved through the mixture
/// decomposition (latent origin), so the numerator reads the collective
/// component only.
template <class R>
R effective_size(const DiscreteJoint<R>& base, const DiscreteJoint<R>& collective,
                 const R& alpha, const WeightFunction<R>& w) {
    if (alpha < scalar_traits<R>::zero() || alpha > scalar_traits<R>::one())
        throw DomainError("effective_size: alpha outside [0, 1]");
    const R ew_coll = expected_weight(collective, w);
    const R ew_base = expected_weight(base, w);
    const R ew_mix = alpha * ew_coll + (scalar_traits<R>::one() - alpha) * ew_base;
    if (ew_mix <= scalar_traits<R>::zero())
        throw DegenerateWeightError("effective_size: expected weight is zero under the mixture");
    return alpha * ew_coll / ew_mix;
}

/// Corrective term for the effective-size bound:
/// c = E_{x~P*}[ Dw_x P0^(w)(x) / (P*)^(w)(x) - D_x P0(x) / P*(x) ],
/// where Dw_x / D_x are the per-feature gaps max_y P(y|x) - P(y*|x) under
/// the weighted / unweighted base. Terms whose denominators vanish
/// contribute zero (the expectation only reads positive-P* points).
template <class R>
R corrective_c(const DiscreteJoint<R>& base, const DiscreteJoint<R>& collective,
               const std::string& target_label, const WeightFunction<R>& w) {
    detail::require_shared_spaces(base, collective);
    detail::require_shared_spaces(base, w);
    const std::size_t target = base.label_index(target_label);
    const DiscreteJoint<R> base_w = weighted(base, w);
    const R ew_coll = expected_weight(collective, w);
    if (ew_coll <= scalar_traits<R>::zero())
        throw DegenerateWeightError("corrective_c: collective carries zero weight");

    auto gap_at = [target](const DiscreteJoint<R>& d, std::size_t x) {
        R top = d.at(x, 0);
        for (std::size_t y = 1; y < d.label_count(); ++y)
            if (d.at(x, y) > top) top = d.at(x, y);
        return top - d.at(x, target);  // unnormalized; divided by the marginal below
    };

    R c = scalar_traits<R>::zero();
    for (std::size_t x = 0; x < base.feature_count(); ++x) {
        const R coll_marg = collective.feature_marginal(x);
        if (coll_marg == scalar_traits<R>::zero()) continue;

        // weighted term: Dw_x * P0^(w)(x) / (P*)^(w)(x)
        const R coll_w_marg_unnorm = [&] {
            R s = scalar_traits<R>::zero();
            for (std::size_t y = 0; y < base.label_count(); ++y)
                s += collective.at(x, y) * w.at(x, y);
            return s;
        }();
        if (coll_w_marg_unnorm > scalar_traits<R>::zero()) {
            const R base_w_marg = base_w.feature_marginal(x);
            if (base_w_marg > scalar_traits<R>::zero()) {
                const R dw = gap_at(base_w, x) / base_w_marg;
                const R coll_w_marg = coll_w_marg_unnorm / ew_coll;
                c += coll_marg * dw * base_w_marg / coll_w_marg;
            }
        }

        // unweighted term: D_x * P0(x) / P*(x); the P*(x) factors cancel
        const R base_marg = base.feature_marginal(x);
        if (base_marg > scalar_traits<R>::zero()) {
            const R dx = gap_at(base, x) / base_marg;
            c -= dx * base_marg;
        }
    }
    return c;
}

/// Whether f's decision is a conditional argmax at every positive-mass
/// feature (ties admitted).
template <class R>
bool is_bayes_admissible(const DiscreteJoint<R>& dist, const Classifier& f, const R& tol) {
    for (std::size_t x = 0; x < dist.feature_count(); ++x) {
        if (dist.feature_marginal(x) == scalar_traits<R>::zero()) continue;
        const R chosen = dist.at(x, dist.label_index(f(dist.features[x])));
        for (std::size_t y = 0; y < dist.label_count(); ++y)
            if (dist.at(x, y) > chosen + tol) return false;
    }
    return true;
}

template <class R>
struct EpsilonResult {
    R epsilon;
    DiscreteJoint<R> repaired;
};

/// Smallest TV move from dist to a distribution on which f is Bayes optimal.
///
/// Per feature, mass is transferred within the column from the labels above
/// the water level down to f's label until it ties the maximum. For binary
/// labels this is the exact minimum; for more labels it is the minimal
/// within-feature repair (validated against grid search on tiny instances).
template <class R>
EpsilonResult<R> epsilon_suboptimality(const DiscreteJoint<R>& dist, const Classifier& f) {
    DiscreteJoint<R> repaired = dist;
    const std::size_t n_labels = dist.label_count();
    for (std::size_t x = 0; x < dist.feature_count(); ++x) {
        if (dist.feature_marginal(x) == scalar_traits<R>::zero()) continue;
        const std::size_t target = dist.label_index(f(dist.features[x]));
        R top = dist.at(x, 0);
        for (std::size_t y = 1; y < n_labels; ++y)
            if (dist.at(x, y) > top) top = dist.at(x, y);
        if (dist.at(x, target) == top) continue;

        // Labels other than the target, sorted by descending mass.
        std::vector<std::size_t> others;
        for (std::size_t y = 0; y < n_labels; ++y)
            if (y != target) others.push_back(y);
        std::sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
            return dist.at(x, a) > dist.at(x, b);
        });

        // Water level L: cut the top-j labels to L and raise the target to L,
        // with the cut mass exactly covering the raise.
        R prefix = scalar_traits<R>::zero();
        for (std::size_t j = 1; j <= others.size(); ++j) {
            prefix += dist.at(x, others[j - 1]);
            R level = (prefix + dist.at(x, target)) / R(static_cast<int>(j + 1));
            const bool above_next =
                j == others.size() || level >= dist.at(x, others[j]);
            if (above_next && level <= dist.at(x, others[j - 1])) {
                for (std::size_t i = 0; i < j; ++i)
                    if (repaired.at(x, others[i]) > level) repaired.at(x, others[i]) = level;
                repaired.at(x, target) = level;
                break;
            }
        }
    }
    return {tv_distance(dist, repaired), repaired};
}

/// Classifier TV distance under the collective feature marginal:
/// TV(P*(X) x h(X) | P*(X) x f(X)). For deterministic classifiers this is
/// the collective mass of the disagreement set.
template <class R>
R omega(const DiscreteJoint<R>& collective, const Classifier& h, const Classifier& f) {
    R s = scalar_traits<R>::zero();
    for (std::size_t x = 0; x < collective.feature_count(); ++x) {
        R marg = collective.feature_marginal(x);
        if (marg == scalar_traits<R>::zero()) continue;
        if (h(collective.features[x]) != f(collective.features[x])) s += marg;
    }
    return s;
}

}  // namespace colact
