#include "colact/bounds.hpp"
#include "colact/instances.hpp"
#include "colact/reweighting.hpp"
#include "colact/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace colact;

namespace {

// Two-group instance where the mixture-optimal classifier fails the whole
// collective: base mass split between a clean feature and the signal
// feature, collective pushing everything onto the signal feature with the
// opposite label.
struct CollectiveFamily {
    DiscreteJoint<double> base;
    SignalStrategy strategy;
    DiscreteJoint<double> collective;
    GroupFamily family;
    double alpha;
};

CollectiveFamily make_signal_family(double alpha) {
    CollectiveFamily out;
    out.base = DiscreteJoint<double>{{"x0", "x1"}, {"y0", "y1"}, {0.5, 0.0, 0.0, 0.5}};
    out.strategy.target_label = "y0";
    out.strategy.transform = {{"x0", "x1"}, {"x1", "x1"}};
    out.collective = collective_from_strategy(out.base, out.strategy);
    out.family.components = {out.collective, out.base};
    out.family.base_weights = {alpha, 1.0 - alpha};
    out.alpha = alpha;
    return out;
}

}  // namespace

TEST_CASE("worst_group picks the maximal-loss component") {
    // losses of the constant-y0 classifier: 0.1, 0.4, 0.2
    DiscreteJoint<double> a{{"x0"}, {"y0", "y1"}, {0.9, 0.1}};
    DiscreteJoint<double> b{{"x0"}, {"y0", "y1"}, {0.6, 0.4}};
    DiscreteJoint<double> c{{"x0"}, {"y0", "y1"}, {0.8, 0.2}};
    GroupFamily fam{{a, b, c}, {0.3, 0.3, 0.4}};
    Classifier f;
    f.decision["x0"] = "y0";
    CHECK(worst_group(fam, f) == 1);
}

TEST_CASE("worst_group ties break toward the lowest index") {
    DiscreteJoint<double> a{{"x0"}, {"y0", "y1"}, {1.0, 0.0}};
    DiscreteJoint<double> b{{"x0"}, {"y0", "y1"}, {1.0, 0.0}};
    GroupFamily fam{{a, b}, {0.5, 0.5}};
    Classifier f = bayes_optimal(a);
    CHECK(zero_one_loss(a, f) == 0.0);
    CHECK(worst_group(fam, f) == 0);
}

TEST_CASE("worst_group matches exhaustive per-component evaluation") {
    Rng rng(211);
    for (int rep = 0; rep < 100; ++rep) {
        GroupFamily fam;
        std::size_t n = 2 + rng.uniform_index(3);
        double left = 1.0;
        for (std::size_t a = 0; a < n; ++a) {
            fam.components.push_back(random_joint(rng, 4, 2));
            double w = (a + 1 == n) ? left : left * rng.uniform(0.1, 0.9);
            fam.base_weights.push_back(w);
            left -= w;
        }
        Classifier f = bayes_optimal(fam.components[rng.uniform_index(n)]);
        std::size_t got = worst_group(fam, f);
        // oracle
        std::size_t want = 0;
        double best = -1.0;
        for (std::size_t a = 0; a < n; ++a) {
            double loss = 0.0;
            const auto& d = fam.components[a];
            for (std::size_t x = 0; x < d.feature_count(); ++x)
                for (std::size_t y = 0; y < d.label_count(); ++y)
                    if (f(d.features[x]) != d.labels[y]) loss += d.at(x, y);
            if (loss > best + 1e-15) {
                best = loss;
                want = a;
            }
        }
        REQUIRE(got == want);
    }
}

TEST_CASE("single-component family is a fixed point") {
    Rng rng(223);
    auto d = random_joint(rng, 4, 2);
    GroupFamily fam{{d}, {1.0}};
    auto trace = ideal_continuous_reweighting(fam, d, 5);
    REQUIRE(trace.classifiers.size() == 6);
    for (const auto& f : trace.classifiers)
        for (const auto& feat : d.features) CHECK(f(feat) == trace.classifiers[0](feat));
    CHECK(trace.selected == 0);
}

TEST_CASE("validation on the failing group promotes its bayes classifier") {
    DiscreteJoint<double> group_a{{"x0", "x1"}, {"y0", "y1"}, {0.6, 0.0, 0.0, 0.4}};
    DiscreteJoint<double> group_b{{"x0", "x1"}, {"y0", "y1"}, {0.0, 0.0, 1.0, 0.0}};
    GroupFamily fam{{group_a, group_b}, {0.75, 0.25}};
    auto f0 = bayes_optimal(fam.mixture_distribution());
    CHECK(f0("x1") == "y1");  // the mixture majority overrides group B
    CHECK(zero_one_loss(group_a, f0) == 0.0);
    CHECK(zero_one_loss(group_b, f0) == 1.0);

    auto trace = ideal_continuous_reweighting(fam, group_b, 2);
    REQUIRE(trace.adversarial_picks.at(0) == 1);
    CHECK(trace.classifiers.at(1)("x1") == "y0");
    CHECK(trace.selected == 1);
    CHECK(trace.validation_scores.at(1) == Catch::Approx(1.0));
}

TEST_CASE("selected checkpoint never scores below the first classifier") {
    Rng rng(227);
    for (int rep = 0; rep < 100; ++rep) {
        auto base = random_joint(rng, 4, 2);
        auto strat = random_strategy(rng, base);
        auto coll = collective_from_strategy(base, strat);
        double alpha = rng.uniform(0.05, 0.4);
        GroupFamily fam{{coll, base}, {alpha, 1.0 - alpha}};
        auto validation = mixture(base, coll, alpha);  // beta = alpha
        auto trace = ideal_continuous_reweighting(fam, validation, 4);
        CHECK(trace.validation_scores[trace.selected] >= trace.validation_scores[0] - 1e-15);
    }
}

// The raw validation-gap formula overstates the guarantee: the exact
// decomposition of the validation accuracy gap carries a (1 - alpha) factor
// on the success difference, so only the scaled bound is an invariant. Both
// facts are pinned here: the identity itself, the scaled bound holding, and
// the raw formula genuinely failing on some instances.
TEST_CASE("validation-gap identity and the scaled bound hold end to end") {
    Rng rng(229);
    int raw_violations = 0;
    for (int rep = 0; rep < 400; ++rep) {
        auto base = random_joint(rng, 4, 2 + rng.uniform_index(2));
        auto strat = random_strategy(rng, base);
        auto coll = collective_from_strategy(base, strat);
        double alpha = rng.uniform(0.05, 0.3);
        double beta = rng.uniform(alpha + 0.15, 0.95);
        GroupFamily fam{{coll, base}, {alpha, 1.0 - alpha}};
        auto train = fam.mixture_distribution();
        auto validation = mixture(base, coll, beta);
        auto trace = ideal_continuous_reweighting(fam, validation, 4);

        const Classifier& f = trace.selected_classifier();
        const Classifier h = bayes_optimal(train);
        double s_f = classifier_success(f, base, strat);
        double s_h = classifier_success(h, base, strat);
        double val_gap = accuracy(validation, f) - accuracy(validation, h);
        double train_gap = accuracy(train, f) - accuracy(train, h);

        // exact decomposition of the validation gap
        double identity = (beta - alpha) / (1.0 - alpha) * (s_f - s_h) +
                          (1.0 - beta) / (1.0 - alpha) * train_gap;
        REQUIRE(val_gap == Catch::Approx(identity).margin(1e-12));
        REQUIRE(train_gap <= 1e-12);  // h is optimal on the training mixture

        double bound = validation_gap_bound(accuracy(validation, f), accuracy(validation, h),
                                            beta, alpha);
        REQUIRE(s_f - s_h >= (1.0 - alpha) * bound - 1e-9);
        if (s_f - s_h < bound - 1e-9) ++raw_violations;
    }
    CHECK(raw_violations > 0);
}

TEST_CASE("selected-classifier success is nondecreasing in the validation share") {
    auto inst = make_signal_family(0.1);
    double prev = -1.0;
    for (double beta : {0.1, 0.25, 0.5, 0.75, 1.0}) {
        auto validation = mixture(inst.base, inst.collective, beta);
        auto trace = ideal_continuous_reweighting(inst.family, validation, 3);
        double s = classifier_success(trace.selected_classifier(), inst.base, inst.strategy);
        CHECK(s >= prev - 1e-12);
        prev = s;
    }
    // the sweep actually moves: full-collective validation reaches success 1
    CHECK(prev == Catch::Approx(1.0));
}

TEST_CASE("trace serializes to json") {
    auto inst = make_signal_family(0.1);
    auto validation = mixture(inst.base, inst.collective, 0.5);
    auto trace = ideal_continuous_reweighting(inst.family, validation, 2);
    auto j = to_json(trace, inst.base.features);
    CHECK(j["classifiers"].size() == trace.classifiers.size());
    CHECK(j["selected"].get<std::size_t>() == trace.selected);
    CHECK(j["adversarial_picks"].size() == 2);
}
