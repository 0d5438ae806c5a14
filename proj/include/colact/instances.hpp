#pragma once

#include "colact/discrete.hpp"
#include "colact/rng.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace colact {

/// Random-instance generators shared by the property suite and the tests.

inline DiscreteJoint<double> random_joint(Rng& rng, std::size_t n_features,
                                          std::size_t n_labels, bool full_support = false) {
    DiscreteJoint<double> d;
    for (std::size_t f = 0; f < n_features; ++f) d.features.push_back("x" + std::to_string(f));
    for (std::size_t l = 0; l < n_labels; ++l) d.labels.push_back("y" + std::to_string(l));
    d.mass.resize(n_features * n_labels);
    double sum = 0.0;
    for (double& m : d.mass) {
        double u = rng.uniform_unit();
        if (!full_support && u < 0.25) u = 0.0;  // sparse support exercises the zero guards
        if (full_support && u < 0.05) u = 0.05;
        m = u;
        sum += u;
    }
    if (sum <= 0.0) {
        d.mass[0] = 1.0;
        sum = 1.0;
    }
    for (double& m : d.mass) m /= sum;
    // Renormalize exactly so validate() holds at 1e-12.
    double check = 0.0;
    for (double m : d.mass) check += m;
    d.mass.back() += 1.0 - check;
    if (d.mass.back() < 0.0) d.mass.back() = 0.0;
    return d;
}

inline SignalStrategy random_strategy(Rng& rng, const DiscreteJoint<double>& base) {
    SignalStrategy s;
    s.target_label = base.labels[rng.uniform_index(base.labels.size())];
    for (const auto& f : base.features)
        s.transform[f] = base.features[rng.uniform_index(base.features.size())];
    return s;
}

inline WeightFunction<double> random_weights(Rng& rng, const DiscreteJoint<double>& d,
                                             double lo = 0.1, double hi = 5.0) {
    WeightFunction<double> w{d.features, d.labels, std::vector<double>(d.mass.size())};
    for (double& v : w.weight) v = rng.uniform(lo, hi);
    return w;
}

}  // namespace colact
