#pragma once

#include "colact/common.hpp"
#include "colact/rng.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace colact {

struct Sample {
    std::vector<double> features;
    int label = 0;
};

struct LabeledSet {
    std::vector<Sample> samples;
    std::vector<bool> collective_mask;  // true = planted

    std::size_t size() const { return samples.size(); }
};

/// Vector-space signal: a dimension-preserving transform plus target label,
/// with a codomain membership test for hit-rate estimates.
struct ContinuousStrategy {
    std::string name;
    std::function<std::vector<double>(const std::vector<double>&)> transform;
    int target_label = 1;
    std::function<bool(const std::vector<double>&)> in_codomain;
};

/// Uniform points on (-1,1)^2 labeled by the sign of the first coordinate.
inline LabeledSet gen_2d_sign(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw DomainError("gen_2d_sign: n must be positive");
    Rng rng(seed);
    LabeledSet set;
    set.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x1 = rng.uniform(-1.0, 1.0);
        double x2 = rng.uniform(-1.0, 1.0);
        set.samples.push_back({{x1, x2}, x1 > 0.0 ? 1 : -1});
    }
    set.collective_mask.assign(n, false);
    return set;
}

/// Two margin-separated blocks along x1 and k alternating slabs along x2;
/// either coordinate alone determines the label. Slab j of [-1,1] (counted
/// bottom-up) carries label -1 when j is even and +1 when j is odd, so k=2
/// reduces to the sign of x2.
inline LabeledSet gen_lms_k(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (n < 1) throw DomainError("gen_lms_k: n must be positive");
    if (k < 2 || k % 2 != 0)
        throw DomainError("gen_lms_k: k must be even and at least 2");
    constexpr double margin = 0.1;
    const double slab_width = 2.0 / static_cast<double>(k);
    Rng rng(seed);
    LabeledSet set;
    set.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        int label = rng.bernoulli(0.5) ? 1 : -1;
        double x1 = label > 0 ? rng.uniform(margin, 1.0) : rng.uniform(-1.0, -margin);
        // pick one of the k/2 slabs whose parity matches the label
        std::size_t pick = rng.uniform_index(k / 2);
        std::size_t slab = 2 * pick + (label > 0 ? 1 : 0);
        double lo = -1.0 + slab_width * static_cast<double>(slab);
        double x2 = rng.uniform(lo, lo + slab_width);
        set.samples.push_back({{x1, x2}, label});
    }
    set.collective_mask.assign(n, false);
    return set;
}

/// Uniform points on (-1,1)^2 labeled by horizontal strip parity: the x2
/// range splits into k equal strips indexed bottom-up, even strips are +1.
/// x1 carries no label information.
inline LabeledSet gen_k_strips(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (n < 1) throw DomainError("gen_k_strips: n must be positive");
    if (k < 2) throw DomainError("gen_k_strips: k must be at least 2");
    Rng rng(seed);
    LabeledSet set;
    set.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x1 = rng.uniform(-1.0, 1.0);
        double x2 = rng.uniform(-1.0, 1.0);
        auto strip = static_cast<std::size_t>((x2 + 1.0) / 2.0 * static_cast<double>(k));
        if (strip >= k) strip = k - 1;
        set.samples.push_back({{x1, x2}, strip % 2 == 0 ? 1 : -1});
    }
    set.collective_mask.assign(n, false);
    return set;
}

/// Transforms and relabels a uniformly random round(alpha*n) subset.
inline LabeledSet plant_signal(const LabeledSet& set, const ContinuousStrategy& strategy,
                               double alpha, std::uint64_t seed) {
    if (alpha < 0.0 || alpha > 1.0) throw DomainError("plant_signal: alpha outside [0, 1]");
    const std::size_t n = set.size();
    const auto m = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 0.5));
    Rng rng(seed);
    LabeledSet out = set;
    out.collective_mask.assign(n, false);
    for (std::size_t idx : rng.sample_without_replacement(n, m)) {
        out.samples[idx].features = strategy.transform(out.samples[idx].features);
        out.samples[idx].label = strategy.target_label;
        out.collective_mask[idx] = true;
    }
    return out;
}

/// The named signals used by the experiments. "sign2d" and "lms" fold the
/// second coordinate into the lower half-plane; "strips" folds the first
/// coordinate into the left half-plane. All target label +1.
inline std::vector<ContinuousStrategy> strategy_catalog() {
    ContinuousStrategy lower_half{
        "sign2d",
        [](const std::vector<double>& x) {
            return std::vector<double>{x.at(0), -std::abs(x.at(1))};
        },
        1,
        [](const std::vector<double>& x) { return x.at(1) <= 0.0; }};
    ContinuousStrategy lms = lower_half;
    lms.name = "lms";
    ContinuousStrategy left_half{
        "strips",
        [](const std::vector<double>& x) {
            return std::vector<double>{-std::abs(x.at(0)), x.at(1)};
        },
        1,
        [](const std::vector<double>& x) { return x.at(0) <= 0.0; }};
    return {lower_half, lms, left_half};
}

inline ContinuousStrategy find_strategy(const std::string& name) {
    for (auto& s : strategy_catalog())
        if (s.name == name) return s;
    throw DomainError("unknown strategy: " + name);
}

struct PixelGrid {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<int> values;  // row-major, 0..255

    int at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
    int& at(std::size_t r, std::size_t c) { return values[r * width + c]; }

    void validate() const {
        if (values.size() != height * width) throw DomainError("pixel grid size mismatch");
        for (int v : values)
            if (v < 0 || v > 255) throw DomainError("pixel value outside [0, 255]");
    }
};

/// Adds 2 to every second pixel of every second row (even row, even column,
/// 0-indexed), saturating at 255.
inline PixelGrid pixel_perturbation(const PixelGrid& grid) {
    grid.validate();
    PixelGrid out = grid;
    for (std::size_t r = 0; r < grid.height; r += 2)
        for (std::size_t c = 0; c < grid.width; c += 2)
            out.at(r, c) = std::min(255, grid.at(r, c) + 2);
    return out;
}

struct UniquenessEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Monte-Carlo estimate of the base mass of the signal codomain: the
/// hit-rate of n sampled base points inside the strategy's codomain, with
/// its binomial standard error.
inline UniquenessEstimate mc_uniqueness(
    const std::function<LabeledSet(std::size_t, std::uint64_t)>& sampler,
    const ContinuousStrategy& strategy, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw DomainError("mc_uniqueness: n must be positive");
    const LabeledSet set = sampler(n, seed);
    std::size_t hits = 0;
    for (const auto& s : set.samples)
        if (strategy.in_codomain(s.features)) ++hits;
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

inline std::string double_to_string(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& os, const LabeledSet& set) {
    os << "x1,x2,label,collective\n";
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& s = set.samples[i];
        os << double_to_string(s.features.at(0)) << ',' << double_to_string(s.features.at(1))
           << ',' << s.label << ',' << (set.collective_mask[i] ? 1 : 0) << '\n';
    }
}

inline LabeledSet read_csv(std::istream& is) {
    LabeledSet set;
    std::string line;
    if (!std::getline(is, line) || line != "x1,x2,label,collective")
        throw DomainError("labeled-set csv: bad header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        Sample s;
        s.features.resize(2);
        std::getline(ss, cell, ',');
        s.features[0] = std::stod(cell);
        std::getline(ss, cell, ',');
        s.features[1] = std::stod(cell);
        std::getline(ss, cell, ',');
        s.label = std::stoi(cell);
        std::getline(ss, cell, ',');
        set.collective_mask.push_back(cell == "1");
        set.samples.push_back(std::move(s));
    }
    return set;
}

inline void write_pgm(std::ostream& os, const PixelGrid& grid) {
    grid.validate();
    os << "P2\n" << grid.width << ' ' << grid.height << "\n255\n";
    for (std::size_t r = 0; r < grid.height; ++r) {
        for (std::size_t c = 0; c < grid.width; ++c)
            os << grid.at(r, c) << (c + 1 == grid.width ? '\n' : ' ');
    }
}

inline PixelGrid read_pgm(std::istream& is) {
    std::string magic;
    is >> magic;
    if (magic != "P2") throw DomainError("pgm: expected P2 magic");
    PixelGrid grid;
    int maxval = 0;
    is >> grid.width >> grid.height >> maxval;
    if (maxval != 255) throw DomainError("pgm: expected maxval 255");
    grid.values.resize(grid.width * grid.height);
    for (int& v : grid.values)
        if (!(is >> v)) throw DomainError("pgm: truncated pixel data");
    grid.validate();
    return grid;
}

}  // namespace colact
