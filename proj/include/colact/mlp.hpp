#pragma once

#include "colact/common.hpp"
#include "colact/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

namespace colact {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Fully connected ReLU network with a terminal softmax. Weight matrix l is
/// (layer_sizes[l+1] x layer_sizes[l]); parameters and gradients are plain
/// value types so snapshots and finite-difference probes stay trivial.
struct MlpModel {
    std::vector<std::size_t> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

inline MlpModel init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw DomainError("mlp needs at least input and output layers");
    MlpModel m;
    m.layer_sizes = layer_sizes;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        Matrix w(layer_sizes[l + 1], layer_sizes[l]);
        const double limit = std::sqrt(6.0 / static_cast<double>(layer_sizes[l]));
        for (double& v : w.data) v = rng.uniform(-limit, limit);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(layer_sizes[l + 1], 0.0);
    }
    return m;
}

inline Gradients zero_gradients(const MlpModel& m) {
    Gradients g;
    for (const auto& w : m.weights) g.weights.emplace_back(w.rows, w.cols);
    for (const auto& b : m.biases) g.biases.emplace_back(b.size(), 0.0);
    return g;
}

namespace detail {

struct ForwardCache {
    std::vector<Matrix> activations;  // a_0 = input, ..., a_{L-1} (post-ReLU)
    Matrix logits;
    Matrix probs;
};

inline Matrix affine(const Matrix& a, const Matrix& w, const std::vector<double>& b) {
    Matrix z(a.rows, w.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t o = 0; o < w.rows; ++o) {
            double s = b[o];
            for (std::size_t k = 0; k < w.cols; ++k) s += a.at(i, k) * w.at(o, k);
            z.at(i, o) = s;
        }
    }
    return z;
}

inline ForwardCache forward_cache(const MlpModel& m, const Matrix& batch) {
    if (batch.cols != m.input_size())
        throw DomainError("forward: batch width does not match the input layer");
    ForwardCache cache;
    cache.activations.push_back(batch);
    const std::size_t n_layers = m.weights.size();
    for (std::size_t l = 0; l + 1 < n_layers; ++l) {
        Matrix z = affine(cache.activations.back(), m.weights[l], m.biases[l]);
        for (double& v : z.data) v = v > 0.0 ? v : 0.0;
        cache.activations.push_back(std::move(z));
    }
    cache.logits = affine(cache.activations.back(), m.weights[n_layers - 1],
                          m.biases[n_layers - 1]);
    cache.probs = cache.logits;
    for (std::size_t i = 0; i < cache.probs.rows; ++i) {
        double top = cache.probs.at(i, 0);
        for (std::size_t j = 1; j < cache.probs.cols; ++j)
            top = std::max(top, cache.probs.at(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < cache.probs.cols; ++j) {
            double e = std::exp(cache.probs.at(i, j) - top);
            cache.probs.at(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < cache.probs.cols; ++j) cache.probs.at(i, j) /= sum;
    }
    return cache;
}

/// Backprop from per-row, per-class logit derivatives dL/dz.
inline Gradients backprop(const MlpModel& m, const ForwardCache& cache, Matrix dz) {
    Gradients g = zero_gradients(m);
    for (std::size_t l = m.weights.size(); l-- > 0;) {
        const Matrix& a = cache.activations[l];
        Matrix& dw = g.weights[l];
        for (std::size_t i = 0; i < dz.rows; ++i)
            for (std::size_t o = 0; o < dz.cols; ++o) {
                const double d = dz.at(i, o);
                if (d == 0.0) continue;
                g.biases[l][o] += d;
                for (std::size_t k = 0; k < a.cols; ++k) dw.at(o, k) += d * a.at(i, k);
            }
        if (l == 0) break;
        Matrix prev(dz.rows, m.weights[l].cols);
        for (std::size_t i = 0; i < dz.rows; ++i)
            for (std::size_t k = 0; k < m.weights[l].cols; ++k) {
                double s = 0.0;
                for (std::size_t o = 0; o < dz.cols; ++o)
                    s += dz.at(i, o) * m.weights[l].at(o, k);
                // ReLU mask of the layer the gradient flows into
                prev.at(i, k) = cache.activations[l].at(i, k) > 0.0 ? s : 0.0;
            }
        dz = std::move(prev);
    }
    return g;
}

}  // namespace detail

constexpr double kProbClamp = 1e-12;

/// Row-wise class probabilities for a batch.
inline Matrix forward(const MlpModel& m, const Matrix& batch) {
    return detail::forward_cache(m, batch).probs;
}

inline double cross_entropy(double prob_of_true) {
    return -std::log(std::max(prob_of_true, kProbClamp));
}

/// Generalized cross entropy (1 - p^q) / q; approaches plain cross entropy
/// as q -> 0. The probability is clamped away from zero.
inline double gce_loss(double prob_of_true, double q) {
    if (q <= 0.0 || q > 1.0) throw DomainError("gce_loss: q outside (0, 1]");
    return (1.0 - std::pow(std::max(prob_of_true, kProbClamp), q)) / q;
}

/// Relative-difficulty weight ce_b / (ce_b + ce_d); 0.5 when both vanish.
inline double lff_weight(double ce_biased, double ce_debiased) {
    if (ce_biased < 0.0 || ce_debiased < 0.0) throw DomainError("lff_weight: negative loss");
    const double denom = ce_biased + ce_debiased;
    if (denom == 0.0) return 0.5;
    return ce_biased / denom;
}

/// Gradient of the weighted cross entropy (sum_i w_i CE_i) / (sum_i w_i).
inline Gradients grad_ce(const MlpModel& m, const Matrix& batch,
                         const std::vector<std::size_t>& labels,
                         const std::vector<double>& sample_weights) {
    if (labels.size() != batch.rows || sample_weights.size() != batch.rows)
        throw DomainError("grad_ce: labels/weights do not match the batch");
    double wsum = 0.0;
    for (double w : sample_weights) {
        if (w < 0.0) throw DomainError("grad_ce: negative sample weight");
        wsum += w;
    }
    if (wsum <= 0.0) throw DegenerateWeightError("grad_ce: all sample weights are zero");
    auto cache = detail::forward_cache(m, batch);
    Matrix dz(batch.rows, m.output_size());
    for (std::size_t i = 0; i < batch.rows; ++i) {
        const double scale = sample_weights[i] / wsum;
        if (scale == 0.0) continue;
        for (std::size_t j = 0; j < dz.cols; ++j)
            dz.at(i, j) = scale * (cache.probs.at(i, j) - (labels[i] == j ? 1.0 : 0.0));
    }
    return detail::backprop(m, cache, std::move(dz));
}

/// Gradient of the mean generalized cross entropy over the batch.
/// d GCE / d logit_j = p_y^q (p_j - [j == y]).
inline Gradients grad_gce(const MlpModel& m, const Matrix& batch,
                          const std::vector<std::size_t>& labels, double q) {
    if (labels.size() != batch.rows) throw DomainError("grad_gce: labels do not match the batch");
    if (q <= 0.0 || q > 1.0) throw DomainError("grad_gce: q outside (0, 1]");
    auto cache = detail::forward_cache(m, batch);
    Matrix dz(batch.rows, m.output_size());
    const double scale = 1.0 / static_cast<double>(batch.rows);
    for (std::size_t i = 0; i < batch.rows; ++i) {
        const double py = std::max(cache.probs.at(i, labels[i]), kProbClamp);
        const double factor = scale * std::pow(py, q);
        for (std::size_t j = 0; j < dz.cols; ++j)
            dz.at(i, j) = factor * (cache.probs.at(i, j) - (labels[i] == j ? 1.0 : 0.0));
    }
    return detail::backprop(m, cache, std::move(dz));
}

struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    std::size_t step = 0;

    explicit AdamState(const MlpModel& model) {
        for (const auto& w : model.weights) {
            m_w.emplace_back(w.rows, w.cols);
            v_w.emplace_back(w.rows, w.cols);
        }
        for (const auto& b : model.biases) {
            m_b.emplace_back(b.size(), 0.0);
            v_b.emplace_back(b.size(), 0.0);
        }
    }
};

struct AdamParams {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

inline void adam_step(MlpModel& model, const Gradients& g, AdamState& state,
                      const AdamParams& p) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(p.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(p.beta2, static_cast<double>(state.step));
    auto update = [&](double& param, double grad, double& m1, double& m2) {
        m1 = p.beta1 * m1 + (1.0 - p.beta1) * grad;
        m2 = p.beta2 * m2 + (1.0 - p.beta2) * grad * grad;
        param -= p.learning_rate * (m1 / bc1) / (std::sqrt(m2 / bc2) + p.eps);
    };
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (std::size_t i = 0; i < model.weights[l].data.size(); ++i)
            update(model.weights[l].data[i], g.weights[l].data[i], state.m_w[l].data[i],
                   state.v_w[l].data[i]);
        for (std::size_t i = 0; i < model.biases[l].size(); ++i)
            update(model.biases[l][i], g.biases[l][i], state.m_b[l][i], state.v_b[l][i]);
    }
}

inline void sgd_step(MlpModel& model, const Gradients& g, double learning_rate) {
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (std::size_t i = 0; i < model.weights[l].data.size(); ++i)
            model.weights[l].data[i] -= learning_rate * g.weights[l].data[i];
        for (std::size_t i = 0; i < model.biases[l].size(); ++i)
            model.biases[l][i] -= learning_rate * g.biases[l][i];
    }
}

// Checkpoint format: magic+version, layer count, layer sizes, then raw
// little-endian doubles for each weight matrix and bias vector in order.
inline constexpr char kModelMagic[8] = {'C', 'L', 'M', 'L', 'P', '0', '0', '1'};

inline void save_model(std::ostream& os, const MlpModel& m) {
    os.write(kModelMagic, sizeof(kModelMagic));
    auto put_u32 = [&](std::uint32_t v) {
        os.write(reinterpret_cast<const char*>(&v), sizeof(v));
    };
    put_u32(static_cast<std::uint32_t>(m.layer_sizes.size()));
    for (std::size_t s : m.layer_sizes) put_u32(static_cast<std::uint32_t>(s));
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        os.write(reinterpret_cast<const char*>(m.weights[l].data.data()),
                 static_cast<std::streamsize>(m.weights[l].data.size() * sizeof(double)));
        os.write(reinterpret_cast<const char*>(m.biases[l].data()),
                 static_cast<std::streamsize>(m.biases[l].size() * sizeof(double)));
    }
}

inline MlpModel load_model(std::istream& is) {
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
        throw DomainError("model checkpoint: bad magic");
    auto get_u32 = [&] {
        std::uint32_t v = 0;
        is.read(reinterpret_cast<char*>(&v), sizeof(v));
        return v;
    };
    std::vector<std::size_t> sizes(get_u32());
    for (auto& s : sizes) s = get_u32();
    MlpModel m = init_mlp(sizes, 0);
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        is.read(reinterpret_cast<char*>(m.weights[l].data.data()),
                static_cast<std::streamsize>(m.weights[l].data.size() * sizeof(double)));
        is.read(reinterpret_cast<char*>(m.biases[l].data()),
                static_cast<std::streamsize>(m.biases[l].size() * sizeof(double)));
    }
    if (!is) throw DomainError("model checkpoint: truncated");
    return m;
}

}  // namespace colact
