#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evoc/error.hpp"
#include "evoc/rng.hpp"
#include "evoc/thesaurus.hpp"

namespace evoc {

/// Dense row-major matrix of doubles. Deliberately minimal: every model in
/// this toolkit is small enough that naive loops are fast and keep results
/// bit-reproducible across platforms.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool operator==(const Matrix&) const = default;
};

/// Document representation consumed by the head: a dense vector of size E
/// (the first-token embedding in the original setting).
using FeatureVector = std::vector<double>;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Sigmoid classification head: independent per-label probabilities
/// sigmoid(c^T W + b), with inverted dropout on the input while training.
struct ClassifierHead {
    Matrix weights;            // E x M
    std::vector<double> bias;  // M
    double dropout_rate = 0.1;
    std::vector<DescriptorId> labels;  // sorted ascending; column m <-> labels[m]

    std::size_t embedding_size() const { return weights.rows; }
    std::size_t n_labels() const { return weights.cols; }
};

/// Seeded head with fan-in uniform init, W ~ U(-1/sqrt(E), 1/sqrt(E)), b = 0.
inline ClassifierHead make_head(std::size_t embedding_size,
                                std::vector<DescriptorId> labels, SplitMix64& rng,
                                double dropout_rate = 0.1) {
    ClassifierHead head;
    head.weights = Matrix(embedding_size, labels.size());
    head.bias.assign(labels.size(), 0.0);
    head.dropout_rate = dropout_rate;
    head.labels = std::move(labels);
    const double bound = 1.0 / std::sqrt(static_cast<double>(embedding_size));
    for (double& w : head.weights.data) w = rng.uniform(-bound, bound);
    return head;
}

inline std::vector<double> logits(const ClassifierHead& head, const FeatureVector& input) {
    if (input.size() != head.embedding_size()) {
        throw ValidationError("feature size " + std::to_string(input.size()) +
                              " does not match head embedding size " +
                              std::to_string(head.embedding_size()));
    }
    std::vector<double> out(head.bias);
    for (std::size_t e = 0; e < head.weights.rows; ++e) {
        const double c = input[e];
        if (c == 0.0) continue;
        const double* row = head.weights.data.data() + e * head.weights.cols;
        for (std::size_t m = 0; m < head.weights.cols; ++m) {
            out[m] += c * row[m];
        }
    }
    return out;
}

/// Inference-mode forward pass: per-label probabilities in (0, 1).
inline std::vector<double> forward(const ClassifierHead& head,
                                   const FeatureVector& input) {
    std::vector<double> probs = logits(head, input);
    for (double& p : probs) p = sigmoid(p);
    return probs;
}

struct TrainForward {
    std::vector<double> probs;
    FeatureVector dropped_input;     // input after inverted dropout
    std::vector<std::uint8_t> mask;  // 1 = kept
};

/// Training-mode forward pass: inverted dropout (keep probability 1 - rate,
/// kept entries scaled by 1/(1 - rate)) applied to the input vector.
inline TrainForward forward_train(const ClassifierHead& head, const FeatureVector& input,
                                  SplitMix64& rng) {
    if (input.size() != head.embedding_size()) {
        throw ValidationError("feature size does not match head embedding size");
    }
    TrainForward result;
    result.mask.resize(input.size());
    result.dropped_input.resize(input.size());
    const double keep_scale = 1.0 / (1.0 - head.dropout_rate);
    for (std::size_t e = 0; e < input.size(); ++e) {
        const bool keep = rng.unit() >= head.dropout_rate;
        result.mask[e] = keep ? 1 : 0;
        result.dropped_input[e] = keep ? input[e] * keep_scale : 0.0;
    }
    result.probs = forward(head, result.dropped_input);
    return result;
}

inline constexpr double kProbClamp = 1e-12;

/// Mean binary cross-entropy over the label dimension, probabilities clamped
/// to [1e-12, 1 - 1e-12] so saturated outputs stay finite.
inline double bce_loss(const std::vector<double>& probs,
                       const std::vector<std::uint8_t>& targets) {
    if (probs.size() != targets.size()) {
        throw ValidationError("probability and target vectors differ in length");
    }
    if (probs.empty()) {
        throw ValidationError("bce_loss: empty vectors");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
        total += targets[i] ? std::log(p) : std::log(1.0 - p);
    }
    return -total / static_cast<double>(probs.size());
}

struct HeadGradients {
    Matrix weights;             // dL/dW, E x M
    std::vector<double> bias;   // dL/db, M
    FeatureVector input;        // dL/dc, E
};

/// Analytic gradients of the mean BCE through the sigmoid head at the given
/// input (no dropout): dL/dlogit = (p - y) / M.
inline HeadGradients gradients(const ClassifierHead& head, const FeatureVector& input,
                               const std::vector<std::uint8_t>& targets) {
    const std::vector<double> probs = forward(head, input);
    if (targets.size() != probs.size()) {
        throw ValidationError("target vector does not match head label count");
    }
    const std::size_t n_labels = probs.size();
    std::vector<double> dlogits(n_labels);
    for (std::size_t m = 0; m < n_labels; ++m) {
        dlogits[m] = (probs[m] - static_cast<double>(targets[m])) /
                     static_cast<double>(n_labels);
    }
    HeadGradients grads;
    grads.weights = Matrix(head.weights.rows, head.weights.cols);
    grads.bias = dlogits;
    grads.input.assign(input.size(), 0.0);
    for (std::size_t e = 0; e < head.weights.rows; ++e) {
        double dc = 0.0;
        const double* w_row = head.weights.data.data() + e * head.weights.cols;
        double* g_row = grads.weights.data.data() + e * head.weights.cols;
        for (std::size_t m = 0; m < n_labels; ++m) {
            g_row[m] = input[e] * dlogits[m];
            dc += w_row[m] * dlogits[m];
        }
        grads.input[e] = dc;
    }
    return grads;
}

/// Global L2 norm over a set of gradient buffers.
inline double global_norm(const std::vector<std::span<const double>>& buffers) {
    double sq = 0.0;
    for (const auto& buf : buffers) {
        for (double g : buf) {
            if (!std::isfinite(g)) {
                throw ValidationError("non-finite gradient encountered");
            }
            sq += g * g;
        }
    }
    return std::sqrt(sq);
}

/// Rescales all buffers by max_norm/norm when the global norm exceeds
/// max_norm; otherwise leaves them untouched. Returns the pre-clip norm.
inline double clip_global_norm(const std::vector<std::span<double>>& buffers,
                               double max_norm) {
    std::vector<std::span<const double>> views(buffers.begin(), buffers.end());
    const double norm = global_norm(views);
    if (norm > max_norm) {
        const double scale = max_norm / norm;
        for (const auto& buf : buffers) {
            for (double& g : buf) g *= scale;
        }
    }
    return norm;
}

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 8;
    double peak_lr = 6e-5;
    double clip_norm = 5.0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.01;
    double dropout_rate = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs == 0 || batch_size == 0) {
            throw ValidationError("epochs and batch_size must be positive");
        }
        if (!(peak_lr > 0.0) || !(clip_norm > 0.0)) {
            throw ValidationError("peak_lr and clip_norm must be positive");
        }
        if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
            throw ValidationError("dropout_rate must be in [0, 1)");
        }
    }
};

/// Two-segment linear schedule: 0 to peak over [0, warmup], peak back to 0
/// over [warmup, total].
inline double linear_warmup_decay(double peak_lr, std::uint64_t step,
                                  std::uint64_t warmup_steps, std::uint64_t total_steps) {
    if (step > total_steps) {
        throw ValidationError("schedule step " + std::to_string(step) +
                              " exceeds total steps " + std::to_string(total_steps));
    }
    if (warmup_steps > total_steps) {
        throw ValidationError("warmup_steps exceeds total_steps");
    }
    if (step <= warmup_steps) {
        if (warmup_steps == 0) return peak_lr;
        return peak_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
    }
    return peak_lr * static_cast<double>(total_steps - step) /
           static_cast<double>(total_steps - warmup_steps);
}

/// Learning rate at a global step with warmup over the first epoch, i.e.
/// warmup_steps = total_steps / epochs.
inline double lr_at_step(const TrainConfig& config, std::uint64_t step,
                         std::uint64_t total_steps) {
    const std::uint64_t warmup = total_steps / config.epochs;
    return linear_warmup_decay(config.peak_lr, step, warmup, total_steps);
}

/// One AdamW update over a flat parameter buffer. `step` is 1-based. Moments
/// get the usual bias correction; weight decay is decoupled and applied after
/// the Adam step, scaled by the same learning rate.
inline void adamw_update(std::span<double> params, std::span<const double> grads,
                         std::span<double> m, std::span<double> v, std::uint64_t step,
                         double lr, const TrainConfig& config) {
    if (params.size() != grads.size() || params.size() != m.size() ||
        params.size() != v.size()) {
        throw ValidationError("adamw_update: buffer shapes differ");
    }
    const double b1 = config.adam_beta1;
    const double b2 = config.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * grads[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grads[i] * grads[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + config.adam_eps);
        params[i] -= lr * config.weight_decay * params[i];
    }
}

/// Optimizer state for the head parameters plus best-checkpoint tracking.
struct TrainState {
    std::uint64_t step = 0;
    Matrix m_weights;
    Matrix v_weights;
    std::vector<double> m_bias;
    std::vector<double> v_bias;
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    Matrix best_weights;
    std::vector<double> best_bias;
};

struct EpochLog {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;  // learning rate of the epoch's last step
};

/// Feature vectors with aligned multi-hot targets over a shared codebook.
struct LabeledFeatures {
    std::vector<FeatureVector> features;
    std::vector<std::vector<std::uint8_t>> targets;
    std::vector<DescriptorId> labels;

    void validate() const {
        if (features.size() != targets.size()) {
            throw ValidationError("features and targets differ in length");
        }
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (!features[i].empty() && features[i].size() != features[0].size()) {
                throw ValidationError("inconsistent feature dimensions");
            }
            if (targets[i].size() != labels.size()) {
                throw ValidationError("target width does not match label codebook");
            }
        }
    }
};

struct TrainResult {
    ClassifierHead head;  // parameters from the lowest-validation-loss epoch
    std::vector<EpochLog> log;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
};

inline double dataset_loss(const ClassifierHead& head, const LabeledFeatures& data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        total += bce_loss(forward(head, data.features[i]), data.targets[i]);
    }
    return total / static_cast<double>(data.features.size());
}

/// Full training recipe: seeded shuffled mini-batches, dropout on the input,
/// mean-BCE loss, gradient clipping by global norm, AdamW with linear
/// warmup-decay, and selection of the epoch with the lowest validation loss.
inline TrainResult train_head(const LabeledFeatures& train, const LabeledFeatures& val,
                              const TrainConfig& config) {
    config.validate();
    train.validate();
    val.validate();
    if (train.features.empty()) {
        throw ValidationError("train_head: training split is empty");
    }
    if (val.features.empty()) {
        throw ValidationError("train_head: validation split is empty");
    }
    if (train.labels != val.labels) {
        throw ValidationError("train_head: train and validation codebooks differ");
    }

    const std::size_t n_docs = train.features.size();
    const std::size_t embedding_size = train.features[0].size();
    const std::size_t n_labels = train.labels.size();
    const std::size_t steps_per_epoch = (n_docs + config.batch_size - 1) / config.batch_size;
    const std::uint64_t total_steps = steps_per_epoch * config.epochs;

    SplitMix64 rng(config.seed);
    ClassifierHead head =
        make_head(embedding_size, train.labels, rng, config.dropout_rate);

    TrainState state;
    state.m_weights = Matrix(embedding_size, n_labels);
    state.v_weights = Matrix(embedding_size, n_labels);
    state.m_bias.assign(n_labels, 0.0);
    state.v_bias.assign(n_labels, 0.0);

    TrainResult result;
    std::vector<std::size_t> order(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) order[i] = i;

    Matrix grad_w(embedding_size, n_labels);
    std::vector<double> grad_b(n_labels);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        double last_lr = 0.0;
        for (std::size_t batch_start = 0; batch_start < n_docs;
             batch_start += config.batch_size) {
            const std::size_t batch_end =
                std::min(batch_start + config.batch_size, n_docs);
            const double batch_n = static_cast<double>(batch_end - batch_start);
            std::fill(grad_w.data.begin(), grad_w.data.end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t bi = batch_start; bi < batch_end; ++bi) {
                const std::size_t di = order[bi];
                const FeatureVector& x = train.features[di];
                const std::vector<std::uint8_t>& y = train.targets[di];
                const TrainForward fwd = forward_train(head, x, rng);
                batch_loss += bce_loss(fwd.probs, y);
                for (std::size_t m = 0; m < n_labels; ++m) {
                    const double dlogit = (fwd.probs[m] - static_cast<double>(y[m])) /
                                          static_cast<double>(n_labels) / batch_n;
                    grad_b[m] += dlogit;
                    for (std::size_t e = 0; e < embedding_size; ++e) {
                        grad_w(e, m) += fwd.dropped_input[e] * dlogit;
                    }
                }
            }
            batch_loss /= batch_n;
            if (!std::isfinite(batch_loss)) {
                throw ValidationError("train_head: loss diverged (non-finite)");
            }
            epoch_loss += batch_loss;
            clip_global_norm({std::span<double>(grad_w.data), std::span<double>(grad_b)},
                             config.clip_norm);
            ++state.step;
            const double lr = lr_at_step(config, state.step, total_steps);
            last_lr = lr;
            adamw_update(std::span<double>(head.weights.data),
                         std::span<const double>(grad_w.data),
                         std::span<double>(state.m_weights.data),
                         std::span<double>(state.v_weights.data), state.step, lr,
                         config);
            adamw_update(std::span<double>(head.bias),
                         std::span<const double>(grad_b),
                         std::span<double>(state.m_bias),
                         std::span<double>(state.v_bias), state.step, lr, config);
        }
        const double val_loss = dataset_loss(head, val);
        if (!std::isfinite(val_loss)) {
            throw ValidationError("train_head: validation loss diverged");
        }
        if (val_loss < state.best_val_loss) {
            state.best_val_loss = val_loss;
            state.best_epoch = epoch;
            state.best_weights = head.weights;
            state.best_bias = head.bias;
        }
        result.log.push_back(EpochLog{epoch,
                                      epoch_loss / static_cast<double>(steps_per_epoch),
                                      val_loss, last_lr});
    }

    head.weights = state.best_weights;
    head.bias = state.best_bias;
    result.head = std::move(head);
    result.best_epoch = state.best_epoch;
    result.best_val_loss = state.best_val_loss;
    return result;
}

/// Top-k labels by probability, ties broken by ascending label code (the
/// codebook is sorted, so index order suffices).
inline std::vector<std::pair<DescriptorId, double>> predict_topk(
    const ClassifierHead& head, const FeatureVector& input, std::size_t k) {
    if (k < 1 || k > head.n_labels()) {
        throw ValidationError("predict_topk: k=" + std::to_string(k) +
                              " out of range for M=" + std::to_string(head.n_labels()));
    }
    const std::vector<double> probs = forward(head, input);
    std::vector<std::size_t> order(probs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&probs](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
    std::vector<std::pair<DescriptorId, double>> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.emplace_back(head.labels[order[i]], probs[order[i]]);
    }
    return out;
}

}  // namespace evoc
