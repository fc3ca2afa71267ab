#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "evoc/corpus.hpp"
#include "evoc/error.hpp"
#include "evoc/head.hpp"
#include "evoc/tokenize.hpp"

namespace evoc {

/// Turns a document into a fixed-size feature vector. Implementations must be
/// deterministic in inference mode.
class Encoder {
public:
    virtual ~Encoder() = default;
    virtual FeatureVector encode(const Document& doc) const = 0;
    virtual std::size_t dim() const = 0;
};

/// Serves per-document embedding vectors from a JSONL file of
/// {"doc_id": ..., "embedding": [...]} rows, e.g. exported CLS embeddings.
class PrecomputedEncoder : public Encoder {
public:
    PrecomputedEncoder(std::map<std::string, FeatureVector> vectors, std::size_t dim)
        : vectors_(std::move(vectors)), dim_(dim) {}

    static PrecomputedEncoder load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw NotFoundError("cannot open embeddings file '" + path.string() + "'");
        }
        const std::string filename = path.filename().string();
        std::map<std::string, FeatureVector> vectors;
        std::size_t dim = 0;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(filename, lineno, e.what());
            }
            std::string doc_id;
            FeatureVector vec;
            try {
                doc_id = obj.at("doc_id").get<std::string>();
                vec = obj.at("embedding").get<FeatureVector>();
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(filename, lineno, e.what());
            }
            if (dim == 0) {
                dim = vec.size();
            } else if (vec.size() != dim) {
                throw ParseError(filename, lineno, "inconsistent embedding dimension");
            }
            if (!vectors.emplace(std::move(doc_id), std::move(vec)).second) {
                throw ParseError(filename, lineno, "duplicate doc_id");
            }
        }
        if (dim == 0) {
            throw ValidationError("embeddings file '" + filename + "' is empty");
        }
        return PrecomputedEncoder(std::move(vectors), dim);
    }

    FeatureVector encode(const Document& doc) const override {
        auto it = vectors_.find(doc.doc_id);
        if (it == vectors_.end()) {
            throw NotFoundError("no embedding for doc_id '" + doc.doc_id + "'");
        }
        return it->second;
    }

    std::size_t dim() const override { return dim_; }

private:
    std::map<std::string, FeatureVector> vectors_;
    std::size_t dim_;
};

/// Trainable toy encoder: the document vector is the mean of learned
/// per-token embeddings over the encoded (tokenized, truncated) document.
/// It stands in for a real transformer so the whole pipeline, including
/// end-to-end backpropagation, can run self-contained.
class ToyMeanEncoder : public Encoder {
public:
    ToyMeanEncoder(SubwordVocabulary vocab, Matrix embeddings)
        : vocab_(std::move(vocab)), embeddings_(std::move(embeddings)) {
        if (embeddings_.rows != vocab_.ordered.size()) {
            throw ValidationError("embedding table does not match vocabulary size");
        }
        for (std::size_t i = 0; i < vocab_.ordered.size(); ++i) {
            token_index_[vocab_.ordered[i]] = i;
        }
    }

    static ToyMeanEncoder init(SubwordVocabulary vocab, std::size_t dim,
                               SplitMix64& rng) {
        Matrix table(vocab.ordered.size(), dim);
        const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
        for (double& w : table.data) w = rng.uniform(-bound, bound);
        return ToyMeanEncoder(std::move(vocab), std::move(table));
    }

    std::vector<std::size_t> token_rows(const std::string& text) const {
        const std::vector<std::string> tokens = encode_document(vocab_, text);
        std::vector<std::size_t> rows;
        rows.reserve(tokens.size());
        for (const std::string& token : tokens) {
            rows.push_back(token_index_.at(token));
        }
        return rows;
    }

    FeatureVector encode_rows(const std::vector<std::size_t>& rows) const {
        FeatureVector out(embeddings_.cols, 0.0);
        for (std::size_t row : rows) {
            const double* src = embeddings_.data.data() + row * embeddings_.cols;
            for (std::size_t e = 0; e < embeddings_.cols; ++e) out[e] += src[e];
        }
        const double inv = 1.0 / static_cast<double>(rows.size());
        for (double& x : out) x *= inv;
        return out;
    }

    FeatureVector encode(const Document& doc) const override {
        return encode_rows(token_rows(doc.text));
    }

    std::size_t dim() const override { return embeddings_.cols; }

    const SubwordVocabulary& vocabulary() const { return vocab_; }
    const Matrix& embeddings() const { return embeddings_; }
    Matrix& embeddings() { return embeddings_; }

private:
    SubwordVocabulary vocab_;
    Matrix embeddings_;
    std::unordered_map<std::string, std::size_t> token_index_;
};

struct EndToEndResult {
    ClassifierHead head;
    Matrix encoder_embeddings;  // best-epoch embedding table
    std::vector<EpochLog> log;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
};

/// Joint training of the toy encoder and the head with the same recipe as
/// train_head; gradients flow through the token-embedding mean.
inline EndToEndResult train_end_to_end(const Corpus& train, const Corpus& val,
                                       const SubwordVocabulary& vocab,
                                       std::size_t embedding_size,
                                       const std::vector<DescriptorId>& labels,
                                       const TrainConfig& config) {
    config.validate();
    if (train.documents.empty() || val.documents.empty()) {
        throw ValidationError("train_end_to_end: empty split");
    }
    SplitMix64 rng(config.seed);
    ToyMeanEncoder encoder = ToyMeanEncoder::init(vocab, embedding_size, rng);
    ClassifierHead head = make_head(embedding_size, labels, rng, config.dropout_rate);

    std::map<std::string, std::size_t> label_index;
    for (std::size_t i = 0; i < labels.size(); ++i) label_index[labels[i]] = i;
    auto target_of = [&](const Document& doc) {
        std::vector<std::uint8_t> y(labels.size(), 0);
        for (const std::string& label : doc.labels) {
            auto it = label_index.find(label);
            if (it == label_index.end()) {
                throw ValidationError("document '" + doc.doc_id +
                                      "' carries label '" + label +
                                      "' outside the training codebook");
            }
            y[it->second] = 1;
        }
        return y;
    };

    const std::size_t n_docs = train.documents.size();
    const std::size_t n_labels = labels.size();
    std::vector<std::vector<std::size_t>> train_rows(n_docs);
    std::vector<std::vector<std::uint8_t>> train_targets(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) {
        train_rows[i] = encoder.token_rows(train.documents[i].text);
        train_targets[i] = target_of(train.documents[i]);
    }
    std::vector<std::vector<std::size_t>> val_rows(val.documents.size());
    std::vector<std::vector<std::uint8_t>> val_targets(val.documents.size());
    for (std::size_t i = 0; i < val.documents.size(); ++i) {
        val_rows[i] = encoder.token_rows(val.documents[i].text);
        val_targets[i] = target_of(val.documents[i]);
    }

    const std::size_t steps_per_epoch = (n_docs + config.batch_size - 1) / config.batch_size;
    const std::uint64_t total_steps = steps_per_epoch * config.epochs;

    Matrix m_w(embedding_size, n_labels), v_w(embedding_size, n_labels);
    std::vector<double> m_b(n_labels, 0.0), v_b(n_labels, 0.0);
    Matrix m_emb(encoder.embeddings().rows, embedding_size);
    Matrix v_emb(encoder.embeddings().rows, embedding_size);

    Matrix grad_w(embedding_size, n_labels);
    std::vector<double> grad_b(n_labels);
    Matrix grad_emb(encoder.embeddings().rows, embedding_size);

    EndToEndResult result;
    std::uint64_t step = 0;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) order[i] = i;

    const double keep_scale = 1.0 / (1.0 - config.dropout_rate);
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
            std::fill(grad_emb.data.begin(), grad_emb.data.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t bi = batch_start; bi < batch_end; ++bi) {
                const std::size_t di = order[bi];
                const std::vector<std::size_t>& rows = train_rows[di];
                const FeatureVector x = encoder.encode_rows(rows);
                const TrainForward fwd = forward_train(head, x, rng);
                batch_loss += bce_loss(fwd.probs, train_targets[di]);
                // dL/dc through the dropout mask, then into the embeddings.
                FeatureVector dc(embedding_size, 0.0);
                for (std::size_t m = 0; m < n_labels; ++m) {
                    const double dlogit =
                        (fwd.probs[m] - static_cast<double>(train_targets[di][m])) /
                        static_cast<double>(n_labels) / batch_n;
                    grad_b[m] += dlogit;
                    for (std::size_t e = 0; e < embedding_size; ++e) {
                        grad_w(e, m) += fwd.dropped_input[e] * dlogit;
                        dc[e] += head.weights(e, m) * dlogit;
                    }
                }
                const double inv_tokens = 1.0 / static_cast<double>(rows.size());
                for (std::size_t e = 0; e < embedding_size; ++e) {
                    if (!fwd.mask[e]) continue;
                    const double d = dc[e] * keep_scale * inv_tokens;
                    for (std::size_t row : rows) {
                        grad_emb(row, e) += d;
                    }
                }
            }
            batch_loss /= batch_n;
            if (!std::isfinite(batch_loss)) {
                throw ValidationError("train_end_to_end: loss diverged");
            }
            epoch_loss += batch_loss;
            clip_global_norm({std::span<double>(grad_w.data), std::span<double>(grad_b),
                              std::span<double>(grad_emb.data)},
                             config.clip_norm);
            ++step;
            const double lr = lr_at_step(config, step, total_steps);
            last_lr = lr;
            adamw_update(std::span<double>(head.weights.data),
                         std::span<const double>(grad_w.data),
                         std::span<double>(m_w.data), std::span<double>(v_w.data), step,
                         lr, config);
            adamw_update(std::span<double>(head.bias), std::span<const double>(grad_b),
                         std::span<double>(m_b), std::span<double>(v_b), step, lr,
                         config);
            adamw_update(std::span<double>(encoder.embeddings().data),
                         std::span<const double>(grad_emb.data),
                         std::span<double>(m_emb.data), std::span<double>(v_emb.data),
                         step, lr, config);
        }
        double val_loss = 0.0;
        for (std::size_t i = 0; i < val_rows.size(); ++i) {
            val_loss +=
                bce_loss(forward(head, encoder.encode_rows(val_rows[i])), val_targets[i]);
        }
        val_loss /= static_cast<double>(val_rows.size());
        if (!std::isfinite(val_loss)) {
            throw ValidationError("train_end_to_end: validation loss diverged");
        }
        if (val_loss < best_val) {
            best_val = val_loss;
            result.best_epoch = epoch;
            result.head = head;
            result.encoder_embeddings = encoder.embeddings();
        }
        result.log.push_back(EpochLog{
            epoch, epoch_loss / static_cast<double>(steps_per_epoch), val_loss, last_lr});
    }
    result.best_val_loss = best_val;
    return result;
}

}  // namespace evoc
