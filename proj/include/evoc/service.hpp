#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

// The default backlog of 5 drops connections under concurrent load.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#endif
#include <httplib.h>
#include <json.hpp>

#include "evoc/corpus.hpp"
#include "evoc/error.hpp"
#include "evoc/head.hpp"
#include "evoc/metrics.hpp"
#include "evoc/registry.hpp"

namespace evoc {

struct ClassifyRequest {
    std::string text;
    HierarchyLevel level = HierarchyLevel::Id;
    std::size_t num_labels = 6;
};

/// Core classification call shared by the CLI and the HTTP endpoint:
/// tokenize, encode, score all ID descriptors, then either return the top
/// num_labels IDs or project every ID score to MT/DO before ranking.
inline ScoredLabels classify_document(const ModelBundle& bundle,
                                      const ClassifyRequest& request) {
    if (request.text.empty()) {
        throw ValidationError("empty text");
    }
    if (request.num_labels < 1) {
        throw ValidationError("num_labels must be at least 1");
    }
    Document doc;
    doc.text = request.text;
    const FeatureVector features = bundle.encoder->encode(doc);
    if (request.level == HierarchyLevel::Id) {
        if (request.num_labels > bundle.head.n_labels()) {
            throw ValidationError("num_labels " + std::to_string(request.num_labels) +
                                  " exceeds the model's " +
                                  std::to_string(bundle.head.n_labels()) + " labels");
        }
        return predict_topk(bundle.head, features, request.num_labels);
    }
    const ScoredLabels all_ids =
        predict_topk(bundle.head, features, bundle.head.n_labels());
    ScoredLabels mapped = map_level_scores(all_ids, bundle.thesaurus, request.level);
    if (mapped.size() > request.num_labels) mapped.resize(request.num_labels);
    return mapped;
}

inline nlohmann::ordered_json scores_to_json(const ScoredLabels& scores) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (const auto& [label, score] : scores) obj[label] = score;
    return obj;
}

/// Immutable model bundles served over HTTP:
///   POST /classify/{lang}   {"text", "level", "num_labels"} -> {label: score}
///   GET  /health
///   GET  /models
class ClassificationService {
public:
    void add_bundle(std::shared_ptr<const ModelBundle> bundle) {
        bundles_[bundle->language] = std::move(bundle);
    }

    std::shared_ptr<const ModelBundle> bundle(const std::string& language) const {
        auto it = bundles_.find(language);
        return it == bundles_.end() ? nullptr : it->second;
    }

    std::vector<std::string> languages() const {
        std::vector<std::string> out;
        for (const auto& [lang, bundle] : bundles_) out.push_back(lang);
        return out;
    }

    void configure(httplib::Server& server) const {
        server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"status":"ok"})", "application/json");
        });
        server.Get("/models", [this](const httplib::Request&, httplib::Response& res) {
            nlohmann::ordered_json obj;
            obj["languages"] = languages();
            res.set_content(obj.dump(), "application/json");
        });
        server.Post(R"(/classify/([A-Za-z]+))",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        handle_classify(req, res);
                    });
    }

private:
    static void fail(httplib::Response& res, int status, const std::string& message) {
        nlohmann::ordered_json obj;
        obj["error"] = message;
        res.status = status;
        res.set_content(obj.dump(), "application/json");
    }

    void handle_classify(const httplib::Request& req, httplib::Response& res) const {
        const std::string language = req.matches[1];
        if (!is_supported_language(language)) {
            fail(res, 404,
                 "unsupported language '" + language +
                     "' (expected one of: " + supported_languages_csv() + ")");
            return;
        }
        auto entry = bundles_.find(language);
        if (entry == bundles_.end()) {
            fail(res, 404, "no model loaded for language '" + language + "'");
            return;
        }
        ClassifyRequest request;
        try {
            const nlohmann::json body = nlohmann::json::parse(req.body);
            request.text = body.at("text").get<std::string>();
            if (body.contains("level")) {
                request.level = parse_level(body.at("level").get<std::string>());
            }
            if (body.contains("num_labels")) {
                const auto n = body.at("num_labels").get<std::int64_t>();
                if (n < 1) {
                    fail(res, 422, "num_labels must be at least 1");
                    return;
                }
                request.num_labels = static_cast<std::size_t>(n);
            }
        } catch (const std::exception& e) {
            fail(res, 400, std::string("bad request: ") + e.what());
            return;
        }
        if (request.text.empty()) {
            fail(res, 400, "empty text");
            return;
        }
        try {
            const ScoredLabels scores = classify_document(*entry->second, request);
            res.set_content(scores_to_json(scores).dump(), "application/json");
        } catch (const ValidationError& e) {
            fail(res, 422, e.what());
        } catch (const std::exception& e) {
            fail(res, 500, e.what());
        }
    }

    std::map<std::string, std::shared_ptr<const ModelBundle>> bundles_;
};

struct LatencyRow {
    std::size_t length = 0;  // encoded sequence length incl. [CLS]/[SEP]
    double mean_ms = 0.0;
    double std_ms = 0.0;
};

/// Measures end-to-end classify latency (tokenize + encode + rank) on
/// synthetic documents of exact encoded lengths. Runs serially; a few
/// warm-up iterations precede the timed trials.
inline std::vector<LatencyRow> latency_benchmark(const ModelBundle& bundle,
                                                 const std::vector<std::size_t>& lengths,
                                                 std::size_t trials,
                                                 std::size_t warmup = 5) {
    if (trials < 1) {
        throw ValidationError("latency_benchmark: trials must be at least 1");
    }
    const SubwordVocabulary& vocab = bundle.vocabulary();
    // A plain word that tokenizes to exactly one piece.
    std::string filler;
    for (const std::string& token : vocab.ordered) {
        if (token == vocab.unk_token || token == vocab.cls_token ||
            token == vocab.sep_token) {
            continue;
        }
        if (token.rfind(vocab.continuation_prefix, 0) == 0) continue;
        if (is_pure_punctuation(token)) continue;
        if (tokenize_word(vocab, token).size() == 1) {
            filler = token;
            break;
        }
    }
    if (filler.empty()) {
        throw ValidationError("latency_benchmark: vocabulary has no single-piece word");
    }

    std::vector<LatencyRow> rows;
    for (std::size_t length : lengths) {
        // [CLS] and [SEP] plus at least one content piece.
        if (length < 3 || length > vocab.max_sequence) {
            throw ValidationError("latency_benchmark: length " + std::to_string(length) +
                                  " out of range [3, " +
                                  std::to_string(vocab.max_sequence) + "]");
        }
        std::string text;
        for (std::size_t i = 0; i + 2 < length; ++i) {
            if (!text.empty()) text += ' ';
            text += filler;
        }
        ClassifyRequest request;
        request.text = text;
        request.num_labels = std::min<std::size_t>(6, bundle.head.n_labels());

        for (std::size_t i = 0; i < warmup; ++i) {
            classify_document(bundle, request);
        }
        std::vector<double> samples;
        samples.reserve(trials);
        for (std::size_t i = 0; i < trials; ++i) {
            const auto start = std::chrono::steady_clock::now();
            classify_document(bundle, request);
            const auto stop = std::chrono::steady_clock::now();
            samples.push_back(
                std::chrono::duration<double, std::milli>(stop - start).count());
        }
        double mean = 0.0;
        for (double s : samples) mean += s;
        mean /= static_cast<double>(samples.size());
        double var = 0.0;
        if (samples.size() > 1) {
            for (double s : samples) var += (s - mean) * (s - mean);
            var /= static_cast<double>(samples.size() - 1);
        }
        rows.push_back(LatencyRow{length, mean, std::sqrt(var)});
    }
    return rows;
}

inline std::string benchmark_csv(const std::vector<LatencyRow>& rows) {
    std::string out = "length,mean_ms,std_ms\n";
    for (const LatencyRow& row : rows) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", row.length, row.mean_ms,
                      row.std_ms);
        out += buf;
    }
    return out;
}

}  // namespace evoc
