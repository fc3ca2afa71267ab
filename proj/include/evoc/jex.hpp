#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evoc/corpus.hpp"
#include "evoc/error.hpp"
#include "evoc/text.hpp"

namespace evoc {

struct NormalizeConfig {
    std::set<std::string> stopwords;
    // Suffixes stripped longest-first when the remaining stem is long enough.
    // A crude stand-in for lemmatization; external lemmatized text also works.
    std::vector<std::string> strip_suffixes;
    std::size_t min_stem_length = 3;
};

/// Lowercases, strips punctuation and splits on whitespace, then applies the
/// optional stopword and suffix rules.
inline std::vector<std::string> normalize_text(std::string_view text,
                                               const NormalizeConfig& config = {}) {
    const std::vector<char32_t> cps = decode_utf8(text);
    std::vector<std::string> terms;
    std::string current;
    auto flush = [&]() {
        if (current.empty()) return;
        if (config.stopwords.count(current) == 0) {
            for (const std::string& suffix : config.strip_suffixes) {
                if (current.size() > suffix.size() &&
                    current.size() - suffix.size() >= config.min_stem_length &&
                    current.compare(current.size() - suffix.size(), suffix.size(),
                                    suffix) == 0) {
                    current.resize(current.size() - suffix.size());
                    break;
                }
            }
            terms.push_back(current);
        }
        current.clear();
    };
    for (char32_t cp : cps) {
        if (is_space_cp(cp) || is_punct_cp(cp)) {
            flush();
        } else {
            append_utf8(current, lower_cp(cp));
        }
    }
    flush();
    return terms;
}

/// Sparse L2-normalized term weights for one descriptor.
struct TermProfile {
    std::map<std::string, double> weights;

    double dot(const TermProfile& other) const {
        const TermProfile& small = weights.size() <= other.weights.size() ? *this : other;
        const TermProfile& large = weights.size() <= other.weights.size() ? other : *this;
        double sum = 0.0;
        for (const auto& [term, w] : small.weights) {
            auto it = large.weights.find(term);
            if (it != large.weights.end()) sum += w * it->second;
        }
        return sum;
    }

    void l2_normalize() {
        double sq = 0.0;
        for (const auto& [term, w] : weights) sq += w * w;
        if (sq <= 0.0) {
            weights.clear();
            return;
        }
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& [term, w] : weights) w *= inv;
    }
};

struct JexConfig {
    NormalizeConfig normalize;
    // Terms must appear in at least this many training documents to enter a
    // signature. Keeps one-off noise out of the profiles.
    std::size_t min_doc_frequency = 2;
};

/// Per-descriptor topic signatures plus the corpus document frequencies they
/// were weighted with.
struct SignatureModel {
    std::map<DescriptorId, TermProfile> signatures;
    std::map<std::string, std::size_t> doc_frequency;
    std::size_t n_train_docs = 0;
    JexConfig config;

    double idf(const std::string& term) const {
        const auto it = doc_frequency.find(term);
        const double df = it == doc_frequency.end() ? 0.0 : static_cast<double>(it->second);
        return std::log((static_cast<double>(n_train_docs) + 1.0) / (df + 1.0)) + 1.0;
    }
};

/// Builds topic signatures: for each descriptor, term weight is the relative
/// frequency over its documents' concatenation times the smoothed inverse
/// document frequency log((N+1)/(df+1)) + 1, then L2-normalized.
inline SignatureModel build_signatures(const Corpus& train,
                                       const JexConfig& config = {}) {
    if (train.documents.empty()) {
        throw ValidationError("build_signatures: corpus is empty");
    }
    SignatureModel model;
    model.config = config;
    model.n_train_docs = train.documents.size();

    std::map<DescriptorId, std::map<std::string, std::size_t>> term_counts;
    std::map<DescriptorId, std::size_t> term_totals;
    for (const Document& doc : train.documents) {
        if (doc.labels.empty()) {
            throw ValidationError("build_signatures: document '" + doc.doc_id +
                                  "' has no labels");
        }
        const std::vector<std::string> terms = normalize_text(doc.text, config.normalize);
        std::set<std::string> distinct(terms.begin(), terms.end());
        for (const std::string& term : distinct) ++model.doc_frequency[term];
        for (const DescriptorId& label : doc.labels) {
            auto& counts = term_counts[label];
            for (const std::string& term : terms) ++counts[term];
            term_totals[label] += terms.size();
        }
    }

    for (auto& [label, counts] : term_counts) {
        TermProfile profile;
        const double total = static_cast<double>(term_totals[label]);
        if (total > 0.0) {
            for (const auto& [term, count] : counts) {
                if (model.doc_frequency[term] < config.min_doc_frequency) continue;
                const double rf = static_cast<double>(count) / total;
                profile.weights[term] = rf * model.idf(term);
            }
        }
        profile.l2_normalize();
        model.signatures[label] = std::move(profile);
    }
    return model;
}

/// TF-IDF profile of an unlabeled document under the model's df table.
inline TermProfile document_profile(const SignatureModel& model, std::string_view text) {
    const std::vector<std::string> terms =
        normalize_text(text, model.config.normalize);
    std::map<std::string, std::size_t> counts;
    for (const std::string& term : terms) ++counts[term];
    TermProfile profile;
    if (!terms.empty()) {
        const double total = static_cast<double>(terms.size());
        for (const auto& [term, count] : counts) {
            profile.weights[term] = static_cast<double>(count) / total * model.idf(term);
        }
    }
    profile.l2_normalize();
    return profile;
}

/// Ranks descriptors by cosine similarity between the document profile and
/// each signature. Ties break on ascending descriptor code; at most k (and at
/// most the model size) entries are returned.
inline std::vector<std::pair<DescriptorId, double>> rank_descriptors(
    const SignatureModel& model, std::string_view text, std::size_t k) {
    if (model.signatures.empty()) {
        throw ValidationError("rank_descriptors: model has no signatures");
    }
    if (k == 0) {
        throw ValidationError("rank_descriptors: k must be at least 1");
    }
    const TermProfile query = document_profile(model, text);
    std::vector<std::pair<DescriptorId, double>> scored;
    scored.reserve(model.signatures.size());
    for (const auto& [label, signature] : model.signatures) {
        scored.emplace_back(label, query.dot(signature));
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

inline void save_signature_model(const SignatureModel& model,
                                 const std::filesystem::path& path) {
    nlohmann::ordered_json obj;
    obj["format"] = "evoc-jex";
    obj["version"] = 1;
    obj["n_train_docs"] = model.n_train_docs;
    obj["min_doc_frequency"] = model.config.min_doc_frequency;
    obj["doc_frequency"] = model.doc_frequency;
    nlohmann::ordered_json sigs;
    for (const auto& [label, profile] : model.signatures) {
        sigs[label] = profile.weights;
    }
    obj["signatures"] = std::move(sigs);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write model file '" + path.string() + "'");
    }
    out << obj.dump() << '\n';
}

inline SignatureModel load_signature_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFoundError("cannot open model file '" + path.string() + "'");
    }
    nlohmann::json obj;
    try {
        in >> obj;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.filename().string() + ": " + e.what());
    }
    if (obj.value("format", "") != "evoc-jex") {
        throw ParseError(path.filename().string() + ": not an evoc-jex model file");
    }
    SignatureModel model;
    model.n_train_docs = obj.at("n_train_docs").get<std::size_t>();
    model.config.min_doc_frequency = obj.at("min_doc_frequency").get<std::size_t>();
    model.doc_frequency =
        obj.at("doc_frequency").get<std::map<std::string, std::size_t>>();
    for (const auto& [label, weights] : obj.at("signatures").items()) {
        TermProfile profile;
        profile.weights = weights.get<std::map<std::string, double>>();
        model.signatures[label] = std::move(profile);
    }
    return model;
}

}  // namespace evoc
