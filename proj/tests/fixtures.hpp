#pragma once

// Shared fixture builders for the test suites. Everything is generated
// in-process from fixed seeds so tests are hermetic and reproducible.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "evoc/corpus.hpp"
#include "evoc/rng.hpp"
#include "evoc/thesaurus.hpp"

namespace testutil {

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("evoc_test_" + std::to_string(counter.fetch_add(1)) + "_" +
                 std::to_string(reinterpret_cast<std::uintptr_t>(this) & 0xFFFF));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string id_code(std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%06zu", i);
    return buf;
}

/// Fixture hierarchy: 3 descriptors, 2 microthesauri, 1 domain.
inline evoc::Thesaurus tiny_thesaurus() {
    evoc::Thesaurus t;
    t.id_to_mt["000001"] = {"1005"};
    t.id_to_mt["000002"] = {"1005"};
    t.id_to_mt["000003"] = {"1010"};
    t.mt_to_do["1005"] = "10";
    t.mt_to_do["1010"] = "10";
    return t;
}

/// Random but structurally valid hierarchy over n_ids descriptors spread over
/// n_dos domains with mts_per_do microthesauri each. Descriptors may carry
/// several MTs; the first is the primary one.
inline evoc::Thesaurus random_thesaurus(std::size_t n_ids, std::size_t n_dos,
                                        std::size_t mts_per_do, evoc::SplitMix64& rng) {
    evoc::Thesaurus t;
    std::vector<std::string> mts;
    for (std::size_t d = 0; d < n_dos; ++d) {
        const std::string dom = std::to_string(10 + d);
        for (std::size_t m = 0; m < mts_per_do; ++m) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%s%02zu", dom.c_str(), m + 5);
            t.mt_to_do[buf] = dom;
            mts.push_back(buf);
        }
    }
    for (std::size_t i = 1; i <= n_ids; ++i) {
        const std::size_t n_mts = 1 + rng.below(3);
        std::set<std::string> chosen;
        std::vector<std::string> list;
        while (list.size() < n_mts && list.size() < mts.size()) {
            const std::string& mt = mts[rng.below(mts.size())];
            if (chosen.insert(mt).second) list.push_back(mt);
        }
        t.id_to_mt[id_code(i)] = list;
    }
    return t;
}

inline std::string thesaurus_tsv(const evoc::Thesaurus& t) {
    std::string out = "id\tmt\tdo\tlabel\n";
    for (const auto& [id, mts] : t.id_to_mt) {
        for (const std::string& mt : mts) {
            out += id + "\t" + mt + "\t" + t.mt_to_do.at(mt) + "\tlabel " + id + "\n";
        }
    }
    return out;
}

inline evoc::Document make_doc(std::string doc_id, std::string language,
                               std::string text, std::set<std::string> labels) {
    evoc::Document doc;
    doc.doc_id = std::move(doc_id);
    doc.language = std::move(language);
    doc.text = std::move(text);
    doc.labels = std::move(labels);
    return doc;
}

/// Synthetic labeled corpus with a Zipf-like label distribution over the
/// descriptor ids of `thesaurus` (codes 000001..n). Texts are short and
/// deterministic.
inline evoc::Corpus zipf_corpus(std::size_t n_docs, std::size_t n_labels,
                                evoc::SplitMix64& rng,
                                const std::string& language = "en") {
    std::vector<double> cumulative(n_labels);
    double total = 0.0;
    for (std::size_t k = 0; k < n_labels; ++k) {
        total += 1.0 / static_cast<double>(k + 1);
        cumulative[k] = total;
    }
    auto sample_label = [&]() {
        const double u = rng.unit() * total;
        for (std::size_t k = 0; k < n_labels; ++k) {
            if (u < cumulative[k]) return k + 1;
        }
        return n_labels;
    };
    evoc::Corpus corpus;
    corpus.language = language;
    for (std::size_t i = 1; i <= n_docs; ++i) {
        const std::size_t want = 1 + rng.below(4);
        std::set<std::string> labels;
        while (labels.size() < want) {
            labels.insert(id_code(sample_label()));
        }
        corpus.documents.push_back(make_doc("doc" + std::to_string(i), language,
                                            "document number " + std::to_string(i),
                                            std::move(labels)));
    }
    return corpus;
}

/// Linearly separable multi-label features: each label has an axis-aligned
/// prototype; a document's feature vector is the sum of its labels'
/// prototypes plus small noise. A linear head can fit this exactly.
struct SeparableData {
    std::vector<std::vector<double>> features;
    std::vector<std::vector<std::uint8_t>> targets;
    std::vector<std::string> labels;
};

inline SeparableData separable_features(std::size_t n_docs, std::size_t n_labels,
                                        std::size_t dim, evoc::SplitMix64& rng) {
    SeparableData data;
    for (std::size_t m = 1; m <= n_labels; ++m) data.labels.push_back(id_code(m));
    for (std::size_t i = 0; i < n_docs; ++i) {
        std::vector<std::uint8_t> y(n_labels, 0);
        const std::size_t want = 1 + rng.below(3);
        for (std::size_t j = 0; j < want; ++j) y[rng.below(n_labels)] = 1;
        std::vector<double> x(dim, 0.0);
        for (std::size_t m = 0; m < n_labels; ++m) {
            if (y[m]) x[m % dim] += 8.0;
        }
        for (double& v : x) v += rng.uniform(-0.05, 0.05);
        data.features.push_back(std::move(x));
        data.targets.push_back(std::move(y));
    }
    return data;
}

inline std::string corpus_jsonl(const evoc::Corpus& corpus) {
    std::string out;
    for (const evoc::Document& doc : corpus.documents) {
        nlohmann::ordered_json obj;
        obj["doc_id"] = doc.doc_id;
        obj["language"] = doc.language;
        obj["text"] = doc.text;
        obj["labels"] = doc.labels;
        out += obj.dump() + "\n";
    }
    return out;
}

}  // namespace testutil
