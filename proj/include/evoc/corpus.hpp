#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evoc/error.hpp"
#include "evoc/thesaurus.hpp"

namespace evoc {

/// The 22 EU language codes with trained models.
inline constexpr std::array<std::string_view, 22> kSupportedLanguages = {
    "bg", "cs", "da", "de", "el", "en", "es", "et", "fi", "fr", "hu",
    "it", "lt", "lv", "mt", "nl", "pl", "pt", "ro", "sk", "sl", "sv"};

inline bool is_supported_language(std::string_view code) {
    return std::find(kSupportedLanguages.begin(), kSupportedLanguages.end(), code) !=
           kSupportedLanguages.end();
}

inline std::string supported_languages_csv() {
    std::string out;
    for (std::string_view code : kSupportedLanguages) {
        if (!out.empty()) out += ", ";
        out += code;
    }
    return out;
}

struct Document {
    std::string doc_id;
    std::string language;
    std::string text;
    std::set<DescriptorId> labels;

    bool operator==(const Document&) const = default;
};

struct Corpus {
    std::string language;
    std::vector<Document> documents;

    bool operator==(const Corpus&) const = default;
};

enum class HierarchyLevel { Id, Mt, Do };

inline std::string_view level_name(HierarchyLevel level) {
    switch (level) {
        case HierarchyLevel::Id: return "ID";
        case HierarchyLevel::Mt: return "MT";
        default: return "DO";
    }
}

inline HierarchyLevel parse_level(std::string_view name) {
    if (name == "ID" || name == "id") return HierarchyLevel::Id;
    if (name == "MT" || name == "mt") return HierarchyLevel::Mt;
    if (name == "DO" || name == "do") return HierarchyLevel::Do;
    throw ValidationError("unknown hierarchy level '" + std::string(name) +
                          "' (expected ID, MT or DO)");
}

/// Gold label set of a document mapped to the requested level.
inline std::set<std::string> map_labels(const Thesaurus& t,
                                        const std::set<DescriptorId>& ids,
                                        HierarchyLevel level) {
    switch (level) {
        case HierarchyLevel::Id: return {ids.begin(), ids.end()};
        case HierarchyLevel::Mt: return map_ids_to_mt(t, ids);
        default: return map_ids_to_do(t, ids);
    }
}

/// Reads a JSONL corpus: one {"doc_id", "language", "text", "labels"} object
/// per line. With require_labels (the training default) an empty or missing
/// labels array is an error.
inline Corpus load_corpus(const std::filesystem::path& path,
                          const std::string& language, bool require_labels = true) {
    if (!is_supported_language(language)) {
        throw ValidationError("unsupported language '" + language +
                              "' (expected one of: " + supported_languages_csv() + ")");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFoundError("cannot open corpus file '" + path.string() + "'");
    }
    const std::string filename = path.filename().string();
    Corpus corpus;
    corpus.language = language;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(filename, lineno, e.what());
        }
        Document doc;
        try {
            doc.doc_id = obj.at("doc_id").get<std::string>();
            doc.language = obj.at("language").get<std::string>();
            doc.text = obj.at("text").get<std::string>();
            if (obj.contains("labels")) {
                for (const auto& label : obj.at("labels")) {
                    doc.labels.insert(label.get<std::string>());
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(filename, lineno, e.what());
        }
        if (doc.doc_id.empty()) {
            throw ParseError(filename, lineno, "empty doc_id");
        }
        if (doc.language != language) {
            throw ParseError(filename, lineno,
                             "document language '" + doc.language +
                                 "' does not match corpus language '" + language + "'");
        }
        if (!seen_ids.insert(doc.doc_id).second) {
            throw ParseError(filename, lineno, "duplicate doc_id '" + doc.doc_id + "'");
        }
        for (const DescriptorId& label : doc.labels) {
            if (!is_valid_descriptor_id(label)) {
                throw ParseError(filename, lineno,
                                 "label '" + label + "' is not a valid descriptor id");
            }
        }
        if (require_labels && doc.labels.empty()) {
            throw ParseError(filename, lineno,
                             "document '" + doc.doc_id + "' has no labels");
        }
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write corpus file '" + path.string() + "'");
    }
    for (const Document& doc : corpus.documents) {
        nlohmann::ordered_json obj;
        obj["doc_id"] = doc.doc_id;
        obj["language"] = doc.language;
        obj["text"] = doc.text;
        obj["labels"] = doc.labels;
        out << obj.dump() << '\n';
    }
}

struct DescriptorStats {
    HierarchyLevel level = HierarchyLevel::Id;
    double mean = 0.0;
    std::size_t min = 0;
    std::size_t max = 0;
};

/// Mean / min / max of per-document label-set size after mapping to `level`.
inline DescriptorStats descriptor_stats(const Corpus& corpus, const Thesaurus& t,
                                        HierarchyLevel level) {
    if (corpus.documents.empty()) {
        throw ValidationError("descriptor_stats: corpus is empty");
    }
    DescriptorStats stats;
    stats.level = level;
    stats.min = map_labels(t, corpus.documents.front().labels, level).size();
    stats.max = stats.min;
    double total = 0.0;
    for (const Document& doc : corpus.documents) {
        const std::size_t n = map_labels(t, doc.labels, level).size();
        total += static_cast<double>(n);
        stats.min = std::min(stats.min, n);
        stats.max = std::max(stats.max, n);
    }
    stats.mean = total / static_cast<double>(corpus.documents.size());
    return stats;
}

struct FrequencyHistogram {
    HierarchyLevel level = HierarchyLevel::Id;
    std::size_t group_size = 1;
    std::vector<std::size_t> group_counts;
};

inline std::size_t default_group_size(HierarchyLevel level) {
    switch (level) {
        case HierarchyLevel::Id: return 50;
        case HierarchyLevel::Mt: return 5;
        default: return 1;
    }
}

/// Document frequency histogram over descriptor groups: descriptors sorted by
/// document count descending (ties by ascending code), partitioned into
/// consecutive groups of group_size, each group summed. group_size 0 selects
/// the level default (50 for ID, 5 for MT, 1 for DO).
inline FrequencyHistogram frequency_histogram(const Corpus& corpus, const Thesaurus& t,
                                              HierarchyLevel level,
                                              std::size_t group_size = 0) {
    if (corpus.documents.empty()) {
        throw ValidationError("frequency_histogram: corpus is empty");
    }
    if (group_size == 0) group_size = default_group_size(level);
    std::map<std::string, std::size_t> doc_counts;
    for (const Document& doc : corpus.documents) {
        for (const std::string& code : map_labels(t, doc.labels, level)) {
            ++doc_counts[code];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ordered(doc_counts.begin(),
                                                             doc_counts.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    FrequencyHistogram hist;
    hist.level = level;
    hist.group_size = group_size;
    for (std::size_t i = 0; i < ordered.size(); i += group_size) {
        std::size_t sum = 0;
        for (std::size_t j = i; j < std::min(i + group_size, ordered.size()); ++j) {
            sum += ordered[j].second;
        }
        hist.group_counts.push_back(sum);
    }
    return hist;
}

inline nlohmann::ordered_json stats_to_json(const DescriptorStats& stats) {
    nlohmann::ordered_json obj;
    obj["level"] = level_name(stats.level);
    obj["mean"] = stats.mean;
    obj["min"] = stats.min;
    obj["max"] = stats.max;
    return obj;
}

inline nlohmann::ordered_json histogram_to_json(const FrequencyHistogram& hist) {
    nlohmann::ordered_json obj;
    obj["level"] = level_name(hist.level);
    obj["group_size"] = hist.group_size;
    obj["group_counts"] = hist.group_counts;
    return obj;
}

inline std::string histogram_to_csv(const FrequencyHistogram& hist) {
    std::string out = "group_index,count\n";
    for (std::size_t i = 0; i < hist.group_counts.size(); ++i) {
        out += std::to_string(i) + "," + std::to_string(hist.group_counts[i]) + "\n";
    }
    return out;
}

}  // namespace evoc
