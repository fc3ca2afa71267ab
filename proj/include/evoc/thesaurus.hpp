#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evoc/error.hpp"

namespace evoc {

/// Zero-padded numeric concept identifier, e.g. "000123".
using DescriptorId = std::string;

inline bool is_valid_descriptor_id(std::string_view code) {
    if (code.empty()) return false;
    return std::all_of(code.begin(), code.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

struct HierarchyCounts {
    std::size_t n_ids = 0;
    std::size_t n_mts = 0;
    std::size_t n_dos = 0;

    bool operator==(const HierarchyCounts&) const = default;
};

/// Three-level label hierarchy: descriptor IDs map to one or more
/// microthesaurus (MT) codes, each MT code belongs to exactly one domain
/// (DO) code equal to its first two characters. An ID's first MT in file
/// order is its primary MT and is the one used for mapping.
struct Thesaurus {
    std::map<DescriptorId, std::vector<std::string>> id_to_mt;
    std::map<std::string, std::string> mt_to_do;
    // Optional display text per descriptor, keyed by language code ("" for
    // the unqualified TSV label column).
    std::map<DescriptorId, std::map<std::string, std::string>> labels;

    bool contains(const DescriptorId& id) const { return id_to_mt.count(id) > 0; }

    const std::string& primary_mt(const DescriptorId& id) const {
        auto it = id_to_mt.find(id);
        if (it == id_to_mt.end()) {
            throw NotFoundError("unknown descriptor '" + id + "'");
        }
        return it->second.front();
    }

    const std::string& domain_of(const std::string& mt) const {
        auto it = mt_to_do.find(mt);
        if (it == mt_to_do.end()) {
            throw NotFoundError("unknown microthesaurus '" + mt + "'");
        }
        return it->second;
    }
};

/// Checks all structural invariants, throwing ValidationError naming the
/// offending ID or MT code.
inline void validate_thesaurus(const Thesaurus& t) {
    for (const auto& [id, mts] : t.id_to_mt) {
        if (!is_valid_descriptor_id(id)) {
            throw ValidationError("invalid descriptor id '" + id + "'");
        }
        if (mts.empty()) {
            throw ValidationError("descriptor '" + id + "' has no microthesaurus");
        }
        for (const std::string& mt : mts) {
            if (t.mt_to_do.find(mt) == t.mt_to_do.end()) {
                throw ValidationError("microthesaurus '" + mt + "' (referenced by '" +
                                      id + "') has no domain entry");
            }
        }
    }
    for (const auto& [mt, dom] : t.mt_to_do) {
        if (mt.size() != 4) {
            throw ValidationError("microthesaurus code '" + mt +
                                  "' is not 4 characters");
        }
        if (dom.size() != 2) {
            throw ValidationError("domain code '" + dom + "' is not 2 characters");
        }
        if (mt.substr(0, 2) != dom) {
            throw ValidationError("microthesaurus '" + mt + "' maps to domain '" +
                                  dom + "' which is not its 2-character prefix");
        }
    }
}

namespace detail {

inline std::vector<std::string> split_tsv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

inline Thesaurus parse_thesaurus_tsv(std::istream& in, const std::string& filename) {
    Thesaurus t;
    std::string line;
    std::size_t lineno = 0;
    std::set<std::pair<std::string, std::string>> seen_pairs;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != "id\tmt\tdo\tlabel") {
                throw ParseError(filename, lineno,
                                 "expected header 'id\\tmt\\tdo\\tlabel'");
            }
            continue;
        }
        const std::vector<std::string> f = split_tsv_row(line);
        if (f.size() != 4) {
            throw ParseError(filename, lineno,
                             "expected 4 tab-separated fields, got " +
                                 std::to_string(f.size()));
        }
        const std::string& id = f[0];
        const std::string& mt = f[1];
        const std::string& dom = f[2];
        if (!is_valid_descriptor_id(id)) {
            throw ParseError(filename, lineno, "invalid descriptor id '" + id + "'");
        }
        if (!seen_pairs.insert({id, mt}).second) {
            throw ParseError(filename, lineno,
                             "duplicate (id, mt) row for '" + id + "', '" + mt + "'");
        }
        auto [it, inserted] = t.mt_to_do.insert({mt, dom});
        if (!inserted && it->second != dom) {
            throw ParseError(filename, lineno,
                             "microthesaurus '" + mt + "' mapped to both '" +
                                 it->second + "' and '" + dom + "'");
        }
        t.id_to_mt[id].push_back(mt);
        if (!f[3].empty()) t.labels[id][""] = f[3];
    }
    return t;
}

inline Thesaurus parse_thesaurus_json(const std::string& body,
                                      const std::string& filename) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(filename + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("id_to_mt") || !doc.contains("mt_to_do")) {
        throw ParseError(filename +
                         ": expected object with 'id_to_mt' and 'mt_to_do' keys");
    }
    Thesaurus t;
    for (const auto& [id, mts] : doc["id_to_mt"].items()) {
        if (!mts.is_array() || mts.empty()) {
            throw ParseError(filename + ": descriptor '" + id +
                             "' needs a non-empty MT array");
        }
        for (const auto& mt : mts) {
            t.id_to_mt[id].push_back(mt.get<std::string>());
        }
    }
    for (const auto& [mt, dom] : doc["mt_to_do"].items()) {
        t.mt_to_do[mt] = dom.get<std::string>();
    }
    if (doc.contains("labels")) {
        for (const auto& [id, per_lang] : doc["labels"].items()) {
            if (per_lang.is_string()) {
                t.labels[id][""] = per_lang.get<std::string>();
            } else {
                for (const auto& [lang, text] : per_lang.items()) {
                    t.labels[id][lang] = text.get<std::string>();
                }
            }
        }
    }
    return t;
}

}  // namespace detail

/// Loads a hierarchy file (TSV with header 'id\tmt\tdo\tlabel', or the
/// equivalent JSON object form) and validates every invariant.
inline Thesaurus load_thesaurus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFoundError("cannot open thesaurus file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string body = buf.str();
    const std::size_t first = body.find_first_not_of(" \t\r\n");
    Thesaurus t;
    if (first != std::string::npos && body[first] == '{') {
        t = detail::parse_thesaurus_json(body, path.filename().string());
    } else {
        std::istringstream stream(body);
        t = detail::parse_thesaurus_tsv(stream, path.filename().string());
    }
    validate_thesaurus(t);
    return t;
}

/// Maps each descriptor to its primary MT code and unions the results.
inline std::set<std::string> map_ids_to_mt(const Thesaurus& t,
                                           const std::set<DescriptorId>& ids) {
    std::set<std::string> out;
    for (const DescriptorId& id : ids) out.insert(t.primary_mt(id));
    return out;
}

/// As map_ids_to_mt, composed through the MT-to-domain table.
inline std::set<std::string> map_ids_to_do(const Thesaurus& t,
                                           const std::set<DescriptorId>& ids) {
    std::set<std::string> out;
    for (const DescriptorId& id : ids) out.insert(t.domain_of(t.primary_mt(id)));
    return out;
}

inline HierarchyCounts validate_counts(const Thesaurus& t) {
    std::set<std::string> dos;
    for (const auto& [mt, dom] : t.mt_to_do) dos.insert(dom);
    return HierarchyCounts{t.id_to_mt.size(), t.mt_to_do.size(), dos.size()};
}

}  // namespace evoc
