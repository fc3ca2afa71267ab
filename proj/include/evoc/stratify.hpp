#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "evoc/corpus.hpp"
#include "evoc/error.hpp"
#include "evoc/rng.hpp"

namespace evoc {

struct SplitRatios {
    std::vector<double> fractions;

    void validate() const {
        if (fractions.empty()) {
            throw ValidationError("split ratios must not be empty");
        }
        double sum = 0.0;
        for (double f : fractions) {
            if (!(f > 0.0)) {
                throw ValidationError("split fractions must be positive");
            }
            sum += f;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ValidationError("split fractions must sum to 1");
        }
    }

    /// Parses a comma-separated list such as "0.8,0.1,0.1".
    static SplitRatios parse(const std::string& text) {
        SplitRatios r;
        std::size_t start = 0;
        while (start <= text.size()) {
            const std::size_t comma = text.find(',', start);
            const std::string piece =
                text.substr(start, comma == std::string::npos ? comma : comma - start);
            try {
                r.fractions.push_back(std::stod(piece));
            } catch (const std::exception&) {
                throw ValidationError("cannot parse split fraction '" + piece + "'");
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        r.validate();
        return r;
    }
};

/// Deterministic partition of a corpus into one doc_id subset per fraction.
/// Subset order follows the ratio order; doc_ids keep corpus order.
struct SplitPlan {
    std::uint64_t seed = 0;
    std::vector<std::vector<std::string>> subsets;

    bool operator==(const SplitPlan&) const = default;
};

/// Multi-label iterative stratification. Repeatedly picks the label with the
/// fewest unassigned documents and deals those documents to the subset with
/// the greatest remaining demand for that label, breaking ties by greatest
/// overall remaining capacity and then by a seeded uniform choice.
inline SplitPlan stratified_split(const Corpus& corpus, const SplitRatios& ratios,
                                  std::uint64_t seed) {
    ratios.validate();
    if (corpus.documents.empty()) {
        throw ValidationError("stratified_split: corpus is empty");
    }
    const std::size_t n_docs = corpus.documents.size();
    const std::size_t n_subsets = ratios.fractions.size();

    std::map<std::string, std::vector<std::size_t>> docs_by_label;
    for (std::size_t i = 0; i < n_docs; ++i) {
        const Document& doc = corpus.documents[i];
        if (doc.labels.empty()) {
            throw ValidationError("stratified_split: document '" + doc.doc_id +
                                  "' has no labels");
        }
        for (const std::string& label : doc.labels) {
            docs_by_label[label].push_back(i);
        }
    }

    // Remaining demand per subset, overall and per label.
    std::vector<double> capacity(n_subsets);
    for (std::size_t j = 0; j < n_subsets; ++j) {
        capacity[j] = ratios.fractions[j] * static_cast<double>(n_docs);
    }
    std::map<std::string, std::vector<double>> label_demand;
    for (const auto& [label, docs] : docs_by_label) {
        std::vector<double> demand(n_subsets);
        for (std::size_t j = 0; j < n_subsets; ++j) {
            demand[j] = ratios.fractions[j] * static_cast<double>(docs.size());
        }
        label_demand[label] = std::move(demand);
    }

    std::map<std::string, std::size_t> remaining_per_label;
    for (const auto& [label, docs] : docs_by_label) {
        remaining_per_label[label] = docs.size();
    }

    SplitMix64 rng(seed);
    std::vector<int> assignment(n_docs, -1);
    std::size_t unassigned = n_docs;
    while (unassigned > 0) {
        // Rarest label first; ties fall to the lexicographically smallest code.
        std::string chosen;
        std::size_t fewest = 0;
        for (const auto& [label, count] : remaining_per_label) {
            if (count == 0) continue;
            if (chosen.empty() || count < fewest) {
                chosen = label;
                fewest = count;
            }
        }
        std::vector<double>& demand = label_demand[chosen];
        for (std::size_t doc_index : docs_by_label[chosen]) {
            if (assignment[doc_index] != -1) continue;
            std::vector<std::size_t> best;
            for (std::size_t j = 0; j < n_subsets; ++j) {
                if (best.empty() || demand[j] > demand[best.front()]) {
                    best.assign(1, j);
                } else if (demand[j] == demand[best.front()]) {
                    best.push_back(j);
                }
            }
            if (best.size() > 1) {
                std::vector<std::size_t> roomiest;
                for (std::size_t j : best) {
                    if (roomiest.empty() || capacity[j] > capacity[roomiest.front()]) {
                        roomiest.assign(1, j);
                    } else if (capacity[j] == capacity[roomiest.front()]) {
                        roomiest.push_back(j);
                    }
                }
                best = std::move(roomiest);
            }
            const std::size_t target =
                best.size() == 1 ? best.front()
                                 : best[static_cast<std::size_t>(rng.below(best.size()))];
            assignment[doc_index] = static_cast<int>(target);
            --unassigned;
            capacity[target] -= 1.0;
            for (const std::string& label : corpus.documents[doc_index].labels) {
                label_demand[label][target] -= 1.0;
                --remaining_per_label[label];
            }
        }
    }

    SplitPlan plan;
    plan.seed = seed;
    plan.subsets.resize(n_subsets);
    for (std::size_t i = 0; i < n_docs; ++i) {
        plan.subsets[static_cast<std::size_t>(assignment[i])].push_back(
            corpus.documents[i].doc_id);
    }
    return plan;
}

inline std::vector<SplitPlan> make_multi_splits(const Corpus& corpus,
                                                const SplitRatios& ratios,
                                                const std::vector<std::uint64_t>& seeds) {
    std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
    if (unique.size() != seeds.size()) {
        throw ValidationError("make_multi_splits: seeds must be distinct");
    }
    std::vector<SplitPlan> plans;
    plans.reserve(seeds.size());
    for (std::uint64_t seed : seeds) {
        plans.push_back(stratified_split(corpus, ratios, seed));
    }
    return plans;
}

inline nlohmann::ordered_json split_to_json(const SplitPlan& plan) {
    nlohmann::ordered_json obj;
    obj["seed"] = plan.seed;
    obj["subsets"] = plan.subsets;
    return obj;
}

inline SplitPlan split_from_json(const nlohmann::json& obj) {
    SplitPlan plan;
    plan.seed = obj.at("seed").get<std::uint64_t>();
    for (const auto& subset : obj.at("subsets")) {
        plan.subsets.push_back(subset.get<std::vector<std::string>>());
    }
    return plan;
}

inline void save_split(const SplitPlan& plan, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write split file '" + path.string() + "'");
    }
    out << split_to_json(plan).dump(2) << '\n';
}

inline SplitPlan load_split(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFoundError("cannot open split file '" + path.string() + "'");
    }
    nlohmann::json obj;
    try {
        in >> obj;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.filename().string() + ": " + e.what());
    }
    return split_from_json(obj);
}

}  // namespace evoc
