#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "evoc/corpus.hpp"
#include "evoc/error.hpp"
#include "evoc/stratify.hpp"
#include "evoc/thesaurus.hpp"

namespace evoc {

/// Binary relevance vector; n caches the number of true labels.
struct LabelVector {
    std::vector<std::uint8_t> y;
    std::size_t n = 0;

    LabelVector() = default;
    explicit LabelVector(std::vector<std::uint8_t> values) : y(std::move(values)) {
        n = static_cast<std::size_t>(std::count(y.begin(), y.end(), std::uint8_t{1}));
    }
};

using ScoreVector = std::vector<double>;

namespace detail {

inline void check_metric_args(const ScoreVector& scores, const LabelVector& labels,
                              std::size_t k) {
    if (scores.size() != labels.y.size()) {
        throw ValidationError("score and label vectors differ in length");
    }
    if (k < 1 || k > scores.size()) {
        throw ValidationError("k out of range: k=" + std::to_string(k) +
                              ", L=" + std::to_string(scores.size()));
    }
}

}  // namespace detail

/// Indices ordered by descending score; equal scores order by ascending
/// index, which equals ascending label code when the codebook is sorted.
inline std::vector<std::size_t> rank_order(const ScoreVector& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });
    return order;
}

inline std::size_t hits_at_k(const ScoreVector& scores, const LabelVector& labels,
                             std::size_t k) {
    const std::vector<std::size_t> order = rank_order(scores);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (labels.y[order[i]]) ++hits;
    }
    return hits;
}

inline double precision_at_k(const ScoreVector& scores, const LabelVector& labels,
                             std::size_t k) {
    detail::check_metric_args(scores, labels, k);
    return static_cast<double>(hits_at_k(scores, labels, k)) / static_cast<double>(k);
}

/// Documents with no true labels score 0 by convention.
inline double recall_at_k(const ScoreVector& scores, const LabelVector& labels,
                          std::size_t k) {
    detail::check_metric_args(scores, labels, k);
    if (labels.n == 0) return 0.0;
    return static_cast<double>(hits_at_k(scores, labels, k)) /
           static_cast<double>(labels.n);
}

inline double f1_at_k(const ScoreVector& scores, const LabelVector& labels,
                      std::size_t k) {
    const double p = precision_at_k(scores, labels, k);
    const double r = recall_at_k(scores, labels, k);
    if (p + r == 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

inline double r_precision_at_k(const ScoreVector& scores, const LabelVector& labels,
                               std::size_t k) {
    detail::check_metric_args(scores, labels, k);
    if (labels.n == 0) return 0.0;
    return static_cast<double>(hits_at_k(scores, labels, k)) /
           static_cast<double>(std::min(k, labels.n));
}

inline double ndcg_at_k(const ScoreVector& scores, const LabelVector& labels,
                        std::size_t k) {
    detail::check_metric_args(scores, labels, k);
    if (labels.n == 0) return 0.0;
    const std::vector<std::size_t> order = rank_order(scores);
    double dcg = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (labels.y[order[i]]) {
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        }
    }
    double ideal = 0.0;
    for (std::size_t i = 0; i < std::min(labels.n, k); ++i) {
        ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
    return dcg / ideal;
}

/// Micro-averaged F1 over pooled true/false positive and negative counts.
/// A pool with no positives anywhere (all sets empty on both sides) is
/// vacuously perfect and scores 1.
inline double micro_f1(const std::vector<std::set<std::string>>& predictions,
                       const std::vector<std::set<std::string>>& gold) {
    if (predictions.size() != gold.size()) {
        throw ValidationError("micro_f1: prediction and gold corpora differ in size");
    }
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        for (const std::string& label : predictions[i]) {
            if (gold[i].count(label)) {
                ++tp;
            } else {
                ++fp;
            }
        }
        for (const std::string& label : gold[i]) {
            if (!predictions[i].count(label)) ++fn;
        }
    }
    if (tp + fp + fn == 0) return 1.0;
    return 2.0 * static_cast<double>(tp) /
           (2.0 * static_cast<double>(tp) + static_cast<double>(fp) +
            static_cast<double>(fn));
}

using ScoredLabel = std::pair<std::string, double>;
using ScoredLabels = std::vector<ScoredLabel>;

enum class ScoreAggregation { Max, Sum, Mean };

/// Projects ID-level scores onto MT or DO codes through the hierarchy's
/// primary-MT mapping, aggregates per target code (max by default) and
/// re-ranks descending with ties on ascending code.
inline ScoredLabels map_level_scores(const ScoredLabels& id_scores, const Thesaurus& t,
                                     HierarchyLevel level,
                                     ScoreAggregation aggregation = ScoreAggregation::Max) {
    if (level == HierarchyLevel::Id) {
        ScoredLabels out = id_scores;
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        return out;
    }
    std::map<std::string, std::pair<double, std::size_t>> grouped;  // sum/max + count
    for (const auto& [id, score] : id_scores) {
        const std::string& mt = t.primary_mt(id);
        const std::string code = level == HierarchyLevel::Mt ? mt : t.domain_of(mt);
        auto [it, inserted] = grouped.insert({code, {score, 1}});
        if (!inserted) {
            if (aggregation == ScoreAggregation::Max) {
                it->second.first = std::max(it->second.first, score);
            } else {
                it->second.first += score;
            }
            ++it->second.second;
        }
    }
    ScoredLabels out;
    out.reserve(grouped.size());
    for (const auto& [code, agg] : grouped) {
        double score = agg.first;
        if (aggregation == ScoreAggregation::Mean) {
            score /= static_cast<double>(agg.second);
        }
        out.emplace_back(code, score);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

/// A ranker scores a document against its own label universe, most relevant
/// first. Both the classifier head and the topic-signature model fit this.
using Ranker = std::function<ScoredLabels(const Document&)>;

struct EvalOptions {
    std::size_t id_k = 6;
    std::size_t mt_k = 5;
    std::size_t do_k = 4;
    std::size_t micro_top_k = 5;
    bool micro_threshold_mode = false;
    double micro_threshold = 0.5;
    // When set, corpus F1 is the harmonic mean of mean precision and mean
    // recall instead of the mean of per-document F1 values.
    bool f1_of_means = false;
    // Index of the evaluated subset within each SplitPlan; default: the last.
    std::size_t test_subset = std::numeric_limits<std::size_t>::max();
    bool keep_per_document = true;
};

struct DocMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double r_precision = 0.0;
    double ndcg = 0.0;
};

struct MetricReport {
    struct Level {
        std::size_t k = 0;
        double precision = 0.0;
        double recall = 0.0;
        double f1 = 0.0;
        double r_precision = 0.0;
        double ndcg = 0.0;
        std::size_t n_documents = 0;  // documents contributing to the means
        std::size_t n_empty_gold = 0; // excluded documents with no gold labels
    };
    Level id;
    Level mt;
    Level dom;
    double micro_f1 = 0.0;
    std::size_t n_splits = 0;

    struct Row {
        std::uint64_t seed = 0;
        std::string doc_id;
        DocMetrics id;
        DocMetrics mt;
        DocMetrics dom;
    };
    std::vector<Row> per_document;
};

namespace detail {

struct LevelAccumulator {
    double precision = 0.0, recall = 0.0, f1 = 0.0, r_precision = 0.0, ndcg = 0.0;
    std::size_t n = 0;
    std::size_t n_empty = 0;

    void add(const DocMetrics& m) {
        precision += m.precision;
        recall += m.recall;
        f1 += m.f1;
        r_precision += m.r_precision;
        ndcg += m.ndcg;
        ++n;
    }
};

inline DocMetrics score_one(const ScoreVector& scores, const LabelVector& labels,
                            std::size_t k) {
    DocMetrics m;
    m.precision = precision_at_k(scores, labels, k);
    m.recall = recall_at_k(scores, labels, k);
    m.f1 = f1_at_k(scores, labels, k);
    m.r_precision = r_precision_at_k(scores, labels, k);
    m.ndcg = ndcg_at_k(scores, labels, k);
    return m;
}

}  // namespace detail

/// Evaluates a ranker over the test subset of each split plan. Per-document
/// metrics are averaged over documents within a split, then over splits.
/// MT and DO views are produced by direct mapping of both the predictions
/// and the gold sets. `ranker_labels` is the model's label universe; the
/// evaluation codebook per level is its union with the corpus gold labels.
inline MetricReport evaluate_corpus(const Ranker& ranker,
                                    const std::vector<DescriptorId>& ranker_labels,
                                    const Corpus& corpus, const Thesaurus& thesaurus,
                                    const std::vector<SplitPlan>& plans,
                                    const EvalOptions& options = {}) {
    if (plans.empty()) {
        throw ValidationError("evaluate_corpus: no split plans given");
    }
    std::map<std::string, std::size_t> doc_index;
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
        doc_index[corpus.documents[i].doc_id] = i;
    }

    // Codebooks: sorted unions of gold labels and the ranker universe.
    std::set<std::string> id_codes(ranker_labels.begin(), ranker_labels.end());
    for (const Document& doc : corpus.documents) {
        id_codes.insert(doc.labels.begin(), doc.labels.end());
    }
    std::set<std::string> mt_codes;
    std::set<std::string> do_codes;
    for (const std::string& id : id_codes) {
        const std::string& mt = thesaurus.primary_mt(id);
        mt_codes.insert(mt);
        do_codes.insert(thesaurus.domain_of(mt));
    }
    struct Codebook {
        std::vector<std::string> codes;
        std::map<std::string, std::size_t> index;
        std::size_t k = 0;
    };
    auto make_codebook = [](const std::set<std::string>& codes, std::size_t k) {
        Codebook cb;
        cb.codes.assign(codes.begin(), codes.end());
        for (std::size_t i = 0; i < cb.codes.size(); ++i) cb.index[cb.codes[i]] = i;
        cb.k = std::min(k, cb.codes.size());
        if (cb.k == 0) {
            throw ValidationError("evaluate_corpus: empty label codebook");
        }
        return cb;
    };
    const Codebook id_cb = make_codebook(id_codes, options.id_k);
    const Codebook mt_cb = make_codebook(mt_codes, options.mt_k);
    const Codebook do_cb = make_codebook(do_codes, options.do_k);

    auto vectorize = [](const Codebook& cb, const ScoredLabels& ranked,
                        const std::set<std::string>& gold) {
        ScoreVector scores(cb.codes.size(), -1.0);
        for (const auto& [code, score] : ranked) {
            auto it = cb.index.find(code);
            if (it == cb.index.end()) {
                throw ValidationError("ranker emitted unknown label '" + code + "'");
            }
            scores[it->second] = score;
        }
        std::vector<std::uint8_t> y(cb.codes.size(), 0);
        for (const std::string& code : gold) {
            y[cb.index.at(code)] = 1;
        }
        return std::make_pair(std::move(scores), LabelVector(std::move(y)));
    };

    detail::LevelAccumulator id_total, mt_total, do_total;
    double micro_total = 0.0;
    MetricReport report;
    report.n_splits = plans.size();

    for (const SplitPlan& plan : plans) {
        const std::size_t subset_index =
            options.test_subset == std::numeric_limits<std::size_t>::max()
                ? plan.subsets.size() - 1
                : options.test_subset;
        if (subset_index >= plan.subsets.size()) {
            throw ValidationError("evaluate_corpus: test subset index out of range");
        }
        const std::vector<std::string>& test_ids = plan.subsets[subset_index];
        if (test_ids.empty()) {
            throw ValidationError("evaluate_corpus: empty test split");
        }
        detail::LevelAccumulator id_acc, mt_acc, do_acc;
        std::vector<std::set<std::string>> micro_pred, micro_gold;
        for (const std::string& doc_id : test_ids) {
            auto it = doc_index.find(doc_id);
            if (it == doc_index.end()) {
                throw ValidationError("split references unknown doc_id '" + doc_id +
                                      "'");
            }
            const Document& doc = corpus.documents[it->second];
            const ScoredLabels ranked = ranker(doc);

            MetricReport::Row row;
            row.seed = plan.seed;
            row.doc_id = doc_id;

            auto [id_scores, id_gold] = vectorize(id_cb, ranked, doc.labels);
            if (id_gold.n == 0) {
                ++id_acc.n_empty;
                ++mt_acc.n_empty;
                ++do_acc.n_empty;
            } else {
                row.id = detail::score_one(id_scores, id_gold, id_cb.k);
                id_acc.add(row.id);

                const ScoredLabels mt_ranked =
                    map_level_scores(ranked, thesaurus, HierarchyLevel::Mt);
                auto [mt_scores, mt_gold] = vectorize(
                    mt_cb, mt_ranked, map_ids_to_mt(thesaurus, doc.labels));
                row.mt = detail::score_one(mt_scores, mt_gold, mt_cb.k);
                mt_acc.add(row.mt);

                const ScoredLabels do_ranked =
                    map_level_scores(ranked, thesaurus, HierarchyLevel::Do);
                auto [do_scores, do_gold] = vectorize(
                    do_cb, do_ranked, map_ids_to_do(thesaurus, doc.labels));
                row.dom = detail::score_one(do_scores, do_gold, do_cb.k);
                do_acc.add(row.dom);
            }

            std::set<std::string> predicted;
            if (options.micro_threshold_mode) {
                for (const auto& [code, score] : ranked) {
                    if (score >= options.micro_threshold) predicted.insert(code);
                }
            } else {
                const std::vector<std::size_t> order = rank_order(id_scores);
                for (std::size_t i = 0;
                     i < std::min(options.micro_top_k, order.size()); ++i) {
                    predicted.insert(id_cb.codes[order[i]]);
                }
            }
            micro_pred.push_back(std::move(predicted));
            micro_gold.push_back(doc.labels);

            if (options.keep_per_document) {
                report.per_document.push_back(std::move(row));
            }
        }
        auto fold = [](detail::LevelAccumulator& total,
                       const detail::LevelAccumulator& split) {
            if (split.n > 0) {
                const double n = static_cast<double>(split.n);
                total.precision += split.precision / n;
                total.recall += split.recall / n;
                total.f1 += split.f1 / n;
                total.r_precision += split.r_precision / n;
                total.ndcg += split.ndcg / n;
            }
            total.n += split.n;
            total.n_empty += split.n_empty;
        };
        fold(id_total, id_acc);
        fold(mt_total, mt_acc);
        fold(do_total, do_acc);
        micro_total += micro_f1(micro_pred, micro_gold);
    }

    const double n_splits = static_cast<double>(plans.size());
    auto finish = [&](const detail::LevelAccumulator& acc, const Codebook& cb) {
        MetricReport::Level level;
        level.k = cb.k;
        level.precision = acc.precision / n_splits;
        level.recall = acc.recall / n_splits;
        level.r_precision = acc.r_precision / n_splits;
        level.ndcg = acc.ndcg / n_splits;
        if (options.f1_of_means) {
            const double sum = level.precision + level.recall;
            level.f1 = sum == 0.0 ? 0.0 : 2.0 * level.precision * level.recall / sum;
        } else {
            level.f1 = acc.f1 / n_splits;
        }
        level.n_documents = acc.n;
        level.n_empty_gold = acc.n_empty;
        return level;
    };
    report.id = finish(id_total, id_cb);
    report.mt = finish(mt_total, mt_cb);
    report.dom = finish(do_total, do_cb);
    report.micro_f1 = micro_total / n_splits;
    return report;
}

inline nlohmann::ordered_json report_to_json(const MetricReport& report,
                                             bool include_per_document = false) {
    auto level_json = [](const MetricReport::Level& level) {
        nlohmann::ordered_json obj;
        obj["k"] = level.k;
        obj["precision"] = level.precision;
        obj["recall"] = level.recall;
        obj["f1"] = level.f1;
        obj["r_precision"] = level.r_precision;
        obj["ndcg"] = level.ndcg;
        obj["n_documents"] = level.n_documents;
        obj["n_empty_gold"] = level.n_empty_gold;
        return obj;
    };
    nlohmann::ordered_json obj;
    obj["n_splits"] = report.n_splits;
    obj["id"] = level_json(report.id);
    obj["mt"] = level_json(report.mt);
    obj["do"] = level_json(report.dom);
    obj["micro_f1"] = report.micro_f1;
    if (include_per_document) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        auto doc_json = [](const DocMetrics& m) {
            nlohmann::ordered_json d;
            d["precision"] = m.precision;
            d["recall"] = m.recall;
            d["f1"] = m.f1;
            d["r_precision"] = m.r_precision;
            d["ndcg"] = m.ndcg;
            return d;
        };
        for (const MetricReport::Row& row : report.per_document) {
            nlohmann::ordered_json r;
            r["seed"] = row.seed;
            r["doc_id"] = row.doc_id;
            r["id"] = doc_json(row.id);
            r["mt"] = doc_json(row.mt);
            r["do"] = doc_json(row.dom);
            rows.push_back(std::move(r));
        }
        obj["per_document"] = std::move(rows);
    }
    return obj;
}

/// One CSV row per language in the shape of the cross-language results table.
inline std::string report_csv_header() {
    return "language,id_f1,mt_f1,do_f1\n";
}

inline std::string report_csv_row(const std::string& language,
                                  const MetricReport& report) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f\n", language.c_str(),
                  report.id.f1, report.mt.f1, report.dom.f1);
    return buf;
}

}  // namespace evoc
