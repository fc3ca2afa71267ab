#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "evoc/corpus.hpp"
#include "evoc/error.hpp"
#include "evoc/text.hpp"

namespace evoc {

/// Fixed subword vocabulary for greedy longest-match tokenization.
/// `ordered` preserves file order; its indices double as embedding rows for
/// the trainable toy encoder.
struct SubwordVocabulary {
    std::unordered_set<std::string> entries;
    std::vector<std::string> ordered;
    std::string continuation_prefix = "##";
    std::string unk_token = "[UNK]";
    std::string cls_token = "[CLS]";
    std::string sep_token = "[SEP]";
    std::size_t max_sequence = 512;
    bool lowercase = false;

    bool contains(const std::string& token) const { return entries.count(token) > 0; }

    void add(const std::string& token) {
        if (entries.insert(token).second) ordered.push_back(token);
    }

    void validate() const {
        for (const std::string* tok : {&unk_token, &cls_token, &sep_token}) {
            if (!contains(*tok)) {
                throw ValidationError("vocabulary is missing special token '" + *tok +
                                      "'");
            }
        }
        if (max_sequence < 2) {
            throw ValidationError("max_sequence must be at least 2");
        }
    }
};

/// Builds a vocabulary from a token list, adding the special tokens if absent.
inline SubwordVocabulary make_vocabulary(const std::vector<std::string>& tokens,
                                         bool lowercase = false) {
    SubwordVocabulary vocab;
    vocab.lowercase = lowercase;
    vocab.add(vocab.unk_token);
    vocab.add(vocab.cls_token);
    vocab.add(vocab.sep_token);
    for (const std::string& token : tokens) vocab.add(token);
    vocab.validate();
    return vocab;
}

/// Loads a one-token-per-line vocabulary file. The special tokens must be
/// present in the file, as they are in published BERT vocabularies.
inline SubwordVocabulary load_vocabulary(const std::filesystem::path& path,
                                         bool lowercase = false) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFoundError("cannot open vocabulary file '" + path.string() + "'");
    }
    SubwordVocabulary vocab;
    vocab.lowercase = lowercase;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        vocab.add(line);
    }
    vocab.validate();
    return vocab;
}

/// Greedy longest-prefix-match subword split. Continuation pieces carry the
/// "##" prefix; a word with any unmatchable position becomes a single
/// unk_token piece.
inline std::vector<std::string> tokenize_word(const SubwordVocabulary& vocab,
                                              std::string_view word) {
    std::string lowered;
    if (vocab.lowercase) {
        lowered = lowercase_utf8(word);
        word = lowered;
    }
    const std::vector<char32_t> cps = decode_utf8(word);
    if (cps.empty()) return {};
    std::vector<std::string> pieces;
    std::size_t start = 0;
    while (start < cps.size()) {
        std::size_t end = cps.size();
        std::string match;
        while (end > start) {
            std::string candidate = start > 0 ? vocab.continuation_prefix : "";
            candidate += encode_utf8(cps, start, end);
            if (vocab.contains(candidate)) {
                match = std::move(candidate);
                break;
            }
            --end;
        }
        if (match.empty()) {
            return {vocab.unk_token};
        }
        pieces.push_back(std::move(match));
        start = end;
    }
    return pieces;
}

/// Wraps a piece stream in [CLS] ... [SEP], truncating so that the total
/// length never exceeds max_sequence and the separator is always last.
inline std::vector<std::string> wrap_and_truncate(const SubwordVocabulary& vocab,
                                                  std::vector<std::string> pieces) {
    if (pieces.size() > vocab.max_sequence - 2) {
        pieces.resize(vocab.max_sequence - 2);
    }
    std::vector<std::string> out;
    out.reserve(pieces.size() + 2);
    out.push_back(vocab.cls_token);
    for (std::string& piece : pieces) out.push_back(std::move(piece));
    out.push_back(vocab.sep_token);
    return out;
}

/// Full document encoding: pre-split on whitespace and punctuation, tokenize
/// each word, then wrap and truncate to max_sequence.
inline std::vector<std::string> encode_document(const SubwordVocabulary& vocab,
                                                std::string_view text) {
    std::vector<std::string> pieces;
    for (const std::string& word : pre_split(text)) {
        std::vector<std::string> word_pieces = tokenize_word(vocab, word);
        pieces.insert(pieces.end(), std::make_move_iterator(word_pieces.begin()),
                      std::make_move_iterator(word_pieces.end()));
        if (pieces.size() >= vocab.max_sequence) break;  // already past the cut
    }
    return wrap_and_truncate(vocab, std::move(pieces));
}

struct VocabStats {
    double tokens_per_word = 0.0;
    double unk_per_word = 0.0;
};

/// Average pieces per word and UNK pieces per word across the corpus.
/// Special tokens are never counted. Pure-punctuation words are excluded
/// unless count_punctuation_words is set.
inline VocabStats vocabulary_stats(const SubwordVocabulary& vocab, const Corpus& corpus,
                                   bool count_punctuation_words = false) {
    if (corpus.documents.empty()) {
        throw ValidationError("vocabulary_stats: corpus is empty");
    }
    std::size_t words = 0;
    std::size_t pieces = 0;
    std::size_t unks = 0;
    for (const Document& doc : corpus.documents) {
        for (const std::string& word : pre_split(doc.text)) {
            if (!count_punctuation_words && is_pure_punctuation(word)) continue;
            const std::vector<std::string> word_pieces = tokenize_word(vocab, word);
            ++words;
            pieces += word_pieces.size();
            for (const std::string& piece : word_pieces) {
                if (piece == vocab.unk_token) ++unks;
            }
        }
    }
    if (words == 0) {
        throw ValidationError("vocabulary_stats: corpus contains no countable words");
    }
    VocabStats stats;
    stats.tokens_per_word = static_cast<double>(pieces) / static_cast<double>(words);
    stats.unk_per_word = static_cast<double>(unks) / static_cast<double>(words);
    return stats;
}

}  // namespace evoc
