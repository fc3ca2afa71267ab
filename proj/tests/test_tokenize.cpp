#include <catch2/catch_amalgamated.hpp>

#include "evoc/tokenize.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace evoc;

TEST_CASE("greedy longest match splits with continuation prefixes", "[tokenize]") {
    const SubwordVocabulary vocab = make_vocabulary({"un", "##aff", "##able", "aff"});
    CHECK(tokenize_word(vocab, "unaffable") ==
          std::vector<std::string>{"un", "##aff", "##able"});
}

TEST_CASE("verbatim vocabulary words pass through whole", "[tokenize]") {
    const SubwordVocabulary vocab = make_vocabulary({"hello", "he", "##llo"});
    CHECK(tokenize_word(vocab, "hello") == std::vector<std::string>{"hello"});
}

TEST_CASE("unmatchable words collapse to a single unk piece", "[tokenize]") {
    const SubwordVocabulary vocab = make_vocabulary({"he", "##llo"});
    CHECK(tokenize_word(vocab, "xyz") == std::vector<std::string>{"[UNK]"});
    // A dead end mid-word also yields one UNK for the whole word.
    CHECK(tokenize_word(vocab, "hex") == std::vector<std::string>{"[UNK]"});
}

TEST_CASE("lowercasing is applied when configured", "[tokenize]") {
    SubwordVocabulary vocab = make_vocabulary({"hello"}, true);
    CHECK(tokenize_word(vocab, "HeLLo") == std::vector<std::string>{"hello"});
}

TEST_CASE("document encoding wraps and truncates", "[tokenize]") {
    const SubwordVocabulary vocab = make_vocabulary({"word"});

    SECTION("empty text") {
        CHECK(encode_document(vocab, "") == std::vector<std::string>{"[CLS]", "[SEP]"});
    }
    SECTION("600 single-piece words truncate to the window") {
        std::string text;
        for (int i = 0; i < 600; ++i) text += "word ";
        const std::vector<std::string> tokens = encode_document(vocab, text);
        REQUIRE(tokens.size() == 512);
        CHECK(tokens.front() == "[CLS]");
        CHECK(tokens.back() == "[SEP]");
        CHECK(tokens[1] == "word");
    }
    SECTION("composition oracle on mixed text") {
        const SubwordVocabulary mixed =
            make_vocabulary({"the", "commission", "dec", "##ision", ",", "."});
        const std::string text = "the commission, decision.";
        std::vector<std::string> expected;
        expected.push_back("[CLS]");
        for (const std::string& word : pre_split(text)) {
            for (const std::string& piece : tokenize_word(mixed, word)) {
                expected.push_back(piece);
            }
        }
        expected.push_back("[SEP]");
        CHECK(encode_document(mixed, text) == expected);
        // Punctuation became its own word.
        CHECK(std::count(expected.begin(), expected.end(), ",") == 1);
    }
}

TEST_CASE("truncation is idempotent over already-split tokens", "[tokenize]") {
    const SubwordVocabulary vocab = make_vocabulary({"word"});
    std::string text;
    for (int i = 0; i < 700; ++i) text += "word ";
    const std::vector<std::string> once = encode_document(vocab, text);
    std::vector<std::string> inner(once.begin() + 1, once.end() - 1);
    CHECK(wrap_and_truncate(vocab, inner) == once);
}

TEST_CASE("detokenization reproduces the word when no unk appears", "[tokenize]") {
    SplitMix64 rng(1234);
    const std::string alphabet = "abc";
    for (int round = 0; round < 500; ++round) {
        // Random word plus a vocabulary guaranteed to cover it: all single
        // characters as both word-initial and continuation pieces.
        std::vector<std::string> entries;
        for (char c : alphabet) {
            entries.push_back(std::string(1, c));
            entries.push_back("##" + std::string(1, c));
        }
        std::string word;
        const std::size_t len = 1 + rng.below(8);
        for (std::size_t i = 0; i < len; ++i) {
            word += alphabet[rng.below(alphabet.size())];
            if (rng.unit() < 0.3) {
                entries.push_back(word.substr(0, word.size()));  // random prefixes
            }
        }
        const SubwordVocabulary vocab = make_vocabulary(entries);
        const std::vector<std::string> pieces = tokenize_word(vocab, word);
        std::string rebuilt;
        for (const std::string& piece : pieces) {
            REQUIRE(piece != vocab.unk_token);
            rebuilt += piece.rfind("##", 0) == 0 ? piece.substr(2) : piece;
        }
        CHECK(rebuilt == word);
    }
}

TEST_CASE("greedy matches the try-every-entry oracle on random pairs", "[tokenize]") {
    SplitMix64 rng(555);
    const std::string alphabet = "abcd";
    for (int round = 0; round < 2000; ++round) {
        std::vector<std::string> entries;
        const std::size_t n_entries = 1 + rng.below(12);
        for (std::size_t i = 0; i < n_entries; ++i) {
            std::string piece;
            const std::size_t len = 1 + rng.below(4);
            for (std::size_t k = 0; k < len; ++k) {
                piece += alphabet[rng.below(alphabet.size())];
            }
            entries.push_back(rng.unit() < 0.5 ? piece : "##" + piece);
        }
        const SubwordVocabulary vocab = make_vocabulary(entries);
        std::string word;
        const std::size_t len = 1 + rng.below(10);
        for (std::size_t k = 0; k < len; ++k) {
            word += alphabet[rng.below(alphabet.size())];
        }
        // The oracle scans the raw entry list; drop the specials it does not
        // know about (they never match lowercase letters anyway).
        CHECK(tokenize_word(vocab, word) ==
              oracle::tokenize_word(entries, vocab.unk_token, word));
    }
}

TEST_CASE("vocabulary statistics count pieces and unks per word", "[tokenize]") {
    const SubwordVocabulary vocab = make_vocabulary(
        {"one", "two", "three", "four", "five", "six", "win", "wal", "##dow",
         "##let", "##ter"});
    Corpus corpus;
    corpus.language = "en";
    corpus.documents.push_back(testutil::make_doc(
        "a", "en", "one two three four five six window wallet winter \xCE\xA9", {"000001"}));

    const VocabStats stats = vocabulary_stats(vocab, corpus);
    CHECK(stats.tokens_per_word == Catch::Approx(1.3));
    CHECK(stats.unk_per_word == Catch::Approx(0.1));
}

TEST_CASE("closure vocabularies produce zero unk", "[tokenize]") {
    // Word-initial and continuation single characters cover everything.
    std::vector<std::string> entries;
    for (char c = 'a'; c <= 'z'; ++c) {
        entries.push_back(std::string(1, c));
        entries.push_back("##" + std::string(1, c));
    }
    const SubwordVocabulary vocab = make_vocabulary(entries);
    SplitMix64 rng(8);
    Corpus corpus;
    corpus.language = "fr";
    for (int i = 0; i < 20; ++i) {
        std::string text;
        for (int w = 0; w < 12; ++w) {
            std::string word;
            const std::size_t len = 1 + rng.below(9);
            for (std::size_t k = 0; k < len; ++k) {
                word += static_cast<char>('a' + rng.below(26));
            }
            text += word + " ";
        }
        corpus.documents.push_back(
            testutil::make_doc("d" + std::to_string(i), "fr", text, {"000001"}));
    }
    const VocabStats stats = vocabulary_stats(vocab, corpus);
    CHECK(stats.unk_per_word == 0.0);
    CHECK(stats.tokens_per_word >= 1.0);
}

TEST_CASE("punctuation words are excluded from stats by default", "[tokenize]") {
    const SubwordVocabulary vocab = make_vocabulary({"hi"});
    Corpus corpus;
    corpus.language = "en";
    corpus.documents.push_back(testutil::make_doc("a", "en", "hi . hi .", {"000001"}));
    const VocabStats without = vocabulary_stats(vocab, corpus);
    CHECK(without.tokens_per_word == Catch::Approx(1.0));
    CHECK(without.unk_per_word == 0.0);
    // Counting the periods adds two unmatched one-piece words.
    const VocabStats with_punct = vocabulary_stats(vocab, corpus, true);
    CHECK(with_punct.tokens_per_word == Catch::Approx(1.0));
    CHECK(with_punct.unk_per_word == Catch::Approx(0.5));
}

TEST_CASE("growing the vocabulary with whole words never increases tokens per word",
          "[tokenize]") {
    // Prefix-free word set (fixed length) so that each added whole word only
    // changes its own tokenization.
    SplitMix64 rng(99);
    std::set<std::string> words;
    while (words.size() < 30) {
        std::string word;
        for (int k = 0; k < 6; ++k) word += static_cast<char>('a' + rng.below(4));
        words.insert(word);
    }
    Corpus corpus;
    corpus.language = "en";
    std::string text;
    for (const std::string& word : words) text += word + " ";
    corpus.documents.push_back(testutil::make_doc("a", "en", text, {"000001"}));

    std::vector<std::string> entries;
    for (char c = 'a'; c <= 'd'; ++c) {
        entries.push_back(std::string(1, c));
        entries.push_back("##" + std::string(1, c));
    }
    SubwordVocabulary vocab = make_vocabulary(entries);
    double last = vocabulary_stats(vocab, corpus).tokens_per_word;
    for (const std::string& word : words) {
        vocab.add(word);
        const double now = vocabulary_stats(vocab, corpus).tokens_per_word;
        CHECK(now <= last + 1e-12);
        last = now;
    }
    CHECK(last == Catch::Approx(1.0));
}

TEST_CASE("vocabulary file loading", "[tokenize]") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("vocab.txt"),
                         "[UNK]\n[CLS]\n[SEP]\nhello\n##world\n");
    const SubwordVocabulary vocab = load_vocabulary(dir.file("vocab.txt"));
    CHECK(vocab.ordered.size() == 5);
    CHECK(vocab.contains("##world"));

    testutil::write_file(dir.file("bad.txt"), "hello\n");
    CHECK_THROWS_AS(load_vocabulary(dir.file("bad.txt")), ValidationError);

    CHECK_THROWS_AS(
        vocabulary_stats(vocab, Corpus{"en", {}}), ValidationError);
}
