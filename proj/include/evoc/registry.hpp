#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evoc/corpus.hpp"
#include "evoc/encoder.hpp"
#include "evoc/error.hpp"
#include "evoc/head.hpp"
#include "evoc/thesaurus.hpp"
#include "evoc/tokenize.hpp"

namespace evoc {

// ---------------------------------------------------------------------------
// Checkpoint file: "EVOC" magic, u32 version, u32 E, u32 M, the label
// codebook (u16 length + bytes per code), W row-major then b as 64-bit
// little-endian floats, and an optional toy-encoder embedding table
// (tag byte 1, u32 vocab size, rows aligned with the vocabulary file order).
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
}

class ByteReader {
public:
    ByteReader(const std::string& data, std::string name)
        : data_(data), name_(std::move(name)) {}

    std::uint16_t u16() { return static_cast<std::uint16_t>(byte() | (byte() << 8)); }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    }

    double f64() {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(byte()) << (8 * i);
        double d;
        std::memcpy(&d, &bits, sizeof(d));
        return d;
    }

    std::string bytes(std::size_t n) {
        require(n);
        std::string out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    bool at_end() const { return pos_ == data_.size(); }

private:
    unsigned byte() {
        require(1);
        return static_cast<unsigned char>(data_[pos_++]);
    }

    void require(std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw ParseError(name_ + ": truncated checkpoint");
        }
    }

    const std::string& data_;
    std::string name_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ClassifierHead head;
    std::optional<Matrix> encoder_embeddings;
};

inline void save_checkpoint(const std::filesystem::path& path, const ClassifierHead& head,
                            const Matrix* encoder_embeddings = nullptr) {
    std::string out;
    out += "EVOC";
    detail::put_u32(out, kCheckpointVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(head.embedding_size()));
    detail::put_u32(out, static_cast<std::uint32_t>(head.n_labels()));
    for (const DescriptorId& label : head.labels) {
        detail::put_u16(out, static_cast<std::uint16_t>(label.size()));
        out += label;
    }
    for (double w : head.weights.data) detail::put_f64(out, w);
    for (double b : head.bias) detail::put_f64(out, b);
    if (encoder_embeddings != nullptr) {
        out.push_back(1);
        detail::put_u32(out, static_cast<std::uint32_t>(encoder_embeddings->rows));
        for (double w : encoder_embeddings->data) detail::put_f64(out, w);
    } else {
        out.push_back(0);
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw Error("cannot write checkpoint '" + path.string() + "'");
    }
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw NotFoundError("cannot open checkpoint '" + path.string() + "'");
    }
    std::string data((std::istreambuf_iterator<char>(file)),
                     std::istreambuf_iterator<char>());
    const std::string name = path.filename().string();
    detail::ByteReader reader(data, name);
    if (reader.bytes(4) != "EVOC") {
        throw ParseError(name + ": not an evoc checkpoint");
    }
    const std::uint32_t version = reader.u32();
    if (version != kCheckpointVersion) {
        throw ParseError(name + ": unsupported checkpoint version " +
                         std::to_string(version));
    }
    const std::uint32_t embedding_size = reader.u32();
    const std::uint32_t n_labels = reader.u32();
    Checkpoint ckpt;
    ckpt.head.labels.reserve(n_labels);
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        ckpt.head.labels.push_back(reader.bytes(reader.u16()));
    }
    ckpt.head.weights = Matrix(embedding_size, n_labels);
    for (double& w : ckpt.head.weights.data) w = reader.f64();
    ckpt.head.bias.resize(n_labels);
    for (double& b : ckpt.head.bias) b = reader.f64();
    const std::string tag = reader.bytes(1);
    if (tag[0] == 1) {
        const std::uint32_t vocab_size = reader.u32();
        Matrix table(vocab_size, embedding_size);
        for (double& w : table.data) w = reader.f64();
        ckpt.encoder_embeddings = std::move(table);
    } else if (tag[0] != 0) {
        throw ParseError(name + ": unknown encoder tag");
    }
    if (!reader.at_end()) {
        throw ParseError(name + ": trailing bytes after checkpoint payload");
    }
    return ckpt;
}

// ---------------------------------------------------------------------------
// Registry: a root directory with registry.json mapping each language code to
// its checkpoint/vocabulary/thesaurus files plus FNV-1a integrity checksums.
// ---------------------------------------------------------------------------

inline std::string fnv1a64_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string file_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFoundError("cannot open '" + path.string() + "' for checksumming");
    }
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return fnv1a64_hex(data);
}

struct RegistryEntry {
    std::string checkpoint;  // paths relative to the registry root
    std::string vocabulary;
    std::string thesaurus;
    bool lowercase = false;
    std::map<std::string, std::string> checksums;  // file key -> fnv1a64
};

struct ModelRegistry {
    std::filesystem::path root;
    std::map<std::string, RegistryEntry> entries;

    static ModelRegistry load(const std::filesystem::path& root) {
        const std::filesystem::path manifest = root / "registry.json";
        std::ifstream in(manifest, std::ios::binary);
        if (!in) {
            throw NotFoundError("cannot open registry manifest '" + manifest.string() +
                                "'");
        }
        nlohmann::json obj;
        try {
            in >> obj;
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(manifest.string() + ": " + e.what());
        }
        ModelRegistry registry;
        registry.root = root;
        for (const auto& [lang, entry] : obj.at("models").items()) {
            if (!is_supported_language(lang)) {
                throw ValidationError("registry contains unsupported language '" + lang +
                                      "' (expected one of: " + supported_languages_csv() +
                                      ")");
            }
            RegistryEntry e;
            e.checkpoint = entry.at("checkpoint").get<std::string>();
            e.vocabulary = entry.at("vocabulary").get<std::string>();
            e.thesaurus = entry.at("thesaurus").get<std::string>();
            e.lowercase = entry.value("lowercase", false);
            if (entry.contains("checksums")) {
                e.checksums =
                    entry.at("checksums").get<std::map<std::string, std::string>>();
            }
            registry.entries[lang] = std::move(e);
        }
        return registry;
    }

    void save() const {
        nlohmann::ordered_json models;
        for (const auto& [lang, entry] : entries) {
            nlohmann::ordered_json e;
            e["checkpoint"] = entry.checkpoint;
            e["vocabulary"] = entry.vocabulary;
            e["thesaurus"] = entry.thesaurus;
            e["lowercase"] = entry.lowercase;
            e["checksums"] = entry.checksums;
            models[lang] = std::move(e);
        }
        nlohmann::ordered_json obj;
        obj["version"] = 1;
        obj["models"] = std::move(models);
        std::ofstream out(root / "registry.json", std::ios::binary);
        if (!out) {
            throw Error("cannot write registry manifest under '" + root.string() + "'");
        }
        out << obj.dump(2) << '\n';
    }

    /// Registers files (already placed under root) for a language, computing
    /// fresh checksums.
    void add(const std::string& language, const std::string& checkpoint,
             const std::string& vocabulary, const std::string& thesaurus,
             bool lowercase = false) {
        if (!is_supported_language(language)) {
            throw ValidationError("unsupported language '" + language +
                                  "' (expected one of: " + supported_languages_csv() +
                                  ")");
        }
        RegistryEntry entry;
        entry.checkpoint = checkpoint;
        entry.vocabulary = vocabulary;
        entry.thesaurus = thesaurus;
        entry.lowercase = lowercase;
        entry.checksums["checkpoint"] = file_checksum(root / checkpoint);
        entry.checksums["vocabulary"] = file_checksum(root / vocabulary);
        entry.checksums["thesaurus"] = file_checksum(root / thesaurus);
        entries[language] = std::move(entry);
    }
};

/// Everything needed to classify raw text in one language. Immutable after
/// load; safe to share across threads.
struct ModelBundle {
    std::string language;
    ClassifierHead head;
    std::unique_ptr<ToyMeanEncoder> encoder;
    Thesaurus thesaurus;

    const SubwordVocabulary& vocabulary() const { return encoder->vocabulary(); }
};

/// Loads and checksum-verifies the model bundle for one language.
inline ModelBundle registry_load(const std::filesystem::path& root,
                                 const std::string& language) {
    if (!is_supported_language(language)) {
        throw ValidationError("unsupported language '" + language +
                              "' (expected one of: " + supported_languages_csv() + ")");
    }
    const ModelRegistry registry = ModelRegistry::load(root);
    auto it = registry.entries.find(language);
    if (it == registry.entries.end()) {
        throw NotFoundError("no model registered for language '" + language + "'");
    }
    const RegistryEntry& entry = it->second;
    const auto verify = [&](const std::string& key, const std::string& rel) {
        auto ck = entry.checksums.find(key);
        if (ck == entry.checksums.end()) return;  // unchecked entry
        const std::string actual = file_checksum(root / rel);
        if (actual != ck->second) {
            throw ValidationError("checksum mismatch for '" + rel + "' (expected " +
                                  ck->second + ", got " + actual + ")");
        }
    };
    verify("checkpoint", entry.checkpoint);
    verify("vocabulary", entry.vocabulary);
    verify("thesaurus", entry.thesaurus);

    Checkpoint ckpt = load_checkpoint(root / entry.checkpoint);
    if (!ckpt.encoder_embeddings.has_value()) {
        throw ValidationError("checkpoint for '" + language +
                              "' has no encoder table and cannot serve raw text");
    }
    SubwordVocabulary vocab = load_vocabulary(root / entry.vocabulary, entry.lowercase);
    if (vocab.ordered.size() != ckpt.encoder_embeddings->rows) {
        throw ValidationError("vocabulary size does not match encoder table for '" +
                              language + "'");
    }
    ModelBundle bundle;
    bundle.language = language;
    bundle.head = std::move(ckpt.head);
    bundle.encoder = std::make_unique<ToyMeanEncoder>(
        std::move(vocab), std::move(*ckpt.encoder_embeddings));
    bundle.thesaurus = load_thesaurus(root / entry.thesaurus);
    return bundle;
}

}  // namespace evoc
