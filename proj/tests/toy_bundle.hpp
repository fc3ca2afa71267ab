#pragma once

// Builds a small but fully functional on-disk model registry for the
// registry/service tests: three descriptors, a handful of vocabulary words
// and a seeded head + encoder table.

#include <filesystem>
#include <string>

#include "evoc/registry.hpp"
#include "evoc/rng.hpp"
#include "evoc/tokenize.hpp"

#include "fixtures.hpp"

namespace testutil {

struct ToyRegistry {
    std::filesystem::path root;
    std::string language = "en";
};

inline ToyRegistry make_toy_registry(const std::filesystem::path& root,
                                     std::uint64_t seed = 2023,
                                     const std::string& language = "en") {
    std::filesystem::create_directories(root / language);
    write_file(root / language / "vocab.txt",
               "[UNK]\n[CLS]\n[SEP]\nalpha\nbeta\ngamma\ndelta\nepsilon\n");
    write_file(root / language / "thesaurus.tsv", thesaurus_tsv(tiny_thesaurus()));

    const evoc::SubwordVocabulary vocab =
        evoc::load_vocabulary(root / language / "vocab.txt");
    evoc::SplitMix64 rng(seed);
    evoc::ClassifierHead head =
        evoc::make_head(4, {"000001", "000002", "000003"}, rng);
    for (double& b : head.bias) b = rng.uniform(-0.2, 0.2);
    evoc::Matrix table(vocab.ordered.size(), 4);
    for (double& w : table.data) w = rng.uniform(-1.0, 1.0);
    evoc::save_checkpoint(root / language / "model.bin", head, &table);

    evoc::ModelRegistry registry;
    registry.root = root;
    registry.add(language, language + "/model.bin", language + "/vocab.txt",
                 language + "/thesaurus.tsv");
    registry.save();
    return ToyRegistry{root, language};
}

}  // namespace testutil
