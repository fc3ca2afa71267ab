// evoc: multilingual EuroVoc document classification toolkit.
//
// Subcommands cover the full pipeline: corpus ingestion and statistics,
// stratified splitting, topic-signature and classifier-head training,
// ranked evaluation, one-off classification, an HTTP service and a latency
// benchmark. Every subcommand also reads a TOML-style config file through
// --config, with command-line flags taking precedence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evoc/evoc.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw evoc::NotFoundError("cannot open file '" + path.string() + "'");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw evoc::Error("cannot write file '" + path.string() + "'");
    }
    out << content;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string piece =
            text.substr(start, comma == std::string::npos ? comma : comma - start);
        try {
            out.push_back(std::stoull(piece));
        } catch (const std::exception&) {
            throw evoc::ValidationError("cannot parse integer '" + piece + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string> split_csv_field(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        out.push_back(
            text.substr(start, comma == std::string::npos ? comma : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

evoc::Corpus corpus_subset(const evoc::Corpus& corpus,
                           const std::vector<std::string>& doc_ids) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
        index[corpus.documents[i].doc_id] = i;
    }
    evoc::Corpus out;
    out.language = corpus.language;
    for (const std::string& doc_id : doc_ids) {
        auto it = index.find(doc_id);
        if (it == index.end()) {
            throw evoc::ValidationError("split references unknown doc_id '" + doc_id +
                                        "'");
        }
        out.documents.push_back(corpus.documents[it->second]);
    }
    return out;
}

std::vector<evoc::DescriptorId> corpus_label_codebook(const evoc::Corpus& corpus) {
    std::set<evoc::DescriptorId> codes;
    for (const evoc::Document& doc : corpus.documents) {
        codes.insert(doc.labels.begin(), doc.labels.end());
    }
    return {codes.begin(), codes.end()};
}

evoc::LabeledFeatures features_for(const evoc::Corpus& corpus,
                                   const evoc::Encoder& encoder,
                                   const std::vector<evoc::DescriptorId>& labels) {
    std::map<std::string, std::size_t> label_index;
    for (std::size_t i = 0; i < labels.size(); ++i) label_index[labels[i]] = i;
    evoc::LabeledFeatures out;
    out.labels = labels;
    for (const evoc::Document& doc : corpus.documents) {
        out.features.push_back(encoder.encode(doc));
        std::vector<std::uint8_t> y(labels.size(), 0);
        for (const std::string& label : doc.labels) {
            auto it = label_index.find(label);
            if (it != label_index.end()) y[it->second] = 1;
        }
        out.targets.push_back(std::move(y));
    }
    return out;
}

std::string log_to_jsonl(const std::vector<evoc::EpochLog>& log) {
    std::string out;
    for (const evoc::EpochLog& entry : log) {
        nlohmann::ordered_json obj;
        obj["epoch"] = entry.epoch;
        obj["train_loss"] = entry.train_loss;
        obj["val_loss"] = entry.val_loss;
        obj["lr"] = entry.lr;
        out += obj.dump() + "\n";
    }
    return out;
}

struct CommonModelArgs {
    std::string registry;
    std::string language;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evoc: multilingual EuroVoc document classification toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML-style config file; flags override it");

    // ---- ingest ----
    struct {
        std::string input, language, output;
        bool allow_unlabeled = false;
    } ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "Validate and canonicalize a JSONL corpus")->configurable();
    cmd_ingest->add_option("--input", ingest.input)->required();
    cmd_ingest->add_option("--language", ingest.language)->required();
    cmd_ingest->add_option("--output", ingest.output);
    cmd_ingest->add_flag("--allow-unlabeled", ingest.allow_unlabeled,
                         "Accept documents without labels (inference corpora)");

    // ---- stats ----
    struct {
        std::string corpus, language, thesaurus, level = "ID";
        std::string json_out, csv_out;
        std::size_t group_size = 0;
    } stats;
    auto* cmd_stats = app.add_subcommand("stats", "Descriptor statistics and frequency histogram")->configurable();
    cmd_stats->add_option("--corpus", stats.corpus)->required();
    cmd_stats->add_option("--language", stats.language)->required();
    cmd_stats->add_option("--thesaurus", stats.thesaurus)->required();
    cmd_stats->add_option("--level", stats.level, "ID, MT or DO");
    cmd_stats->add_option("--group-size", stats.group_size,
                          "Histogram group size (0 = level default)");
    cmd_stats->add_option("--json", stats.json_out, "Write stats + histogram JSON here");
    cmd_stats->add_option("--csv", stats.csv_out, "Write histogram CSV here");

    // ---- split ----
    struct {
        std::string corpus, language, ratios = "0.8,0.1,0.1", seeds = "1,2,3,4,5";
        std::string output_dir = ".";
    } split;
    auto* cmd_split = app.add_subcommand("split", "Iterative-stratification splits")->configurable();
    cmd_split->add_option("--corpus", split.corpus)->required();
    cmd_split->add_option("--language", split.language)->required();
    cmd_split->add_option("--ratios", split.ratios, "e.g. 0.8,0.1,0.1 or 0.9,0.1");
    cmd_split->add_option("--seeds", split.seeds, "comma-separated seed list");
    cmd_split->add_option("--output-dir", split.output_dir);

    // ---- train-jex ----
    struct {
        std::string corpus, language, output, split_file;
        std::size_t subset = 0;
        std::size_t min_df = 2;
    } tjex;
    auto* cmd_tjex = app.add_subcommand("train-jex", "Build topic signatures")->configurable();
    cmd_tjex->add_option("--corpus", tjex.corpus)->required();
    cmd_tjex->add_option("--language", tjex.language)->required();
    cmd_tjex->add_option("--output", tjex.output)->required();
    cmd_tjex->add_option("--split", tjex.split_file, "Restrict training to one split subset");
    cmd_tjex->add_option("--subset", tjex.subset, "Subset index within --split (default 0)");
    cmd_tjex->add_option("--min-df", tjex.min_df, "Minimum document frequency for signature terms");

    // ---- rank ----
    struct {
        std::string model, text, file;
        std::size_t top_k = 6;
    } rank;
    auto* cmd_rank = app.add_subcommand("rank", "Rank descriptors with a topic-signature model")->configurable();
    cmd_rank->add_option("--model", rank.model)->required();
    cmd_rank->add_option("--text", rank.text);
    cmd_rank->add_option("--file", rank.file, "Read the document text from a file");
    cmd_rank->add_option("--top-k", rank.top_k);

    // ---- train-head ----
    struct {
        std::string corpus, language, split_file, output, log_file;
        std::string embeddings;  // precomputed features
        std::string encoder = "precomputed";
        std::string vocab;
        bool lowercase = false;
        std::size_t dim = 32;
        std::string registry, thesaurus;
        evoc::TrainConfig config;
    } thead;
    auto* cmd_thead = app.add_subcommand("train-head", "Train the sigmoid classification head")->configurable();
    cmd_thead->add_option("--corpus", thead.corpus)->required();
    cmd_thead->add_option("--language", thead.language)->required();
    cmd_thead->add_option("--split", thead.split_file, "Split plan (subset 0 = train, 1 = validation)")
        ->required();
    cmd_thead->add_option("--output", thead.output)->required();
    cmd_thead->add_option("--log", thead.log_file, "Write the JSONL training log here");
    cmd_thead->add_option("--encoder", thead.encoder, "precomputed | toy");
    cmd_thead->add_option("--embeddings", thead.embeddings,
                          "JSONL doc_id -> embedding file (precomputed encoder)");
    cmd_thead->add_option("--vocab", thead.vocab, "Vocabulary file (toy encoder)");
    cmd_thead->add_flag("--lowercase", thead.lowercase, "Lowercase before tokenizing");
    cmd_thead->add_option("--dim", thead.dim, "Toy encoder embedding size");
    cmd_thead->add_option("--registry", thead.registry,
                          "Install the trained bundle under this registry root");
    cmd_thead->add_option("--thesaurus", thead.thesaurus,
                          "Hierarchy file (required with --registry)");
    cmd_thead->add_option("--epochs", thead.config.epochs);
    cmd_thead->add_option("--batch-size", thead.config.batch_size);
    cmd_thead->add_option("--peak-lr", thead.config.peak_lr);
    cmd_thead->add_option("--clip-norm", thead.config.clip_norm);
    cmd_thead->add_option("--weight-decay", thead.config.weight_decay);
    cmd_thead->add_option("--dropout", thead.config.dropout_rate);
    cmd_thead->add_option("--seed", thead.config.seed);

    // ---- eval ----
    struct {
        std::string corpus, language, thesaurus, splits;
        std::string model, vocab, embeddings, jex_model;
        bool lowercase = false;
        std::string json_out, csv_out;
        evoc::EvalOptions options;
        bool per_document = false;
    } eval;
    auto* cmd_eval = app.add_subcommand("eval", "Ranked-retrieval evaluation over test splits")->configurable();
    cmd_eval->add_option("--corpus", eval.corpus)->required();
    cmd_eval->add_option("--language", eval.language)->required();
    cmd_eval->add_option("--thesaurus", eval.thesaurus)->required();
    cmd_eval->add_option("--splits", eval.splits, "Comma-separated split plan files")->required();
    cmd_eval->add_option("--model", eval.model, "Head checkpoint (with encoder table)");
    cmd_eval->add_option("--vocab", eval.vocab, "Vocabulary for the checkpoint encoder");
    cmd_eval->add_option("--embeddings", eval.embeddings,
                         "Precomputed features to use instead of the encoder table");
    cmd_eval->add_flag("--lowercase", eval.lowercase);
    cmd_eval->add_option("--jex", eval.jex_model, "Evaluate a topic-signature model instead");
    cmd_eval->add_option("--id-k", eval.options.id_k);
    cmd_eval->add_option("--mt-k", eval.options.mt_k);
    cmd_eval->add_option("--do-k", eval.options.do_k);
    cmd_eval->add_option("--micro-top-k", eval.options.micro_top_k);
    cmd_eval->add_flag("--f1-of-means", eval.options.f1_of_means,
                       "Report F1 of mean P and mean R instead of mean per-document F1");
    cmd_eval->add_flag("--per-document", eval.per_document, "Include per-document rows in JSON");
    cmd_eval->add_option("--json", eval.json_out);
    cmd_eval->add_option("--csv", eval.csv_out);

    // ---- classify ----
    struct {
        CommonModelArgs model;
        std::string text, file, level = "ID";
        std::size_t num_labels = 6;
    } classify;
    auto* cmd_classify = app.add_subcommand("classify", "Classify one document")->configurable();
    cmd_classify->add_option("--registry", classify.model.registry)->required();
    cmd_classify->add_option("--language", classify.model.language)->required();
    cmd_classify->add_option("--text", classify.text);
    cmd_classify->add_option("--file", classify.file);
    cmd_classify->add_option("--level", classify.level, "ID, MT or DO");
    cmd_classify->add_option("--num-labels", classify.num_labels);

    // ---- serve ----
    struct {
        std::string registry, languages, host = "127.0.0.1";
        int port = 8964;
    } serve;
    auto* cmd_serve = app.add_subcommand("serve", "HTTP classification service")->configurable();
    cmd_serve->add_option("--registry", serve.registry)->required();
    cmd_serve->add_option("--languages", serve.languages,
                          "Languages to load (default: all registered)");
    cmd_serve->add_option("--host", serve.host);
    cmd_serve->add_option("--port", serve.port);

    // ---- bench ----
    struct {
        CommonModelArgs model;
        std::string lengths = "64,128,256,384,512";
        std::size_t trials = 100;
        std::string output;
    } bench;
    auto* cmd_bench = app.add_subcommand("bench", "Classify-latency benchmark")->configurable();
    cmd_bench->add_option("--registry", bench.model.registry)->required();
    cmd_bench->add_option("--language", bench.model.language)->required();
    cmd_bench->add_option("--lengths", bench.lengths, "Encoded sequence lengths");
    cmd_bench->add_option("--trials", bench.trials);
    cmd_bench->add_option("--output", bench.output, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // 0 for --help/--version, 1 for any usage problem.
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*cmd_ingest) {
            const evoc::Corpus corpus =
                evoc::load_corpus(ingest.input, ingest.language, !ingest.allow_unlabeled);
            if (!ingest.output.empty()) {
                evoc::save_corpus(corpus, ingest.output);
            }
            nlohmann::ordered_json summary;
            summary["language"] = corpus.language;
            summary["documents"] = corpus.documents.size();
            summary["labels"] = corpus_label_codebook(corpus).size();
            std::cout << summary.dump(2) << "\n";
        } else if (*cmd_stats) {
            const evoc::Corpus corpus = evoc::load_corpus(stats.corpus, stats.language);
            const evoc::Thesaurus thesaurus = evoc::load_thesaurus(stats.thesaurus);
            const evoc::HierarchyLevel level = evoc::parse_level(stats.level);
            const evoc::DescriptorStats ds = evoc::descriptor_stats(corpus, thesaurus, level);
            const evoc::FrequencyHistogram hist =
                evoc::frequency_histogram(corpus, thesaurus, level, stats.group_size);
            nlohmann::ordered_json obj;
            obj["stats"] = evoc::stats_to_json(ds);
            obj["histogram"] = evoc::histogram_to_json(hist);
            const std::string dumped = obj.dump(2);
            if (!stats.json_out.empty()) write_text_file(stats.json_out, dumped + "\n");
            if (!stats.csv_out.empty()) write_text_file(stats.csv_out, evoc::histogram_to_csv(hist));
            std::cout << dumped << "\n";
        } else if (*cmd_split) {
            const evoc::Corpus corpus = evoc::load_corpus(split.corpus, split.language);
            const evoc::SplitRatios ratios = evoc::SplitRatios::parse(split.ratios);
            const std::vector<std::uint64_t> seeds = parse_u64_list(split.seeds);
            const std::vector<evoc::SplitPlan> plans =
                evoc::make_multi_splits(corpus, ratios, seeds);
            fs::create_directories(split.output_dir);
            for (const evoc::SplitPlan& plan : plans) {
                const fs::path out =
                    fs::path(split.output_dir) / ("split_" + std::to_string(plan.seed) + ".json");
                evoc::save_split(plan, out);
                std::cout << out.string() << "\n";
            }
        } else if (*cmd_tjex) {
            evoc::Corpus corpus = evoc::load_corpus(tjex.corpus, tjex.language);
            if (!tjex.split_file.empty()) {
                const evoc::SplitPlan plan = evoc::load_split(tjex.split_file);
                if (tjex.subset >= plan.subsets.size()) {
                    throw evoc::ValidationError("subset index out of range");
                }
                corpus = corpus_subset(corpus, plan.subsets[tjex.subset]);
            }
            evoc::JexConfig config;
            config.min_doc_frequency = tjex.min_df;
            const evoc::SignatureModel model = evoc::build_signatures(corpus, config);
            evoc::save_signature_model(model, tjex.output);
            std::cout << "signatures: " << model.signatures.size() << "\n";
        } else if (*cmd_rank) {
            const evoc::SignatureModel model = evoc::load_signature_model(rank.model);
            std::string text = rank.text;
            if (text.empty() && !rank.file.empty()) text = read_text_file(rank.file);
            if (text.empty()) {
                throw evoc::ValidationError("provide --text or --file");
            }
            const auto ranked = evoc::rank_descriptors(model, text, rank.top_k);
            std::cout << evoc::scores_to_json(ranked).dump(2) << "\n";
        } else if (*cmd_thead) {
            const evoc::Corpus corpus = evoc::load_corpus(thead.corpus, thead.language);
            const evoc::SplitPlan plan = evoc::load_split(thead.split_file);
            if (plan.subsets.size() < 2) {
                throw evoc::ValidationError("train-head needs a split with >= 2 subsets");
            }
            const evoc::Corpus train_docs = corpus_subset(corpus, plan.subsets[0]);
            const evoc::Corpus val_docs = corpus_subset(corpus, plan.subsets[1]);
            const std::vector<evoc::DescriptorId> labels = corpus_label_codebook(corpus);

            if (thead.encoder == "toy") {
                if (thead.vocab.empty()) {
                    throw evoc::ValidationError("--encoder toy requires --vocab");
                }
                const evoc::SubwordVocabulary vocab =
                    evoc::load_vocabulary(thead.vocab, thead.lowercase);
                const evoc::EndToEndResult result = evoc::train_end_to_end(
                    train_docs, val_docs, vocab, thead.dim, labels, thead.config);
                evoc::save_checkpoint(thead.output, result.head, &result.encoder_embeddings);
                if (!thead.log_file.empty()) {
                    write_text_file(thead.log_file, log_to_jsonl(result.log));
                }
                std::cout << "best epoch " << result.best_epoch << ", val loss "
                          << result.best_val_loss << "\n";
                if (!thead.registry.empty()) {
                    if (thead.thesaurus.empty()) {
                        throw evoc::ValidationError("--registry requires --thesaurus");
                    }
                    const fs::path root(thead.registry);
                    fs::create_directories(root / thead.language);
                    const std::string prefix = thead.language + "/";
                    fs::copy_file(thead.output, root / (prefix + "model.bin"),
                                  fs::copy_options::overwrite_existing);
                    fs::copy_file(thead.vocab, root / (prefix + "vocab.txt"),
                                  fs::copy_options::overwrite_existing);
                    fs::copy_file(thead.thesaurus, root / (prefix + "thesaurus.tsv"),
                                  fs::copy_options::overwrite_existing);
                    evoc::ModelRegistry registry;
                    registry.root = root;
                    if (fs::exists(root / "registry.json")) {
                        registry = evoc::ModelRegistry::load(root);
                    }
                    registry.add(thead.language, prefix + "model.bin", prefix + "vocab.txt",
                                 prefix + "thesaurus.tsv", thead.lowercase);
                    registry.save();
                }
            } else if (thead.encoder == "precomputed") {
                if (thead.embeddings.empty()) {
                    throw evoc::ValidationError("--encoder precomputed requires --embeddings");
                }
                const evoc::PrecomputedEncoder encoder =
                    evoc::PrecomputedEncoder::load(thead.embeddings);
                const evoc::LabeledFeatures train_features =
                    features_for(train_docs, encoder, labels);
                const evoc::LabeledFeatures val_features =
                    features_for(val_docs, encoder, labels);
                const evoc::TrainResult result =
                    evoc::train_head(train_features, val_features, thead.config);
                evoc::save_checkpoint(thead.output, result.head);
                if (!thead.log_file.empty()) {
                    write_text_file(thead.log_file, log_to_jsonl(result.log));
                }
                std::cout << "best epoch " << result.best_epoch << ", val loss "
                          << result.best_val_loss << "\n";
            } else {
                throw evoc::ValidationError("unknown encoder '" + thead.encoder + "'");
            }
        } else if (*cmd_eval) {
            const evoc::Corpus corpus = evoc::load_corpus(eval.corpus, eval.language);
            const evoc::Thesaurus thesaurus = evoc::load_thesaurus(eval.thesaurus);
            std::vector<evoc::SplitPlan> plans;
            for (const std::string& file : split_csv_field(eval.splits)) {
                plans.push_back(evoc::load_split(file));
            }
            evoc::Ranker ranker;
            std::vector<evoc::DescriptorId> ranker_labels;
            std::shared_ptr<evoc::SignatureModel> jex_model;
            std::shared_ptr<evoc::ClassifierHead> head;
            std::shared_ptr<evoc::Encoder> encoder;
            if (!eval.jex_model.empty()) {
                jex_model = std::make_shared<evoc::SignatureModel>(
                    evoc::load_signature_model(eval.jex_model));
                for (const auto& [label, profile] : jex_model->signatures) {
                    ranker_labels.push_back(label);
                }
                ranker = [jex_model](const evoc::Document& doc) {
                    return evoc::rank_descriptors(*jex_model, doc.text,
                                                  jex_model->signatures.size());
                };
            } else if (!eval.model.empty()) {
                evoc::Checkpoint ckpt = evoc::load_checkpoint(eval.model);
                head = std::make_shared<evoc::ClassifierHead>(std::move(ckpt.head));
                ranker_labels = head->labels;
                if (!eval.embeddings.empty()) {
                    encoder = std::make_shared<evoc::PrecomputedEncoder>(
                        evoc::PrecomputedEncoder::load(eval.embeddings));
                } else {
                    if (eval.vocab.empty() || !ckpt.encoder_embeddings.has_value()) {
                        throw evoc::ValidationError(
                            "checkpoint evaluation needs --embeddings, or --vocab plus "
                            "an encoder table in the checkpoint");
                    }
                    encoder = std::make_shared<evoc::ToyMeanEncoder>(
                        evoc::load_vocabulary(eval.vocab, eval.lowercase),
                        std::move(*ckpt.encoder_embeddings));
                }
                auto h = head;
                auto e = encoder;
                ranker = [h, e](const evoc::Document& doc) {
                    return evoc::predict_topk(*h, e->encode(doc), h->n_labels());
                };
            } else {
                throw evoc::ValidationError("provide --model or --jex");
            }
            const evoc::MetricReport report = evoc::evaluate_corpus(
                ranker, ranker_labels, corpus, thesaurus, plans, eval.options);
            const std::string dumped =
                evoc::report_to_json(report, eval.per_document).dump(2);
            if (!eval.json_out.empty()) write_text_file(eval.json_out, dumped + "\n");
            if (!eval.csv_out.empty()) {
                write_text_file(eval.csv_out, evoc::report_csv_header() +
                                                  evoc::report_csv_row(eval.language, report));
            }
            std::cout << dumped << "\n";
        } else if (*cmd_classify) {
            const evoc::ModelBundle bundle =
                evoc::registry_load(classify.model.registry, classify.model.language);
            evoc::ClassifyRequest request;
            request.text = classify.text;
            if (request.text.empty() && !classify.file.empty()) {
                request.text = read_text_file(classify.file);
            }
            request.level = evoc::parse_level(classify.level);
            request.num_labels = classify.num_labels;
            const evoc::ScoredLabels scores = evoc::classify_document(bundle, request);
            std::cout << evoc::scores_to_json(scores).dump(2) << "\n";
        } else if (*cmd_serve) {
            evoc::ClassificationService service;
            std::vector<std::string> languages;
            if (!serve.languages.empty()) {
                languages = split_csv_field(serve.languages);
            } else {
                const evoc::ModelRegistry registry = evoc::ModelRegistry::load(serve.registry);
                for (const auto& [lang, entry] : registry.entries) languages.push_back(lang);
            }
            for (const std::string& lang : languages) {
                service.add_bundle(std::make_shared<const evoc::ModelBundle>(
                    evoc::registry_load(serve.registry, lang)));
                std::cout << "loaded model: " << lang << "\n";
            }
            httplib::Server server;
            service.configure(server);
            std::cout << "serving on http://" << serve.host << ":" << serve.port << "\n";
            if (!server.listen(serve.host, serve.port)) {
                throw evoc::Error("failed to bind " + serve.host + ":" +
                                  std::to_string(serve.port));
            }
        } else if (*cmd_bench) {
            const evoc::ModelBundle bundle =
                evoc::registry_load(bench.model.registry, bench.model.language);
            std::vector<std::size_t> lengths;
            for (std::uint64_t v : parse_u64_list(bench.lengths)) {
                lengths.push_back(static_cast<std::size_t>(v));
            }
            const auto rows = evoc::latency_benchmark(bundle, lengths, bench.trials);
            const std::string csv = evoc::benchmark_csv(rows);
            if (!bench.output.empty()) {
                write_text_file(bench.output, csv);
            }
            std::cout << csv;
        }
    } catch (const evoc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
