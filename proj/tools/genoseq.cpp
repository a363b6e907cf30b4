// genoseq: grid runner, reports, registry and tokenizer utilities.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "genoseq/bpe.hpp"
#include "genoseq/corpus.hpp"
#include "genoseq/experiment.hpp"
#include "genoseq/registry.hpp"
#include "genoseq/synthetic.hpp"
#include "genoseq/tokenizer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace genoseq;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCellFailures = 3;

int cmd_run(const fs::path& config_path, std::size_t workers, bool quiet) {
    GridConfig config = load_grid_config(config_path);
    if (workers > 0) {
        config.workers = workers;
    }
    GridLog log;
    if (!quiet) {
        log = [](const std::string& line) { std::cerr << line << std::endl; };
    }
    const GridOutcome outcome = run_grid(config, log);
    std::cout << "cells: " << outcome.records.size() << ", ran " << outcome.executed
              << ", skipped " << outcome.skipped << ", failed " << outcome.failed << '\n'
              << "records in " << config.output_dir.string() << '\n';
    return outcome.failed > 0 ? kExitCellFailures : kExitOk;
}

int cmd_report(const fs::path& dir, const std::string& layout_name, fs::path out) {
    const auto layout = parse_report_layout(layout_name);
    if (!layout) {
        std::cerr << "unknown layout '" << layout_name << "' (by-scheme or robustness)\n";
        return kExitUsage;
    }
    if (out.empty()) {
        out = dir / "reports";
    }
    const auto files = build_report(load_records(dir), *layout);
    write_report(files, out);
    for (const auto& f : files) {
        std::cout << (out / f.name).string() << '\n';
    }
    return kExitOk;
}

int cmd_registry_validate(const std::string& task, const fs::path& data) {
    const auto stats = find_task(task);
    if (!stats) {
        throw CorpusError(CorpusError::Code::UnknownTask, "unknown task " + task);
    }
    const TaskDataset dataset = load_task_dir(data, task, stats->num_classes);
    const auto mismatches = validate_against_registry(dataset);
    for (const auto& m : mismatches) {
        std::cout << m.field << ": expected " << m.expected << ", found " << m.actual << '\n';
    }
    if (mismatches.empty()) {
        std::cout << task << ": matches the registry\n";
        return kExitOk;
    }
    return kExitData;
}

int cmd_tokenizer_train(const std::vector<fs::path>& inputs, std::size_t merges,
                        const fs::path& out) {
    std::vector<DnaSequence> corpus;
    for (const auto& path : inputs) {
        // Labels are irrelevant here; accept any non-negative label.
        for (auto& row : load_task_csv(path, std::numeric_limits<int>::max())) {
            corpus.push_back(std::move(row.sequence));
        }
    }
    const Vocabulary vocab = bpe_train(corpus, merges);
    save_vocabulary(vocab, out);
    std::cout << "wrote " << vocab.size() << " tokens (" << vocab.merges().size()
              << " merges) to " << out.string() << '\n';
    return kExitOk;
}

int cmd_tokenizer_encode(const std::string& descriptor, const std::string& sequence,
                         std::size_t max_len, bool ids) {
    const Tokenizer tokenizer(parse_tokenizer_spec(descriptor));
    const DnaSequence seq(sequence);
    if (max_len > 0) {
        const TokenSequence framed = tokenizer.encode(seq, max_len);
        for (std::size_t i = 0; i < framed.ids.size(); ++i) {
            const TokenId id = framed.ids[i];
            std::cout << (i ? " " : "");
            if (ids) {
                std::cout << id;
            } else {
                std::cout << tokenizer.vocabulary().token(id);
            }
        }
        std::cout << '\n';
        return kExitOk;
    }
    if (ids) {
        const auto values = tokenizer.token_ids(seq);
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::cout << (i ? " " : "") << values[i];
        }
    } else {
        const auto tokens = tokenizer.tokenize(seq);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            std::cout << (i ? " " : "") << tokens[i];
        }
    }
    std::cout << '\n';
    return kExitOk;
}

int cmd_synth_motif(const fs::path& out, std::uint64_t seed, const MotifTaskOptions& options) {
    const TaskDataset task = make_motif_task(options, seed);
    fs::create_directories(out);
    write_task_csv(out / "train.csv", task.train);
    write_task_csv(out / "dev.csv", task.dev);
    write_task_csv(out / "test.csv", task.test);
    std::cout << "wrote " << task.train.size() << "/" << task.dev.size() << "/"
              << task.test.size() << " sequences to " << out.string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Genomic sequence classification experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run every cell of a grid config");
    fs::path config_path;
    std::size_t workers = 0;
    bool quiet = false;
    run->add_option("--config", config_path, "Grid config JSON")->required();
    run->add_option("--workers", workers, "Override the config's worker count");
    run->add_flag("--quiet", quiet, "No per-cell progress on stderr");

    auto* report = app.add_subcommand("report", "Write CSV tables from cell records");
    fs::path record_dir;
    std::string layout = "by-scheme";
    fs::path report_out;
    report->add_option("--dir", record_dir, "Directory holding cell records")->required();
    report->add_option("--layout", layout, "by-scheme or robustness");
    report->add_option("--out", report_out, "Output directory (default <dir>/reports)");

    auto* registry = app.add_subcommand("registry", "Benchmark task statistics");
    registry->require_subcommand(1);
    registry->add_subcommand("list", "Print the task table as CSV");
    auto* validate = registry->add_subcommand("validate", "Check a dataset against the table");
    std::string task_name;
    fs::path task_dir;
    validate->add_option("--task", task_name, "Task id, e.g. Human-TFP")->required();
    validate->add_option("--data", task_dir, "Directory with train/dev/test.csv")->required();

    auto* tokenizer = app.add_subcommand("tokenizer", "Train or apply tokenizers");
    tokenizer->require_subcommand(1);
    auto* tok_train = tokenizer->add_subcommand("train", "Learn a BPE vocabulary");
    std::vector<fs::path> inputs;
    std::size_t merges = kDefaultBpeMerges;
    fs::path vocab_out;
    tok_train->add_option("--input", inputs, "CSV files with a sequence column")->required();
    tok_train->add_option("--merges", merges, "Number of merges");
    tok_train->add_option("--out", vocab_out, "Vocabulary JSON to write")->required();
    auto* tok_encode = tokenizer->add_subcommand("encode", "Tokenize one sequence");
    std::string descriptor = "3mer";
    std::string sequence;
    std::size_t max_len = 0;
    bool as_ids = false;
    fs::path encode_vocab;
    auto* tokenizer_opt =
        tok_encode->add_option("--tokenizer", descriptor, "<k>mer or bpe:<vocab.json>");
    tok_encode->add_option("--vocab", encode_vocab, "BPE vocabulary JSON (same as bpe:<path>)")
        ->excludes(tokenizer_opt);
    tok_encode->add_option("--seq", sequence, "Nucleotide sequence")->required();
    tok_encode->add_option("--max-len", max_len, "Frame with CLS/SEP/PAD to this length");
    tok_encode->add_flag("--ids", as_ids, "Print ids instead of token strings");

    auto* synth = app.add_subcommand("synth", "Generate synthetic datasets");
    synth->require_subcommand(1);
    auto* motif = synth->add_subcommand("motif", "Planted-motif binary task");
    fs::path motif_out;
    std::uint64_t motif_seed = 0;
    MotifTaskOptions motif_options;
    motif->add_option("--out", motif_out, "Output directory")->required();
    motif->add_option("--seed", motif_seed, "Random seed");
    motif->add_option("--motif", motif_options.motif, "Planted motif");
    motif->add_option("--length", motif_options.length, "Sequence length");
    motif->add_option("--train", motif_options.train, "Training rows");
    motif->add_option("--dev", motif_options.dev, "Dev rows");
    motif->add_option("--test", motif_options.test, "Test rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) {
            return cmd_run(config_path, workers, quiet);
        }
        if (*report) {
            return cmd_report(record_dir, layout, report_out);
        }
        if (*registry) {
            if (*validate) {
                return cmd_registry_validate(task_name, task_dir);
            }
            std::cout << registry_csv();
            return kExitOk;
        }
        if (*tokenizer) {
            if (*tok_train) {
                return cmd_tokenizer_train(inputs, merges, vocab_out);
            }
            if (!encode_vocab.empty()) {
                descriptor = "bpe:" + encode_vocab.string();
            }
            return cmd_tokenizer_encode(descriptor, sequence, max_len, as_ids);
        }
        if (*synth) {
            return cmd_synth_motif(motif_out, motif_seed, motif_options);
        }
    } catch (const ExperimentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ExperimentError::Code::BadConfig ? kExitUsage : kExitData;
    } catch (const CorpusError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const TokenizerError& e) {
        std::cerr << "tokenizer error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
