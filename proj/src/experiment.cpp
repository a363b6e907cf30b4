#include "genoseq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "genoseq/perturb.hpp"
#include "genoseq/registry.hpp"
#include "genoseq/trainer.hpp"

namespace genoseq {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad_config(const std::string& message) {
    throw ExperimentError(ExperimentError::Code::BadConfig, message);
}

void reject_unknown_keys(const json& object, const std::set<std::string>& allowed,
                         const std::string& where) {
    if (!object.is_object()) {
        bad_config(where + " must be an object");
    }
    for (const auto& item : object.items()) {
        if (!allowed.contains(item.key())) {
            bad_config("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <typename T>
std::vector<T> non_empty_list(const json& root, const std::string& key) {
    if (!root.contains(key)) {
        bad_config("missing '" + key + "'");
    }
    const json& value = root.at(key);
    if (!value.is_array() || value.empty()) {
        bad_config("'" + key + "' must be a non-empty list");
    }
    return value.get<std::vector<T>>();
}

fs::path resolve(const fs::path& base, const fs::path& p) {
    return p.is_absolute() || base.empty() ? p : base / p;
}

TrainingOverrides parse_training(const json& j) {
    reject_unknown_keys(j,
                        {"batch_size", "epochs", "lr_peak", "weight_decay", "dropout", "d_model",
                         "num_heads", "d_ff", "max_len", "init_std", "threads"},
                        "training");
    TrainingOverrides t;
    t.batch_size = j.value("batch_size", t.batch_size);
    t.epochs = j.value("epochs", t.epochs);
    t.lr_peak = j.value("lr_peak", t.lr_peak);
    t.weight_decay = j.value("weight_decay", t.weight_decay);
    t.dropout = j.value("dropout", t.dropout);
    t.d_model = j.value("d_model", t.d_model);
    t.num_heads = j.value("num_heads", t.num_heads);
    t.d_ff = j.value("d_ff", t.d_ff);
    t.max_len = j.value("max_len", t.max_len);
    t.init_std = j.value("init_std", t.init_std);
    t.threads = j.value("threads", t.threads);
    if (t.batch_size == 0 || t.threads == 0) {
        bad_config("training.batch_size and training.threads must be positive");
    }
    return t;
}

ordered_json training_json(const TrainingOverrides& t) {
    ordered_json j;
    j["batch_size"] = t.batch_size;
    j["epochs"] = t.epochs;
    j["lr_peak"] = t.lr_peak;
    j["weight_decay"] = t.weight_decay;
    j["dropout"] = t.dropout;
    j["d_model"] = t.d_model;
    j["num_heads"] = t.num_heads;
    j["d_ff"] = t.d_ff;
    j["max_len"] = t.max_len;
    j["init_std"] = t.init_std;
    j["threads"] = t.threads;
    return j;
}

// BPE vocabulary paths are relative to the config file.
TokenizerSpec resolve_tokenizer(const GridConfig& config, const std::string& descriptor) {
    if (descriptor.starts_with("bpe:")) {
        const fs::path path = resolve(config.base_dir, descriptor.substr(4));
        return BpeSpec{load_vocabulary(path), descriptor.substr(4)};
    }
    return parse_tokenizer_spec(descriptor);
}

void check_tokenizer_descriptor(const std::string& descriptor) {
    if (descriptor.starts_with("bpe:")) {
        if (descriptor.size() == 4) {
            bad_config("bpe tokenizer needs a vocabulary path");
        }
        return;
    }
    try {
        (void)parse_tokenizer_spec(descriptor);
    } catch (const std::exception& e) {
        bad_config(e.what());
    }
}

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_atomically(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int task_num_classes(const TaskEntry& task) {
    if (task.num_classes > 0) {
        return task.num_classes;
    }
    if (const auto stats = find_task(task.name)) {
        return stats->num_classes;
    }
    throw ExperimentError(ExperimentError::Code::BadConfig,
                          "task '" + task.name + "' is not registered; set num_classes");
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string file_safe(const std::string& text) {
    std::string out = text;
    for (auto& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') {
            c = '_';
        }
    }
    return out;
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (const char c : text) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

// k-mers by k, then BPE descriptors by name.
std::pair<int, std::string> tokenizer_order(const std::string& descriptor) {
    if (!descriptor.starts_with("bpe:")) {
        try {
            const TokenizerSpec spec = parse_tokenizer_spec(descriptor);
            return {std::get<KmerSpec>(spec).k, ""};
        } catch (const std::exception&) {
        }
    }
    return {1000, descriptor};
}

// Registered tasks in registry order, others alphabetically after them.
std::pair<std::size_t, std::string> task_order(const std::string& name) {
    const auto& rows = task_registry();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].id == name) {
            return {i, ""};
        }
    }
    return {rows.size(), name};
}

std::pair<int, std::size_t> perturbation_order(const std::string& name) {
    const Perturbation p = Perturbation::parse(name);
    return {static_cast<int>(p.kind), p.n};
}

struct Stats {
    double mean = 0.0;
    double range = 0.0;
};

Stats summarize_values(const std::vector<double>& values) {
    Stats s;
    double sum = 0.0;
    for (const double v : values) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(values.size());
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.range = *hi - *lo;
    return s;
}

}  // namespace

GridConfig parse_grid_config(const std::string& json_text, const fs::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        bad_config(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        reject_unknown_keys(root,
                            {"tasks", "tokenizers", "schemes", "depths", "seeds", "perturbations",
                             "training", "output_dir", "workers"},
                            "config");
        GridConfig config;
        config.base_dir = base_dir;

        if (!root.contains("tasks") || !root.at("tasks").is_array() || root.at("tasks").empty()) {
            bad_config("'tasks' must be a non-empty list");
        }
        std::set<std::string> task_names;
        for (const auto& t : root.at("tasks")) {
            reject_unknown_keys(t, {"name", "datasets", "num_classes"}, "task entry");
            TaskEntry entry;
            entry.name = t.at("name").get<std::string>();
            entry.num_classes = t.value("num_classes", 0);
            for (const auto& d : non_empty_list<std::string>(t, "datasets")) {
                entry.datasets.push_back(resolve(base_dir, d));
            }
            if (!task_names.insert(entry.name).second) {
                bad_config("duplicate task '" + entry.name + "'");
            }
            config.tasks.push_back(std::move(entry));
        }

        config.tokenizers = non_empty_list<std::string>(root, "tokenizers");
        for (const auto& t : config.tokenizers) {
            check_tokenizer_descriptor(t);
        }
        for (const auto& s : non_empty_list<std::string>(root, "schemes")) {
            try {
                config.schemes.push_back(scheme_name(parse_scheme(s)));
            } catch (const std::exception& e) {
                bad_config("bad scheme '" + s + "': " + e.what());
            }
        }
        config.depths = non_empty_list<std::size_t>(root, "depths");
        if (std::ranges::find(config.depths, std::size_t{0}) != config.depths.end()) {
            bad_config("depths must be positive");
        }
        config.seeds = non_empty_list<std::uint64_t>(root, "seeds");
        if (root.contains("perturbations")) {
            config.perturbations.clear();
            for (const auto& p : non_empty_list<std::string>(root, "perturbations")) {
                try {
                    config.perturbations.push_back(Perturbation::parse(p).name());
                } catch (const std::exception& e) {
                    bad_config("bad perturbation '" + p + "': " + e.what());
                }
            }
        }
        if (root.contains("training")) {
            config.training = parse_training(root.at("training"));
        }
        if (root.contains("output_dir")) {
            config.output_dir = resolve(base_dir, root.at("output_dir").get<std::string>());
        } else {
            config.output_dir = resolve(base_dir, "runs");
        }
        config.workers = root.value("workers", std::size_t{1});
        if (config.workers == 0) {
            bad_config("workers must be positive");
        }
        return config;
    } catch (const json::exception& e) {
        bad_config(std::string("malformed config: ") + e.what());
    }
}

GridConfig load_grid_config(const fs::path& path) {
    if (!fs::exists(path)) {
        throw ExperimentError(ExperimentError::Code::DataMissing,
                              "config file " + path.string() + " not found");
    }
    return parse_grid_config(read_file(path), path.parent_path());
}

std::string record_to_json(const ExperimentRecord& r) {
    ordered_json j;
    j["task"] = r.cell.task;
    j["tokenizer"] = r.cell.tokenizer;
    j["tokenizer_label"] = r.tokenizer_label;
    j["scheme"] = r.cell.scheme;
    j["depth"] = r.cell.depth;
    j["seed"] = r.cell.seed;
    j["status"] = r.ok ? "ok" : "failed";
    if (!r.ok) {
        j["error"] = r.error;
    }
    auto datasets = ordered_json::array();
    for (const auto& d : r.datasets) {
        ordered_json dj;
        dj["name"] = d.name;
        dj["test_mcc"] = d.test_mcc;
        dj["dev_mcc"] = d.dev_mcc;
        dj["best_epoch"] = d.best_epoch;
        dj["wall_clock_seconds"] = d.wall_clock_seconds;
        datasets.push_back(std::move(dj));
    }
    j["datasets"] = std::move(datasets);
    j["task_mcc"] = r.task_mcc;
    j["parameter_count"] = r.parameter_count;
    j["model_config"] =
        r.model_config.empty() ? ordered_json(nullptr) : ordered_json::parse(r.model_config);
    j["training"] = training_json(r.training);
    j["runtime_seconds"] = r.runtime_seconds;
    j["code_version"] = r.code_version;
    return j.dump(2) + "\n";
}

ExperimentRecord record_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        ExperimentRecord r;
        r.cell.task = j.at("task").get<std::string>();
        r.cell.tokenizer = j.at("tokenizer").get<std::string>();
        r.cell.scheme = j.at("scheme").get<std::string>();
        r.cell.depth = j.at("depth").get<std::size_t>();
        r.cell.seed = j.at("seed").get<std::uint64_t>();
        r.tokenizer_label = j.at("tokenizer_label").get<std::string>();
        r.ok = j.at("status").get<std::string>() == "ok";
        r.error = j.value("error", std::string());
        for (const auto& dj : j.at("datasets")) {
            DatasetResult d;
            d.name = dj.at("name").get<std::string>();
            d.test_mcc = dj.at("test_mcc").get<std::map<std::string, double>>();
            d.dev_mcc = dj.at("dev_mcc").get<std::vector<double>>();
            d.best_epoch = dj.at("best_epoch").get<std::size_t>();
            d.wall_clock_seconds = dj.at("wall_clock_seconds").get<double>();
            r.datasets.push_back(std::move(d));
        }
        r.task_mcc = j.at("task_mcc").get<std::map<std::string, double>>();
        r.parameter_count = j.at("parameter_count").get<std::size_t>();
        if (!j.at("model_config").is_null()) {
            // Keep the writer's key order so the text survives a round trip.
            r.model_config = ordered_json::parse(text).at("model_config").dump();
        }
        r.training = parse_training(j.at("training"));
        r.runtime_seconds = j.at("runtime_seconds").get<double>();
        r.code_version = j.at("code_version").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw ExperimentError(ExperimentError::Code::BadRecord,
                              std::string("malformed record: ") + e.what());
    }
}

bool same_results(const ExperimentRecord& a, const ExperimentRecord& b) {
    if (a.datasets.size() != b.datasets.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.datasets.size(); ++i) {
        const auto& x = a.datasets[i];
        const auto& y = b.datasets[i];
        if (x.name != y.name || x.test_mcc != y.test_mcc || x.dev_mcc != y.dev_mcc ||
            x.best_epoch != y.best_epoch) {
            return false;
        }
    }
    return a.cell == b.cell && a.tokenizer_label == b.tokenizer_label && a.ok == b.ok &&
           a.error == b.error && a.task_mcc == b.task_mcc &&
           a.parameter_count == b.parameter_count && a.model_config == b.model_config &&
           a.training == b.training && a.code_version == b.code_version;
}

std::string cell_file_name(const GridConfig& config, const CellCoordinates& cell) {
    ordered_json key;
    key["task"] = cell.task;
    key["tokenizer"] = cell.tokenizer;
    key["scheme"] = cell.scheme;
    key["depth"] = cell.depth;
    key["seed"] = cell.seed;
    key["training"] = training_json(config.training);
    key["perturbations"] = config.perturbations;
    char buf[40];
    std::snprintf(buf, sizeof buf, "cell-%016llx.json",
                  static_cast<unsigned long long>(fnv1a(key.dump())));
    return buf;
}

ExperimentRecord run_cell(const GridConfig& config, const CellCoordinates& cell) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentRecord record;
    record.cell = cell;
    record.training = config.training;
    record.code_version = code_version();
    try {
        const auto task = std::ranges::find(config.tasks, cell.task, &TaskEntry::name);
        if (task == config.tasks.end()) {
            throw ExperimentError(ExperimentError::Code::BadConfig, "unknown task " + cell.task);
        }
        const Tokenizer tokenizer(resolve_tokenizer(config, cell.tokenizer));
        record.tokenizer_label = tokenizer.label();
        const int num_classes = task_num_classes(*task);
        const TrainingOverrides& t = config.training;

        for (std::size_t di = 0; di < task->datasets.size(); ++di) {
            const auto dataset_start = std::chrono::steady_clock::now();
            const TaskDataset data = load_task_dir(task->datasets[di], task->name, num_classes);

            ModelConfig mc;
            mc.vocab_size = tokenizer.vocabulary().size();
            mc.d_model = t.d_model;
            mc.num_layers = cell.depth;
            mc.num_heads = t.num_heads;
            mc.d_ff = t.d_ff;
            mc.max_len = t.max_len ? t.max_len
                         : tokenizer.is_bpe() ? data.nominal_length / 3 + 2
                                              : data.nominal_length + 2;
            mc.num_classes = static_cast<std::size_t>(num_classes);
            mc.dropout = t.dropout;
            mc.scheme = parse_scheme(cell.scheme);
            const EncoderModel model(mc);
            if (di == 0) {
                record.parameter_count = count_parameters(mc);
                record.model_config = config_to_json(mc);
            }

            const std::uint64_t seed = mix_seed(cell.seed, di);
            const auto train_set = make_examples(tokenizer, data.train, mc.max_len);
            const auto dev_set = make_examples(tokenizer, data.dev, mc.max_len);
            TrainOptions options;
            options.epochs = t.epochs;
            options.batch_size = t.batch_size;
            options.lr_peak = t.lr_peak;
            options.adamw.weight_decay = t.weight_decay;
            options.seed = seed;
            options.threads = t.threads;
            const TrainResult trained =
                train(model, model.init_params(seed, t.init_std), train_set, dev_set, options);

            DatasetResult result;
            result.name = task->datasets[di].filename().string();
            if (result.name.empty()) {
                result.name = task->datasets[di].parent_path().filename().string();
            }
            result.dev_mcc = trained.dev_mcc;
            result.best_epoch = trained.best_epoch;
            for (const auto& p : config.perturbations) {
                const Evaluation ev = evaluate(model, trained.params, tokenizer, data.test,
                                               Perturbation::parse(p), seed, mc.max_len,
                                               t.threads);
                result.test_mcc[p] = ev.mcc;
            }
            result.wall_clock_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - dataset_start)
                    .count();
            record.datasets.push_back(std::move(result));
        }

        for (const auto& p : config.perturbations) {
            double sum = 0.0;
            for (const auto& d : record.datasets) {
                sum += d.test_mcc.at(p);
            }
            record.task_mcc[p] = sum / static_cast<double>(record.datasets.size());
        }
        record.ok = true;
    } catch (const std::exception& e) {
        record.ok = false;
        record.error = e.what();
    }
    record.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return record;
}

GridOutcome run_grid(const GridConfig& config, const GridLog& log) {
    // Everything referenced must exist before any training starts.
    for (const auto& task : config.tasks) {
        for (const auto& dir : task.datasets) {
            for (const char* split : {"train.csv", "dev.csv", "test.csv"}) {
                if (!fs::exists(dir / split)) {
                    throw ExperimentError(ExperimentError::Code::DataMissing,
                                          "missing " + (dir / split).string());
                }
            }
        }
    }
    for (const auto& t : config.tokenizers) {
        try {
            (void)Tokenizer(resolve_tokenizer(config, t));
        } catch (const std::exception& e) {
            throw ExperimentError(ExperimentError::Code::DataMissing,
                                  "tokenizer '" + t + "': " + e.what());
        }
    }

    std::vector<CellCoordinates> cells;
    for (const auto& task : config.tasks) {
        for (const auto& tok : config.tokenizers) {
            for (const auto& scheme : config.schemes) {
                for (const auto depth : config.depths) {
                    for (const auto seed : config.seeds) {
                        cells.push_back({task.name, tok, scheme, depth, seed});
                    }
                }
            }
        }
    }
    std::ranges::sort(cells);
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

    fs::create_directories(config.output_dir);
    GridOutcome outcome;
    std::vector<std::optional<ExperimentRecord>> results(cells.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const fs::path path = config.output_dir / cell_file_name(config, cells[i]);
        if (fs::exists(path)) {
            try {
                ExperimentRecord existing = record_from_json(read_file(path));
                if (existing.ok && existing.cell == cells[i]) {
                    results[i] = std::move(existing);
                    ++outcome.skipped;
                    continue;
                }
            } catch (const ExperimentError&) {
                // Unreadable leftovers are rerun.
            }
        }
        pending.push_back(i);
    }

    std::mutex log_mutex;
    auto emit = [&](const std::string& line) {
        if (log) {
            std::lock_guard lock(log_mutex);
            log(line);
        }
    };
    emit("grid: " + std::to_string(cells.size()) + " cells, " +
         std::to_string(outcome.skipped) + " already complete, " +
         std::to_string(pending.size()) + " to run");

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t q = next++; q < pending.size(); q = next++) {
            const std::size_t i = pending[q];
            const CellCoordinates& cell = cells[i];
            ExperimentRecord record = run_cell(config, cell);
            write_atomically(config.output_dir / cell_file_name(config, cell),
                             record_to_json(record));
            std::ostringstream line;
            line << "cell " << cell.task << " " << cell.tokenizer << " " << cell.scheme << " L"
                 << cell.depth << " seed " << cell.seed << ": ";
            if (record.ok) {
                for (const auto& [p, v] : record.task_mcc) {
                    line << p << "=" << format_value(v) << " ";
                }
            } else {
                line << "FAILED " << record.error << " ";
            }
            line << "(" << format_value(record.runtime_seconds) << " s)";
            emit(line.str());
            results[i] = std::move(record);
        }
    };
    const std::size_t workers = std::min(config.workers, std::max<std::size_t>(1, pending.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }

    outcome.executed = pending.size();
    for (auto& r : results) {
        if (!r->ok) {
            ++outcome.failed;
        }
        outcome.records.push_back(std::move(*r));
    }
    return outcome;
}

std::vector<ExperimentRecord> load_records(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw ExperimentError(ExperimentError::Code::DataMissing,
                              "record directory " + dir.string() + " not found");
    }
    std::vector<ExperimentRecord> records;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.starts_with("cell-") && name.ends_with(".json")) {
            records.push_back(record_from_json(read_file(entry.path())));
        }
    }
    std::ranges::sort(records, {}, &ExperimentRecord::cell);
    return records;
}

std::optional<ReportLayout> parse_report_layout(const std::string& name) {
    if (name == "by-scheme") {
        return ReportLayout::ByScheme;
    }
    if (name == "robustness") {
        return ReportLayout::Robustness;
    }
    return std::nullopt;
}

std::vector<ReportFile> build_report(const std::vector<ExperimentRecord>& records,
                                     ReportLayout layout) {
    std::vector<const ExperimentRecord*> ok;
    for (const auto& r : records) {
        if (r.ok) {
            ok.push_back(&r);
        }
    }
    if (ok.empty()) {
        throw ExperimentError(ExperimentError::Code::NoRecords, "no successful records to report");
    }

    // Canonical orderings shared by both layouts.
    auto tok_less = [](const std::string& a, const std::string& b) {
        return tokenizer_order(a) < tokenizer_order(b);
    };
    auto task_less = [](const std::string& a, const std::string& b) {
        return task_order(a) < task_order(b);
    };
    std::set<std::string> schemes;
    std::set<std::size_t> depths;
    std::set<std::string, decltype(tok_less)> tokenizers(tok_less);
    std::set<std::string, decltype(task_less)> tasks(task_less);
    std::set<std::uint64_t> seeds;
    std::map<std::string, std::string> labels;
    for (const auto* r : ok) {
        schemes.insert(r->cell.scheme);
        depths.insert(r->cell.depth);
        tokenizers.insert(r->cell.tokenizer);
        tasks.insert(r->cell.task);
        seeds.insert(r->cell.seed);
        labels[r->cell.tokenizer] = r->tokenizer_label;
    }
    const bool multi_seed = seeds.size() > 1;

    auto values_for = [&](const std::string& scheme, std::size_t depth, const std::string& tok,
                          const std::string& task, const std::string& perturbation) {
        std::vector<double> values;
        for (const auto* r : ok) {
            if (r->cell.scheme == scheme && r->cell.depth == depth && r->cell.tokenizer == tok &&
                r->cell.task == task) {
                if (const auto it = r->task_mcc.find(perturbation); it != r->task_mcc.end()) {
                    values.push_back(it->second);
                }
            }
        }
        return values;
    };

    std::vector<ReportFile> files;
    if (layout == ReportLayout::ByScheme) {
        for (const auto& scheme : schemes) {
            std::ostringstream csv;
            csv << "depth,tokenizer";
            for (const auto& task : tasks) {
                csv << ',' << csv_field(task);
                if (multi_seed) {
                    csv << ',' << csv_field(task + "_range");
                }
            }
            csv << '\n';
            for (const auto depth : depths) {
                for (const auto& tok : tokenizers) {
                    bool any = false;
                    std::ostringstream row;
                    row << depth << ',' << csv_field(labels[tok]);
                    for (const auto& task : tasks) {
                        const auto values = values_for(scheme, depth, tok, task, "original");
                        any = any || !values.empty();
                        const Stats s = values.empty() ? Stats{} : summarize_values(values);
                        row << ',' << (values.empty() ? "" : format_value(s.mean));
                        if (multi_seed) {
                            row << ',' << (values.empty() ? "" : format_value(s.range));
                        }
                    }
                    if (any) {
                        csv << row.str() << '\n';
                    }
                }
            }
            files.push_back({"by-scheme_" + file_safe(scheme) + ".csv", csv.str()});
        }
        return files;
    }

    std::set<std::string, bool (*)(const std::string&, const std::string&)> perturbations(
        [](const std::string& a, const std::string& b) {
            return perturbation_order(a) < perturbation_order(b);
        });
    for (const auto* r : ok) {
        for (const auto& [p, v] : r->task_mcc) {
            perturbations.insert(p);
        }
    }
    for (const auto& scheme : schemes) {
        for (const auto depth : depths) {
            std::ostringstream csv;
            csv << "task,tokenizer";
            for (const auto& p : perturbations) {
                csv << ',' << csv_field(p);
            }
            csv << '\n';
            bool any_row = false;
            for (const auto& task : tasks) {
                for (const auto& tok : tokenizers) {
                    bool any = false;
                    std::ostringstream row;
                    row << csv_field(task) << ',' << csv_field(labels[tok]);
                    for (const auto& p : perturbations) {
                        const auto values = values_for(scheme, depth, tok, task, p);
                        any = any || !values.empty();
                        row << ',' << (values.empty() ? "" : format_value(summarize_values(values).mean));
                    }
                    if (any) {
                        csv << row.str() << '\n';
                        any_row = true;
                    }
                }
            }
            if (any_row) {
                files.push_back({"robustness_" + file_safe(scheme) + "_L" + std::to_string(depth) +
                                     ".csv",
                                 csv.str()});
            }
        }
    }
    return files;
}

void write_report(const std::vector<ReportFile>& files, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& f : files) {
        write_atomically(dir / f.name, f.csv);
    }
}

}  // namespace genoseq
