#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace genoseq {

class ExperimentError : public std::runtime_error {
public:
    enum class Code { BadConfig, DataMissing, NoRecords, BadRecord };

    ExperimentError(Code code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

struct TaskEntry {
    std::string name;
    std::vector<std::filesystem::path> datasets;  // each holds train/dev/test.csv
    int num_classes = 0;                           // 0: take it from the registry
};

/// Knobs shared by every cell. Zero means "derive the default".
struct TrainingOverrides {
    std::size_t batch_size = 32;
    std::size_t epochs = 3;
    double lr_peak = 1e-4;
    double weight_decay = 0.01;
    double dropout = 0.1;
    std::size_t d_model = 768;
    std::size_t num_heads = 12;
    std::size_t d_ff = 0;
    std::size_t max_len = 0;
    double init_std = 0.02;
    std::size_t threads = 1;  // batch-internal threads per cell

    friend bool operator==(const TrainingOverrides&, const TrainingOverrides&) = default;
};

struct GridConfig {
    std::vector<TaskEntry> tasks;
    std::vector<std::string> tokenizers;  // "<k>mer" or "bpe:<vocab file>"
    std::vector<std::string> schemes;
    std::vector<std::size_t> depths;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> perturbations{"original"};
    TrainingOverrides training;
    std::filesystem::path output_dir = "runs";
    std::size_t workers = 1;
    std::filesystem::path base_dir;  // resolves relative vocabulary paths

    std::size_t cell_count() const noexcept {
        return tasks.size() * tokenizers.size() * schemes.size() * depths.size() * seeds.size();
    }
};

/// Parses the JSON config. Relative paths resolve against `base_dir`.
/// Unknown keys, empty lists and malformed entries raise BadConfig.
GridConfig parse_grid_config(const std::string& json_text,
                             const std::filesystem::path& base_dir = {});
GridConfig load_grid_config(const std::filesystem::path& path);

struct CellCoordinates {
    std::string task;
    std::string tokenizer;  // descriptor as written in the config
    std::string scheme;     // canonical scheme name
    std::size_t depth = 0;
    std::uint64_t seed = 0;

    friend auto operator<=>(const CellCoordinates&, const CellCoordinates&) = default;
};

struct DatasetResult {
    std::string name;
    std::map<std::string, double> test_mcc;  // perturbation name -> MCC
    std::vector<double> dev_mcc;
    std::size_t best_epoch = 0;
    double wall_clock_seconds = 0.0;
};

struct ExperimentRecord {
    CellCoordinates cell;
    std::string tokenizer_label;  // "3-mer", "BPE", ...
    bool ok = false;
    std::string error;
    std::vector<DatasetResult> datasets;
    std::map<std::string, double> task_mcc;  // mean over datasets
    std::size_t parameter_count = 0;
    std::string model_config;  // JSON of the first dataset's model config
    TrainingOverrides training;
    double runtime_seconds = 0.0;
    std::string code_version;
};

std::string record_to_json(const ExperimentRecord& record);
ExperimentRecord record_from_json(const std::string& text);

/// Equality of everything except wall-clock fields.
bool same_results(const ExperimentRecord& a, const ExperimentRecord& b);

/// Stable file name derived from the cell coordinates, the training knobs
/// and the perturbation list.
std::string cell_file_name(const GridConfig& config, const CellCoordinates& cell);

/// Trains and scores a single cell. Never throws; failures land in `error`.
ExperimentRecord run_cell(const GridConfig& config, const CellCoordinates& cell);

struct GridOutcome {
    std::vector<ExperimentRecord> records;  // sorted by coordinates
    std::size_t executed = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
};

using GridLog = std::function<void(const std::string&)>;

/// Runs every cell of the cross product with up to `config.workers` jobs.
/// Each finished cell is written atomically to output_dir; cells whose
/// record already exists and succeeded are loaded instead of rerun.
/// Throws DataMissing before launch if a referenced file is absent.
GridOutcome run_grid(const GridConfig& config, const GridLog& log = {});

/// All cell records under `dir`, sorted by coordinates.
std::vector<ExperimentRecord> load_records(const std::filesystem::path& dir);

enum class ReportLayout { ByScheme, Robustness };

std::optional<ReportLayout> parse_report_layout(const std::string& name);

struct ReportFile {
    std::string name;  // file name, no directory
    std::string csv;
};

/// by-scheme: one table per scheme, rows (depth, tokenizer), one column per
/// task holding the task-average original MCC, averaged over seeds, with a
/// `<task>_range` column (max - min over seeds) when several seeds exist.
/// robustness: one table per (scheme, depth), rows (task, tokenizer), one
/// column per perturbation. Throws NoRecords when nothing succeeded.
std::vector<ReportFile> build_report(const std::vector<ExperimentRecord>& records,
                                     ReportLayout layout);

void write_report(const std::vector<ReportFile>& files, const std::filesystem::path& dir);

}  // namespace genoseq
