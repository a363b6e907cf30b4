#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace genoseq {

class CorpusError : public std::runtime_error {
public:
    enum class Code {
        FileNotFound,
        EmptyFile,
        MissingHeader,
        MalformedRow,
        BadAlphabet,
        LabelOutOfRange,
        UnknownTask,
        PerturbationTooLarge,
    };

    CorpusError(Code code, const std::string& message, std::size_t row = 0)
        : std::runtime_error(message), code_(code), row_(row) {}

    Code code() const noexcept { return code_; }
    /// 1-based data row (header excluded) the error refers to, 0 if none.
    std::size_t row() const noexcept { return row_; }

private:
    Code code_;
    std::size_t row_;
};

/// Nucleotide string over {A,C,G,T,N}, never empty.
class DnaSequence {
public:
    DnaSequence() = default;
    explicit DnaSequence(std::string bases);

    static bool is_valid_base(char c) noexcept {
        return c == 'A' || c == 'C' || c == 'G' || c == 'T' || c == 'N';
    }
    static bool is_valid(std::string_view bases) noexcept;

    const std::string& bases() const noexcept { return bases_; }
    std::size_t size() const noexcept { return bases_.size(); }
    char operator[](std::size_t i) const noexcept { return bases_[i]; }

    friend bool operator==(const DnaSequence&, const DnaSequence&) = default;

private:
    std::string bases_;
};

struct LabeledSequence {
    DnaSequence sequence;
    int label = 0;

    friend bool operator==(const LabeledSequence&, const LabeledSequence&) = default;
};

using Split = std::vector<LabeledSequence>;

struct TaskDataset {
    std::string name;
    std::string species;
    int num_classes = 2;
    std::size_t nominal_length = 0;
    Split train;
    Split dev;
    Split test;
};

/// Reads one split in the GUE CSV layout: header `sequence,label`, no quoting.
/// Accepts `\n` or `\r\n` line endings; a trailing blank line is ignored.
Split load_task_csv(const std::filesystem::path& path, int num_classes);

void write_task_csv(const std::filesystem::path& path, const Split& split);

/// Loads `train.csv`, `dev.csv` and `test.csv` from a dataset directory.
/// nominal_length is set to the longest sequence seen.
TaskDataset load_task_dir(const std::filesystem::path& dir, std::string name, int num_classes);

std::size_t max_sequence_length(const TaskDataset& dataset);

}  // namespace genoseq
