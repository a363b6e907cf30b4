#include "genoseq/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace genoseq {

DnaSequence::DnaSequence(std::string bases) : bases_(std::move(bases)) {
    if (bases_.empty()) {
        throw CorpusError(CorpusError::Code::BadAlphabet, "empty DNA sequence");
    }
    if (!is_valid(bases_)) {
        throw CorpusError(CorpusError::Code::BadAlphabet,
                          "sequence contains characters outside {A,C,G,T,N}: " + bases_);
    }
}

bool DnaSequence::is_valid(std::string_view bases) noexcept {
    return std::all_of(bases.begin(), bases.end(), is_valid_base);
}

namespace {

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

}  // namespace

Split load_task_csv(const std::filesystem::path& path, int num_classes) {
    std::ifstream in(path);
    if (!in) {
        throw CorpusError(CorpusError::Code::FileNotFound, "cannot open " + path.string());
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw CorpusError(CorpusError::Code::EmptyFile, path.string() + " is empty");
    }
    strip_cr(line);
    if (line != "sequence,label") {
        throw CorpusError(CorpusError::Code::MissingHeader,
                          path.string() + ": expected header 'sequence,label', got '" + line + "'");
    }

    Split records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        strip_cr(line);
        if (line.empty()) {
            // Only a trailing blank line is tolerated.
            if (in.peek() == std::char_traits<char>::eof()) {
                break;
            }
            throw CorpusError(CorpusError::Code::MalformedRow,
                              path.string() + ": blank line in the middle of the file", row);
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw CorpusError(CorpusError::Code::MalformedRow,
                              path.string() + ": row " + std::to_string(row) +
                                  " must have exactly two fields",
                              row);
        }
        const std::string_view bases(line.data(), comma);
        const std::string_view label_text(line.data() + comma + 1, line.size() - comma - 1);

        if (bases.empty() || !DnaSequence::is_valid(bases)) {
            throw CorpusError(CorpusError::Code::BadAlphabet,
                              path.string() + ": row " + std::to_string(row) +
                                  " has a sequence outside {A,C,G,T,N}",
                              row);
        }
        int label = 0;
        const auto* end = label_text.data() + label_text.size();
        const auto [ptr, ec] = std::from_chars(label_text.data(), end, label);
        if (ec != std::errc{} || ptr != end) {
            throw CorpusError(CorpusError::Code::MalformedRow,
                              path.string() + ": row " + std::to_string(row) +
                                  " has a non-integer label",
                              row);
        }
        if (label < 0 || label >= num_classes) {
            throw CorpusError(CorpusError::Code::LabelOutOfRange,
                              path.string() + ": row " + std::to_string(row) + " label " +
                                  std::to_string(label) + " not in [0," +
                                  std::to_string(num_classes) + ")",
                              row);
        }
        records.push_back({DnaSequence(std::string(bases)), label});
    }

    if (records.empty()) {
        throw CorpusError(CorpusError::Code::EmptyFile, path.string() + " has no data rows");
    }
    return records;
}

void write_task_csv(const std::filesystem::path& path, const Split& split) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw CorpusError(CorpusError::Code::FileNotFound, "cannot write " + path.string());
    }
    out << "sequence,label\n";
    for (const auto& record : split) {
        out << record.sequence.bases() << ',' << record.label << '\n';
    }
}

TaskDataset load_task_dir(const std::filesystem::path& dir, std::string name, int num_classes) {
    TaskDataset dataset;
    dataset.name = std::move(name);
    dataset.num_classes = num_classes;
    dataset.train = load_task_csv(dir / "train.csv", num_classes);
    dataset.dev = load_task_csv(dir / "dev.csv", num_classes);
    dataset.test = load_task_csv(dir / "test.csv", num_classes);
    dataset.nominal_length = max_sequence_length(dataset);
    return dataset;
}

std::size_t max_sequence_length(const TaskDataset& dataset) {
    std::size_t longest = 0;
    for (const Split* split : {&dataset.train, &dataset.dev, &dataset.test}) {
        for (const auto& record : *split) {
            longest = std::max(longest, record.sequence.size());
        }
    }
    return longest;
}

}  // namespace genoseq
