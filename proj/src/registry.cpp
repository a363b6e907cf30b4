#include "genoseq/registry.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace genoseq {

namespace {

// Totals over all datasets of each task, as published with the benchmark.
constexpr std::array<TaskStats, 7> kRegistry{{
    {"Human-CPD", "Human", "Core Promoter Detection", 3, 2, 70, 94712, 11840, 11840},
    {"Human-TFP", "Human", "Transcription Factor Prediction", 5, 2, 100, 128345, 5000, 5000},
    {"Human-PD", "Human", "Promoter Detection", 3, 2, 300, 93902, 11840, 11840},
    {"Human-SSD", "Human", "Splice Site Prediction", 1, 3, 400, 36496, 4562, 4562},
    {"Mouse-TFP", "Mouse", "Transcription Factor Prediction", 5, 2, 100, 80018, 9735, 9735},
    {"Yeast-EMP", "Yeast", "Epigenetic Marks Prediction", 10, 2, 500, 229885, 28741, 28741},
    {"Virus-CVC", "Virus", "Covid Variant Classification", 1, 9, 1000, 73335, 9168, 9166},
}};

template <typename T>
void compare(std::vector<RegistryMismatch>& out, const char* field, T expected, T actual) {
    if (expected != actual) {
        out.push_back({field, std::to_string(expected), std::to_string(actual)});
    }
}

}  // namespace

std::span<const TaskStats> task_registry() noexcept { return kRegistry; }

std::optional<TaskStats> find_task(std::string_view id) noexcept {
    const auto it = std::find_if(kRegistry.begin(), kRegistry.end(),
                                 [&](const TaskStats& s) { return s.id == id; });
    if (it == kRegistry.end()) {
        return std::nullopt;
    }
    return *it;
}

DatasetSummary summarize(const TaskDataset& dataset) {
    return {dataset.name,        dataset.num_classes, dataset.nominal_length,
            dataset.train.size(), dataset.dev.size(),  dataset.test.size()};
}

std::vector<RegistryMismatch> validate_against_registry(const DatasetSummary& summary) {
    const auto stats = find_task(summary.name);
    if (!stats) {
        throw CorpusError(CorpusError::Code::UnknownTask,
                          "task '" + summary.name + "' is not in the registry");
    }
    std::vector<RegistryMismatch> mismatches;
    compare(mismatches, "num_classes", stats->num_classes, summary.num_classes);
    compare(mismatches, "sequence_length", stats->sequence_length, summary.nominal_length);
    compare(mismatches, "train_size", stats->train_size, summary.train_size);
    compare(mismatches, "dev_size", stats->dev_size, summary.dev_size);
    compare(mismatches, "test_size", stats->test_size, summary.test_size);
    return mismatches;
}

std::vector<RegistryMismatch> validate_against_registry(const TaskDataset& dataset) {
    return validate_against_registry(summarize(dataset));
}

std::string registry_csv() {
    std::ostringstream out;
    out << "id,species,task,num_datasets,num_classes,sequence_length,train,dev,test\n";
    for (const auto& s : kRegistry) {
        out << s.id << ',' << s.species << ',' << s.task << ',' << s.num_datasets << ','
            << s.num_classes << ',' << s.sequence_length << ',' << s.train_size << ','
            << s.dev_size << ',' << s.test_size << '\n';
    }
    return out.str();
}

}  // namespace genoseq
