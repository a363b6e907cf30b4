#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genoseq/corpus.hpp"

namespace genoseq {

/// One row of the GUE task statistics table.
struct TaskStats {
    std::string_view id;  // short identifier, e.g. "Human-CPD"
    std::string_view species;
    std::string_view task;
    int num_datasets;
    int num_classes;
    std::size_t sequence_length;
    std::size_t train_size;
    std::size_t dev_size;
    std::size_t test_size;
};

std::span<const TaskStats> task_registry() noexcept;

/// Case-sensitive lookup by identifier. Returns nullopt for unknown ids.
std::optional<TaskStats> find_task(std::string_view id) noexcept;

/// What validation compares. Built from a loaded dataset or by hand when
/// only the counts are known.
struct DatasetSummary {
    std::string name;
    int num_classes = 0;
    std::size_t nominal_length = 0;
    std::size_t train_size = 0;
    std::size_t dev_size = 0;
    std::size_t test_size = 0;
};

DatasetSummary summarize(const TaskDataset& dataset);

struct RegistryMismatch {
    std::string field;
    std::string expected;
    std::string actual;

    friend bool operator==(const RegistryMismatch&, const RegistryMismatch&) = default;
};

/// Empty result means the dataset agrees with the registry. Throws
/// CorpusError(UnknownTask) when the name is not registered.
std::vector<RegistryMismatch> validate_against_registry(const DatasetSummary& summary);
std::vector<RegistryMismatch> validate_against_registry(const TaskDataset& dataset);

/// `registry list` output: header plus one CSV row per task.
std::string registry_csv();

}  // namespace genoseq
