#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "genoseq/corpus.hpp"
#include "genoseq/random.hpp"

namespace genoseq {

/// Uniform random string over ACGT.
std::string random_bases(std::size_t length, Rng& rng);

/// `count` uniform random sequences with uniform random labels.
Split random_labeled_split(std::size_t count, std::size_t length, int num_classes, Rng& rng);

struct MotifTaskOptions {
    std::string motif = "TATAAT";
    std::size_t length = 200;
    std::size_t train = 2000;
    std::size_t dev = 500;
    std::size_t test = 500;
};

/// Planted-motif binary task. Even rows are positives: a random background
/// with the motif written over it at a uniform offset. Odd rows are
/// negatives: random backgrounds redrawn until they do not contain the motif.
TaskDataset make_motif_task(const MotifTaskOptions& options, std::uint64_t seed);

}  // namespace genoseq
