#include "genoseq/synthetic.hpp"

#include <stdexcept>

namespace genoseq {

namespace {

constexpr char kAcgt[4] = {'A', 'C', 'G', 'T'};

Split motif_split(const MotifTaskOptions& o, std::size_t count, Rng& rng) {
    Split out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::string bases = random_bases(o.length, rng);
        const bool positive = i % 2 == 0;
        if (positive) {
            const std::size_t offset = rng() % (o.length - o.motif.size() + 1);
            bases.replace(offset, o.motif.size(), o.motif);
        } else {
            while (bases.find(o.motif) != std::string::npos) {
                bases = random_bases(o.length, rng);
            }
        }
        out.push_back({DnaSequence(std::move(bases)), positive ? 1 : 0});
    }
    return out;
}

}  // namespace

std::string random_bases(std::size_t length, Rng& rng) {
    std::string out(length, 'A');
    for (auto& c : out) {
        c = kAcgt[rng() & 3U];
    }
    return out;
}

Split random_labeled_split(std::size_t count, std::size_t length, int num_classes, Rng& rng) {
    if (num_classes < 1) {
        throw std::invalid_argument("num_classes must be positive");
    }
    Split out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::string bases = random_bases(length, rng);
        const int label = static_cast<int>(rng() % static_cast<std::uint64_t>(num_classes));
        out.push_back({DnaSequence(std::move(bases)), label});
    }
    return out;
}

TaskDataset make_motif_task(const MotifTaskOptions& options, std::uint64_t seed) {
    if (options.motif.empty() || options.motif.size() > options.length) {
        throw std::invalid_argument("motif must be non-empty and fit in the sequence");
    }
    TaskDataset task;
    task.name = "Synthetic-Motif";
    task.species = "synthetic";
    task.num_classes = 2;
    task.nominal_length = options.length;
    Rng train_rng = make_rng(seed, 1);
    Rng dev_rng = make_rng(seed, 2);
    Rng test_rng = make_rng(seed, 3);
    task.train = motif_split(options, options.train, train_rng);
    task.dev = motif_split(options, options.dev, dev_rng);
    task.test = motif_split(options, options.test, test_rng);
    return task;
}

}  // namespace genoseq
