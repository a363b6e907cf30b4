#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "genoseq/corpus.hpp"
#include "genoseq/metrics.hpp"
#include "genoseq/model.hpp"
#include "genoseq/optim.hpp"
#include "genoseq/perturb.hpp"
#include "genoseq/tokenizer.hpp"

namespace genoseq {

struct EpochSummary {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
    double dev_mcc = 0.0;
    double seconds = 0.0;
};

struct TrainOptions {
    std::size_t epochs = 3;
    std::size_t batch_size = 32;
    double lr_peak = 1e-4;
    AdamWOptions adamw;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::function<void(const EpochSummary&)> on_epoch;
};

struct TrainResult {
    ModelParams params;  // dev-best epoch; the initial params when epochs == 0
    std::vector<double> dev_mcc;
    std::vector<double> step_loss;
    std::size_t best_epoch = 0;  // 0 when no epoch ran
    std::size_t steps = 0;
};

/// Tokenizes every sequence of a split. Sequences are stored without their
/// padding tail, which the model ignores anyway.
std::vector<Example> make_examples(const Tokenizer& tokenizer, const Split& split,
                                   std::size_t max_len);

/// Minibatch AdamW training. Each epoch visits the training set in a seeded
/// permutation; step t uses lr_at(t + 1). After every epoch the dev split
/// is scored and the params of the best dev MCC (earliest on ties) are kept.
/// Throws ModelError(NonFinite) if the loss or params stop being finite.
TrainResult train(const EncoderModel& model, ModelParams initial,
                  std::span<const Example> train_set, std::span<const Example> dev_set,
                  const TrainOptions& options);

/// Argmax predictions in eval mode, sharded over `threads`.
std::vector<int> predict_all(const EncoderModel& model, const ModelParams& params,
                             std::span<const Example> examples, std::size_t threads = 1);

ConfusionMatrix confusion(const EncoderModel& model, const ModelParams& params,
                          std::span<const Example> examples, std::size_t threads = 1);

struct Evaluation {
    ConfusionMatrix confusion;
    double mcc = 0.0;
};

/// Perturbs every sequence (example i draws from a stream derived from
/// `seed` and i), tokenizes, and scores in eval mode.
Evaluation evaluate(const EncoderModel& model, const ModelParams& params,
                    const Tokenizer& tokenizer, const Split& split,
                    const Perturbation& perturbation, std::uint64_t seed, std::size_t max_len,
                    std::size_t threads = 1);

struct RunMetadata {
    std::uint64_t seed = 0;
    ModelConfig config;
    std::size_t epochs = 0;
    std::size_t batch_size = 0;
    double lr_peak = 0.0;
    double weight_decay = 0.0;
    std::vector<double> dev_mcc;
    std::size_t best_epoch = 0;
    double wall_clock_seconds = 0.0;
    std::string code_version;
};

std::string run_metadata_json(const RunMetadata& metadata);
void write_run_metadata(const std::string& path, const RunMetadata& metadata);

/// `git describe` of the source tree at build time.
const char* code_version() noexcept;

}  // namespace genoseq
