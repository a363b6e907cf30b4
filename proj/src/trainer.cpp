#include "genoseq/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include <json.hpp>

namespace genoseq {

namespace {

// Stream ids that keep the different random consumers of one seed apart.
constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kDropoutStream = 0x4452;
constexpr std::uint64_t kPerturbStream = 0x5054;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<Example> make_examples(const Tokenizer& tokenizer, const Split& split,
                                   std::size_t max_len) {
    std::vector<Example> out;
    out.reserve(split.size());
    for (const auto& row : split) {
        out.push_back({tokenizer.encode(row.sequence, max_len).trimmed(), row.label});
    }
    return out;
}

std::vector<int> predict_all(const EncoderModel& model, const ModelParams& params,
                             std::span<const Example> examples, std::size_t threads) {
    std::vector<int> out(examples.size(), 0);
    const std::size_t shards = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, examples.size()));
    auto run = [&](std::size_t s) {
        const std::size_t begin = s * examples.size() / shards;
        const std::size_t end = (s + 1) * examples.size() / shards;
        for (std::size_t i = begin; i < end; ++i) {
            out[i] = model.predict(params, examples[i].tokens);
        }
    };
    if (shards == 1) {
        run(0);
    } else {
        std::vector<std::jthread> workers;
        for (std::size_t s = 0; s < shards; ++s) {
            workers.emplace_back(run, s);
        }
    }
    return out;
}

ConfusionMatrix confusion(const EncoderModel& model, const ModelParams& params,
                          std::span<const Example> examples, std::size_t threads) {
    const auto predicted = predict_all(model, params, examples, threads);
    ConfusionMatrix cm(model.config().num_classes);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        cm.add(static_cast<std::size_t>(examples[i].label), static_cast<std::size_t>(predicted[i]));
    }
    return cm;
}

TrainResult train(const EncoderModel& model, ModelParams initial,
                  std::span<const Example> train_set, std::span<const Example> dev_set,
                  const TrainOptions& options) {
    if (train_set.empty()) {
        throw ModelError(ModelError::Code::EmptyBatch, "training set is empty");
    }
    if (options.batch_size == 0) {
        throw ModelError(ModelError::Code::InvalidConfig, "batch size must be positive");
    }

    TrainResult result;
    result.params = std::move(initial);
    if (options.epochs == 0) {
        return result;
    }

    const std::size_t n = train_set.size();
    const std::size_t steps_per_epoch = (n + options.batch_size - 1) / options.batch_size;
    const std::size_t total_steps = steps_per_epoch * options.epochs;
    const std::uint64_t dropout_seed = mix_seed(options.seed, kDropoutStream);

    ModelParams params = result.params;
    ModelParams grads = ModelParams::zeros(model.config());
    AdamW optimizer(options.adamw);
    std::vector<std::size_t> order(n);
    std::vector<Example> batch;
    batch.reserve(options.batch_size);
    double best_mcc = -std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
        const auto start = Clock::now();
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng = make_rng(mix_seed(options.seed, kShuffleStream), epoch);
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t b = 0; b < steps_per_epoch; ++b) {
            batch.clear();
            const std::size_t end = std::min(n, (b + 1) * options.batch_size);
            for (std::size_t i = b * options.batch_size; i < end; ++i) {
                batch.push_back(train_set[order[i]]);
            }
            const std::size_t step = result.steps;
            const BatchLoss bl = model.loss_and_gradients(params, batch, true,
                                                          mix_seed(dropout_seed, step), grads,
                                                          options.threads);
            if (!std::isfinite(bl.loss)) {
                throw ModelError(ModelError::Code::NonFinite,
                                 "non-finite loss at step " + std::to_string(step));
            }
            optimizer.step(params, grads, lr_at(step + 1, total_steps, options.lr_peak));
            if (!params.all_finite()) {
                throw ModelError(ModelError::Code::NonFinite,
                                 "non-finite parameters after step " + std::to_string(step));
            }
            result.step_loss.push_back(bl.loss);
            loss_sum += bl.loss * static_cast<double>(batch.size());
            correct += bl.correct;
            ++result.steps;
        }

        EpochSummary summary;
        summary.epoch = epoch;
        summary.mean_loss = loss_sum / static_cast<double>(n);
        summary.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
        if (!dev_set.empty()) {
            summary.dev_mcc = mcc(confusion(model, params, dev_set, options.threads));
            result.dev_mcc.push_back(summary.dev_mcc);
            if (summary.dev_mcc > best_mcc) {
                best_mcc = summary.dev_mcc;
                result.best_epoch = epoch;
                result.params = params;
            }
        } else {
            result.best_epoch = epoch;
            result.params = params;
        }
        summary.seconds = seconds_since(start);
        if (options.on_epoch) {
            options.on_epoch(summary);
        }
    }
    return result;
}

Evaluation evaluate(const EncoderModel& model, const ModelParams& params,
                    const Tokenizer& tokenizer, const Split& split,
                    const Perturbation& perturbation, std::uint64_t seed, std::size_t max_len,
                    std::size_t threads) {
    const std::uint64_t stream_seed = mix_seed(seed, kPerturbStream);
    std::vector<Example> examples;
    examples.reserve(split.size());
    for (std::size_t i = 0; i < split.size(); ++i) {
        Rng rng = make_rng(stream_seed, i);
        const DnaSequence seq = perturb(split[i].sequence, perturbation, rng);
        examples.push_back({tokenizer.encode(seq, max_len).trimmed(), split[i].label});
    }
    Evaluation out{confusion(model, params, examples, threads), 0.0};
    out.mcc = mcc(out.confusion);
    return out;
}

std::string run_metadata_json(const RunMetadata& m) {
    nlohmann::ordered_json j;
    j["seed"] = m.seed;
    j["config"] = nlohmann::ordered_json::parse(config_to_json(m.config));
    j["epochs"] = m.epochs;
    j["batch_size"] = m.batch_size;
    j["lr_peak"] = m.lr_peak;
    j["weight_decay"] = m.weight_decay;
    j["dev_mcc"] = m.dev_mcc;
    j["best_epoch"] = m.best_epoch;
    j["wall_clock_seconds"] = m.wall_clock_seconds;
    j["code_version"] = m.code_version;
    return j.dump(2);
}

void write_run_metadata(const std::string& path, const RunMetadata& metadata) {
    std::ofstream out(path);
    out << run_metadata_json(metadata) << '\n';
    if (!out) {
        throw std::runtime_error("cannot write run metadata to " + path);
    }
}

const char* code_version() noexcept { return GENOSEQ_VERSION; }

}  // namespace genoseq
