#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "genoseq/positional.hpp"
#include "genoseq/random.hpp"
#include "genoseq/tokenizer.hpp"

namespace genoseq {

class ModelError : public std::runtime_error {
public:
    enum class Code {
        InvalidConfig,
        IdOutOfRange,
        LengthExceeded,
        LabelOutOfRange,
        EmptyBatch,
        ShapeMismatch,
        NonFinite,
        CheckpointFormat,
    };

    ModelError(Code code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

struct ModelConfig {
    std::size_t vocab_size = 0;
    std::size_t d_model = 768;
    std::size_t num_layers = 12;
    std::size_t num_heads = 12;
    std::size_t d_ff = 0;  // 0 means 4 * d_model
    std::size_t max_len = 512;
    std::size_t num_classes = 2;
    double dropout = 0.1;
    PositionalScheme scheme = SinusoidalScheme{};

    std::size_t ff_dim() const noexcept { return d_ff ? d_ff : 4 * d_model; }
    std::size_t head_dim() const noexcept { return d_model / num_heads; }

    /// Throws ModelError(InvalidConfig).
    void validate() const;

    /// Explicit slopes if given, otherwise default_alibi_slopes(num_heads).
    std::vector<double> alibi_slopes() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// View of one parameter tensor, row-major.
struct TensorView {
    std::string name;
    std::span<double> values;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    bool decay = true;  // false for normalization gains/offsets
};

struct LayerParams {
    RowVector ln1_gain, ln1_bias;
    Matrix wq, wk, wv, wo;  // d_model x d_model, applied as x * W
    RowVector bq, bk, bv, bo;
    RowVector ln2_gain, ln2_bias;
    Matrix w1;  // d_model x d_ff
    RowVector b1;
    Matrix w2;  // d_ff x d_model
    RowVector b2;
};

/// All learnable tensors. Gradients use the same type.
struct ModelParams {
    Matrix token_embedding;  // vocab_size x d_model
    std::vector<LayerParams> layers;
    RowVector final_gain, final_bias;
    Matrix classifier;  // d_model x num_classes
    RowVector classifier_bias;

    static ModelParams zeros(const ModelConfig& config);

    /// normal(0, stddev) for embeddings and projections, zero offsets, unit
    /// normalization gains.
    static ModelParams initialize(const ModelConfig& config, std::uint64_t seed,
                                  double stddev = 0.02);

    /// Fixed traversal order; the same for params and gradients.
    std::vector<TensorView> tensors();
    std::size_t size() const;

    void set_zero();
    ModelParams& operator+=(const ModelParams& other);
    ModelParams& operator*=(double factor);
    bool all_finite() const;

    friend bool operator==(const ModelParams& a, const ModelParams& b);
};

/// Exact learnable scalar count of the architecture built for `config`.
std::size_t count_parameters(const ModelConfig& config);

/// Per-layer share of count_parameters().
std::size_t count_layer_parameters(const ModelConfig& config);

struct Example {
    TokenSequence tokens;
    int label = 0;
};

/// In the last layer of a forward() trace the query side (q, probs,
/// context and everything after) covers the CLS row only.
struct LayerTrace {
    Matrix input;
    Matrix ln1_hat, ln1_out;
    Eigen::VectorXd ln1_rstd;
    Matrix q, k, v;  // q and k after rotation when the scheme is rotary
    std::vector<Matrix> probs;         // per head, before dropout
    std::vector<Matrix> probs_keep;    // per head dropout multipliers, empty in eval
    Matrix context;
    Matrix mid;
    Matrix ln2_hat, ln2_out;
    Eigen::VectorXd ln2_rstd;
    Matrix ff_pre, ff_cdf, ff_act;  // ff_act = ff_pre * Phi(ff_pre)
    Matrix ff_keep;  // dropout multipliers on the feed-forward output
};

struct ForwardTrace {
    std::vector<TokenId> ids;
    std::size_t valid_len = 0;
    std::vector<LayerTrace> layers;
    Matrix hidden;  // output of the last encoder layer, before the final norm
    Matrix final_hat, final_out;
    Eigen::VectorXd final_rstd;
    RowVector logits;
};

struct BatchLoss {
    double loss = 0.0;
    std::size_t correct = 0;
};

/// Pre-norm Transformer encoder classifier over CLS pooling.
///
/// Layer: x + Attn(LN(x)), then + FFN(LN(.)), with a final LN before the
/// classifier. Positional information enters per the configured scheme:
/// sinusoids added to the embeddings, ALiBi added to the pre-softmax scores,
/// or RoPE applied to per-head queries and keys. Dropout hits attention
/// weights and feed-forward outputs in train mode only.
///
/// Immutable after construction; all methods are safe to call concurrently.
class EncoderModel {
public:
    explicit EncoderModel(ModelConfig config);

    const ModelConfig& config() const noexcept { return config_; }

    ModelParams init_params(std::uint64_t seed, double stddev = 0.02) const {
        return ModelParams::initialize(config_, seed, stddev);
    }

    /// Returns logits. `rng` is only used when `train` is set. Fills `trace`
    /// when given (needed for backward()).
    RowVector forward(const ModelParams& params, const TokenSequence& input, bool train,
                      Rng* rng = nullptr, ForwardTrace* trace = nullptr) const;

    /// H^(0) .. H^(L), each (seq_len, d_model), eval mode.
    std::vector<Matrix> hidden_states(const ModelParams& params, const TokenSequence& input) const;

    /// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(logits).
    void backward(const ModelParams& params, const ForwardTrace& trace, const RowVector& dlogits,
                  ModelParams& grads) const;

    /// Mean softmax cross-entropy over the batch and its exact gradient
    /// (written to `grads`, which is resized as needed). Dropout masks for
    /// example i come from make_rng(seed, i). With threads > 1 the batch is
    /// split into `threads` contiguous shards whose sums are added in order.
    BatchLoss loss_and_gradients(const ModelParams& params, std::span<const Example> batch,
                                 bool train, std::uint64_t seed, ModelParams& grads,
                                 std::size_t threads = 1) const;

    /// Forward-only version of the loss above.
    double loss(const ModelParams& params, std::span<const Example> batch, bool train,
                std::uint64_t seed) const;

    /// Index of the largest logit (lowest index on ties), eval mode.
    int predict(const ModelParams& params, const TokenSequence& input) const;

private:
    void check_input(const TokenSequence& input) const;
    RowVector run(const ModelParams& params, const TokenSequence& input, bool train, Rng* rng,
                  ForwardTrace* trace, bool cls_only) const;

    ModelConfig config_;
    Matrix sinusoids_;
    RopeTable rope_;
    std::vector<double> slopes_;
};

double cross_entropy(const RowVector& logits, int label);

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);

/// Binary checkpoint: magic, JSON header (config + tensor shapes), then the
/// raw little-endian doubles. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const ModelConfig& config,
                     const ModelParams& params);
std::pair<ModelConfig, ModelParams> load_checkpoint(const std::string& path);

}  // namespace genoseq
