#include "genoseq/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace genoseq {

namespace {

using Index = Eigen::Index;

constexpr double kLayerNormEps = 1e-5;

Index idx(std::size_t n) { return static_cast<Index>(n); }

[[noreturn]] void config_error(const std::string& message) {
    throw ModelError(ModelError::Code::InvalidConfig, message);
}

template <typename Params, typename F>
void visit_tensors(Params& p, F&& f) {
    auto mat = [&](const std::string& name, auto& m, bool decay) { f(name, m, decay); };
    mat("token_embedding", p.token_embedding, true);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& layer = p.layers[l];
        const std::string prefix = "layers." + std::to_string(l) + ".";
        mat(prefix + "ln1.gain", layer.ln1_gain, false);
        mat(prefix + "ln1.bias", layer.ln1_bias, false);
        mat(prefix + "attn.wq", layer.wq, true);
        mat(prefix + "attn.bq", layer.bq, true);
        mat(prefix + "attn.wk", layer.wk, true);
        mat(prefix + "attn.bk", layer.bk, true);
        mat(prefix + "attn.wv", layer.wv, true);
        mat(prefix + "attn.bv", layer.bv, true);
        mat(prefix + "attn.wo", layer.wo, true);
        mat(prefix + "attn.bo", layer.bo, true);
        mat(prefix + "ln2.gain", layer.ln2_gain, false);
        mat(prefix + "ln2.bias", layer.ln2_bias, false);
        mat(prefix + "ffn.w1", layer.w1, true);
        mat(prefix + "ffn.b1", layer.b1, true);
        mat(prefix + "ffn.w2", layer.w2, true);
        mat(prefix + "ffn.b2", layer.b2, true);
    }
    mat("final_norm.gain", p.final_gain, false);
    mat("final_norm.bias", p.final_bias, false);
    mat("classifier.weight", p.classifier, true);
    mat("classifier.bias", p.classifier_bias, true);
}

void layer_norm(const Matrix& x, const RowVector& gain, const RowVector& bias, Matrix& hat,
                Matrix& out, Eigen::VectorXd& rstd) {
    const Index d = x.cols();
    hat.resize(x.rows(), d);
    rstd.resize(x.rows());
    for (Index r = 0; r < x.rows(); ++r) {
        const double mean = x.row(r).mean();
        const double var = (x.row(r).array() - mean).square().sum() / static_cast<double>(d);
        rstd(r) = 1.0 / std::sqrt(var + kLayerNormEps);
        hat.row(r) = (x.row(r).array() - mean) * rstd(r);
    }
    out = (hat.array().rowwise() * gain.array()).rowwise() + bias.array();
}

// Returns d(loss)/d(x); accumulates gain/bias gradients.
Matrix layer_norm_backward(const Matrix& dout, const Matrix& hat, const Eigen::VectorXd& rstd,
                           const RowVector& gain, RowVector& dgain, RowVector& dbias) {
    dgain += (dout.array() * hat.array()).colwise().sum().matrix();
    dbias += dout.colwise().sum();
    const Matrix dhat = dout.array().rowwise() * gain.array();
    Matrix dx(dout.rows(), dout.cols());
    const double inv_d = 1.0 / static_cast<double>(dout.cols());
    for (Index r = 0; r < dout.rows(); ++r) {
        const double mean_dhat = dhat.row(r).sum() * inv_d;
        const double mean_dhat_hat = dhat.row(r).dot(hat.row(r)) * inv_d;
        dx.row(r) = rstd(r) * (dhat.row(r).array() - mean_dhat - hat.row(r).array() * mean_dhat_hat);
    }
    return dx;
}

// Standard normal CDF; GELU(x) = x * Phi(x).
double normal_cdf(double x) { return 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

// d/dx [x * Phi(x)] = Phi(x) + x * phi(x), given Phi(x).
Matrix gelu_grad(const Matrix& x, const Matrix& cdf) {
    constexpr double kNorm = std::numbers::inv_sqrtpi / std::numbers::sqrt2;
    return (cdf.array() + x.array() * (x.array().square() * -0.5).exp() * kNorm).matrix();
}

// Inverted dropout multipliers: 0 with probability p, 1/(1-p) otherwise.
// Each 64-bit draw supplies two 32-bit uniforms.
Matrix dropout_keep(Index rows, Index cols, double p, Rng& rng) {
    Matrix keep(rows, cols);
    const double scale = 1.0 / (1.0 - p);
    const auto threshold = static_cast<std::uint64_t>(std::llround(p * 4294967296.0));
    double* out = keep.data();
    const Index n = keep.size();
    for (Index i = 0; i < n; i += 2) {
        const std::uint64_t bits = rng();
        out[i] = (bits & 0xffffffffULL) < threshold ? 0.0 : scale;
        if (i + 1 < n) {
            out[i + 1] = (bits >> 32) < threshold ? 0.0 : scale;
        }
    }
    return keep;
}

void fill_normal(Matrix& m, double stddev, Rng& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (Index i = 0; i < m.size(); ++i) {
        m.data()[i] = dist(rng);
    }
}

}  // namespace

void ModelConfig::validate() const {
    if (vocab_size == 0) config_error("vocab_size must be positive");
    if (d_model == 0 || num_layers == 0 || num_heads == 0) {
        config_error("d_model, num_layers and num_heads must be positive");
    }
    if (d_model % num_heads != 0) {
        config_error("d_model (" + std::to_string(d_model) + ") must be divisible by num_heads (" +
                     std::to_string(num_heads) + ")");
    }
    if (max_len < 3) config_error("max_len must be at least 3");
    if (num_classes < 2) config_error("num_classes must be at least 2");
    if (!(dropout >= 0.0 && dropout < 1.0)) config_error("dropout must be in [0, 1)");
    if (std::holds_alternative<SinusoidalScheme>(scheme) && d_model % 2 != 0) {
        config_error("sinusoidal encoding needs an even d_model");
    }
    if (const auto* rope = std::get_if<RotaryScheme>(&scheme)) {
        if (head_dim() % 2 != 0) config_error("rotary encoding needs an even head dimension");
        if (!(rope->base > 1.0)) config_error("rotary base must be greater than 1");
    }
    if (const auto* alibi = std::get_if<AlibiScheme>(&scheme)) {
        if (!alibi->slopes.empty() && alibi->slopes.size() != num_heads) {
            config_error("ALiBi needs one slope per head");
        }
    }
}

std::vector<double> ModelConfig::alibi_slopes() const {
    if (const auto* alibi = std::get_if<AlibiScheme>(&scheme); alibi && !alibi->slopes.empty()) {
        return alibi->slopes;
    }
    return default_alibi_slopes(num_heads);
}

ModelParams ModelParams::zeros(const ModelConfig& config) {
    config.validate();
    const Index d = idx(config.d_model);
    const Index f = idx(config.ff_dim());
    ModelParams p;
    p.token_embedding = Matrix::Zero(idx(config.vocab_size), d);
    p.layers.resize(config.num_layers);
    for (auto& layer : p.layers) {
        layer.ln1_gain = RowVector::Zero(d);
        layer.ln1_bias = RowVector::Zero(d);
        layer.wq = Matrix::Zero(d, d);
        layer.wk = Matrix::Zero(d, d);
        layer.wv = Matrix::Zero(d, d);
        layer.wo = Matrix::Zero(d, d);
        layer.bq = RowVector::Zero(d);
        layer.bk = RowVector::Zero(d);
        layer.bv = RowVector::Zero(d);
        layer.bo = RowVector::Zero(d);
        layer.ln2_gain = RowVector::Zero(d);
        layer.ln2_bias = RowVector::Zero(d);
        layer.w1 = Matrix::Zero(d, f);
        layer.b1 = RowVector::Zero(f);
        layer.w2 = Matrix::Zero(f, d);
        layer.b2 = RowVector::Zero(d);
    }
    p.final_gain = RowVector::Zero(d);
    p.final_bias = RowVector::Zero(d);
    p.classifier = Matrix::Zero(d, idx(config.num_classes));
    p.classifier_bias = RowVector::Zero(idx(config.num_classes));
    return p;
}

ModelParams ModelParams::initialize(const ModelConfig& config, std::uint64_t seed,
                                    double stddev) {
    ModelParams p = zeros(config);
    Rng rng{mix_seed(seed, 0x1417)};
    fill_normal(p.token_embedding, stddev, rng);
    for (auto& layer : p.layers) {
        layer.ln1_gain.setOnes();
        layer.ln2_gain.setOnes();
        fill_normal(layer.wq, stddev, rng);
        fill_normal(layer.wk, stddev, rng);
        fill_normal(layer.wv, stddev, rng);
        fill_normal(layer.wo, stddev, rng);
        fill_normal(layer.w1, stddev, rng);
        fill_normal(layer.w2, stddev, rng);
    }
    p.final_gain.setOnes();
    fill_normal(p.classifier, stddev, rng);
    return p;
}

std::vector<TensorView> ModelParams::tensors() {
    std::vector<TensorView> out;
    visit_tensors(*this, [&](const std::string& name, auto& m, bool decay) {
        out.push_back({name, std::span<double>(m.data(), static_cast<std::size_t>(m.size())),
                       m.rows(), m.cols(), decay});
    });
    return out;
}

std::size_t ModelParams::size() const {
    std::size_t n = 0;
    visit_tensors(*this, [&](const std::string&, const auto& m, bool) {
        n += static_cast<std::size_t>(m.size());
    });
    return n;
}

void ModelParams::set_zero() {
    visit_tensors(*this, [](const std::string&, auto& m, bool) { m.setZero(); });
}

ModelParams& ModelParams::operator+=(const ModelParams& other) {
    auto mine = tensors();
    auto theirs = const_cast<ModelParams&>(other).tensors();
    if (mine.size() != theirs.size()) {
        throw ModelError(ModelError::Code::ShapeMismatch, "parameter sets differ in structure");
    }
    for (std::size_t t = 0; t < mine.size(); ++t) {
        if (mine[t].values.size() != theirs[t].values.size()) {
            throw ModelError(ModelError::Code::ShapeMismatch, "shape mismatch in " + mine[t].name);
        }
        for (std::size_t i = 0; i < mine[t].values.size(); ++i) {
            mine[t].values[i] += theirs[t].values[i];
        }
    }
    return *this;
}

ModelParams& ModelParams::operator*=(double factor) {
    visit_tensors(*this, [&](const std::string&, auto& m, bool) { m *= factor; });
    return *this;
}

bool ModelParams::all_finite() const {
    bool finite = true;
    visit_tensors(*this, [&](const std::string&, const auto& m, bool) {
        finite = finite && m.allFinite();
    });
    return finite;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
    auto ta = const_cast<ModelParams&>(a).tensors();
    auto tb = const_cast<ModelParams&>(b).tensors();
    if (ta.size() != tb.size()) {
        return false;
    }
    for (std::size_t t = 0; t < ta.size(); ++t) {
        if (ta[t].rows != tb[t].rows || ta[t].cols != tb[t].cols ||
            !std::equal(ta[t].values.begin(), ta[t].values.end(), tb[t].values.begin())) {
            return false;
        }
    }
    return true;
}

std::size_t count_layer_parameters(const ModelConfig& config) {
    const std::size_t d = config.d_model;
    const std::size_t f = config.ff_dim();
    const std::size_t norms = 2 * (2 * d);
    const std::size_t attention = 4 * (d * d + d);
    const std::size_t ffn = d * f + f + f * d + d;
    return norms + attention + ffn;
}

std::size_t count_parameters(const ModelConfig& config) {
    const std::size_t d = config.d_model;
    return config.vocab_size * d + config.num_layers * count_layer_parameters(config) + 2 * d +
           d * config.num_classes + config.num_classes;
}

EncoderModel::EncoderModel(ModelConfig config) : config_(std::move(config)) {
    config_.validate();
    if (std::holds_alternative<SinusoidalScheme>(config_.scheme)) {
        sinusoids_ = sinusoid_table(config_.max_len, config_.d_model);
    } else if (const auto* rope = std::get_if<RotaryScheme>(&config_.scheme)) {
        rope_ = rope_table(config_.max_len, config_.head_dim(), rope->base);
    } else {
        slopes_ = config_.alibi_slopes();
    }
}

void EncoderModel::check_input(const TokenSequence& input) const {
    if (input.ids.size() > config_.max_len) {
        throw ModelError(ModelError::Code::LengthExceeded,
                         "input of " + std::to_string(input.ids.size()) +
                             " tokens exceeds max_len " + std::to_string(config_.max_len));
    }
    if (input.valid_len == 0 || input.valid_len > input.ids.size()) {
        throw ModelError(ModelError::Code::LengthExceeded, "invalid valid_len");
    }
    for (const auto id : input.ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
            throw ModelError(ModelError::Code::IdOutOfRange,
                             "token id " + std::to_string(id) + " outside vocabulary of size " +
                                 std::to_string(config_.vocab_size));
        }
    }
}

RowVector EncoderModel::forward(const ModelParams& params, const TokenSequence& input, bool train,
                                Rng* rng, ForwardTrace* trace) const {
    return run(params, input, train, rng, trace, true);
}

std::vector<Matrix> EncoderModel::hidden_states(const ModelParams& params,
                                                const TokenSequence& input) const {
    ForwardTrace t;
    run(params, input, false, nullptr, &t, false);
    std::vector<Matrix> out;
    out.reserve(t.layers.size() + 1);
    for (auto& lt : t.layers) {
        out.push_back(std::move(lt.input));
    }
    out.push_back(std::move(t.hidden));
    return out;
}

RowVector EncoderModel::run(const ModelParams& params, const TokenSequence& input, bool train,
                            Rng* rng, ForwardTrace* trace, bool cls_only) const {
    check_input(input);
    const bool dropout = train && config_.dropout > 0.0;
    if (dropout && rng == nullptr) {
        throw std::invalid_argument("train-mode forward with dropout needs a random source");
    }

    const Index len = idx(input.ids.size());
    const Index valid = idx(input.valid_len);
    const Index d = idx(config_.d_model);
    const Index heads = idx(config_.num_heads);
    const Index dh = idx(config_.head_dim());
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const bool rotary = std::holds_alternative<RotaryScheme>(config_.scheme);

    ForwardTrace local;
    ForwardTrace& t = trace ? *trace : local;
    t.ids = input.ids;
    t.valid_len = input.valid_len;
    t.layers.resize(config_.num_layers);

    Matrix x(len, d);
    for (Index r = 0; r < len; ++r) {
        x.row(r) = params.token_embedding.row(input.ids[static_cast<std::size_t>(r)]);
    }
    if (sinusoids_.size() > 0) {
        x += sinusoids_.topRows(len);
    }

    Matrix scores;
    for (std::size_t l = 0; l < config_.num_layers; ++l) {
        const LayerParams& w = params.layers[l];
        LayerTrace& lt = t.layers[l];
        // Past the last layer only the CLS row is read, so its queries and
        // everything downstream of them are computed for that row alone.
        const Index rows = cls_only && l + 1 == config_.num_layers ? 1 : len;
        lt.input = x;
        layer_norm(x, w.ln1_gain, w.ln1_bias, lt.ln1_hat, lt.ln1_out, lt.ln1_rstd);

        lt.q.noalias() = lt.ln1_out.topRows(rows) * w.wq;
        lt.q.rowwise() += w.bq;
        lt.k.noalias() = lt.ln1_out * w.wk;
        lt.k.rowwise() += w.bk;
        lt.v.noalias() = lt.ln1_out * w.wv;
        lt.v.rowwise() += w.bv;
        if (rotary) {
            for (Index h = 0; h < heads; ++h) {
                rope_rotate_rows(lt.q.middleCols(h * dh, dh), rope_);
                rope_rotate_rows(lt.k.middleCols(h * dh, dh), rope_);
            }
        }

        lt.context.resize(rows, d);
        lt.probs.resize(static_cast<std::size_t>(heads));
        lt.probs_keep.assign(dropout ? static_cast<std::size_t>(heads) : 0, Matrix());
        for (Index h = 0; h < heads; ++h) {
            scores.noalias() = lt.q.middleCols(h * dh, dh) * lt.k.middleCols(h * dh, dh).transpose();
            scores *= scale;
            if (!slopes_.empty()) {
                const double slope = slopes_[static_cast<std::size_t>(h)];
                for (Index i = 0; i < rows; ++i) {
                    for (Index j = 0; j < len; ++j) {
                        scores(i, j) += slope * static_cast<double>(i > j ? i - j : j - i);
                    }
                }
            }
            Matrix& probs = lt.probs[static_cast<std::size_t>(h)];
            probs.setZero(rows, len);
            for (Index i = 0; i < rows; ++i) {
                const auto live = scores.row(i).head(valid);
                auto out = probs.row(i).head(valid);
                out = (live.array() - live.maxCoeff()).exp().matrix();
                out /= out.sum();
            }

            if (dropout) {
                Matrix& keep = lt.probs_keep[static_cast<std::size_t>(h)];
                keep = dropout_keep(rows, len, config_.dropout, *rng);
                lt.context.middleCols(h * dh, dh).noalias() =
                    (probs.array() * keep.array()).matrix() * lt.v.middleCols(h * dh, dh);
            } else {
                lt.context.middleCols(h * dh, dh).noalias() = probs * lt.v.middleCols(h * dh, dh);
            }
        }

        lt.mid = x.topRows(rows);
        lt.mid.noalias() += lt.context * w.wo;
        lt.mid.rowwise() += w.bo;

        layer_norm(lt.mid, w.ln2_gain, w.ln2_bias, lt.ln2_hat, lt.ln2_out, lt.ln2_rstd);
        lt.ff_pre.noalias() = lt.ln2_out * w.w1;
        lt.ff_pre.rowwise() += w.b1;
        lt.ff_cdf = lt.ff_pre.unaryExpr([](double v) { return normal_cdf(v); });
        lt.ff_act = (lt.ff_pre.array() * lt.ff_cdf.array()).matrix();
        Matrix ff;
        ff.noalias() = lt.ff_act * w.w2;
        ff.rowwise() += w.b2;
        if (dropout) {
            lt.ff_keep = dropout_keep(rows, d, config_.dropout, *rng);
            ff.array() *= lt.ff_keep.array();
        } else {
            lt.ff_keep.resize(0, 0);
        }
        x = lt.mid + ff;
    }

    t.hidden = x;
    layer_norm(x, params.final_gain, params.final_bias, t.final_hat, t.final_out, t.final_rstd);
    t.logits = t.final_out.row(0) * params.classifier + params.classifier_bias;
    return t.logits;
}

void EncoderModel::backward(const ModelParams& params, const ForwardTrace& t,
                            const RowVector& dlogits, ModelParams& grads) const {
    const Index len = idx(t.ids.size());
    const Index d = idx(config_.d_model);
    const Index heads = idx(config_.num_heads);
    const Index dh = idx(config_.head_dim());
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const bool rotary = std::holds_alternative<RotaryScheme>(config_.scheme);

    grads.classifier.noalias() += t.final_out.row(0).transpose() * dlogits;
    grads.classifier_bias += dlogits;

    // Only the CLS row reaches the classifier.
    Matrix dfinal = Matrix::Zero(t.hidden.rows(), d);
    dfinal.row(0).noalias() = dlogits * params.classifier.transpose();
    Matrix dx = layer_norm_backward(dfinal, t.final_hat, t.final_rstd, params.final_gain,
                                    grads.final_gain, grads.final_bias);

    Matrix dscores;
    Matrix dprobs;
    for (std::size_t l = config_.num_layers; l-- > 0;) {
        const LayerParams& w = params.layers[l];
        LayerParams& g = grads.layers[l];
        const LayerTrace& lt = t.layers[l];
        const Index rows = lt.q.rows();
        dscores.resize(rows, len);

        // x_out = mid + dropout(ffn(ln2(mid)))
        Matrix dff = dx;
        if (lt.ff_keep.size() > 0) {
            dff.array() *= lt.ff_keep.array();
        }
        g.w2.noalias() += lt.ff_act.transpose() * dff;
        g.b2 += dff.colwise().sum();
        Matrix dpre;
        dpre.noalias() = dff * w.w2.transpose();
        dpre.array() *= gelu_grad(lt.ff_pre, lt.ff_cdf).array();
        g.w1.noalias() += lt.ln2_out.transpose() * dpre;
        g.b1 += dpre.colwise().sum();
        Matrix dln2;
        dln2.noalias() = dpre * w.w1.transpose();
        Matrix dmid = dx + layer_norm_backward(dln2, lt.ln2_hat, lt.ln2_rstd, w.ln2_gain,
                                               g.ln2_gain, g.ln2_bias);

        // mid = input + attention(ln1(input))
        g.wo.noalias() += lt.context.transpose() * dmid;
        g.bo += dmid.colwise().sum();
        Matrix dcontext;
        dcontext.noalias() = dmid * w.wo.transpose();

        Matrix dq(rows, d), dk(len, d), dv(len, d);
        for (Index h = 0; h < heads; ++h) {
            const auto hs = static_cast<std::size_t>(h);
            const Matrix& probs = lt.probs[hs];
            const bool dropped = !lt.probs_keep.empty();
            const auto dctx = dcontext.middleCols(h * dh, dh);
            if (dropped) {
                const Matrix used = probs.array() * lt.probs_keep[hs].array();
                dv.middleCols(h * dh, dh).noalias() = used.transpose() * dctx;
            } else {
                dv.middleCols(h * dh, dh).noalias() = probs.transpose() * dctx;
            }
            dprobs.noalias() = dctx * lt.v.middleCols(h * dh, dh).transpose();
            if (dropped) {
                dprobs.array() *= lt.probs_keep[hs].array();
            }
            // softmax backward: dS = P * (dP - rowsum(dP * P))
            for (Index i = 0; i < rows; ++i) {
                const double inner = dprobs.row(i).dot(probs.row(i));
                dscores.row(i) = (probs.row(i).array() * (dprobs.row(i).array() - inner)) * scale;
            }
            dq.middleCols(h * dh, dh).noalias() = dscores * lt.k.middleCols(h * dh, dh);
            dk.middleCols(h * dh, dh).noalias() = dscores.transpose() * lt.q.middleCols(h * dh, dh);
            if (rotary) {
                rope_rotate_rows(dq.middleCols(h * dh, dh), rope_, true);
                rope_rotate_rows(dk.middleCols(h * dh, dh), rope_, true);
            }
        }

        g.wq.noalias() += lt.ln1_out.topRows(rows).transpose() * dq;
        g.bq += dq.colwise().sum();
        g.wk.noalias() += lt.ln1_out.transpose() * dk;
        g.bk += dk.colwise().sum();
        g.wv.noalias() += lt.ln1_out.transpose() * dv;
        g.bv += dv.colwise().sum();
        Matrix dln1;
        dln1.noalias() = dk * w.wk.transpose();
        dln1.noalias() += dv * w.wv.transpose();
        dln1.topRows(rows).noalias() += dq * w.wq.transpose();
        dx = layer_norm_backward(dln1, lt.ln1_hat, lt.ln1_rstd, w.ln1_gain, g.ln1_gain,
                                 g.ln1_bias);
        dx.topRows(rows) += dmid;
    }

    for (Index r = 0; r < len; ++r) {
        grads.token_embedding.row(t.ids[static_cast<std::size_t>(r)]) += dx.row(r);
    }
}

double cross_entropy(const RowVector& logits, int label) {
    const double max = logits.maxCoeff();
    const double lse = max + std::log((logits.array() - max).exp().sum());
    return lse - logits(label);
}

BatchLoss EncoderModel::loss_and_gradients(const ModelParams& params,
                                           std::span<const Example> batch, bool train,
                                           std::uint64_t seed, ModelParams& grads,
                                           std::size_t threads) const {
    if (batch.empty()) {
        throw ModelError(ModelError::Code::EmptyBatch, "loss over an empty batch");
    }
    for (const auto& ex : batch) {
        if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= config_.num_classes) {
            throw ModelError(ModelError::Code::LabelOutOfRange,
                             "label " + std::to_string(ex.label) + " out of range");
        }
    }
    const std::size_t shards = std::clamp<std::size_t>(threads, 1, batch.size());
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    struct ShardResult {
        ModelParams grads;
        double loss = 0.0;
        std::size_t correct = 0;
    };
    std::vector<ShardResult> results(shards);

    auto run_shard = [&](std::size_t s) {
        ShardResult& out = results[s];
        out.grads = ModelParams::zeros(config_);
        const std::size_t begin = s * batch.size() / shards;
        const std::size_t end = (s + 1) * batch.size() / shards;
        ForwardTrace trace;
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = make_rng(seed, i);
            const RowVector logits = forward(params, batch[i].tokens, train, &rng, &trace);
            const int label = batch[i].label;
            out.loss += cross_entropy(logits, label);
            Eigen::Index argmax = 0;
            logits.maxCoeff(&argmax);
            out.correct += argmax == label ? 1 : 0;

            RowVector dlogits = (logits.array() - logits.maxCoeff()).exp().matrix();
            dlogits /= dlogits.sum();
            dlogits(label) -= 1.0;
            dlogits *= inv_batch;
            backward(params, trace, dlogits, out.grads);
        }
    };

    if (shards == 1) {
        run_shard(0);
    } else {
        std::vector<std::jthread> workers;
        workers.reserve(shards);
        for (std::size_t s = 0; s < shards; ++s) {
            workers.emplace_back(run_shard, s);
        }
    }

    grads = std::move(results[0].grads);
    BatchLoss total{results[0].loss, results[0].correct};
    for (std::size_t s = 1; s < shards; ++s) {
        grads += results[s].grads;
        total.loss += results[s].loss;
        total.correct += results[s].correct;
    }
    total.loss *= inv_batch;
    return total;
}

double EncoderModel::loss(const ModelParams& params, std::span<const Example> batch, bool train,
                          std::uint64_t seed) const {
    if (batch.empty()) {
        throw ModelError(ModelError::Code::EmptyBatch, "loss over an empty batch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Rng rng = make_rng(seed, i);
        total += cross_entropy(forward(params, batch[i].tokens, train, &rng), batch[i].label);
    }
    return total / static_cast<double>(batch.size());
}

int EncoderModel::predict(const ModelParams& params, const TokenSequence& input) const {
    const RowVector logits = forward(params, input, false);
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.size(); ++c) {
        if (logits(c) > logits(best)) {
            best = c;
        }
    }
    return static_cast<int>(best);
}

}  // namespace genoseq
