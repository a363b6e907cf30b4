#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "genoseq/model.hpp"

namespace genoseq {

/// Linear warmup over the first ceil(0.1 * total_steps) steps, then cosine
/// decay to zero at total_steps.
double lr_at(std::size_t step, std::size_t total_steps, double lr_peak);

/// Number of warmup steps used by lr_at().
std::size_t warmup_steps(std::size_t total_steps);

struct AdamWOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

/// AdamW with bias correction and decoupled weight decay:
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * p
/// Tensors flagged decay=false (normalization gains/offsets) skip the decay.
class AdamW {
public:
    explicit AdamW(AdamWOptions options = {}) : options_(options) {}

    const AdamWOptions& options() const noexcept { return options_; }
    std::uint64_t step_count() const noexcept { return step_; }

    /// Applies one update with learning rate `lr`. Moments are allocated on
    /// the first call. Throws ModelError(ShapeMismatch).
    void step(ModelParams& params, ModelParams& grads, double lr);

private:
    AdamWOptions options_;
    std::uint64_t step_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace genoseq
