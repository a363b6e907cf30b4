#include "genoseq/optim.hpp"

#include <cmath>
#include <numbers>

namespace genoseq {

std::size_t warmup_steps(std::size_t total_steps) {
    // ceil(0.1 * total) without floating point.
    return (total_steps + 9) / 10;
}

double lr_at(std::size_t step, std::size_t total_steps, double lr_peak) {
    if (total_steps == 0) {
        return 0.0;
    }
    const std::size_t warmup = warmup_steps(total_steps);
    if (step <= warmup) {
        return lr_peak * static_cast<double>(step) / static_cast<double>(warmup);
    }
    if (step >= total_steps) {
        return 0.0;
    }
    const double progress =
        static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
    return lr_peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void AdamW::step(ModelParams& params, ModelParams& grads, double lr) {
    auto p = params.tensors();
    auto g = grads.tensors();
    if (p.size() != g.size()) {
        throw ModelError(ModelError::Code::ShapeMismatch, "gradient structure differs from params");
    }
    if (m_.empty()) {
        m_.resize(p.size());
        v_.resize(p.size());
        for (std::size_t t = 0; t < p.size(); ++t) {
            m_[t].assign(p[t].values.size(), 0.0);
            v_[t].assign(p[t].values.size(), 0.0);
        }
    }
    if (m_.size() != p.size()) {
        throw ModelError(ModelError::Code::ShapeMismatch, "optimizer state differs from params");
    }

    ++step_;
    const double b1 = options_.beta1;
    const double b2 = options_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));

    for (std::size_t t = 0; t < p.size(); ++t) {
        auto& pv = p[t].values;
        const auto& gv = g[t].values;
        if (pv.size() != gv.size() || pv.size() != m_[t].size()) {
            throw ModelError(ModelError::Code::ShapeMismatch, "shape mismatch in " + p[t].name);
        }
        const double decay = p[t].decay ? options_.weight_decay : 0.0;
        auto& m = m_[t];
        auto& v = v_[t];
        for (std::size_t i = 0; i < pv.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * gv[i];
            v[i] = b2 * v[i] + (1.0 - b2) * gv[i] * gv[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            const double old = pv[i];
            pv[i] = old - lr * (m_hat / (std::sqrt(v_hat) + options_.eps)) - lr * decay * old;
        }
    }
}

}  // namespace genoseq
