#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace genoseq {

/// C x C counts indexed (true class, predicted class).
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes = 2);
    ConfusionMatrix(std::size_t num_classes, std::vector<std::uint64_t> counts);

    std::size_t num_classes() const noexcept { return classes_; }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const {
        return counts_.at(truth * classes_ + predicted);
    }
    std::uint64_t total() const noexcept;

    void add(std::size_t truth, std::size_t predicted, std::uint64_t n = 1);
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t classes_;
    std::vector<std::uint64_t> counts_;
};

class EmptyMatrixError : public std::invalid_argument {
public:
    EmptyMatrixError() : std::invalid_argument("MCC of an empty confusion matrix") {}
};

/// Multiclass Matthews correlation (Gorodkin's R_K):
///   (c*s - sum_k p_k t_k) / sqrt((s^2 - sum_k p_k^2)(s^2 - sum_k t_k^2))
/// with c = trace, s = total, t = true-class totals, p = predicted totals.
/// Equals the binary MCC for C = 2; 0 when the denominator vanishes.
double mcc(const ConfusionMatrix& cm);

}  // namespace genoseq
