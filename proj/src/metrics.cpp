#include "genoseq/metrics.hpp"

#include <cmath>
#include <numeric>

namespace genoseq {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : classes_(num_classes), counts_(num_classes * num_classes, 0) {
    if (num_classes == 0) {
        throw std::invalid_argument("confusion matrix needs at least one class");
    }
}

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes, std::vector<std::uint64_t> counts)
    : classes_(num_classes), counts_(std::move(counts)) {
    if (num_classes == 0 || counts_.size() != num_classes * num_classes) {
        throw std::invalid_argument("confusion matrix counts must be num_classes^2");
    }
}

std::uint64_t ConfusionMatrix::total() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::uint64_t n) {
    if (truth >= classes_ || predicted >= classes_) {
        throw std::out_of_range("class index outside confusion matrix");
    }
    counts_[truth * classes_ + predicted] += n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.classes_ != classes_) {
        throw std::invalid_argument("cannot merge confusion matrices of different sizes");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        counts_[i] += other.counts_[i];
    }
    return *this;
}

double mcc(const ConfusionMatrix& cm) {
    const std::size_t k = cm.num_classes();
    // Integer sums are exact; 128-bit products cover any realistic total.
    __extension__ typedef __int128 Wide;
    Wide s = 0;
    Wide c = 0;
    std::vector<Wide> t(k, 0);
    std::vector<Wide> p(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const Wide n = cm.at(i, j);
            s += n;
            t[i] += n;
            p[j] += n;
        }
        c += cm.at(i, i);
    }
    if (s == 0) {
        throw EmptyMatrixError();
    }
    Wide pt = 0;
    Wide pp = 0;
    Wide tt = 0;
    for (std::size_t i = 0; i < k; ++i) {
        pt += p[i] * t[i];
        pp += p[i] * p[i];
        tt += t[i] * t[i];
    }
    const Wide numerator = c * s - pt;
    const Wide left = s * s - pp;
    const Wide right = s * s - tt;
    if (left == 0 || right == 0) {
        return 0.0;
    }
    return static_cast<double>(numerator) /
           (std::sqrt(static_cast<double>(left)) * std::sqrt(static_cast<double>(right)));
}

}  // namespace genoseq
