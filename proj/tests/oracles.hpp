#pragma once

// Slow, obviously-correct reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Merge {
    std::string left;
    std::string right;
    bool operator==(const Merge&) const = default;
};

// Splits at N, then recounts every adjacent pair across the corpus on every
// iteration. Ties go to the smallest (left, right); stops below count 2.
// `ties`, when given, counts iterations where several pairs shared the top count.
inline std::vector<Merge> bpe_train(const std::vector<std::string>& corpus,
                                    std::size_t num_merges, std::size_t* ties = nullptr) {
    std::vector<std::vector<std::string>> words;
    for (const auto& seq : corpus) {
        std::vector<std::string> word;
        for (const char c : seq) {
            if (c == 'N') {
                if (!word.empty()) {
                    words.push_back(word);
                }
                word.clear();
            } else {
                word.emplace_back(1, c);
            }
        }
        if (!word.empty()) {
            words.push_back(word);
        }
    }

    std::vector<Merge> merges;
    for (std::size_t it = 0; it < num_merges; ++it) {
        std::map<std::pair<std::string, std::string>, long> counts;
        for (const auto& w : words) {
            for (std::size_t i = 0; i + 1 < w.size(); ++i) {
                ++counts[{w[i], w[i + 1]}];
            }
        }
        long best = 0;
        std::pair<std::string, std::string> choice;
        // std::map iterates pairs in ascending order, so the first maximum wins.
        for (const auto& [pair, count] : counts) {
            if (count > best) {
                best = count;
                choice = pair;
            }
        }
        if (best < 2) {
            break;
        }
        if (ties && std::count_if(counts.begin(), counts.end(),
                                  [&](const auto& kv) { return kv.second == best; }) > 1) {
            ++*ties;
        }
        merges.push_back({choice.first, choice.second});
        for (auto& w : words) {
            std::vector<std::string> next;
            for (std::size_t i = 0; i < w.size(); ++i) {
                if (i + 1 < w.size() && w[i] == choice.first && w[i + 1] == choice.second) {
                    next.push_back(w[i] + w[i + 1]);
                    ++i;
                } else {
                    next.push_back(w[i]);
                }
            }
            w = std::move(next);
        }
    }
    return merges;
}

// Applies every merge in order, one full left-to-right pass each.
inline std::vector<std::string> bpe_encode(const std::string& seq,
                                           const std::vector<Merge>& merges) {
    std::vector<std::string> symbols;
    for (const char c : seq) {
        symbols.push_back(c == 'N' ? std::string("[UNK]") : std::string(1, c));
    }
    for (const auto& m : merges) {
        std::vector<std::string> next;
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            if (i + 1 < symbols.size() && symbols[i] == m.left && symbols[i + 1] == m.right) {
                next.push_back(symbols[i] + symbols[i + 1]);
                ++i;
            } else {
                next.push_back(symbols[i]);
            }
        }
        symbols = std::move(next);
    }
    return symbols;
}

// Binary MCC straight from TP/TN/FP/FN; 0 on a zero denominator.
inline double binary_mcc(double tp, double tn, double fp, double fn) {
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (den == 0.0) {
        return 0.0;
    }
    return (tp * tn - fp * fn) / std::sqrt(den);
}

// Multiclass MCC as the Pearson correlation of one-hot truth and prediction
// indicator matrices, expanding every counted sample.
inline double multiclass_mcc(const std::vector<std::vector<std::uint64_t>>& cm) {
    const std::size_t k = cm.size();
    std::vector<std::pair<std::size_t, std::size_t>> samples;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            for (std::uint64_t n = 0; n < cm[i][j]; ++n) {
                samples.emplace_back(i, j);
            }
        }
    }
    const double s = static_cast<double>(samples.size());
    std::vector<double> mean_x(k, 0.0), mean_y(k, 0.0);
    for (const auto& [t, p] : samples) {
        mean_x[t] += 1.0 / s;
        mean_y[p] += 1.0 / s;
    }
    double cov_xy = 0.0, cov_xx = 0.0, cov_yy = 0.0;
    for (const auto& [t, p] : samples) {
        for (std::size_t c = 0; c < k; ++c) {
            const double x = (t == c ? 1.0 : 0.0) - mean_x[c];
            const double y = (p == c ? 1.0 : 0.0) - mean_y[c];
            cov_xy += x * y;
            cov_xx += x * x;
            cov_yy += y * y;
        }
    }
    if (cov_xx == 0.0 || cov_yy == 0.0) {
        return 0.0;
    }
    return cov_xy / std::sqrt(cov_xx * cov_yy);
}

// Gorodkin's triple-sum form with exact integer numerator and denominator
// factors; only the final division and square roots are floating point.
inline long double gorodkin_mcc(const std::vector<std::vector<std::uint64_t>>& cm) {
    __extension__ typedef __int128 Wide;
    const std::size_t k = cm.size();
    Wide num = 0;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            for (std::size_t c = 0; c < k; ++c) {
                num += static_cast<Wide>(cm[a][a]) * static_cast<Wide>(cm[b][c]) -
                       static_cast<Wide>(cm[a][b]) * static_cast<Wide>(cm[c][a]);
            }
        }
    }
    Wide rows = 0, cols = 0;
    for (std::size_t a = 0; a < k; ++a) {
        Wide row_a = 0, col_a = 0, row_rest = 0, col_rest = 0;
        for (std::size_t b = 0; b < k; ++b) {
            row_a += cm[a][b];
            col_a += cm[b][a];
            for (std::size_t c = 0; c < k; ++c) {
                if (b != a) {
                    row_rest += cm[b][c];
                    col_rest += cm[c][b];
                }
            }
        }
        rows += row_a * row_rest;
        cols += col_a * col_rest;
    }
    if (rows == 0 || cols == 0) {
        return 0.0L;
    }
    return static_cast<long double>(num) /
           (std::sqrt(static_cast<long double>(rows)) * std::sqrt(static_cast<long double>(cols)));
}

// Direct evaluation of one sinusoid table entry.
inline double sinusoid(std::size_t pos, std::size_t col, std::size_t d) {
    const double i2 = static_cast<double>(col - col % 2);
    const double angle = static_cast<double>(pos) / std::pow(10000.0, i2 / static_cast<double>(d));
    return col % 2 == 0 ? std::sin(angle) : std::cos(angle);
}

}  // namespace oracle
