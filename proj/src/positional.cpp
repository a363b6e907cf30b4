#include "genoseq/positional.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace genoseq {

PositionalScheme parse_scheme(std::string_view name) {
    if (name == "sape") {
        return SinusoidalScheme{};
    }
    if (name == "rope") {
        return RotaryScheme{};
    }
    if (name.starts_with("rope:")) {
        const std::string text(name.substr(5));
        char* end = nullptr;
        const double base = std::strtod(text.c_str(), &end);
        if (text.empty() || end != text.c_str() + text.size() || !(base > 1.0)) {
            throw PositionalError("bad rotary base '" + text + "'");
        }
        return RotaryScheme{base};
    }
    if (name == "alibi") {
        return AlibiScheme{};
    }
    if (name.starts_with("alibi:")) {
        AlibiScheme scheme;
        std::stringstream in{std::string(name.substr(6))};
        std::string item;
        while (std::getline(in, item, ',')) {
            char* end = nullptr;
            const double v = std::strtod(item.c_str(), &end);
            if (item.empty() || end != item.c_str() + item.size()) {
                throw PositionalError("bad ALiBi slope '" + item + "'");
            }
            scheme.slopes.push_back(v);
        }
        if (scheme.slopes.empty()) {
            throw PositionalError("alibi: needs at least one slope");
        }
        return scheme;
    }
    throw PositionalError("unknown positional scheme '" + std::string(name) +
                          "' (expected sape, alibi or rope)");
}

std::string scheme_name(const PositionalScheme& scheme) {
    if (std::holds_alternative<SinusoidalScheme>(scheme)) {
        return "sape";
    }
    if (const auto* alibi = std::get_if<AlibiScheme>(&scheme)) {
        if (alibi->slopes.empty()) {
            return "alibi";
        }
        std::ostringstream out;
        out.precision(17);
        out << "alibi:";
        for (std::size_t h = 0; h < alibi->slopes.size(); ++h) {
            out << (h ? "," : "") << alibi->slopes[h];
        }
        return out.str();
    }
    const double base = std::get<RotaryScheme>(scheme).base;
    if (base == 10000.0) {
        return "rope";
    }
    std::ostringstream out;
    out.precision(17);
    out << "rope:" << base;
    return out.str();
}

Matrix sinusoid_table(std::size_t max_len, std::size_t d_model) {
    if (d_model % 2 != 0) {
        throw PositionalError("sinusoid table needs an even model dimension, got " +
                              std::to_string(d_model));
    }
    if (max_len == 0) {
        throw PositionalError("sinusoid table needs max_len >= 1");
    }
    Matrix table(static_cast<Eigen::Index>(max_len), static_cast<Eigen::Index>(d_model));
    for (std::size_t i = 0; 2 * i < d_model; ++i) {
        const double denom =
            std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d_model));
        for (std::size_t pos = 0; pos < max_len; ++pos) {
            const double angle = static_cast<double>(pos) / denom;
            table(static_cast<Eigen::Index>(pos), static_cast<Eigen::Index>(2 * i)) =
                std::sin(angle);
            table(static_cast<Eigen::Index>(pos), static_cast<Eigen::Index>(2 * i + 1)) =
                std::cos(angle);
        }
    }
    return table;
}

std::vector<double> default_alibi_slopes(std::size_t num_heads) {
    if (num_heads == 0) {
        throw PositionalError("ALiBi needs at least one head");
    }
    std::vector<double> slopes;
    slopes.reserve(num_heads);
    const double heads = static_cast<double>(num_heads);
    for (std::size_t h = 1; h <= num_heads; ++h) {
        slopes.push_back(-std::exp2(-8.0 * static_cast<double>(h) / heads));
    }
    return slopes;
}

std::vector<Matrix> alibi_bias(std::size_t seq_len, std::span<const double> slopes) {
    if (seq_len == 0 || slopes.empty()) {
        throw PositionalError("ALiBi bias needs seq_len >= 1 and at least one slope");
    }
    const auto n = static_cast<Eigen::Index>(seq_len);
    std::vector<Matrix> biases;
    biases.reserve(slopes.size());
    for (const double slope : slopes) {
        Matrix bias(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                bias(i, j) = slope * static_cast<double>(i > j ? i - j : j - i);
            }
        }
        biases.push_back(std::move(bias));
    }
    return biases;
}

double rope_angle(std::size_t pos, std::size_t pair, std::size_t dim, double base) {
    return static_cast<double>(pos) /
           std::pow(base, static_cast<double>(2 * pair) / static_cast<double>(dim));
}

std::vector<double> rope_rotate(std::span<const double> vec, std::size_t pos, double base) {
    if (vec.size() % 2 != 0) {
        throw PositionalError("RoPE needs an even dimension, got " + std::to_string(vec.size()));
    }
    std::vector<double> out(vec.size());
    for (std::size_t i = 0; 2 * i < vec.size(); ++i) {
        const double theta = rope_angle(pos, i, vec.size(), base);
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        const double x0 = vec[2 * i];
        const double x1 = vec[2 * i + 1];
        out[2 * i] = c * x0 - s * x1;
        out[2 * i + 1] = s * x0 + c * x1;
    }
    return out;
}

RopeTable rope_table(std::size_t seq_len, std::size_t dim, double base) {
    if (dim % 2 != 0) {
        throw PositionalError("RoPE needs an even dimension, got " + std::to_string(dim));
    }
    const auto rows = static_cast<Eigen::Index>(seq_len);
    const auto pairs = static_cast<Eigen::Index>(dim / 2);
    RopeTable table{Matrix(rows, pairs), Matrix(rows, pairs)};
    for (Eigen::Index pos = 0; pos < rows; ++pos) {
        for (Eigen::Index i = 0; i < pairs; ++i) {
            const double theta = rope_angle(static_cast<std::size_t>(pos),
                                            static_cast<std::size_t>(i), dim, base);
            table.cos(pos, i) = std::cos(theta);
            table.sin(pos, i) = std::sin(theta);
        }
    }
    return table;
}

void rope_rotate_rows(Eigen::Ref<Matrix> block, const RopeTable& table, bool inverse) {
    const double sign = inverse ? -1.0 : 1.0;
    for (Eigen::Index pos = 0; pos < block.rows(); ++pos) {
        for (Eigen::Index i = 0; i < table.cos.cols(); ++i) {
            const double c = table.cos(pos, i);
            const double s = sign * table.sin(pos, i);
            const double x0 = block(pos, 2 * i);
            const double x1 = block(pos, 2 * i + 1);
            block(pos, 2 * i) = c * x0 - s * x1;
            block(pos, 2 * i + 1) = s * x0 + c * x1;
        }
    }
}

}  // namespace genoseq
