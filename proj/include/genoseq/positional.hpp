#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace genoseq {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

class PositionalError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SinusoidalScheme {
    friend bool operator==(const SinusoidalScheme&, const SinusoidalScheme&) = default;
};

/// Per-head slopes m_h multiplying |i - j|. Empty means "derive from the
/// head count with default_alibi_slopes()".
struct AlibiScheme {
    std::vector<double> slopes;
    friend bool operator==(const AlibiScheme&, const AlibiScheme&) = default;
};

struct RotaryScheme {
    double base = 10000.0;
    friend bool operator==(const RotaryScheme&, const RotaryScheme&) = default;
};

using PositionalScheme = std::variant<SinusoidalScheme, AlibiScheme, RotaryScheme>;

/// `sape`, `alibi`, `alibi:<m1>,<m2>,...`, `rope` or `rope:<base>`.
PositionalScheme parse_scheme(std::string_view name);
std::string scheme_name(const PositionalScheme& scheme);

/// (max_len x d_model) table: (pos, 2i) = sin(pos / 10000^(2i/d)),
/// (pos, 2i+1) = cos(same angle).
Matrix sinusoid_table(std::size_t max_len, std::size_t d_model);

/// m_h = -2^(-8h/H), h = 1..H. Negative so the bias penalizes distance.
std::vector<double> default_alibi_slopes(std::size_t num_heads);

/// One (seq_len x seq_len) matrix per slope with entry slope * |i - j|.
std::vector<Matrix> alibi_bias(std::size_t seq_len, std::span<const double> slopes);

/// Rotation angle for dimension pair `pair` of a d-dimensional vector.
double rope_angle(std::size_t pos, std::size_t pair, std::size_t dim, double base = 10000.0);

/// Rotates each adjacent pair (x[2i], x[2i+1]) by rope_angle(pos, i, d).
std::vector<double> rope_rotate(std::span<const double> vec, std::size_t pos,
                                double base = 10000.0);

/// cos/sin of rope_angle(pos, i, dim) for pos < seq_len, i < dim / 2.
struct RopeTable {
    Matrix cos;
    Matrix sin;
};

RopeTable rope_table(std::size_t seq_len, std::size_t dim, double base = 10000.0);

/// In-place rotation of every row of `block` (row r sits at position r).
/// `inverse` applies the transposed rotation, used by the backward pass.
void rope_rotate_rows(Eigen::Ref<Matrix> block, const RopeTable& table, bool inverse = false);

}  // namespace genoseq
