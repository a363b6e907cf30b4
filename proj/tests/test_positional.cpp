#include <doctest.h>

#include <cmath>
#include <numbers>

#include "genoseq/positional.hpp"
#include "genoseq/random.hpp"
#include "oracles.hpp"

using namespace genoseq;

namespace {

std::vector<double> random_vector(std::size_t d, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(d);
    for (auto& x : v) {
        x = normal(rng);
    }
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

}  // namespace

TEST_CASE("scheme names") {
    CHECK(scheme_name(parse_scheme("sape")) == "sape");
    CHECK(scheme_name(parse_scheme("alibi")) == "alibi");
    CHECK(scheme_name(parse_scheme("rope")) == "rope");
    CHECK(std::get<AlibiScheme>(parse_scheme("alibi:-0.5,-0.25")).slopes ==
          std::vector<double>{-0.5, -0.25});
    CHECK(std::get<RotaryScheme>(parse_scheme("rope:500")).base == 500.0);
    CHECK_THROWS_AS(parse_scheme("learned"), PositionalError);
    CHECK_THROWS_AS(parse_scheme("rope:1"), PositionalError);
    CHECK_THROWS_AS(parse_scheme("alibi:x"), PositionalError);
}

TEST_CASE("sinusoid table") {
    const Matrix t = sinusoid_table(4, 4);
    CHECK(t(0, 0) == 0.0);
    CHECK(t(0, 1) == 1.0);
    CHECK(t(0, 2) == 0.0);
    CHECK(t(0, 3) == 1.0);
    CHECK(t(1, 0) == doctest::Approx(0.841471).epsilon(1e-6));
    CHECK(t(1, 2) == doctest::Approx(0.0099998).epsilon(1e-6));

    const std::size_t len = 300, d = 64;
    const Matrix big = sinusoid_table(len, d);
    double worst = 0.0;
    for (std::size_t p = 0; p < len; ++p) {
        for (std::size_t c = 0; c < d; ++c) {
            const double v = big(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c));
            CHECK(std::abs(v) <= 1.0);
            worst = std::max(worst, std::abs(v - oracle::sinusoid(p, c, d)));
        }
    }
    CHECK(worst <= 1e-12);
    CHECK_THROWS_AS(sinusoid_table(4, 5), PositionalError);
    CHECK_THROWS_AS(sinusoid_table(0, 4), PositionalError);
}

TEST_CASE("alibi slopes") {
    CHECK(default_alibi_slopes(8) ==
          std::vector<double>{-1.0 / 2, -1.0 / 4, -1.0 / 8, -1.0 / 16, -1.0 / 32, -1.0 / 64,
                              -1.0 / 128, -1.0 / 256});
    CHECK(default_alibi_slopes(1) == std::vector<double>{-1.0 / 256});
    for (std::size_t h = 1; h <= 16; ++h) {
        const auto slopes = default_alibi_slopes(h);
        REQUIRE(slopes.size() == h);
        for (std::size_t i = 0; i < h; ++i) {
            CHECK(slopes[i] < 0.0);
            if (i > 0) {
                CHECK(slopes[i] > slopes[i - 1]);
            }
        }
    }
}

TEST_CASE("alibi bias is exact and symmetric") {
    const std::vector<double> slopes{-0.5, -0.3, -1.0 / 3.0};
    const auto bias = alibi_bias(37, slopes);
    REQUIRE(bias.size() == 3);
    CHECK(bias[0](0, 2) == -1.0);
    for (std::size_t h = 0; h < 3; ++h) {
        for (Eigen::Index i = 0; i < 37; ++i) {
            for (Eigen::Index j = 0; j < 37; ++j) {
                const double distance = static_cast<double>(std::abs(i - j));
                CHECK(bias[h](i, j) == slopes[h] * distance);
                CHECK(bias[h](i, j) == bias[h](j, i));
            }
            CHECK(bias[h](i, i) == 0.0);
        }
    }
}

TEST_CASE("rope examples") {
    Rng rng(3);
    const auto v = random_vector(16, rng);
    CHECK(rope_rotate(v, 0) == v);

    const std::vector<double> unit{1.0, 0.0};
    CHECK(rope_angle(1, 0, 2) == 1.0);
    const auto turned = rope_rotate(unit, 1);
    CHECK(turned[0] == doctest::Approx(std::cos(1.0)).epsilon(1e-15));
    CHECK(turned[1] == doctest::Approx(std::sin(1.0)).epsilon(1e-15));

    // Pair 1 turns by pos / sqrt(base): a quarter turn for this base.
    const double pos = 7.0;
    const double base = std::pow(2.0 * pos / std::numbers::pi, 2.0);
    const auto quarter = rope_rotate(std::vector<double>{0.0, 0.0, 1.0, 0.0}, 7, base);
    CHECK(std::abs(quarter[2]) <= 1e-12);
    CHECK(std::abs(quarter[3] - 1.0) <= 1e-12);
    CHECK_THROWS_AS(rope_rotate(std::vector<double>{1.0, 2.0, 3.0}, 1), PositionalError);
}

TEST_CASE("rope properties") {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t d = 2 * (1 + rng() % 32);
        const auto q = random_vector(d, rng);
        const auto k = random_vector(d, rng);
        const auto r = random_vector(d, rng);
        const std::size_t i = rng() % 512, j = rng() % 512, s = rng() % 512;

        const double base_dot = dot(rope_rotate(q, i), rope_rotate(k, j));
        CHECK(std::abs(base_dot - dot(rope_rotate(q, i + s), rope_rotate(k, j + s))) <= 1e-6);

        const auto rq = rope_rotate(q, i);
        CHECK(std::sqrt(dot(rq, rq)) == doctest::Approx(std::sqrt(dot(q, q))).epsilon(1e-9));

        const double alpha = 1.7, beta = -0.4;
        std::vector<double> mix(d);
        for (std::size_t c = 0; c < d; ++c) {
            mix[c] = alpha * q[c] + beta * r[c];
        }
        const auto lhs = rope_rotate(mix, i);
        const auto rr = rope_rotate(r, i);
        for (std::size_t c = 0; c < d; ++c) {
            CHECK(std::abs(lhs[c] - (alpha * rq[c] + beta * rr[c])) <= 1e-9);
        }
    }
}

TEST_CASE("rope table rotation matches the vector kernel") {
    Rng rng(9);
    const std::size_t len = 40, d = 8;
    Matrix block(len, d);
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
        const auto v = random_vector(d, rng);
        for (std::size_t c = 0; c < d; ++c) {
            block(r, static_cast<Eigen::Index>(c)) = v[c];
        }
    }
    const Matrix original = block;
    const RopeTable table = rope_table(len, d);
    rope_rotate_rows(block, table);
    for (std::size_t p = 0; p < len; ++p) {
        std::vector<double> row(d);
        for (std::size_t c = 0; c < d; ++c) {
            row[c] = original(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c));
        }
        const auto expected = rope_rotate(row, p);
        for (std::size_t c = 0; c < d; ++c) {
            CHECK(std::abs(block(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) -
                           expected[c]) <= 1e-12);
        }
    }
    rope_rotate_rows(block, table, true);
    CHECK((block - original).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("tables are generated for any length") {
    CHECK(sinusoid_table(5000, 8).rows() == 5000);
    CHECK(alibi_bias(1500, default_alibi_slopes(2))[1].rows() == 1500);
    CHECK(rope_table(5000, 8).cos.rows() == 5000);
}
