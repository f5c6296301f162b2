#include <catch_amalgamated.hpp>

#include <random>

#include "cqforce/linalg.hpp"

using namespace cqforce;
using namespace cqforce::linalg;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = Scalar(u(rng), u(rng));
    return m;
}

// Largest singular value by power iteration on M*M, independent of the SVD path.
double power_norm(const Matrix& m) {
    Vector v = Vector::Ones(m.cols());
    double est = 0.0;
    for (int it = 0; it < 5000; ++it) {
        Vector w = m.adjoint() * (m * v);
        const double n = w.norm();
        if (n == 0.0) return 0.0;
        v = w / n;
        const double next = std::sqrt(n);
        if (std::abs(next - est) < 1e-15 * std::max(1.0, next)) return next;
        est = next;
    }
    return est;
}

}  // namespace

TEST_CASE("operator norm of simple operators", "[linalg]") {
    CHECK(operator_norm(TruncatedOperator::identity(2, Tail::Zero)) == Catch::Approx(1.0).margin(1e-15));
    Matrix n = Matrix::Zero(2, 2);
    n(0, 1) = 1.0;
    CHECK(operator_norm(TruncatedOperator(n)) == Catch::Approx(1.0).margin(1e-15));
    CHECK(operator_norm(TruncatedOperator::zero(5)) == 0.0);
    CHECK(operator_norm(TruncatedOperator::zero(3).resized(4)) == 0.0);
    Matrix half = 0.5 * Matrix::Identity(2, 2);
    CHECK(operator_norm(TruncatedOperator(half, Tail::Identity)) == 1.0);
}

TEST_CASE("operator norm agrees with power iteration", "[linalg][oracle]") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng() % 20);
        const Matrix m = random_matrix(rng, n, n);
        CHECK(spectral_norm(m) == Catch::Approx(power_norm(m)).epsilon(1e-9));
    }
}

TEST_CASE("deterministic product matches Eigen and is exact on disjoint supports", "[linalg]") {
    std::mt19937_64 rng(11);
    const Matrix a = random_matrix(rng, 6, 6), b = random_matrix(rng, 6, 6);
    CHECK((multiply(a, b) - a * b).cwiseAbs().maxCoeff() < 1e-13);
    Matrix l = Matrix::Zero(6, 6), r = Matrix::Zero(6, 6);
    l.leftCols(3) = a.leftCols(3);
    r.bottomRows(3) = b.bottomRows(3);
    CHECK(multiply(l, r) == Matrix::Zero(6, 6));
}

TEST_CASE("padding preserves the operator", "[linalg]") {
    std::mt19937_64 rng(3);
    const TruncatedOperator t(random_matrix(rng, 4, 4));
    const auto big = t.resized(9);
    CHECK(identical(t, big));
    CHECK(operator_norm(t) == Catch::Approx(operator_norm(big)).epsilon(1e-14));
    const TruncatedOperator u(Matrix::Identity(3, 3), Tail::Identity);
    CHECK(u.padded(5) == Matrix::Identity(5, 5));
    CHECK_THROWS_AS(t.padded(2), DomainError);
}

TEST_CASE("invalid operators are rejected", "[linalg]") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(TruncatedOperator(m), ValidationError);
    CHECK_THROWS_AS(TruncatedOperator(Matrix::Zero(2, 3)), ValidationError);
}

TEST_CASE("corner compression", "[linalg]") {
    std::mt19937_64 rng(5);
    const TruncatedOperator t(random_matrix(rng, 5, 5));
    const auto p = TruncatedOperator::coordinate_projection(5, {1, 3});
    const auto c = corner_compress(t, p, p);
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 5; ++j) {
            const bool inside = (i == 1 || i == 3) && (j == 1 || j == 3);
            CHECK(c.entries()(i, j) == (inside ? t.entries()(i, j) : Scalar(0.0)));
        }
    CHECK(operator_norm(c) <= operator_norm(t) + 1e-12);
}

TEST_CASE("spectral contraction projections", "[linalg]") {
    const auto h = SpectralContraction::coordinate(6, {{{1, 1}, {0, 1}}, {{1, 2}, {2}}});
    const auto plus = range_projection(h), minus = one_eigenspace_projection(h);
    CHECK(identical(plus, TruncatedOperator::coordinate_projection(6, {0, 1, 2})));
    CHECK(identical(minus, TruncatedOperator::coordinate_projection(6, {0, 1})));
    CHECK(h.rank() == 3);
    CHECK(h.op().entries()(2, 2) == Scalar(0.5));
    CHECK(is_projection(plus));

    // way above: identity on the range of the smaller contraction
    const auto g = SpectralContraction::coordinate(6, {{{1, 1}, {0}}});
    CHECK(way_above(h, g));
    CHECK_FALSE(way_above(g, h));
    const auto g2 = SpectralContraction::coordinate(6, {{{1, 1}, {2}}});
    CHECK_FALSE(way_above(h, g2));

    CHECK_THROWS_AS(SpectralContraction::coordinate(4, {{{3, 2}, {0}}}), ValidationError);
}

TEST_CASE("non-coordinate spectral form", "[linalg]") {
    Matrix b(2, 1);
    b << Scalar(std::sqrt(0.5)), Scalar(std::sqrt(0.5));
    const SpectralContraction h(2, {{Rational{1, 1}, b}});
    CHECK_FALSE(h.coordinate_form().has_value());
    const auto p = range_projection(h).entries();
    CHECK(std::abs(p(0, 1) - Scalar(0.5)) < 1e-15);
}

TEST_CASE("dyadic quantization and exact storage", "[linalg]") {
    CHECK(quantize(0.3, 4) == 0.3125);
    CHECK(quantize(-0.03125, 4) == 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::ldexp(1.0, static_cast<int>(rng() % 80) - 40);
        const auto d = to_dyadic(x);
        CHECK(d.value() == x);
        CHECK((d.mantissa == 0 || (d.mantissa & 1) != 0));
    }
    CHECK(to_dyadic(0.0).mantissa == 0);
    CHECK(to_dyadic(1.5).mantissa == 3);
    CHECK(to_dyadic(1.5).exponent == -1);
}

TEST_CASE("basis projection", "[linalg]") {
    const auto r = BasisProjection{3}.op(5);
    CHECK(identical(r, TruncatedOperator::coordinate_projection(5, {0, 1, 2})));
    CHECK_THROWS_AS(BasisProjection{6}.op(5), DomainError);
}
