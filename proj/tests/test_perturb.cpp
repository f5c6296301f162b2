#include <catch_amalgamated.hpp>

#include <random>

#include "cqforce/linalg.hpp"

using namespace cqforce;
using namespace cqforce::linalg;

namespace {

Matrix rotation_plane(double theta) {
    Matrix u(2, 2);
    u << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return u;
}

// exp(iX) for Hermitian X supported on coordinates >= fixed.
Matrix small_unitary(std::mt19937_64& rng, Eigen::Index n, Eigen::Index fixed, double size) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix x = Matrix::Zero(n, n);
    for (Eigen::Index i = fixed; i < n; ++i)
        for (Eigen::Index j = fixed; j <= i; ++j) {
            const Scalar z(g(rng), i == j ? 0.0 : g(rng));
            x(i, j) = z;
            x(j, i) = std::conj(z);
        }
    const double nx = spectral_norm(x);
    if (nx > 0) x *= size / nx;
    Eigen::SelfAdjointEigenSolver<Matrix> es(x);
    Vector phases(n);
    for (Eigen::Index i = 0; i < n; ++i) phases(i) = std::exp(Scalar(0.0, es.eigenvalues()(i)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

TEST_CASE("rotation example moves T by 2 sin(theta/2)", "[perturb]") {
    for (double theta : {1e-4, 1e-3, 0.01, 0.05}) {
        const auto t = TruncatedOperator::coordinate_projection(2, {0});
        const Matrix r = rotation_plane(theta);
        const Matrix s = r * t.entries() * r.adjoint();
        const auto u = perturb_projection(t, TruncatedOperator(s), 0.5);
        const double moved = spectral_norm((u.entries() - Matrix::Identity(2, 2)) * t.entries());
        CHECK(std::abs(moved - 2.0 * std::sin(theta / 2.0)) < 1e-10);
        CHECK((u.entries() - r).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("admissibility bound", "[perturb]") {
    CHECK(admissibility_bound(1.0, 1) == 0.25);
    CHECK(admissibility_bound(10.0, 4) == 0.5);
    CHECK_THROWS_AS(admissibility_bound(0.0, 1), DomainError);
}

TEST_CASE("distance beyond the bound is refused", "[perturb]") {
    const auto t = TruncatedOperator::coordinate_projection(2, {0});
    const auto s = TruncatedOperator::coordinate_projection(2, {1});
    CHECK_THROWS_AS(perturb_projection(t, s, 0.1), PerturbationTooLarge);
    try {
        perturb_projection(t, s, 0.1);
    } catch (const PerturbationTooLarge& e) {
        CHECK(e.distance() == Catch::Approx(1.0));
    }
}

TEST_CASE("non-projection input is a validation error", "[perturb]") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 0.5;
    CHECK_THROWS_AS(perturb_projection(TruncatedOperator(m), TruncatedOperator::identity(2, Tail::Zero), 1.0),
                    ValidationError);
}

TEST_CASE("identical projections give the identity", "[perturb]") {
    const auto t = TruncatedOperator::coordinate_projection(5, {0, 2, 3});
    const auto u = perturb_projection(t, t, 0.1);
    CHECK(u.entries() == Matrix::Identity(5, 5));
    CHECK(u.tail() == Tail::Identity);
}

TEST_CASE("randomized instances satisfy all clauses", "[perturb][property]") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<Eigen::Index>(2 + rng() % 31);
        const auto r = static_cast<Eigen::Index>(1 + rng() % static_cast<std::uint64_t>(n - 1));
        const auto k = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(r));
        const double eps = 0.05 + 0.5 * static_cast<double>(rng() % 1000) / 1000.0;
        std::vector<std::size_t> coords(static_cast<std::size_t>(r));
        for (Eigen::Index i = 0; i < r; ++i) coords[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
        const auto t = TruncatedOperator::coordinate_projection(static_cast<std::size_t>(n), coords);
        const double bound = admissibility_bound(eps, static_cast<std::size_t>(r));
        const Matrix w = small_unitary(rng, n, k, 0.3 * bound);
        const Matrix s = w * t.entries() * w.adjoint();
        const Matrix s_clean = 0.5 * (s + s.adjoint());
        const auto u = perturb_projection(t, TruncatedOperator(s_clean), eps);
        const Matrix um = u.entries();
        const Matrix id = Matrix::Identity(n, n);
        CHECK((um.adjoint() * um - id).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(spectral_norm((id - s_clean) * um * t.entries()) < 1e-10);
        CHECK(spectral_norm((um - id) * t.entries()) < eps);
        for (Eigen::Index i = 0; i < k; ++i) CHECK((um.col(i) - id.col(i)).norm() < 1e-12);
    }
}
