#include <catch_amalgamated.hpp>

#include "cqforce/ea/construct.hpp"
#include "cqforce/ea/extract.hpp"
#include "cqforce/ea/propk.hpp"

using namespace cqforce;
using namespace cqforce::ea;
using linalg::Matrix;
using linalg::Rational;

namespace {

SpectralContraction prefix_unit(std::size_t n) {
    std::vector<std::size_t> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = i;
    return SpectralContraction::coordinate(n, {{Rational{1, 1}, c}});
}

struct Chain {
    pres::HandleTable table;
    std::vector<EACondition> chain;
};

/// M_2, F grown through the matrix units, eps_k = 2^-k, h_target ending inside block k.
Chain m2_chain(std::size_t stages, double angle) {
    const pres::FinDimCStar A({2});
    Chain c{pres::enumerate_dense(A, 8, 1), {}};
    c.chain.push_back(ea_root(c.table, 1.0, angle));
    for (std::size_t k = 1; k <= stages; ++k) {
        std::vector<pres::Handle> add;
        for (pres::Handle h = 1; h <= std::min<std::size_t>(k, 4); ++h) add.push_back(h);
        if (k > 4) add.push_back(static_cast<pres::Handle>(std::min<std::size_t>(k, c.table.size() - 1)));
        c.chain.push_back(ea_extend(c.table, c.chain.back(), add, std::ldexp(1.0, -static_cast<int>(k)),
                                    prefix_unit(2 * k + 1), BasisProjection{0}));
    }
    return c;
}

}  // namespace

TEST_CASE("scalar algebra collapses", "[ea]") {
    const pres::FinDimCStar C({1});
    const pres::HandleTable t(C);
    const auto q = ea_root(t, 1.0);
    CHECK(promise_check(t, q).holds());
    CHECK(ea_condition_check(t, q).holds());
    const auto p = ea_extend(t, q, {0}, 0.5, prefix_unit(2), BasisProjection{0});
    CHECK(ea_order_check(t, p, q).holds());
    CHECK(promise_check(t, p).holds());
    CHECK(ea_condition_check(t, p).holds());
    CHECK(p.eps < q.eps);
    CHECK(identical(p.at(0), linalg::range_projection(p.h)));
    // requested eps above eps_q is clamped by the slack
    const auto wide = ea_extend(t, q, {0}, 4.0, prefix_unit(2), BasisProjection{0});
    CHECK(wide.eps < q.eps);
}

TEST_CASE("constants of the root", "[ea][oracle]") {
    const pres::FinDimCStar A({2});
    const auto t = pres::enumerate_dense(A, 5, 0);
    const auto q = ea_root(t, 1.0);
    const auto c = ea_constants(t, q, q.F, *q.promise);
    CHECK(c.L == Catch::Approx(1.0));
    CHECK(c.J == Catch::Approx(1.0));
    CHECK(c.N == 0.0);
    CHECK(c.M_p >= 3.0);
    CHECK(c.M_pF == Catch::Approx(3.0 * std::max(3.0 * c.M_p + 1.0, 3.0)));

    pres::HandleTable u(A);
    const auto a = u.intern(A.matrix_unit(0, 0, 1), "a");
    const auto a2 = u.intern(A.add(2.0, A.matrix_unit(0, 0, 1), 0.0, A.zero()), "2a");
    const auto cu = ea_constants(u, ea_root(u, 1.0), {0, a, u.star(a), a2, u.star(a2)}, *ea_root(u, 1.0).promise);
    CHECK(cu.L >= 2.0 - 1e-12);
    CHECK(cu.J == Catch::Approx(2.0));
}

TEST_CASE("M_2 chain passes every pairwise order check", "[ea][property]") {
    for (double angle : {0.0, 2e-5}) {
        const auto c = m2_chain(4, angle);
        for (std::size_t i = 0; i < c.chain.size(); ++i) {
            INFO("angle " << angle << " stage " << i);
            CHECK(promise_check(c.table, c.chain[i]).holds());
            CHECK(ea_condition_check(c.table, c.chain[i]).holds());
            for (std::size_t j = i + 1; j < c.chain.size(); ++j) {
                const auto r = ea_order_check(c.table, c.chain[j], c.chain[i]);
                INFO("pair " << j << " < " << i << (r.holds() ? std::string() : ": " + r.violations.front().detail));
                CHECK(r.holds());
            }
        }
    }
}

TEST_CASE("tilted representation is realigned", "[ea]") {
    const pres::FinDimCStar A({2});
    const auto t = pres::enumerate_dense(A, 5, 0);
    const auto q = ea_root(t, 1.0, 2e-5);
    BuildTrace trace;
    const auto p = ea_extend(t, q, {1, 2}, 0.5, prefix_unit(3), BasisProjection{0}, {}, &trace);
    CHECK(trace.u_distance > 1e-6);
    CHECK(ea_order_check(t, p, q).holds());
    CHECK(promise_check(t, p).holds());
    // the realignment undoes the tilt of the root
    CHECK(p.promise->phi.alignment().entries().isIdentity(1e-9));
    CHECK_FALSE(q.promise->phi.alignment().entries().isIdentity(1e-9));
    const auto wide = ea_root(t, 1.0, 0.02);
    CHECK_THROWS_AS(ea_extend(t, wide, {1, 2}, 0.5, prefix_unit(3), BasisProjection{0}), SlackExhausted);
}

TEST_CASE("order check rejects p against itself and tampering", "[ea]") {
    const auto c = m2_chain(2, 0.0);
    const auto& q = c.chain[1];
    CHECK(ea_order_check(c.table, q, q).has("eps"));
    auto p = c.chain[2];
    Matrix m = p.at(1).entries();
    m(1, 0) += 1e-6;  // column 0 lies in h_q+
    p.psi[1] = linalg::TruncatedOperator(m);
    const auto r = ea_order_check(c.table, p, q);
    CHECK(r.has("column_restriction"));
}

TEST_CASE("promise violations are reported", "[ea]") {
    const auto c = m2_chain(1, 0.0);
    auto p = c.chain[1];
    REQUIRE(promise_check(c.table, p).holds());

    auto loose = p;
    loose.eps = 1e6;
    CHECK(promise_check(c.table, loose).holds());

    // rank-one term mapping k off h-
    auto bad = p;
    const std::size_t n = bad.dim();
    Matrix m = bad.at(1).padded(n);
    const auto hminus = linalg::one_eigenspace_projection(bad.h).padded(n);
    Eigen::Index outside = -1;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (hminus(i, i).real() == 0.0) outside = i;
    if (outside >= 0) {
        m(outside, 0) = 0.25;
        bad.psi[1] = linalg::TruncatedOperator(m);
        CHECK(promise_check(c.table, bad).has("psi_inclusions"));
    } else {
        SUCCEED("h- fills the corner");
    }

    auto unital = p;
    unital.psi[0] = linalg::TruncatedOperator::identity(1, linalg::Tail::Zero);
    CHECK(promise_check(c.table, unital).has("unital"));
}

TEST_CASE("slack exhaustion names its constraint", "[ea]") {
    const pres::FinDimCStar A({2});
    auto t = pres::enumerate_dense(A, 5, 0);
    const auto q = ea_root(t, 1.0);
    const auto tiny = t.intern(A.add(1e-300, A.matrix_unit(0, 0, 1), 0.0, A.zero()), "tiny");
    try {
        (void)ea_extend(t, q, {tiny}, 0.5, prefix_unit(4), BasisProjection{0});
        FAIL("expected SlackExhausted");
    } catch (const SlackExhausted& e) {
        CHECK(std::string(e.what()).find("slack exhausted") != std::string::npos);
    } catch (const Error& e) {
        // vanishing norms break the promise defect first
        CHECK(std::string(e.what()).size() > 0);
    }
    EACondition bare = q;
    bare.promise.reset();
    CHECK_THROWS_AS(ea_extend(t, bare, {1}, 0.5, prefix_unit(4), BasisProjection{0}), ValidationError);
    BuildParams small;
    small.truncation = 3;
    CHECK_THROWS_AS(ea_extend(t, q, {1}, 0.5, prefix_unit(4), BasisProjection{0}, small), SizeError);
}

TEST_CASE("half eigenvalues appear for non-closing F over M_3", "[ea]") {
    const pres::FinDimCStar A({3});
    pres::HandleTable t(A);
    const auto a = t.intern(A.add(1.0, A.matrix_unit(0, 0, 1), 1.0, A.matrix_unit(0, 1, 2)), "e12+e23");
    const auto q = ea_root(t, 1.0);
    const auto p = ea_extend(t, q, {a}, 0.5, prefix_unit(4), BasisProjection{0});
    CHECK(ea_order_check(t, p, q).holds());
    CHECK(promise_check(t, p).holds());
    CHECK(ea_condition_check(t, p).holds());
    REQUIRE(p.h.blocks().size() == 2);
    CHECK(p.h.blocks()[1].eigenvalue == Rational{1, 2});
}

TEST_CASE("amalgamation", "[ea]") {
    const pres::FinDimCStar A({2});
    const auto t = pres::enumerate_dense(A, 10, 2);
    const auto root = ea_root(t, 1.0);
    const auto base = ea_extend(t, root, {1}, 0.5, prefix_unit(2), BasisProjection{0});
    const auto p = ea_extend(t, base, {2}, 1.0 / 64, prefix_unit(4), BasisProjection{0});
    const auto q = ea_extend(t, base, {5}, 1.0 / 64, prefix_unit(4), BasisProjection{0});

    const auto self = ea_amalgamate(t, p, p);
    CHECK(ea_order_check(t, self, p).holds());
    CHECK(promise_check(t, self).holds());
    REQUIRE(identical(p.h.op().resized(8), q.h.op().resized(8)));
    REQUIRE(p.R == q.R);
    const auto s = ea_amalgamate(t, p, q);
    CHECK(ea_order_check(t, s, p).holds());
    CHECK(ea_order_check(t, s, q).holds());
    CHECK(promise_check(t, s).holds());
    CHECK(s.eps < std::min(p.eps, q.eps));
    const auto far = ea_extend(t, base, {3}, 1.0 / 64, prefix_unit(8), BasisProjection{0});
    CHECK_THROWS_AS(ea_amalgamate(t, p, far), IncompatiblePresentation);
}

TEST_CASE("property K pipeline", "[ea][property]") {
    const pres::FinDimCStar A({2});
    const auto t = pres::enumerate_dense(A, 12, 4);
    const auto root = ea_root(t, 1.0);
    const auto base = ea_extend(t, root, {1}, 0.5, prefix_unit(2), BasisProjection{0});

    const std::vector<EACondition> same(3, ea_extend(t, base, {2}, 1.0 / 64, prefix_unit(4), BasisProjection{0}));
    const auto r3 = ea_propk_pipeline(t, same, 3);
    CHECK(r3.members.size() == 3);
    CHECK(r3.amalgams.size() == 6);
    for (const auto& [key, s] : r3.amalgams) CHECK(ea_order_check(t, s, same[key.first]).holds());

    std::vector<EACondition> mixed;
    for (pres::Handle h = 2; h < 8; ++h)
        mixed.push_back(ea_extend(t, base, {h}, 1.0 / 64, prefix_unit(h < 6 ? 4 : 8), BasisProjection{0}));
    const auto r = ea_propk_pipeline(t, mixed, 10);
    CHECK(r.bucket.size() < mixed.size());
    CHECK(r.members.size() + r.dropped.size() <= r.bucket.size());
    CHECK(r.members.size() >= 2);
    for (const auto& [key, s] : r.amalgams) {
        CHECK(ea_order_check(t, s, mixed[key.first]).holds());
        CHECK(ea_order_check(t, s, mixed[key.second]).holds());
    }
    CHECK_THROWS_AS(ea_propk_pipeline(t, {}, 3), ValidationError);
}

TEST_CASE("extraction", "[ea]") {
    const auto c = m2_chain(4, 0.0);
    const auto last = ea_extract(c.chain, 1, 4);
    const auto third = ea_extract(c.chain, 1, 2);
    const std::size_t n = last.dim();
    const auto hp = linalg::range_projection(c.chain[2].h).resized(n);
    CHECK(identical(last * hp, third.resized(n)));
    CHECK(identical(ea_extract(c.chain, 0, 3), linalg::range_projection(c.chain[3].h)));
    CHECK_THROWS_AS(ea_extract(c.chain, 7, 1), DomainError);

    const auto rep = ea_extraction_report(c.table, c.chain);
    CHECK(rep.unital);
    CHECK(rep.injective());
    for (const auto& w : rep.windows) {
        CHECK(w.stabilized);
        CHECK(w.max_product < w.eps);
        CHECK(w.max_additive < w.eps);
        CHECK(w.max_adjoint < w.eps);
    }
    auto broken = c.chain;
    std::swap(broken[1], broken[3]);
    CHECK_THROWS_AS(ea_extract(broken, 1, 2), OrderError);
}
