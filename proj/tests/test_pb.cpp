#include <catch_amalgamated.hpp>

#include <random>

#include "cqforce/combinatorics.hpp"
#include "cqforce/pb/construct.hpp"
#include "cqforce/pb/extract.hpp"

using namespace cqforce;
using namespace cqforce::pb;

namespace {

Bits bits(const std::string& s) {
    Bits b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] == '1') b.set(i);
    return b;
}

}  // namespace

TEST_CASE("bit vectors", "[pb]") {
    const auto a = bits("1100101");
    CHECK(a.popcount() == 4);
    CHECK(a.slice(2, 5) == bits("001"));
    CHECK((~a) == bits("0011010"));
    CHECK(a.append(bits("11")) == bits("110010111"));
    CHECK(a.last_set_end() == 7);
    CHECK(bits("0000").last_set_end() == 0);
    CHECK(a.popcount_range(1, 5) == 2);
    CHECK(Bits::from_hex(a.to_hex(), 7) == a);
    Bits big(300);
    big.set(299);
    big.set(64);
    CHECK(big.popcount_range(64, 300) == 2);
    CHECK(big.popcount_range(65, 299) == 0);
    CHECK(Bits::from_hex(big.to_hex(), 300) == big);
}

TEST_CASE("two-element algebra, identity-like segment", "[pb]") {
    const auto q = pb_root(2);
    PBCondition p;
    p.algebra = q.algebra;
    p.n = 3;
    p.psi[0] = bits("000");
    p.psi[q.algebra.top()] = bits("111");
    CHECK(pb_order_check(p, q).holds());
    CHECK_FALSE(pb_order_check(p, p).holds());
    CHECK(pb_order_check(p, p).has("length"));
}

TEST_CASE("segment identifying two atoms violates injectivity", "[pb]") {
    const auto q = pb_extend(pb_root(2), {0b01}, 4);
    PBCondition p = q;
    p.n = q.n + 1;
    for (auto& [e, v] : p.psi) {
        Bits tail(1);
        if (e == q.algebra.top()) tail.set(0);
        v = v.append(tail);
    }
    const auto r = pb_order_check(p, q);
    CHECK_FALSE(r.holds());
    CHECK(r.has("injectivity"));
}

TEST_CASE("different ambients are rejected", "[pb]") {
    CHECK_THROWS_AS(pb_order_check(pb_root(2), pb_root(3)), ValidationError);
}

TEST_CASE("extension produces a stronger condition", "[pb]") {
    const auto q = pb_root(4);
    const auto p = pb_extend(q, {0b0011}, 0);
    CHECK(p.algebra.elements().size() == 4);
    CHECK(pb_order_check(p, q).holds());
    const auto p2 = pb_extend(p, {0b0011}, 0);
    CHECK(p2.algebra == p.algebra);
    CHECK(p2.n > p.n);
    CHECK(pb_order_check(p2, p).holds());
}

TEST_CASE("extension chains are transitive", "[pb][property]") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<PBCondition> chain{pb_root(8)};
        for (int i = 0; i < 5; ++i) chain.push_back(pb_extend(chain.back(), {rng() & 0xff}, chain.back().n + rng() % 20));
        for (std::size_t i = 0; i < chain.size(); ++i)
            for (std::size_t j = i + 1; j < chain.size(); ++j) CHECK(pb_order_check(chain[j], chain[i]).holds());
    }
}

TEST_CASE("amalgamation", "[pb]") {
    const auto root = pb_root(16);
    const auto p = pb_extend(root, {0x00ff}, 10);
    const auto q = pb_extend(root, {0x0f0f}, 10);
    REQUIRE(p.n == q.n);
    const auto s = pb_amalgamate(p, q);
    CHECK(pb_order_check(s, p).holds());
    CHECK(pb_order_check(s, q).holds());
    CHECK(s.n == p.n + s.algebra.atom_count());

    const auto self = pb_amalgamate(p, p);
    CHECK(pb_order_check(self, p).holds());

    auto bad = q;
    bad.psi[0].set(0);
    CHECK_THROWS_AS(pb_amalgamate(p, bad), IncompatiblePresentation);
    const auto longer = pb_extend(q, {}, 20);
    CHECK_THROWS_AS(pb_amalgamate(p, longer), IncompatiblePresentation);
}

TEST_CASE("amalgamation over a uniformized bucket", "[pb][property]") {
    std::mt19937_64 rng(4);
    const auto root = pb_extend(pb_root(16), {0x00ff}, 4);
    std::vector<PBCondition> conds;
    for (int i = 0; i < 40; ++i) conds.push_back(pb_extend(root, {rng() & 0xffff}, 30 + rng() % 3));
    const auto bucket = comb::uniformize(conds, [](const PBCondition& c) { return c.n; });
    REQUIRE(bucket.size() >= 2);
    for (std::size_t i = 0; i + 1 < bucket.size(); ++i) {
        const auto& a = conds[bucket[i]];
        const auto& b = conds[bucket[i + 1]];
        const auto s = pb_amalgamate(a, b);
        CHECK(pb_order_check(s, a).holds());
        CHECK(pb_order_check(s, b).holds());
    }
}

TEST_CASE("extraction over the two-element algebra", "[pb]") {
    std::vector<PBCondition> chain{pb_root(1)};
    for (int i = 0; i < 4; ++i) chain.push_back(pb_extend(chain.back(), {}, chain.back().n + 10));
    const auto x = pb_extract_embedding(chain, 100);
    CHECK(x.defined == chain.back().n);
    CHECK_FALSE(x.psi.at(0).any());
    CHECK(x.psi.at(1).popcount() == x.defined);
    CHECK(x.sound());
}

TEST_CASE("extraction over the free algebra on two generators", "[pb][oracle]") {
    const auto free = boolean::free_boolean_algebra(2);
    std::vector<PBCondition> chain{pb_root(4)};
    for (int i = 0; i < 6; ++i)
        chain.push_back(pb_extend(chain.back(), {free.generators[static_cast<std::size_t>(i) % 2]}, 40 * (i + 1)));
    const auto x = pb_extract_embedding(chain, 1000);
    REQUIRE(x.sound());
    const Mask a = free.generators[0], b = free.generators[1];
    const std::size_t entry = std::max(x.entry_of(a), x.entry_of(b));
    const std::size_t n0 = chain[entry].n;
    for (std::size_t i = n0; i < x.defined; ++i) {
        CHECK(x.psi.at(a & b).get(i) == (x.psi.at(a).get(i) && x.psi.at(b).get(i)));
        CHECK(x.psi.at(a | b).get(i) == (x.psi.at(a).get(i) || x.psi.at(b).get(i)));
    }
    // distinct atoms differ in every appended segment after they enter
    const auto atoms = chain.back().algebra.atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (std::size_t j = i + 1; j < atoms.size(); ++j) {
            const std::size_t from = std::max(x.entry_of(atoms[i]), x.entry_of(atoms[j]));
            for (std::size_t s = from; s + 1 < chain.size(); ++s) {
                bool differ = false;
                for (std::size_t k = chain[s].n; k < chain[s + 1].n; ++k)
                    differ |= x.psi.at(atoms[i]).get(k) != x.psi.at(atoms[j]).get(k);
                CHECK(differ);
            }
        }
}

TEST_CASE("extraction refuses a broken chain", "[pb]") {
    std::vector<PBCondition> chain{pb_root(2)};
    chain.push_back(pb_extend(chain.back(), {0b01}, 5));
    chain.push_back(chain.back());
    try {
        pb_extract_embedding(chain, 10);
        FAIL("expected OrderError");
    } catch (const OrderError& e) {
        CHECK(e.link() == 1);
    }
}
