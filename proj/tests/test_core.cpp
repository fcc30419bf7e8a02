#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gen.hpp"
#include "sigma/core.hpp"
#include "sigma/models.hpp"

using namespace sigma;

namespace {

// Entries of an ordinal-indexed family for indices below (blocks, depth).
std::vector<std::optional<Elem>> expansion(const Family& f, std::uint32_t blocks, std::uint32_t depth) {
    std::vector<std::optional<Elem>> out;
    for (std::uint32_t b = 0; b <= blocks; ++b)
        for (std::uint32_t o = 0; o < depth; ++o) out.push_back(entry_at(f, {b, o}));
    return out;
}

}  // namespace

TEST_CASE("labels pack block and offset") {
    OrdinalIndex i{1, 7};
    CHECK(i.label() == (Label(1) << 32 | 7));
    CHECK(OrdinalIndex::of(i.label()) == i);
    CHECK(OrdinalIndex{0, 100} < OrdinalIndex{1, 0});
}

TEST_CASE("group carriers are validated") {
    Carrier z4 = Carrier::cyclic(4);
    CHECK(z4.add(3, 3) == 2);
    CHECK(z4.neg(1) == 3);
    CHECK(Carrier::from_group_name("klein").size() == 4);
    CHECK_THROWS_AS(Carrier::group({"a", "b"}, {{0, 1}, {0, 1}}), Error);
    CHECK_THROWS_AS(Carrier::from_group_name("q8"), Error);
}

TEST_CASE("canonicalize examples") {
    Family f = Family::labeled({{2, 1}, {0, 0}});
    CHECK(canonicalize(f).ex().entries == std::vector<std::pair<Label, Elem>>{{0, 0}, {2, 1}});

    Traits zero_drop;
    zero_drop.reindex_invariant = true;
    zero_drop.zero_drop = true;
    zero_drop.empty_sum = 0;
    Multiset m;
    m.counts = {{0, 3}, {1, 1}};
    CHECK(canonicalize(Family(m), zero_drop).ms().counts == std::map<Elem, Mult>{{1, 1}});
    CHECK_THROWS_AS(canonicalize(Family(m), Traits{}), Error);

    // prefix [1], cycle [0,1,1,0]: no rotation reproduces the sequence
    Family t = Family::omega({1}, {0, 1, 1, 0});
    Family c = canonicalize(t);
    CHECK(expansion(c, 0, 16) == expansion(t, 0, 16));
    CHECK(c.tf().blocks[0].cycle.size() == 4);

    CHECK_THROWS_AS(canonicalize(Family::labeled({{1, 0}, {1, 1}})), Error);
}

TEST_CASE("subfamily and extend examples") {
    Family ab = Family::omega({}, {0, 1});
    Family seg = initial_segment(ab, {0, 3});
    CHECK(seg.finite_values() == std::vector<Elem>{0, 1, 0});

    Multiset m;
    m.counts[0] = kOmega;
    CHECK(subfamily(Family(m), Selector::periodic(0, {true, false})).ms().counts.at(0) == kOmega);

    Transfinite two{{{{1, 2, 0}, {1}}, {{}, {0}}}, {}};
    Family mid = subfamily(Family(two), Selector::interval({0, 2}, {1, 0}));
    CHECK(order_type(mid) == std::pair<std::size_t, std::size_t>{1, 0});
    for (std::uint32_t o = 0; o < 8; ++o) CHECK(entry_at(mid, {0, o}) == entry_at(Family(two), {0, o + 2}));

    CHECK(extend(Family::empty(), 0, 1).ex().entries == std::vector<std::pair<Label, Elem>>{{0, 1}});
    CHECK(extend(Family::labeled({{0, 0}}), 5, 1).ex().entries == std::vector<std::pair<Label, Elem>>{{0, 0}, {5, 1}});
    CHECK_THROWS_AS(extend(Family::labeled({{0, 0}}), 0, 1), Error);
    Family w1 = extend(Family::omega({}, {1}), OrdinalIndex{1, 0}.label(), 0);
    CHECK(order_type(w1) == std::pair<std::size_t, std::size_t>{1, 1});
}

TEST_CASE("query and induced addition examples") {
    Carrier z2 = Carrier::cyclic(2);
    System t = System::table(z2, {{Family::empty(), 0}});
    CHECK(t.query(Family::empty()) == Elem(0));
    CHECK(!induced_addition(System::table(z2, {}), 1, 1));

    System fz4 = finitary_group(Carrier::cyclic(4));
    CHECK(fz4.query(Family::seq({1, 3})) == Elem(0));
    CHECK(induced_addition(finitary_group(z2), 1, 1) == Elem(0));

    System ch = choice(Carrier::plain(2), 0);
    CHECK(ch.query(Family::seq({1, 0})) == Elem(1));

    // left projection a*b = a is not commutative
    System mp = magma_pairs(Carrier::plain(2), left_projection(2), 0);
    CHECK(induced_addition(mp, 1, 0) == Elem(1));
    CHECK(induced_addition(mp, 0, 1) == Elem(0));
}

TEST_CASE("tables reject conflicting rows") {
    Carrier z2 = Carrier::cyclic(2);
    CHECK_THROWS_AS(System::table(z2, {{Family::empty(), 0}, {Family::empty(), 1}}), Error);
    // the same family written two ways
    CHECK_THROWS_AS(System::table(z2, {{Family::omega({}, {1}), 0}, {Family::omega({1}, {1, 1}), 1}}), Error);
}

TEST_CASE("property: canonicalize is idempotent and keeps entries") {
    gen::Rng r(11);
    for (int k = 0; k < 400; ++k) {
        Family f = gen::transfinite_family(r, 3);
        Family c = canonicalize(f);
        CHECK(canonicalize(c) == c);
        CHECK(expansion(c, 2, 24) == expansion(f, 2, 24));
        Family e = gen::explicit_family(r, 3, 4, 6);
        CHECK(canonicalize(canonicalize(e)) == canonicalize(e));
    }
}

TEST_CASE("property: extend then drop the label round-trips") {
    gen::Rng r(12);
    for (int k = 0; k < 300; ++k) {
        Family f = gen::explicit_family(r, 3, 3, 5);
        Label l = 5 + r.below(4);
        Family g = extend(f, l, Elem(r.below(3)));
        CHECK(subfamily(g, Selector::drop({l})) == f);
    }
}

TEST_CASE("property: table lookup ignores the representation") {
    gen::Rng r(13);
    Carrier z3 = Carrier::cyclic(3);
    for (int k = 0; k < 200; ++k) {
        Family f = gen::transfinite_family(r, 3, 1);
        System s = System::table(z3, {{f, 2}});
        // unroll one period of each cycle into the prefix
        Transfinite t = f.tf();
        for (auto& b : t.blocks) b.prefix.insert(b.prefix.end(), b.cycle.begin(), b.cycle.end());
        CHECK(s.query(Family(t)) == Elem(2));
    }
}
