#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "gen.hpp"
#include "sigma/models.hpp"
#include "sigma/topo.hpp"

using namespace sigma;

namespace {

// Brute force: every collection of subsets of n points, kept when it is a topology.
std::size_t count_topologies(std::size_t n) {
    const std::size_t subsets = std::size_t(1) << n;
    const Mask full = subsets - 1;
    std::size_t count = 0;
    for (std::uint64_t coll = 0; coll < (std::uint64_t(1) << subsets); ++coll) {
        auto in = [&](Mask u) { return (coll >> u) & 1; };
        if (!in(0) || !in(full)) continue;
        bool ok = true;
        for (Mask u = 0; u < subsets && ok; ++u)
            for (Mask v = 0; v < subsets && ok; ++v)
                if (in(u) && in(v)) ok = in(u & v) && in(u | v);
        count += ok;
    }
    return count;
}

// Closure of a set computed from the closed sets directly.
Mask closure_oracle(const Topology& t, Mask s) {
    Mask c = t.full();
    for (Mask u : t.opens())
        if ((t.full() & ~u & s) == s) c &= t.full() & ~u;
    return c;
}

Topology sierpinski() { return Topology::parse(2, "{}, {1}, {0,1}"); }

bool subset(const Topology& a, const Topology& b) { return a.coarser_than(b); }

}  // namespace

TEST_CASE("topology enumeration matches the brute-force count") {
    for (std::size_t n = 1; n <= 4; ++n) {
        auto ts = enumerate_topologies(n);
        CHECK(ts.size() == count_topologies(n));
        CHECK(std::set<Topology>(ts.begin(), ts.end()).size() == ts.size());
    }
    CHECK(enumerate_topologies(2).size() == 4);
    CHECK(enumerate_topologies(3).size() == 29);
    CHECK(enumerate_topologies(4).size() == 355);
}

TEST_CASE("topology construction") {
    CHECK_THROWS_AS(Topology::from_opens(2, {0, 1}), Error);
    CHECK_THROWS_AS(Topology::from_opens(3, {0, 1, 2, 7}), Error);
    CHECK(Topology::discrete(3).is_t1());
    CHECK(!sierpinski().is_t1());
    CHECK(Topology::generated(2, {1}) == Topology::parse(2, "{}, {0}, {0,1}"));
    CHECK(sierpinski().neighborhood(0) == 3);
    CHECK(sierpinski().closure(bit(1)) == 3);
}

TEST_CASE("limit sets") {
    Topology s = sierpinski();
    CHECK(limit_set(Family::omega({}, {0}), s) == bit(0));
    CHECK(limit_set(Family::omega({}, {1}), s) == 3);
    CHECK(limit_set(Family::seq({0, 1, 1}), Topology::discrete(2)) == bit(1));
    CHECK(limit_set(Family::empty(), s, Elem(0)) == bit(0));
}

TEST_CASE("property: eventually constant limits are point closures") {
    for (std::size_t n = 1; n <= 4; ++n)
        for (auto& t : enumerate_topologies(n))
            for (Elem c = 0; c < Elem(n); ++c) {
                Mask cl = closure_oracle(t, bit(c));
                CHECK(t.closure(bit(c)) == cl);
                CHECK(limit_set(Family::omega({Elem((c + 1) % n)}, {c}), t) == cl);
                CHECK(limit_set(Family::seq({Elem((c + 1) % n), c}), t) == cl);
            }
}

TEST_CASE("gapless families") {
    Carrier z2 = Carrier::cyclic(2);
    gen::Rng r(21);
    for (int k = 0; k < 50; ++k) CHECK(is_gapless(gen::transfinite_family(r, 2), Topology::trivial(2)));
    CHECK(is_gapless(Family::seq({0, 1, 0}), sierpinski()));
    // on three discrete points nothing holds the cycle {0,1} in every neighbourhood
    CHECK(!is_gapless(Family::omega({}, {0, 1}), Topology::discrete(3)));
}

TEST_CASE("sigma limits and difference families") {
    System z4 = finitary_group(Carrier::cyclic(4));
    CHECK(sigma_limit(z4, Family::seq({1, 3})) == Elem(3));
    CHECK(sigma_limit(z4, Family::empty()) == Elem(0));
    Family f = Family::seq({1, 2, 3});
    CHECK(difference_family(z4, partial_sum_family(z4, f)) == f);
    CHECK(partial_sum_family(z4, difference_family(z4, f)) == f);
    CHECK(partial_sum_family(z4, Family::seq({1, 2})) == Family::seq({1, 3}));

    System ind = induced_summation(sierpinski(), Carrier::cyclic(2));
    CHECK(!sigma_limit(ind, Family::omega({}, {1})));
    CHECK(!ind.summable(Family::omega({1}, {0})));
}

TEST_CASE("property: difference and partial sums are inverse") {
    System z3 = finitary_group(Carrier::cyclic(3));
    gen::Rng r(22);
    for (int k = 0; k < 300; ++k) {
        Family f = Family::seq(gen::list(r, 3, 0, 6));
        CHECK(difference_family(z3, partial_sum_family(z3, f)) == f);
        CHECK(partial_sum_family(z3, difference_family(z3, f)) == f);
    }
}

TEST_CASE("finest topology with limits") {
    CHECK(finest_topology_with_limits(2, std::vector<TailConstraint>{}).is_discrete());
    // 0 is a limit of constant 1: every open set around 0 contains 1
    Topology t = finest_topology_with_limits(2, std::vector<TailConstraint>{{0, bit(1)}});
    for (Mask u : t.opens())
        if (u & bit(0)) CHECK((u & bit(1)));
    CHECK(t == sierpinski());
}

TEST_CASE("induced summation") {
    Carrier z2 = Carrier::cyclic(2);
    System d = induced_summation(Topology::discrete(2), z2);
    CHECK(d.query(Family::seq({1, 1})) == Elem(0));
    System tr = induced_summation(Topology::trivial(2), z2);
    CHECK(tr.query(Family::empty()) == Elem(0));
    CHECK(!tr.summable(Family::seq({1})));
    CHECK(!tr.summable(Family::seq({0})));
}

TEST_CASE("sigma topology and phi examples") {
    Carrier z2 = Carrier::cyclic(2);
    CHECK(sigma_topology(System::table(z2, {{Family::empty(), 0}})).is_discrete());
    CHECK(sigma_topology(System::table(Carrier::cyclic(3), {{Family::empty(), 0}})).is_discrete());
    CHECK(sigma_topology(induced_summation(Topology::discrete(2), z2)).is_discrete());
    CHECK(phi(Topology::trivial(1), Carrier::cyclic(1)) == Topology::trivial(1));
    CHECK(phi(Topology::trivial(2), z2).is_discrete());
    CHECK(phi(sierpinski(), z2).is_discrete());
}

TEST_CASE("trivial topology example") {
    TrivialExample two = trivial_topology_example(2);
    CHECK(two.sigma.is_discrete());
    CHECK(two.topologies == 4);
    CHECK(two.full == Topology::trivial(2));
    CHECK(two.summable == std::vector<Family>{Family::empty()});
    TrivialExample three = trivial_topology_example(3);
    CHECK(three.full.is_discrete());
    TrivialExample one = trivial_topology_example(1);
    CHECK(one.sigma == Topology::trivial(1));

    FullSigma fd = full_sigma_topology(induced_summation(Topology::discrete(2), Carrier::cyclic(2)));
    CHECK(fd.topology.is_discrete());
}

TEST_CASE("property: phi is extensive, idempotent and T1 on up to three points") {
    for (std::size_t n = 1; n <= 3; ++n) {
        Carrier g = Carrier::cyclic(n);
        for (auto& t : enumerate_topologies(n)) {
            Topology p = phi(t, g);
            CHECK(subset(t, p));
            CHECK(p.is_t1());
            CHECK(phi(p, g) == p);
        }
    }
}

TEST_CASE("property: phi on four points ignores the group") {
    auto all = enumerate_topologies(4);
    Carrier z4 = Carrier::cyclic(4), klein = Carrier::from_group_name("klein");
    gen::Rng r(23);
    for (int k = 0; k < 6; ++k) {
        const Topology& t = all[r.below(all.size())];
        Topology p = phi(t, z4);
        CHECK(p == phi(t, klein));
        CHECK(subset(t, p));
        CHECK(p.is_t1());
    }
}

TEST_CASE("coreflections") {
    for (std::size_t n = 1; n <= 3; ++n)
        for (auto& t : enumerate_topologies(n)) {
            Coreflections c = coreflections(t);
            CHECK(c.net_equals_tau);
            CHECK(c.seq == c.chain);
            CHECK(subset(t, c.seq));
            if (t.is_t1()) {
                Topology p = phi(t, Carrier::cyclic(n));
                CHECK(subset(c.chain, p));
                CHECK(subset(p, c.seq));
                CHECK(c.chain_phi_seq == true);
            }
        }
    CHECK(coreflections(Topology::trivial(2)).seq == Topology::trivial(2));
}

TEST_CASE("topology theorems on up to three points") {
    for (std::size_t n = 1; n <= 3; ++n)
        for (TopoTheoremId id : all_topo_theorems()) {
            TopoScope scope;
            scope.n = n;
            try {
                CheckReport r = check_topo_theorem(id, scope);
                CHECK_MESSAGE(r.pass(), (topo_theorem_slug(id) + " n=" + std::to_string(n) + " " + r.witness.dump()));
            } catch (const Error& e) {
                CHECK_MESSAGE(e.code() == Errc::HypothesisNotMet, (topo_theorem_slug(id) + " " + e.what()));
            }
        }
}

TEST_CASE("theorem slugs round-trip") {
    for (TopoTheoremId id : all_topo_theorems()) CHECK(topo_theorem_from_slug(topo_theorem_slug(id)) == id);
    CHECK(!topo_theorem_from_slug("nope"));
}
