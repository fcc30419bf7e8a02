#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gen.hpp"
#include "sigma/models.hpp"
#include "sigma/quotient.hpp"
#include "sigma/uncond.hpp"

using namespace sigma;

namespace {

Mask mask_of(std::initializer_list<Elem> es) {
    Mask m = 0;
    for (Elem e : es) m |= bit(e);
    return m;
}

// Closedness read straight off a table: no row with entries in S sums outside S.
bool closed_by_rows(const System& s, Mask sub) {
    for (auto& [f, v] : s.pairs()) {
        bool inside = true;
        for (auto& [e, k] : to_multiset(f).counts) inside = inside && (sub & bit(e));
        if (inside && !(sub & bit(v))) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("subgroups and ideals") {
    Carrier z8 = Carrier::cyclic(8);
    CHECK(is_subgroup(z8, mask_of({0, 4})));
    CHECK(!is_subgroup(z8, mask_of({0, 3})));
    CHECK(!is_subgroup(z8, 0));
    Carrier r = cyclic_ring(6);
    CHECK(is_ideal(r, mask_of({0, 2, 4})));
    CHECK(is_ideal(r, mask_of({0, 3})));
    CHECK(!is_ideal(r, mask_of({0, 1})));
}

TEST_CASE("sigma-closed subsets of finitary Z/8") {
    System s = finitary_group(Carrier::cyclic(8));
    for (Mask h : subgroups(s.carrier())) CHECK(is_sigma_closed(s, h).closed);
    CHECK(is_sigma_closed(s, Mask(255)).closed);
    SigmaClosedCertificate c = is_sigma_closed(s, mask_of({0, 1}));
    CHECK(!c.closed);
    REQUIRE(c.witness);
    CHECK(certificate_valid(s, c));
    CHECK(!certificate_valid(finitary_group(Carrier::cyclic(2)), c));
}

TEST_CASE("property: table closedness matches the rows") {
    gen::Rng r(61);
    Carrier z4 = Carrier::cyclic(4);
    for (int k = 0; k < 300; ++k) {
        std::vector<std::pair<Family, Elem>> rows;
        std::size_t n = r.below(5);
        for (std::size_t i = 0; i < n; ++i) rows.emplace_back(gen::explicit_family(r, 4, 2, 3), Elem(r.below(4)));
        System s;
        try {
            s = System::table(z4, rows);
        } catch (const Error&) {
            continue;
        }
        Mask sub = Mask(r.below(16));
        SigmaClosedCertificate c = is_sigma_closed(s, sub);
        CHECK(c.exhaustive);
        CHECK(c.closed == closed_by_rows(s, sub));
        if (!c.closed) CHECK(certificate_valid(s, c));
    }
}

TEST_CASE("finitary Z/4 modulo {0,2}") {
    System z4 = finitary_group(Carrier::cyclic(4));
    QuotientSystem q = quotient_system(z4, mask_of({0, 2}));
    CHECK(q.cosets == std::vector<Mask>{mask_of({0, 2}), mask_of({1, 3})});
    CHECK(q.coset_of == std::vector<Elem>{0, 1, 0, 1});
    CHECK(q.system.query(Family::seq({1, 1, 1})) == Elem(1));
    CHECK(q.system.query(Family::omega({1}, {0})) == Elem(1));
    CHECK(!q.system.summable(Family::omega({}, {1})));
}

TEST_CASE("property: finitary Z/2^n quotients are finitary on the quotient group") {
    gen::Rng r(62);
    for (std::size_t n : {2, 4, 8}) {
        System s = finitary_group(Carrier::cyclic(n));
        for (Mask h : subgroups(s.carrier())) {
            QuotientSystem q = quotient_system(s, h);
            std::size_t m = q.cosets.size();
            CHECK(m * std::size_t(std::popcount(h)) == n);
            for (int k = 0; k < 40; ++k) {
                std::vector<Elem> xs = gen::list(r, m, 0, 5);
                Elem expect = 0;
                for (Elem x : xs) expect = Elem((expect + x) % m);
                // coset c holds the residues congruent to c mod m
                CHECK(q.system.query(Family::seq(xs)) == expect);
                std::vector<Elem> cyc = gen::list(r, m, 1, 3);
                bool all_zero = std::all_of(cyc.begin(), cyc.end(), [](Elem e) { return e == 0; });
                CHECK(q.system.summable(Family::omega(xs, cyc)) == all_zero);
            }
        }
    }
}

TEST_CASE("quotient by zero is a copy") {
    System z3 = finitary_group(Carrier::cyclic(3));
    QuotientSystem q = quotient_system(z3, bit(0));
    CHECK(q.cosets.size() == 3);
    for (auto& f : universe(z3, Bounds{})) CHECK(q.system.query(f) == z3.query(f));
}

TEST_CASE("quotients need a subgroup") {
    System z4 = finitary_group(Carrier::cyclic(4));
    CHECK_THROWS_AS(quotient_system(z4, mask_of({0, 1})), Error);
    CHECK(!quotient_conflict(z4, mask_of({0, 2})));
}

TEST_CASE("endomorphism ideals") {
    EndoSystem e = endo_system(Field::prime(2));
    CHECK(is_sigma_closed(e, EndoIdeal::Zero).closed);
    CHECK(is_sigma_closed(e, EndoIdeal::Full).closed);
    EndoClosedCertificate fr = is_sigma_closed(e, EndoIdeal::FiniteRank, 16);
    CHECK(!fr.closed);
    CHECK(fr.witness == "diag");
    try {
        endo_quotient(e, EndoIdeal::FiniteRank, 16);
        CHECK(false);
    } catch (const Error& err) {
        CHECK(err.code() == Errc::NotAFunction);
    }
    EndoSystem fin = restricted_system(e, std::nullopt);
    CHECK(is_sigma_closed(fin, EndoIdeal::FiniteRank, 16).closed);
    CHECK_NOTHROW(endo_quotient(fin, EndoIdeal::FiniteRank, 16));
    CHECK(endo_ideal_from_name(endo_ideal_name(EndoIdeal::FiniteRank)) == EndoIdeal::FiniteRank);
}

TEST_CASE("reorderable system suite on finitary rings") {
    for (std::size_t n : {2, 3, 4}) {
        System s = finitary_group(cyclic_ring(n));
        for (auto& r : reorderable_system_suite(s)) CHECK_MESSAGE(r.pass(), (r.id + " " + r.witness.dump()));
    }
}

TEST_CASE("quotient theorems") {
    for (QuotientTheoremId id : all_quotient_theorems()) {
        CheckReport r = check_quotient_theorem(id);
        CHECK_MESSAGE(r.pass(), (quotient_theorem_slug(id) + " " + r.witness.dump()));
        CHECK(quotient_theorem_from_slug(quotient_theorem_slug(id)) == id);
    }
}
