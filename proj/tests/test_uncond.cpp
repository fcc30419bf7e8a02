#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "gen.hpp"
#include "sigma/axioms.hpp"
#include "sigma/models.hpp"
#include "sigma/uncond.hpp"

using namespace sigma;

namespace {

Multiset ms(std::map<Elem, Mult> counts) {
    Multiset m;
    m.counts = std::move(counts);
    return m;
}

Elem times(const Carrier& g, Elem e, std::size_t k) {
    Elem s = *g.zero();
    for (std::size_t i = 0; i < k; ++i) s = g.add(s, e);
    return s;
}

// Runs `body` over every count vector with lo[i] <= v[i] <= hi[i].
void each_counts(const std::vector<std::size_t>& lo, const std::vector<std::size_t>& hi,
                 const std::function<void(const std::vector<std::size_t>&)>& body) {
    std::vector<std::size_t> v = lo;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == v.size()) return body(v);
        for (v[i] = lo[i]; v[i] <= hi[i]; ++v[i]) rec(i + 1);
    };
    rec(0);
}

// Direct reading of the definition: x is a sum when for every S some finite F
// has every finite F' between F and I summing into x + S. Infinite counts are
// cut at |X| copies for F and 3|X| for F'.
Mask sums_by_definition(const Multiset& m, const SetSystem& a) {
    const Carrier& g = a.carrier;
    const std::size_t n = g.size();
    std::vector<Elem> es;
    std::vector<std::size_t> cap_f, cap_fp;
    for (auto& [e, k] : m.counts) {
        es.push_back(e);
        cap_f.push_back(k == kOmega ? n : std::size_t(k));
        cap_fp.push_back(k == kOmega ? 3 * n : std::size_t(k));
    }
    auto total = [&](const std::vector<std::size_t>& c) {
        Elem s = *g.zero();
        for (std::size_t i = 0; i < es.size(); ++i) s = g.add(s, times(g, es[i], c[i]));
        return s;
    };
    Mask out = 0;
    for (Elem x = 0; x < Elem(n); ++x) {
        bool all_sets = true;
        for (Mask s : a.sets) {
            bool some_f = false;
            each_counts(std::vector<std::size_t>(es.size(), 0), cap_f, [&](const std::vector<std::size_t>& f) {
                if (some_f) return;
                bool all_fp = true;
                each_counts(f, cap_fp, [&](const std::vector<std::size_t>& fp) {
                    all_fp = all_fp && (s & bit(g.add(total(fp), g.neg(x))));
                });
                some_f = all_fp;
            });
            all_sets = all_sets && some_f;
        }
        if (all_sets) out |= bit(x);
    }
    return out;
}

// For every S some finite F has every finite F' avoiding F summing into S.
bool cauchy_by_definition(const Multiset& m, const SetSystem& a) {
    const Carrier& g = a.carrier;
    const std::size_t n = g.size();
    std::vector<Elem> es;
    std::vector<std::size_t> cap;
    for (auto& [e, k] : m.counts) {
        es.push_back(e);
        cap.push_back(k == kOmega ? 3 * n : std::size_t(k));
    }
    for (Mask s : a.sets) {
        bool some_f = false;
        each_counts(std::vector<std::size_t>(es.size(), 0), cap, [&](const std::vector<std::size_t>& f) {
            if (some_f) return;
            std::vector<std::size_t> rest(es.size());
            for (std::size_t i = 0; i < es.size(); ++i)
                rest[i] = m.counts.at(es[i]) == kOmega ? 2 * n : cap[i] - f[i];
            bool all = true;
            each_counts(std::vector<std::size_t>(es.size(), 0), rest, [&](const std::vector<std::size_t>& fp) {
                Elem t = *g.zero();
                for (std::size_t i = 0; i < es.size(); ++i) t = g.add(t, times(g, es[i], fp[i]));
                all = all && (s & bit(t));
            });
            some_f = all;
        });
        if (!some_f) return false;
    }
    return true;
}

SetSystem random_sets(gen::Rng& r, const Carrier& g, std::size_t k) {
    std::vector<Mask> sets;
    std::size_t count = 1 + r.below(k);
    for (std::size_t i = 0; i < count; ++i) sets.push_back(Mask(r.below(std::size_t(1) << g.size())));
    return SetSystem::of(g, sets);
}

}  // namespace

TEST_CASE("unconditional sums examples") {
    Carrier z4 = Carrier::cyclic(4);
    CHECK(unconditional_sums(ms({{1, 1}, {3, 1}}), SetSystem::of(z4, {bit(0)})) == bit(0));
    CHECK(unconditional_sums(ms({{1, 1}}), SetSystem::of(z4, {bit(0) | bit(2)})) == (bit(1) | bit(3)));
    CHECK(unconditional_sums(ms({{2, kOmega}}), SetSystem::of(z4, {bit(0)})) == 0);
    CHECK(uncond_profile(ms({{2, kOmega}, {1, 2}}), z4) == UncondProfile{2, bit(0) | bit(2)});
}

TEST_CASE("property: closed form agrees with the definition") {
    gen::Rng r(31);
    for (const char* name : {"z2", "z3", "z4", "klein", "z6"}) {
        Carrier g = Carrier::from_group_name(name);
        for (int k = 0; k < 60; ++k) {
            Multiset m = gen::multiset(r, g.size(), 3, 3);
            SetSystem a = random_sets(r, g, 2);
            Mask expect = sums_by_definition(m, a);
            CHECK(unconditional_sums(m, a) == expect);
            CHECK(unconditional_sums_oracle(m, a) == expect);
            CHECK(is_sum_cauchy(m, a) == cauchy_by_definition(m, a));
        }
    }
}

TEST_CASE("sum-Cauchy examples") {
    Carrier z4 = Carrier::cyclic(4);
    SetSystem zero = SetSystem::of(z4, {bit(0)});
    CHECK(is_sum_cauchy(ms({{1, 2}, {3, 1}}), zero));
    CHECK(!is_sum_cauchy(ms({{2, kOmega}}), zero));
    CHECK(is_sum_cauchy(ms({{2, kOmega}, {1, kOmega}}), SetSystem::of(z4, {15})));
}

TEST_CASE("unconditional systems") {
    Carrier z2 = Carrier::cyclic(2);
    System s = uncond_system(SetSystem::of(z2, {bit(0)}));
    CHECK(s.query(Family(ms({{1, 3}}))) == Elem(1));
    CHECK(s.query(Family(ms({{0, kOmega}, {1, 1}}))) == Elem(1));
    CHECK(!s.summable(Family(ms({{1, kOmega}}))));

    System whole = uncond_system(SetSystem::of(z2, {3}));
    CHECK(!whole.summable(Family::empty()));
    CHECK(!whole.summable(Family(ms({{1, 1}}))));
    System with_empty = uncond_system(SetSystem::of(z2, {0, 1}));
    CHECK(!with_empty.summable(Family(ms({{0, 1}}))));
}

TEST_CASE("sigma filter and psi examples") {
    Carrier z2 = Carrier::cyclic(2), z4 = Carrier::cyclic(4);
    SetSystem contain0_z2 = SetSystem::principal(z2, bit(0));
    CHECK(sigma_filter(finitary_group(z2)) == contain0_z2);
    CHECK(sigma_filter(System::table(z2, {})) == SetSystem::power_set(z2));

    SetSystem contain0_z4 = SetSystem::principal(z4, bit(0));
    CHECK(sigma_filter(uncond_system(SetSystem::of(z4, {bit(0)}))) == contain0_z4);
    CHECK(psi(SetSystem::of(z4, {bit(0)})) == contain0_z4);
    CHECK(psi(SetSystem::of(z2, {3})) == SetSystem::power_set(z2));
    SetSystem p = psi(SetSystem::of(z4, {bit(0) | bit(2)}));
    CHECK(psi(p) == p);
    CHECK(contain0_z4.is_filter());
    CHECK(!SetSystem::power_set(z4).is_filter());
    CHECK_THROWS_AS(sigma_filter(choice(Carrier::plain(2), 0)), Error);
}

TEST_CASE("property: psi is extensive and idempotent") {
    for (const char* name : {"z2", "z3", "z4", "klein"}) {
        Carrier g = Carrier::from_group_name(name);
        for (auto& a : set_systems(g, 2)) {
            SetSystem p = psi(a);
            CHECK(a.subset_of(p));
            CHECK(psi(p) == p);
        }
    }
}

TEST_CASE("property: sigma filter re-verifies on its sets") {
    gen::Rng r(32);
    Carrier z4 = Carrier::cyclic(4);
    for (int k = 0; k < 20; ++k) {
        SetSystem a = random_sets(r, z4, 2);
        SetSystem f = psi(a);
        System s = uncond_system(a);
        for (int j = 0; j < 30; ++j) {
            Multiset m = gen::multiset(r, 4, 3, 3);
            auto v = s.query(Family(m));
            if (!v) continue;
            for (Mask set : f.sets) CHECK((unconditional_sums(m, SetSystem::of(z4, {set})) & bit(*v)));
        }
    }
}

TEST_CASE("subgroups") {
    Carrier z8 = Carrier::cyclic(8);
    CHECK(subgroups(z8).size() == 4);
    CHECK(generated_subgroup(z8, bit(6)) == (bit(0) | bit(2) | bit(4) | bit(6)));
    CHECK(subgroups(Carrier::from_group_name("klein")).size() == 5);
}

TEST_CASE("multiset json round-trip") {
    Carrier z4 = Carrier::cyclic(4);
    Multiset m = ms({{1, 2}, {3, kOmega}});
    CHECK(multiset_from_json(multiset_to_json(m, z4), z4).counts == m.counts);
}

TEST_CASE("unconditional propositions in a small scope") {
    UncondScope scope;
    scope.groups = {"z2", "z4"};
    scope.random_cases = 40;
    for (UncondPropId id : all_uncond_props()) {
        try {
            CheckReport r = check_uncond_prop(id, scope);
            CHECK_MESSAGE(r.pass(), (uncond_prop_slug(id) + " " + r.witness.dump()));
        } catch (const Error& e) {
            CHECK_MESSAGE(e.code() == Errc::HypothesisNotMet, (uncond_prop_slug(id) + " " + e.what()));
        }
    }
}
