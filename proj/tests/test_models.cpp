#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gen.hpp"
#include "sigma/axioms.hpp"
#include "sigma/modelfile.hpp"
#include "sigma/models.hpp"

using namespace sigma;

namespace {

Rational q(long n, long d = 1) { return Rational(n) / d; }

Rational abs_q(const Rational& x) { return x < 0 ? Rational(-x) : x; }

SeriesFamily geometric(std::uint64_t start, Rational a, Rational r) {
    SeriesFamily f;
    f.tails.push_back({start, a, r});
    return f;
}

// Sum of the first n terms and a bound on what the rest can add.
std::pair<Rational, Rational> partial_with_bound(const SeriesFamily& f, std::uint64_t n) {
    Rational s = 0;
    for (std::uint64_t i = 0; i < n; ++i) s += series_term(f, i);
    Rational rest = 0;
    for (auto& t : f.tails) {
        Rational r = abs_q(t.ratio);
        // terms from max(n, start) on
        std::uint64_t from = std::max(n, t.start);
        Rational first = abs_q(t.first);
        for (std::uint64_t k = t.start; k < from; ++k) first *= r;
        rest += first / (1 - r);
    }
    return {s, rest};
}

SeriesFamily random_series(gen::Rng& r) {
    SeriesFamily f;
    std::size_t k = r.below(3);
    for (std::size_t i = 0; i < k; ++i) f.finite[r.below(5)] += q(long(r.below(9)) - 4, long(1 + r.below(5)));
    std::size_t t = 1 + r.below(2);
    for (std::size_t i = 0; i < t; ++i) {
        long den = long(2 + r.below(4));
        long num = long(r.below(std::size_t(2 * den - 1))) - (den - 1);  // |num| < den
        f.tails.push_back({r.below(4), q(long(r.below(7)) - 3, long(1 + r.below(3))), q(num, den)});
    }
    return f;
}

}  // namespace

TEST_CASE("zoo examples") {
    System z4 = build_model(ModelSpec{"finitary-group", {{"group", "z4"}}});
    CHECK(z4.query(Family::seq({1, 1, 1})) == Elem(3));
    CHECK(!z4.summable(Family::omega({}, {1})));
    CHECK(z4.query(Family::omega({2}, {0})) == Elem(2));

    System ms = build_model(ModelSpec{"multiset-monoid", {{"alphabet", "1"}}});
    Elem m = ms_make({1});
    CHECK(ms.query(Family::omega({}, {m})) == ms_make({kMsOmega}));
    CHECK(check_axiom(ms, AxiomId::FiniteTotality).pass());

    System mp = magma_pairs(Carrier::plain(2), left_projection(2), 0);
    CHECK(mp.summable(Family::empty()));
    CHECK(mp.query(Family::labeled({{4, 1}})) == Elem(1));
    CHECK(mp.query(Family::labeled({{0, 1}, {1, 0}})) == Elem(1));
    CHECK(!mp.summable(Family::labeled({{0, 1}, {2, 0}})));
    CHECK(!mp.summable(Family::seq({0, 0, 0})));

    CHECK(constant_system(Carrier::plain(3), 2).query(Family::omega({}, {0, 1})) == Elem(2));
    CHECK(zero_only(Carrier::cyclic(2)).query(Family::omega({}, {0})) == Elem(0));
    CHECK(!zero_only(Carrier::cyclic(2)).summable(Family::seq({1})));

    CHECK_THROWS_AS(build_model(ModelSpec{"no-such-model", {}}), Error);
    CHECK_THROWS_AS(build_model(ModelSpec{"multiset-monoid", {{"alphabet", "9"}}}), Error);
    CHECK_THROWS_AS(build_model(ModelSpec{"finitary-group", {{"group", "q8"}}}), Error);
}

TEST_CASE("declared axioms match the checker") {
    for (const std::string& name : model_names()) {
        if (name == "rational-series") continue;  // exact rationals, no finite carrier
        System s = build_model(ModelSpec{name, {}});
        for (AxiomId a : all_axioms()) {
            if (!axiom_applicable(s, a)) continue;
            bool pass = check_axiom(s, a).pass();
            CHECK_MESSAGE(pass == bool(s.declared.count(a)), (name + " " + axiom_slug(a)));
        }
    }
}

TEST_CASE("series examples") {
    CHECK(series_sum(geometric(0, q(1, 2), q(1, 2))) == 1);
    SeriesFamily f = geometric(2, q(1, 12), q(1, 2));
    f.finite = {{0, q(1, 3)}, {1, q(1, 6)}};
    CHECK(series_sum(f) == q(2, 3));
    CHECK(series_sum(grandi_grouped()) == 0);
    CHECK_THROWS_AS(series_sum(geometric(0, q(1), q(-1))), Error);
    CHECK_THROWS_AS(series_sum(geometric(0, q(1), q(3, 2))), Error);

    SeriesFamily half = geometric(0, q(1, 2), q(1, 2));
    CHECK(product_sum(series_product(half, half)) == 1);
    SeriesFamily two;
    two.finite[0] = 2;
    CHECK(product_sum(series_product(two, geometric(0, q(1), q(1, 3)))) == 3);
    SeriesFamily zero;
    zero.finite[0] = 0;
    CHECK(product_sum(series_product(zero, zero)) == 0);
}

TEST_CASE("property: series sums lie within the partial-sum bound") {
    gen::Rng r(41);
    for (int k = 0; k < 150; ++k) {
        SeriesFamily f = random_series(r);
        auto [s, rest] = partial_with_bound(f, 40);
        CHECK(abs_q(series_sum(f) - s) <= rest);
    }
}

TEST_CASE("property: products multiply sums") {
    gen::Rng r(42);
    for (int k = 0; k < 60; ++k) {
        SeriesFamily f = random_series(r), g = random_series(r);
        Rational expect = series_sum(f) * series_sum(g);
        CHECK(product_sum(series_product(f, g)) == expect);
        // the 24 x 24 corner plus the mass outside it
        Rational corner = 0;
        for (std::uint64_t i = 0; i < 24; ++i)
            for (std::uint64_t j = 0; j < 24; ++j) {
                Rational t = product_term(f, g, i, j);
                CHECK(t == series_term(f, i) * series_term(g, j));
                corner += t;
            }
        auto [sf, rf] = partial_with_bound(f, 24);
        auto [sg, rg] = partial_with_bound(g, 24);
        Rational af = 0, ag = 0;
        for (std::uint64_t i = 0; i < 24; ++i) {
            af += abs_q(series_term(f, i));
            ag += abs_q(series_term(g, i));
        }
        CHECK(abs_q(expect - corner) <= af * rg + rf * ag + rf * rg);
    }
}

TEST_CASE("regrouping pipeline") {
    RegroupingTrace t = regrouping_pipeline([](std::uint64_t i) { return Rational(i % 2 ? -1 : 1); }, 256);
    CHECK(t.doubling_holds);
    CHECK(t.contradiction);
    for (std::size_t k = 0; k + 1 < t.grouped.size(); ++k) CHECK(t.grouped[k + 1] > 2 * t.grouped[k]);
    for (std::uint64_t i : t.kept) CHECK(i % 2 == 0);
}

TEST_CASE("model file parsing") {
    const std::string text =
        "# two-element group\n"
        "name: tiny\n"
        "carrier: e a\n"
        "group:\n"
        "  e a\n"
        "  a e\n"
        "traits: empty=e\n"
        "sigma:\n"
        "  () -> e\n"
        "  0 | a -> a\n"
        "  0 1 | a a -> e\n"
        "  ord: [ | a] -> e\n";
    ModelFile m = parse_model(text);
    CHECK(m.name == "tiny");
    CHECK(m.names == std::vector<std::string>{"e", "a"});
    System s = m.system();
    CHECK(s.query(Family::seq({1, 1})) == Elem(0));
    CHECK(s.query(Family::omega({}, {1})) == Elem(0));
    CHECK(!s.summable(Family::seq({0})));
    CHECK(parse_model(write_model(m)) == m);

    CHECK_THROWS_AS(parse_model("carrier: 2\nsigma:\n  () -> 7\n"), Error);
    CHECK_THROWS_AS(parse_model("bogus line\n"), Error);
    CHECK_THROWS_AS(parse_model("carrier: 2\nsigma:\n  () -> 0\n  () -> 1\n").system(), Error);
}

TEST_CASE("property: model files round-trip") {
    gen::Rng r(43);
    for (int k = 0; k < 200; ++k) {
        ModelFile m;
        m.name = "gen" + std::to_string(k);
        std::size_t n = 2 + r.below(3);
        for (std::size_t i = 0; i < n; ++i) m.names.push_back("x" + std::to_string(i));
        if (r.coin()) {
            m.add.assign(n, std::vector<Elem>(n));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) m.add[i][j] = Elem((i + j) % n);
        }
        std::size_t rows = r.below(5);
        for (std::size_t i = 0; i < rows; ++i) {
            Family f = r.coin() ? gen::explicit_family(r, n, 3, 6) : gen::transfinite_family(r, n);
            m.sigma.emplace_back(f, Elem(r.below(n)));
        }
        ModelFile back = parse_model(write_model(m));
        CHECK(write_model(back) == write_model(m));
        CHECK(back.names == m.names);
        CHECK(back.add == m.add);
        REQUIRE(back.sigma.size() == m.sigma.size());
        for (std::size_t i = 0; i < m.sigma.size(); ++i) {
            CHECK(canonicalize(back.sigma[i].first) == canonicalize(m.sigma[i].first));
            CHECK(back.sigma[i].second == m.sigma[i].second);
        }
    }
}

TEST_CASE("family literals") {
    Carrier z3 = Carrier::cyclic(3);
    for (const char* lit : {"()", "0 2 | 1 2", "ord: [1 | 2] [ | 0] 1", "w w+1 | 0 2"}) {
        Family f = parse_family(lit, z3);
        CHECK(canonicalize(parse_family(write_family(f, z3), z3)) == canonicalize(f));
    }
    CHECK_THROWS_AS(parse_family("0 0 | 1 2", z3), Error);
    CHECK_THROWS_AS(parse_family("0 | 5", z3), Error);
}
