#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gen.hpp"
#include "sigma/endo.hpp"

using namespace sigma;

namespace {

const Field f2 = Field::prime(2);
const Field f3 = Field::prime(3);

SparseMatrix random_sparse(gen::Rng& r, Field f, std::size_t dim, std::size_t entries) {
    SparseMatrix m(f);
    for (std::size_t k = 0; k < entries; ++k) m.set(r.below(dim), r.below(dim), Scalar(long(1 + r.below(f.p - 1))));
    return m;
}

// Entry (row, col) of a finite sum, by adding the scalars directly.
Scalar entry_sum(const std::vector<SparseMatrix>& ms, Field f, Index row, Index col) {
    Scalar s = 0;
    for (auto& m : ms) s = f.add(s, m.at(row, col));
    return s;
}

}  // namespace

TEST_CASE("fields") {
    CHECK(f3.norm(Scalar(-1)) == 2);
    CHECK(f3.mul(2, 2) == 1);
    CHECK(f3.inv(2) == 2);
    CHECK(Field::rationals().inv(Scalar(3)) == Scalar(1) / 3);
    CHECK_THROWS_AS(Field::prime(4), Error);
    CHECK_THROWS_AS(f3.inv(0), Error);
}

TEST_CASE("sparse and lazy matrices") {
    SparseMatrix a = SparseMatrix::unit(f3, 0, 1, 2);
    SparseMatrix b = SparseMatrix::unit(f3, 1, 0);
    CHECK((a * b).at(0, 0) == 2);
    CHECK((a + a).at(0, 1) == 1);
    CHECK((a - a).is_zero());
    CHECK((a + b).rank() == 2);

    LazyMatrix id = LazyMatrix::identity(f3);
    CHECK((id * LazyMatrix::of(a)).at(0, 1) == 2);
    CHECK(!window_difference(id * id, id, 16));
    CHECK(window_difference(id, LazyMatrix::zero(f3), 16) == std::pair<Index, Index>{0, 0});
    CHECK(id.window_rank(10) == 10);
    CHECK(finite_rank_within(LazyMatrix::of(a + b), 8));
    CHECK(!finite_rank_within(id, 8));
}

TEST_CASE("diagonal units sum to the identity") {
    LazyMatrix s = endo_sum(catalog_family("diag", f2));
    for (Index r = 0; r < 32; ++r)
        for (Index c = 0; c < 32; ++c) CHECK(s.at(r, c) == (r == c ? 1 : 0));
    CHECK(!window_difference(s, LazyMatrix::identity(f2), 32));
}

TEST_CASE("a column of units is rejected") {
    MatrixFamily col = catalog_family("column", f2);
    CHECK(!endo_summable(col));
    CHECK_THROWS_AS(endo_sum(col), Error);
    // the row family is fine: each column meets one member
    LazyMatrix row = endo_sum(catalog_family("row", f2));
    for (Index c = 0; c < 16; ++c) CHECK(row.at(0, c) == 1);
    CHECK(row.at(1, 0) == 0);
}

TEST_CASE("catalog certificates are sound") {
    for (auto& name : catalog_names()) {
        MatrixFamily f = catalog_family(name, f3);
        CHECK_MESSAGE(!certificate_violation(f, 16), name);
    }
}

TEST_CASE("property: finite sums add entrywise") {
    gen::Rng r(51);
    for (int k = 0; k < 100; ++k) {
        std::vector<SparseMatrix> ms;
        std::size_t n = r.below(5);
        for (std::size_t i = 0; i < n; ++i) ms.push_back(random_sparse(r, f3, 6, 4));
        MatrixFamily fam = MatrixFamily::list(f3, ms);
        REQUIRE(endo_summable(fam));
        LazyMatrix s = endo_sum(fam);
        for (Index row = 0; row < 7; ++row)
            for (Index col = 0; col < 7; ++col) CHECK(s.at(row, col) == entry_sum(ms, f3, row, col));
    }
}

TEST_CASE("property: restricting to a finite range sums the members") {
    gen::Rng r(52);
    for (auto& name : catalog_names()) {
        MatrixFamily f = catalog_family(name, f3);
        if (f.length) continue;
        Index from = r.below(4), to = from + r.below(5);
        MatrixFamily sub = restrict_family(f, IndexSet::range(from, to));
        REQUIRE(endo_summable(sub));
        LazyMatrix s = endo_sum(sub);
        for (Index row = 0; row < 10; ++row)
            for (Index col = 0; col < 10; ++col) {
                Scalar e = 0;
                for (Index i = from; i < to; ++i) e = f3.add(e, f.member(i).at(row, col));
                CHECK_MESSAGE(s.at(row, col) == e, name);
            }
    }
}

TEST_CASE("left reordering") {
    MatrixFamily a = catalog_family("diag", f2);
    MatrixFamily r = catalog_family("ones", f2);
    for (const char* name : {"diagonal", "pairs", "fibres"}) {
        CheckReport rep = check_left_reorder(a, r, catalog_reindexing(name, std::nullopt), 16);
        CHECK_MESSAGE(rep.pass(), (std::string(name) + " " + rep.witness.dump()));
    }

    // mutation: a dual that does not match the map must be caught
    Reindexing bad = catalog_reindexing("diagonal", std::nullopt);
    bad.name = "diagonal-shifted-dual";
    bad.dual = [](Index i) { return IndexSet::finite({i + 1}); };
    CheckReport rep = check_left_reorder(a, catalog_family("diag", f2), bad, 16);
    CHECK(!rep.pass());
}

TEST_CASE("count-im fixtures") {
    LazyMatrix id = LazyMatrix::identity(f2);
    CHECK(count_im_check(catalog_family("diag", f2), id, 16).pass());
    CheckReport off = count_im_check(catalog_family("diag", f2), id + LazyMatrix::of(SparseMatrix::unit(f2, 0, 0)), 16);
    CHECK(off.pass());
    CHECK(off.bounds.value("summable_with_sum", true) == false);
}

TEST_CASE("countable criterion and the finite topology") {
    for (auto& name : catalog_names()) {
        MatrixFamily f = catalog_family(name, f2);
        CheckReport c = countable_criterion(f, 16);
        CHECK_MESSAGE(c.pass(), (name + " " + c.witness.dump()));
        if (f.length) continue;
        CheckReport s = szele_topology_check(f, 16);
        CHECK_MESSAGE(s.pass(), (name + " " + s.witness.dump()));
    }
}

TEST_CASE("restricted summation at the count boundary") {
    EndoSystem e = endo_system(f2);
    EndoSystem three = restricted_system(e, 3);
    MatrixFamily units3 = MatrixFamily::list(f2, {SparseMatrix::unit(f2, 0, 0), SparseMatrix::unit(f2, 1, 1), SparseMatrix::unit(f2, 2, 2)});
    MatrixFamily units2 = MatrixFamily::list(f2, {SparseMatrix::unit(f2, 0, 0), SparseMatrix::unit(f2, 1, 1)});
    CHECK(e.summable(units3));
    CHECK(!three.summable(units3));
    CHECK(three.summable(units2));
    CHECK(three.sum(units2).at(1, 1) == 1);

    EndoSystem finite = restricted_system(e, std::nullopt);
    CHECK(!finite.summable(catalog_family("diag", f2)));
    CHECK(e.summable(catalog_family("diag", f2)));
    // zero members do not count
    MatrixFamily padded = MatrixFamily::list(f2, {SparseMatrix(f2), SparseMatrix::unit(f2, 0, 0), SparseMatrix(f2), SparseMatrix::unit(f2, 1, 1)});
    CHECK(three.summable(padded));
}

TEST_CASE("reorderable ring suite") {
    for (auto& r : reorderable_suite(f2, 12)) CHECK_MESSAGE(r.pass(), (r.id + " " + r.witness.dump()));
    for (auto& r : reorderable_suite(Field::rationals(), 8)) CHECK_MESSAGE(r.pass(), (r.id + " " + r.witness.dump()));
}
