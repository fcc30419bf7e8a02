#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigma/axioms.hpp"
#include "sigma/core.hpp"

namespace sigma {

// Fixtures of the independence table for reindexing invariance and
// subfamily summability, with the verdict pair each one should show.
struct IndependenceFixture {
    std::string name;
    System system;
    bool reindex = false;
    bool subfamilies = false;
};
std::vector<IndependenceFixture> independence_fixtures();
// One row per fixture; a row fails when the verdicts differ from the expected pair.
std::vector<CheckReport> independence_rows(const Bounds& b = {});

// Zero-extension closures on small tables over plain carriers with the
// empty sum as zero. Axiom 4 and both closures only relate families with
// the same core, so each core class is swept on its own: every class
// configuration (labels < 3, at most 2 entries, carrier <= max_carrier) is
// checked for the inclusions, the two forms of Axiom 4, and minimality
// against every extension of the class. Reindexing and subfamily
// preservation need whole tables and run on every table with labels < 2,
// plus seeded random tables with labels < 3.
struct ZeroSweepScope {
    std::size_t max_carrier = 3;
    std::size_t random_tables = 300;
    std::uint64_t seed = 1;
};
CheckReport zero_closure_sweep(const ZeroSweepScope& scope = {});

// The closure under finite extensions of the all-zeros system over Z/2
// against finitary Z/2 on families with at most 4 entries, and its axioms.
CheckReport finite_extension_check(const Bounds& b = {});

// Absorption for every list of at most 3 symbols of the multiset monoid, its
// invertible elements, and the omega-summable constants of finitary Z/4.
std::vector<CheckReport> swindle_rows(const Bounds& b = {});

// Exact geometric fixtures, grouped Grandi, product sums on seeded pairs and
// the regrouping pipeline on a positive divergent sequence.
std::vector<CheckReport> series_rows(std::uint64_t seed = 1, std::size_t pairs = 50);

// Diagonal sum, rejected column family, count-im fixtures, countable
// criterion and topology agreement on the family catalog, plus the
// reorderable ring suite over F_2.
std::vector<CheckReport> endo_rows(std::size_t window = 32);

struct SuiteOptions {
    Bounds bounds;
    std::uint64_t seed = 1;
    std::size_t window = 16;
    std::size_t points = 2;  // carrier size for the phi suite
};

// axioms, theorems, phi, psi, uncond, endo, quotient, independence-table,
// series, all. axioms needs a model; theorems runs the model's theorem
// checks when one is given and the fixed fixtures otherwise. Rows come back
// sorted by check-id. Raises InvalidSpec for unknown suites and
// MissingStructure when a model is required but absent.
std::vector<CheckReport> run_suite(const std::string& suite, const System* model, const SuiteOptions& o = {});
const std::vector<std::string>& suite_names();

}  // namespace sigma
