#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigma/axioms.hpp"
#include "sigma/core.hpp"
#include "sigma/endo.hpp"
#include "sigma/topo.hpp"

namespace sigma {

struct SigmaClosedCertificate {
    Mask subset = 0;
    bool closed = true;
    std::optional<Family> witness;  // members in the subset, sum outside
    std::optional<Elem> witness_sum;
    std::size_t families = 0;       // summable families with members in the subset
    bool exhaustive = false;        // tables are read exactly
    json to_json(const Carrier& c) const;
};

// Exhaustive for tables; rule systems are searched over short sequences and
// single-block ordinal families with entries in the subset, the bounded
// universe, and seeded random sequences.
SigmaClosedCertificate is_sigma_closed(const System& s, Mask subset, const Bounds& b = {}, std::uint64_t seed = 1);
// The witness still has members in the subset and a sum outside it.
bool certificate_valid(const System& s, const SigmaClosedCertificate& c);

bool is_subgroup(const Carrier& g, Mask s);
bool is_ideal(const Carrier& r, Mask s);

// Pairs of equal-mod-S families with sums in different cosets.
struct QuotientConflict {
    Family left, right;
    Elem left_sum = 0, right_sum = 0;
    json to_json(const Carrier& c) const;
};
// Direct search of the quotient relation for a conflict: all pairs of a
// table, the bounded universe of a rule system.
std::optional<QuotientConflict> quotient_conflict(const System& s, Mask subgroup, const Bounds& b = {});

struct QuotientSystem {
    Mask subgroup = 0;
    std::vector<Mask> cosets;        // sorted by least element
    std::vector<Elem> coset_of;      // element -> coset index
    System system;                   // on the coset carrier
};

// Raises InvalidInput when the subset is not a subgroup, HypothesisNotMet when
// addition or negation functoriality fails within the bounds, and NotAFunction
// with the pair (a, a - a) when a family in S^I sums outside S.
// Rule systems are lifted along periodic lifts, at most 2^16 per family
// (NotRepresentable beyond).
QuotientSystem quotient_system(const System& s, Mask subgroup, const Bounds& b = {});

// Left reorderability within the bounds, surjectivity, (1) sums to 1, and
// (1, -1) sums like ().
std::vector<CheckReport> reorderable_system_suite(const System& s, const Bounds& b = {});

// ---------------------------------------------------------------- endo

enum class EndoIdeal { Zero, FiniteRank, Full };
std::string endo_ideal_name(EndoIdeal i);
std::optional<EndoIdeal> endo_ideal_from_name(const std::string& s);

struct EndoClosedCertificate {
    EndoIdeal ideal = EndoIdeal::Zero;
    bool closed = true;
    std::optional<std::string> witness;  // catalog family
    std::size_t families = 0;
    std::size_t window = 0;
    json to_json() const;
};

// Searches the family catalog and its finite truncations. Finite rank is
// read from the window.
EndoClosedCertificate is_sigma_closed(const EndoSystem& s, EndoIdeal ideal, std::size_t window = 32);
// Raises NotAFunction with (e_{i,i}) against the zero family when not closed.
void endo_quotient(const EndoSystem& s, EndoIdeal ideal, std::size_t window = 32);

// ---------------------------------------------------------------- checks

enum class QuotientTheoremId {
    ClosedIffFunction,
    LimitClosure,
    HausdorffClosure,
    ReorderableQuotient,
    FinitaryQuotient,
    EndoClosedIdeals,
};

std::string quotient_theorem_slug(QuotientTheoremId t);
std::optional<QuotientTheoremId> quotient_theorem_from_slug(const std::string& s);
const std::vector<QuotientTheoremId>& all_quotient_theorems();

struct QuotientScope {
    std::vector<std::string> groups = {"trivial", "z2", "z3", "z4", "klein"};
    std::size_t max_pairs = 6;       // table size for the closed-iff-function sweep
    std::size_t labels = 2;          // index sets are subsets of {0..labels-1}
    std::size_t window = 16;
    Bounds bounds;
    json to_json() const;
};

CheckReport check_quotient_theorem(QuotientTheoremId id, const QuotientScope& scope = {});

}  // namespace sigma
