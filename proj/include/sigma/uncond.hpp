#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigma/axioms.hpp"
#include "sigma/core.hpp"
#include "sigma/topo.hpp"

namespace sigma {

// A collection of subsets of a finite abelian group, as bitmasks.
struct SetSystem {
    Carrier carrier;
    std::vector<Mask> sets;  // sorted, deduplicated

    static SetSystem of(Carrier c, std::vector<Mask> sets);
    // "{0}, {0,2}" with elements by name
    static SetSystem parse(Carrier c, const std::string& text);
    // Every superset of `core`.
    static SetSystem principal(Carrier c, Mask core);
    static SetSystem power_set(Carrier c);

    // Intersection of all sets; the whole carrier for an empty system.
    Mask intersection() const;
    bool has_zero_intersection() const;
    // Each S contains T - U for some T, U in the system.
    bool has_tu() const;
    bool is_filter() const;
    bool contains(Mask s) const;
    bool subset_of(const SetSystem& o) const;
    bool operator==(const SetSystem& o) const { return sets == o.sets; }

    std::string str() const;
    json to_json() const;
};

// Every collection of at most k subsets of the carrier.
std::vector<SetSystem> set_systems(const Carrier& c, std::size_t k);

// Subgroup generated by a set of elements, and all subgroups.
Mask generated_subgroup(const Carrier& g, Mask gens);
std::vector<Mask> subgroups(const Carrier& g);

// Sum of the finitely repeated entries and the subgroup generated by the
// infinitely repeated ones.
struct UncondProfile {
    Elem finite_sum = 0;
    Mask subgroup = 1;
    auto operator<=>(const UncondProfile&) const = default;
};
UncondProfile uncond_profile(const Multiset& m, const Carrier& g);

// {x : s + H - x is inside every set}
Mask unconditional_sums(const Multiset& m, const SetSystem& a);
Mask unconditional_sums(const UncondProfile& p, const SetSystem& a);
// Brute force over finite index sets F <= F' <= I, infinite counts
// truncated at 3|X| for F' and |X| for F.
Mask unconditional_sums_oracle(const Multiset& m, const SetSystem& a);

// Summable iff the unconditional sum is unique.
System uncond_system(const SetSystem& a);

bool is_sum_cauchy(const Multiset& m, const SetSystem& a);
bool is_sum_cauchy_oracle(const Multiset& m, const SetSystem& a);

// Largest collection under which every pair of s is an unconditional sum.
// Tables are read exactly; rule systems must be reindexing-invariant and are
// read on multisets within the bounds. Raises NotReindexInvariant.
SetSystem sigma_filter(const System& s, const Bounds& b = {});
// sigma_filter(uncond_system(a)), exact over all (finite sum, subgroup) profiles.
SetSystem psi(const SetSystem& a);
// Every unconditional sum relative to a is unique.
bool unique_sums(const SetSystem& a);

// Punctured subgroups {4}, {2,4,6}, Z/8 \ {0} on Z/8.
SetSystem deleted_neighborhoods_z8();

// Families as json: {"elements": {"1": 2, "3": "w"}}
json multiset_to_json(const Multiset& m, const Carrier& c);
Multiset multiset_from_json(const json& j, const Carrier& c);

// ---------------------------------------------------------------- checks

enum class UncondPropId {
    ClosedForm,
    SumCauchyClosedForm,
    ZeroIntersectionTrio,
    TuUniqueness,
    PartitionSums,
    SumCauchyNecessary,
    SumCauchySufficiency,
    PsiExtensiveIdempotent,
    PsiClosureOperator,
    PsiGroupDependence,
    SystemAxioms,
    DeletedNeighborhoods,
    FilterContainsNeighborhoods,
};

std::string uncond_prop_slug(UncondPropId p);
std::optional<UncondPropId> uncond_prop_from_slug(const std::string& s);
const std::vector<UncondPropId>& all_uncond_props();

struct UncondScope {
    std::vector<std::string> groups = {"z2", "z3", "z4", "z6"};
    std::size_t max_sets = 2;      // |A|
    std::size_t max_support = 3;   // distinct entries of a family
    Mult max_count = 3;            // finite multiplicities 1..max_count, plus omega
    std::size_t random_cases = 200;
    std::uint64_t seed = 1;
    json to_json() const;
};

// Raises HypothesisNotMet when nothing in scope meets the hypotheses.
CheckReport check_uncond_prop(UncondPropId id, const UncondScope& scope = {});

// Re-evaluates a witness of check_uncond_prop; true when it still fails.
bool uncond_witness_refails(const json& witness);

}  // namespace sigma
