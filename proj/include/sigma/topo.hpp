#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigma/axioms.hpp"
#include "sigma/core.hpp"

namespace sigma {

using Mask = std::uint64_t;

inline Mask bit(Elem e) { return Mask(1) << e; }

// Topology on {0..n-1} as its list of open sets.
class Topology {
public:
    Topology() = default;
    // Validates the topology laws; raises InvalidInput.
    static Topology from_opens(std::size_t n, std::vector<Mask> opens);
    static Topology discrete(std::size_t n);
    static Topology trivial(std::size_t n);
    // Coarsest topology containing the given sets.
    static Topology generated(std::size_t n, const std::vector<Mask>& subbase);
    // "{}, {1}, {0,1}" (elements by index)
    static Topology parse(std::size_t n, const std::string& s);

    std::size_t size() const { return n_; }
    Mask full() const { return n_ == 64 ? ~Mask(0) : (Mask(1) << n_) - 1; }
    const std::vector<Mask>& opens() const { return opens_; }
    bool is_open(Mask u) const;
    bool is_closed(Mask c) const { return is_open(full() & ~c); }
    // Smallest open set containing x.
    Mask neighborhood(Elem x) const { return nbhd_[x]; }
    Mask closure(Mask s) const;
    bool is_t1() const;
    bool is_discrete() const { return opens_.size() == (std::size_t(1) << n_); }
    bool is_trivial() const { return opens_.size() <= 2; }
    // Every open set of this one is open in o.
    bool coarser_than(const Topology& o) const;

    bool operator==(const Topology& o) const { return n_ == o.n_ && opens_ == o.opens_; }
    auto operator<=>(const Topology& o) const = default;

    std::string str() const;
    json to_json() const;

private:
    std::size_t n_ = 0;
    std::vector<Mask> opens_;  // sorted
    std::vector<Mask> nbhd_;
};

// All topologies on n points, via preorders (n <= 5).
std::vector<Topology> enumerate_topologies(std::size_t n);
// Coarsest topology finer than all of ts.
Topology join(std::size_t n, const std::vector<Topology>& ts);

// "Eventually inside U iff tail is a subset of U", with a point declared to be a limit.
struct TailConstraint {
    Elem limit = 0;
    Mask tail = 0;
    auto operator<=>(const TailConstraint&) const = default;
};

// Entries of a finite or transfinite family in ordinal order, one piece per block.
Transfinite ordinal_form(const Family& f);

// Cofinal entry set: the last entry for successor order type, the final cycle otherwise.
Mask tail_mask(const Family& f);

// Points x whose every neighbourhood contains the tail. The empty family's
// limit is `point` when given.
Mask limit_set(const Family& f, const Topology& t, std::optional<Elem> point = std::nullopt);
Mask limit_set_of_tail(Mask tail, const Topology& t);
std::optional<Elem> unique_point(Mask m);

// Cofinal subfamilies used by the subsequence checks: early entries dropped,
// the final cycle thinned, or only the final cycle kept.
std::vector<Family> cofinal_subfamilies(const Family& f);

// True iff every nonempty initial segment has a limit.
bool is_gapless(const Family& f, const Topology& t);
// The limit when every initial segment (the empty one by convention at 0) has a unique limit.
std::optional<Elem> unique_limits_everywhere(const Family& f, const Topology& t, Elem zero);

Topology finest_topology_with_limits(std::size_t n, const std::vector<TailConstraint>& pairs);
Topology finest_topology_with_limits(std::size_t n, const std::vector<std::pair<Family, Elem>>& pairs);

// ---------------------------------------------------------------- limits

// Difference and partial-sum families. Inside a limit block the values are
// computed over a window of periods and must settle into a period; raises
// NotInDomain naming the first index whose initial segment fails.
Family difference_family(const System& s, const Family& f);
Family partial_sum_family(const System& s, const Family& f);
std::optional<Elem> sigma_limit(const System& s, const Family& f);

// Sums are unique limits of partial sums.
System induced_summation(const Topology& t, const Carrier& group);

struct SearchBounds {
    // Zero picks the default: n + 2 entries outside cycles and cycles up to n
    // for n <= 3; 4 and 2 from four points on, where the larger search does
    // not finish.
    std::size_t max_finite = 0;
    std::size_t max_cycle = 0;
    std::size_t max_blocks = 2;
    std::size_t finite_for(std::size_t n) const;
    std::size_t cycle_for(std::size_t n) const;
    json to_json(std::size_t n) const;
};

struct SigmaTopology {
    Topology topology;
    std::vector<TailConstraint> constraints;  // realized, deduplicated
    std::size_t families = 0;                 // families with a limit visited
    json bounds;
};

SigmaTopology sigma_topology_search(const System& s, const SearchBounds& b = {});
Topology sigma_topology(const System& s, const SearchBounds& b = {});
Topology phi(const Topology& t, const Carrier& group, const SearchBounds& b = {});

// Ordinal-indexed families used to compare summation systems.
std::vector<Family> comparison_families(const Carrier& c, std::size_t max_finite);
// First family where the two systems differ.
std::optional<Family> first_difference(const System& a, const System& b, const std::vector<Family>& fams);

struct FullSigma {
    Topology topology;
    std::vector<Topology> inducing;  // topologies whose induced system agrees
    std::size_t candidates = 0;
};
// Raises CarrierTooLarge for more than 4 points.
FullSigma full_sigma_topology(const System& s, std::size_t max_finite = 0);

struct Coreflections {
    Topology seq;
    Topology chain;
    bool net_equals_tau = false;
    std::optional<bool> chain_phi_seq;  // checked only for T1 input
};
Coreflections coreflections(const Topology& t);

// Group structure on the same set moved along a permutation of the points.
Carrier transported_group(const Carrier& g, const std::vector<Elem>& perm);

// ---------------------------------------------------------------- theorems

enum class TopoTheoremId {
    InducedEmptySum,
    InducedOrdinalReindexing,
    InducedInitialSummability,
    InducedPostfix,
    InducedLimitsAreTauLimits,
    InducedPostfixBiconditional,
    InducedZeroTails,
    InducedCofinalSubsequences,
    PhiGroupIndependent,
    PhiSystemInclusion,
    PhiT1,
    PhiExtensive,
    PhiIdempotent,
    PhiClosureOperator,
    SigmaTopologyReversal,
    SuccessorLimits,
    CofinalSubsequenceLimits,
    T1SigmaTopology,
};

std::string topo_theorem_slug(TopoTheoremId t);
std::optional<TopoTheoremId> topo_theorem_from_slug(const std::string& s);
const std::vector<TopoTheoremId>& all_topo_theorems();

struct TopoScope {
    std::size_t n = 2;
    std::string group;                           // empty: cyclic of order n
    std::optional<std::vector<Topology>> only;   // default: every topology on n points
    Bounds families;                             // universe for system comparisons
    SearchBounds search;
    std::size_t max_finite = 0;                  // comparison families; 0 means n + 1
};

// Raises HypothesisNotMet when no topology in scope meets the hypotheses.
CheckReport check_topo_theorem(TopoTheoremId id, const TopoScope& scope);

// The trivial-topology example on n points.
struct TrivialExample {
    std::vector<Family> summable;  // within comparison families
    Topology sigma;
    Topology full;
    std::size_t topologies = 0;
    std::vector<Topology> inducing;
};
TrivialExample trivial_topology_example(std::size_t n);

}  // namespace sigma
