#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sigma/core.hpp"

namespace sigma {

struct Bounds {
    std::size_t max_size = 3;    // entries of finite families
    std::size_t max_label = 4;   // finite labels are drawn from [0, max_label)
    std::size_t max_parts = 3;   // |K| for merger-style maps
    std::size_t max_blocks = 1;  // limit blocks of enumerated ordinal families
    std::size_t max_prefix = 1;
    std::size_t max_cycle = 2;
    std::size_t max_final = 1;
    std::size_t max_elements = 8;  // only the first this many carrier elements are enumerated
    std::size_t max_ordinal_elements = 3;  // same, for entries of ordinal families
    bool permutations_only = false;  // reindexing restricted to I' = I
    bool forward_only = false;       // zero-means-nothing as b summable => a summable

    json to_json() const;
    // "max_size=3,max_label=4,permutations_only=true"
    static Bounds parse(const std::string& kv, Bounds base);
    static Bounds parse(const std::string& kv);
};

// Everything needed to re-evaluate one axiom instance. Fields unused by an
// axiom stay empty.
struct Instance {
    AxiomId axiom = AxiomId::ReindexInvariance;
    Family a;
    Family b;
    std::vector<Selector> parts;  // subfamily selectors applied to a (to b for zero-means-nothing)
    std::vector<Label> outer;     // outer labels, one per part
    std::uint32_t group = 0;      // consecutive grouping size (ordinal insertive associativity)
    Label label = 0;
    Elem x = 0;
    Family r;                     // multipliers
    bool permutations_only = false;
    bool forward_only = false;
};

json instance_to_json(const Instance& in, const Carrier& c);
Instance instance_from_json(const json& j, const Carrier& c);
json selector_to_json(const Selector& s);
Selector selector_from_json(const json& j);

// Re-evaluates an instance; returns a description of the violation if any.
std::optional<json> violation(const System& s, const Instance& in);

CheckReport check_axiom(const System& s, AxiomId a, const Bounds& b = Bounds());
std::vector<CheckReport> check_all_axioms(const System& s, const Bounds& b = {});
// True when the carrier lacks the structure an axiom talks about.
bool axiom_applicable(const System& s, AxiomId a);

// Re-evaluates a failing report's witness; true when it still fails.
bool witness_refails(const System& s, const json& witness);

// Families enumerated for bounded checks.
std::vector<Family> finite_universe(const Carrier& c, const Bounds& b);
std::vector<Family> ordinal_universe(const Carrier& c, const Bounds& b);
std::vector<Family> universe(const System& s, const Bounds& b);

// ---------------------------------------------------------------- theorems

enum class TheoremId { WeakSwindle, Absorption, Swindle, ShiftEquality };
std::string theorem_slug(TheoremId t);
std::optional<TheoremId> theorem_from_slug(const std::string& s);
const std::vector<TheoremId>& all_theorems();

// Raises HypothesisNotMet naming the failed hypothesis.
CheckReport check_theorem(const System& s, TheoremId t, const Bounds& b = {});

// y = sum of the omega family cycling through xs; empty when not summable.
std::optional<Elem> absorbing_element(const System& s, const std::vector<Elem>& xs);
// Elements with a two-sided inverse for the carrier addition.
std::vector<Elem> invertible_elements(const Carrier& c);

// ---------------------------------------------------------------- constructions

// Core: drop entries equal to the empty sum (no-op without one).
Family core_of(const Family& f, std::optional<Elem> empty);

struct ZeroClosure {
    System prime;        // families with a summable core-extension
    System double_prime; // families whose core is prime-summable
};
// Raises CoreConflict when two summable families share a core but not a sum,
// HypothesisNotMet when the empty family is not summable.
ZeroClosure zero_extension_closure(const System& s, const Bounds& b = {});

// The system on im(sum) keeping exactly the pairs over that image.
// Element ids are renumbered; names are kept.
struct ImageRestriction {
    System system;
    std::vector<Elem> image;  // new id -> old id
};
ImageRestriction restrict_to_image(const System& s, const Bounds& b = {});

// Least extension closed under finite extensions. Uses the carrier's own
// addition when it is a group compatible with the induced one, otherwise
// restricts to the image first. Raises HypothesisNotMet.
System finite_extension_closure(const System& s, const Bounds& b = {});

}  // namespace sigma
