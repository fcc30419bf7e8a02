#pragma once

#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sigma/core.hpp"

namespace sigma {

// Finite abelian group; a family is summable iff it has finitely many
// nonzero entries, and its sum adds those up.
System finitary_group(const Carrier& group);

// Multisets over an alphabet of up to four symbols, counts in N or omega.
// Packed as 16-bit counts per symbol, 0xffff standing for omega.
Carrier multiset_carrier(std::size_t alphabet);
inline constexpr std::uint32_t kMsOmega = 0xffff;
std::uint32_t ms_count(Elem e, std::size_t symbol);
Elem ms_make(const std::vector<std::uint32_t>& counts);
System multiset_monoid(std::size_t alphabet);

// Sum of a nonempty family is its entry at the least label; () sums to `empty`.
System choice(const Carrier& c, Elem empty);

// op[x][y] is a binary operation on the carrier (not assumed associative).
using MagmaTable = std::vector<std::vector<Elem>>;
MagmaTable left_projection(std::size_t n);

// Defined on (), singletons, and families indexed by exactly {0,1}.
System magma_pairs(const Carrier& c, const MagmaTable& op, Elem empty);
// Defined only on two-element index sets {i<j}, summing to a_i * a_j.
System pairs_only_magma(const Carrier& c, const MagmaTable& op);
// Defined only on two-element index sets, summing with the group addition.
System pairs_only_group(const Carrier& group);

System constant_system(const Carrier& c, Elem x0);
// All-zero families sum to 0; nothing else is summable.
System zero_only(const Carrier& group);

// Ring structure Z/n on a cyclic group (mod-n multiplication).
Carrier cyclic_ring(std::size_t n);

struct ModelSpec {
    std::string name;
    std::map<std::string, std::string> params;
};

System build_model(const ModelSpec& spec);
const std::vector<std::string>& model_names();

// ---------------------------------------------------------------- rational series

using Rational = boost::multiprecision::cpp_rational;

struct GeometricTail {
    std::uint64_t start = 0;
    Rational first;
    Rational ratio;
};

// Finitely many explicit terms plus geometric tails over N. Overlapping
// positions add up termwise.
struct SeriesFamily {
    std::map<std::uint64_t, Rational> finite;
    std::vector<GeometricTail> tails;
};

Rational series_sum(const SeriesFamily& f);
// Term at index i.
Rational series_term(const SeriesFamily& f, std::uint64_t i);
// Family over N x N, flattened to a family of pieces; each coordinate
// keeps its geometric shape so the sum is exact.
struct SeriesProduct {
    // Terms are products of one piece of each factor; pieces are either a
    // single term or a geometric tail.
    struct Piece {
        Rational coeff;       // first term of the product piece
        Rational ratio_left;  // 0 when the left piece is a single term
        Rational ratio_right;
    };
    std::vector<Piece> pieces;
};
SeriesProduct series_product(const SeriesFamily& f, const SeriesFamily& g);
Rational product_sum(const SeriesProduct& p);
// Entry (i,j) of the product family.
Rational product_term(const SeriesFamily& f, const SeriesFamily& g, std::uint64_t i, std::uint64_t j);

// Grandi's series grouped in pairs: every group sums to 0.
SeriesFamily grandi_grouped();

// Steps of the argument that no proper extension of absolute summation on
// the reals keeps the ring axioms, run on a window of a positive divergent
// sequence.
struct RegroupingTrace {
    std::vector<std::uint64_t> kept;        // indices of the positive subfamily
    std::vector<std::uint64_t> cuts;        // group k covers kept[cuts[k]..cuts[k+1])
    std::vector<Rational> grouped;          // b_k
    Rational worst_ratio;                   // max over k of (1/b_{k+1}) / (1/b_k)
    std::vector<std::pair<std::uint64_t, std::uint64_t>> ones;  // (i,j) with b_i/b_j = 1
    bool doubling_holds = false;            // b_{k+1} > 2 b_k throughout
    bool contradiction = false;             // a constant family of 1s would be summable
};

RegroupingTrace regrouping_pipeline(const std::function<Rational(std::uint64_t)>& term, std::uint64_t window);

}  // namespace sigma
