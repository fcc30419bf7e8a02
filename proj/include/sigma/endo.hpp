#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sigma/core.hpp"

namespace sigma {

using Scalar = boost::multiprecision::cpp_rational;
using Index = std::uint64_t;

// Prime field F_p, or the rationals when p = 0.
struct Field {
    std::uint32_t p = 2;
    static Field prime(std::uint32_t p);
    static Field rationals() { return Field{0}; }
    Scalar norm(const Scalar& x) const;
    Scalar add(const Scalar& a, const Scalar& b) const { return norm(a + b); }
    Scalar sub(const Scalar& a, const Scalar& b) const { return norm(a - b); }
    Scalar mul(const Scalar& a, const Scalar& b) const { return norm(a * b); }
    Scalar inv(const Scalar& a) const;
    std::string name() const;
    bool operator==(const Field&) const = default;
};

// Column of an infinite matrix: row -> nonzero scalar.
using Column = std::map<Index, Scalar>;

// Finitely supported matrix.
class SparseMatrix {
public:
    explicit SparseMatrix(Field f = {}) : field_(f) {}
    static SparseMatrix unit(Field f, Index row, Index col, Scalar v = 1);

    const Field& field() const { return field_; }
    Scalar at(Index r, Index c) const;
    void set(Index r, Index c, const Scalar& v);
    const std::map<std::pair<Index, Index>, Scalar>& entries() const { return e_; }
    bool is_zero() const { return e_.empty(); }
    Column column(Index c) const;

    SparseMatrix operator+(const SparseMatrix& o) const;
    SparseMatrix operator-(const SparseMatrix& o) const;
    SparseMatrix operator*(const SparseMatrix& o) const;
    bool operator==(const SparseMatrix& o) const { return field_ == o.field_ && e_ == o.e_; }

    std::size_t rank() const;
    std::string str() const;

private:
    Field field_;
    std::map<std::pair<Index, Index>, Scalar> e_;  // (row, col), nonzero only
};

// Column-finite matrix given by its columns; queries do finite work.
class LazyMatrix {
public:
    LazyMatrix() = default;
    LazyMatrix(Field f, std::function<Column(Index)> col) : field_(f), col_(std::move(col)) {}
    static LazyMatrix of(const SparseMatrix& m);
    static LazyMatrix identity(Field f);
    static LazyMatrix zero(Field f);

    const Field& field() const { return field_; }
    Column column(Index c) const { return col_(c); }
    Scalar at(Index r, Index c) const;

    LazyMatrix operator+(const LazyMatrix& o) const;
    LazyMatrix operator-(const LazyMatrix& o) const;
    LazyMatrix operator*(const LazyMatrix& o) const;
    LazyMatrix scaled(const Scalar& s) const;

    // Rank of the top-left w x w block.
    std::size_t window_rank(std::size_t w) const;

private:
    Field field_;
    std::function<Column(Index)> col_;
};

// Apply to a column vector.
Column apply_matrix(const LazyMatrix& m, const Column& v);

// First window x window entries agree; returns the first differing (row, col).
std::optional<std::pair<Index, Index>> window_difference(const LazyMatrix& a, const LazyMatrix& b, std::size_t window);

// Finite list of indices or a membership rule over N.
struct IndexSet {
    std::optional<std::vector<Index>> list;  // sorted when present
    std::function<bool(Index)> contains;

    static IndexSet finite(std::vector<Index> xs);
    static IndexSet range(Index from, Index to);  // [from, to)
    static IndexSet tail(Index from);             // [from, infinity)
    static IndexSet all() { return tail(0); }
    bool is_finite() const { return list.has_value(); }
};

// Family of matrices indexed by 0..n-1 or by N. The certificate lists, for
// each column, the indices whose member can be nonzero there; columns where
// infinitely many members are nonzero are listed separately.
struct MatrixFamily {
    std::string name;
    std::vector<Elem> params;
    Field field;
    std::optional<Index> length;  // finite index set 0..length-1
    std::function<LazyMatrix(Index)> member;
    // nullopt on columns where infinitely many members are nonzero
    std::function<std::optional<std::vector<Index>>(Index col)> support;  // empty: no certificate
    std::set<Index> infinite_columns;     // all such columns, when finitely many
    bool many_infinite_columns = false;   // infinitely many such columns
    std::optional<Index> nonzero_members; // upper bound; unset means unbounded

    static MatrixFamily list(Field f, std::vector<SparseMatrix> ms);
    static MatrixFamily lazy_list(Field f, std::vector<LazyMatrix> ms, std::string name = "list");
    bool has_certificate() const { return bool(support); }
    IndexSet domain() const;
    // Indices whose member can be nonzero on column c; nullopt when infinitely many.
    std::optional<std::vector<Index>> column_support(Index c) const;
    std::string str() const;
};

// Built-in generated families over N (entries e_{r,c} are matrix units):
//   diag        e_{i,i}               shift     e_{i+1,i}
//   column      e_{i,0}               row       e_{0,i}
//   staircase   sum_{b>i} e_{i,b}     pairs     e_{i,i} + e_{i,i+1}
//   blocks      e_{2i,2i} + e_{2i+1,2i+1}      zero      0
//   scaled      c e_{i,i} (param c)     ones      identity (no certificate needed)
// column and row take the fixed index as param (default 0).
MatrixFamily catalog_family(const std::string& name, Field f = {}, std::vector<Elem> params = {});
const std::vector<std::string>& catalog_names();

// Samples (index, column) pairs outside the certificate and checks the member vanishes there.
// Returns the first unsound pair.
std::optional<std::pair<Index, Index>> certificate_violation(const MatrixFamily& f, std::size_t window);

// Raises MissingCertificate for generated families without one.
bool endo_summable(const MatrixFamily& f);
// Raises NotInDomain when not summable.
LazyMatrix endo_sum(const MatrixFamily& f);

// Subfamily on an index set; the certificate is restricted.
MatrixFamily restrict_family(const MatrixFamily& f, const IndexSet& s);
// (r_i a_i); raises IndexMismatch when the index sets differ.
MatrixFamily left_multiply_family(const MatrixFamily& r, const MatrixFamily& a);
// (c a_i) and (a_i c) for a fixed matrix c.
MatrixFamily scale_family(const LazyMatrix& c, const MatrixFamily& a);
MatrixFamily right_scale_family(const MatrixFamily& a, const LazyMatrix& c);
// Pointwise sum or difference of two families on the same index set.
MatrixFamily combine_families(const MatrixFamily& a, const MatrixFamily& b, bool subtract);

// A map K -> P(I) with its dual I -> P(K).
struct Reindexing {
    std::string name;
    std::optional<Index> k_length;  // finite K = 0..k_length-1
    std::function<IndexSet(Index k)> psi;
    std::function<IndexSet(Index i)> dual;
};

// Catalog maps on I = N (or the family's finite index set):
//   diagonal  k -> {k}           constant  0 -> I (K = {0})
//   tails     k -> [k, inf)      pairs     k -> {2k, 2k+1}
//   fibres    k -> {k / m}       empty     k -> {} (K = N)
//   initial   k -> [0, k)
Reindexing catalog_reindexing(const std::string& name, std::optional<Index> i_length, Index m = 2);
const std::vector<std::string>& reindexing_names();

struct ReorderSides {
    LazyMatrix left;    // sum_i [sum_{k in psi'(i)} r_k] a_i
    LazyMatrix right;   // sum_k r_k [sum_{i in psi(k)} a_i]
    LazyMatrix single;  // sum over L = {(j,k) : j in psi(k)} of r_k a_j
};
// Raises HypothesisNotMet when a is not summable or some (r_k)_{psi'(i)} is
// not, NotRepresentable when a right-hand support cannot be bounded.
ReorderSides reorder_sides(const MatrixFamily& a, const MatrixFamily& r, const Reindexing& psi);

CheckReport check_left_reorder(const MatrixFamily& a, const MatrixFamily& r, const Reindexing& psi, std::size_t window = 32);

// The family (t - (a_0 + ... + a_{k-1}))_k with its derived certificate.
MatrixFamily remainder_family(const MatrixFamily& a, const LazyMatrix& t, std::size_t window);
CheckReport count_im_check(const MatrixFamily& a, const LazyMatrix& t, std::size_t window = 32);
CheckReport countable_criterion(const MatrixFamily& f, std::size_t window = 32);
// Unconditional summability under annihilators of basis vectors against
// recursive partial sums, both read from the members over a horizon of 4 windows.
CheckReport szele_topology_check(const MatrixFamily& f, std::size_t window = 32);

// The hypotheses of a reorderable ring and the ring facts they imply, on
// catalog configurations.
std::vector<CheckReport> reorderable_suite(Field f = {}, std::size_t window = 16);

// Finite rank read from the window: the w and 2w blocks have the same rank.
bool finite_rank_within(const LazyMatrix& m, std::size_t window);

// Summation restricted to families with fewer than m nonzero members; m unset
// means "fewer than omega", i.e. finitely many.
struct EndoSystem {
    Field field;
    std::optional<Index> below_count;
    bool restricted = false;
    bool summable(const MatrixFamily& f) const;
    LazyMatrix sum(const MatrixFamily& f) const;
};
EndoSystem endo_system(Field f = {});
EndoSystem restricted_system(const EndoSystem& s, std::optional<Index> m);

}  // namespace sigma
