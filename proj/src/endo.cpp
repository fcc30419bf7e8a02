#include "sigma/endo.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <sstream>

namespace sigma {

namespace {

using boost::multiprecision::cpp_int;

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::int64_t mod_p(const cpp_int& x, std::uint32_t p) {
    cpp_int r = x % p;
    if (r < 0) r += p;
    return static_cast<std::int64_t>(r);
}

std::int64_t pow_mod(std::int64_t b, std::int64_t e, std::int64_t p) {
    std::int64_t r = 1;
    b %= p;
    while (e > 0) {
        if (e & 1) r = r * b % p;
        b = b * b % p;
        e >>= 1;
    }
    return r;
}

void add_into(Column& acc, const Column& v, const Field& f, const Scalar& coef = 1) {
    for (const auto& [r, x] : v) {
        Scalar y = f.add(acc.count(r) ? acc[r] : Scalar(0), f.mul(coef, x));
        if (y == 0)
            acc.erase(r);
        else
            acc[r] = y;
    }
}

// Rank of a list of sparse rows by elimination.
std::size_t rank_of_rows(std::vector<std::map<Index, Scalar>> rows, const Field& f) {
    std::size_t rank = 0;
    std::vector<std::map<Index, Scalar>> pivots;  // each normalized to leading 1
    for (auto& row : rows) {
        for (const auto& piv : pivots) {
            Index lead = piv.begin()->first;
            auto it = row.find(lead);
            if (it == row.end()) continue;
            Scalar c = it->second;
            for (const auto& [col, v] : piv) {
                Scalar y = f.sub(row.count(col) ? row[col] : Scalar(0), f.mul(c, v));
                if (y == 0)
                    row.erase(col);
                else
                    row[col] = y;
            }
        }
        if (row.empty()) continue;
        Scalar inv = f.inv(row.begin()->second);
        for (auto& [col, v] : row) v = f.mul(v, inv);
        // keep earlier pivots reduced against the new one
        Index lead = row.begin()->first;
        for (auto& piv : pivots) {
            auto it = piv.find(lead);
            if (it == piv.end()) continue;
            Scalar c = it->second;
            for (const auto& [col, v] : row) {
                Scalar y = f.sub(piv.count(col) ? piv[col] : Scalar(0), f.mul(c, v));
                if (y == 0)
                    piv.erase(col);
                else
                    piv[col] = y;
            }
        }
        pivots.push_back(std::move(row));
        ++rank;
    }
    return rank;
}

std::string scalar_str(const Scalar& x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

json column_json(const Column& c) {
    json j = json::object();
    for (const auto& [r, x] : c) j[std::to_string(r)] = scalar_str(x);
    return j;
}

std::vector<Index> merge_sorted(std::vector<Index> a, const std::vector<Index>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

bool in_domain(const MatrixFamily& f, Index i) { return !f.length || i < *f.length; }

}  // namespace

// ---------------------------------------------------------------- field

Field Field::prime(std::uint32_t p) {
    if (p < 2) throw Error(Errc::InvalidInput, "field characteristic must be prime");
    for (std::uint32_t d = 2; d * d <= p; ++d)
        if (p % d == 0) throw Error(Errc::InvalidInput, "field characteristic must be prime");
    return Field{p};
}

Scalar Field::norm(const Scalar& x) const {
    if (p == 0) return x;
    std::int64_t n = mod_p(boost::multiprecision::numerator(x), p);
    std::int64_t d = mod_p(boost::multiprecision::denominator(x), p);
    if (d == 0) throw Error(Errc::InvalidInput, "denominator vanishes in " + name());
    return Scalar(n * pow_mod(d, p - 2, p) % p);
}

Scalar Field::inv(const Scalar& a) const {
    Scalar x = norm(a);
    if (x == 0) throw Error(Errc::InvalidInput, "inverse of zero");
    if (p == 0) return 1 / x;
    return Scalar(pow_mod(static_cast<std::int64_t>(boost::multiprecision::numerator(x)), p - 2, p));
}

std::string Field::name() const { return p == 0 ? "Q" : "F" + std::to_string(p); }

// ---------------------------------------------------------------- sparse

SparseMatrix SparseMatrix::unit(Field f, Index row, Index col, Scalar v) {
    SparseMatrix m(f);
    m.set(row, col, v);
    return m;
}

Scalar SparseMatrix::at(Index r, Index c) const {
    auto it = e_.find({r, c});
    return it == e_.end() ? Scalar(0) : it->second;
}

void SparseMatrix::set(Index r, Index c, const Scalar& v) {
    Scalar x = field_.norm(v);
    if (x == 0)
        e_.erase({r, c});
    else
        e_[{r, c}] = x;
}

Column SparseMatrix::column(Index c) const {
    Column out;
    for (const auto& [rc, v] : e_)
        if (rc.second == c) out[rc.first] = v;
    return out;
}

SparseMatrix SparseMatrix::operator+(const SparseMatrix& o) const {
    SparseMatrix m = *this;
    for (const auto& [rc, v] : o.e_) m.set(rc.first, rc.second, m.at(rc.first, rc.second) + v);
    return m;
}

SparseMatrix SparseMatrix::operator-(const SparseMatrix& o) const {
    SparseMatrix m = *this;
    for (const auto& [rc, v] : o.e_) m.set(rc.first, rc.second, m.at(rc.first, rc.second) - v);
    return m;
}

SparseMatrix SparseMatrix::operator*(const SparseMatrix& o) const {
    std::map<Index, std::vector<std::pair<Index, Scalar>>> by_col;  // col k -> (row, v)
    for (const auto& [rc, v] : e_) by_col[rc.second].push_back({rc.first, v});
    SparseMatrix m(field_);
    for (const auto& [kc, w] : o.e_) {
        auto it = by_col.find(kc.first);
        if (it == by_col.end()) continue;
        for (const auto& [r, v] : it->second) m.set(r, kc.second, m.at(r, kc.second) + v * w);
    }
    return m;
}

std::size_t SparseMatrix::rank() const {
    std::map<Index, std::map<Index, Scalar>> rows;
    for (const auto& [rc, v] : e_) rows[rc.first][rc.second] = v;
    std::vector<std::map<Index, Scalar>> rs;
    for (auto& [r, row] : rows) rs.push_back(std::move(row));
    return rank_of_rows(std::move(rs), field_);
}

std::string SparseMatrix::str() const {
    if (e_.empty()) return "0";
    std::string s;
    for (const auto& [rc, v] : e_) {
        if (!s.empty()) s += " + ";
        if (v != 1) s += scalar_str(v) + "*";
        s += "e" + std::to_string(rc.first) + "," + std::to_string(rc.second);
    }
    return s;
}

// ---------------------------------------------------------------- lazy

LazyMatrix LazyMatrix::of(const SparseMatrix& m) {
    auto cols = std::make_shared<std::map<Index, Column>>();
    for (const auto& [rc, v] : m.entries()) (*cols)[rc.second][rc.first] = v;
    return LazyMatrix(m.field(), [cols](Index c) {
        auto it = cols->find(c);
        return it == cols->end() ? Column{} : it->second;
    });
}

LazyMatrix LazyMatrix::identity(Field f) {
    return LazyMatrix(f, [](Index c) { return Column{{c, Scalar(1)}}; });
}

LazyMatrix LazyMatrix::zero(Field f) {
    return LazyMatrix(f, [](Index) { return Column{}; });
}

Scalar LazyMatrix::at(Index r, Index c) const {
    Column col = column(c);
    auto it = col.find(r);
    return it == col.end() ? Scalar(0) : it->second;
}

LazyMatrix LazyMatrix::operator+(const LazyMatrix& o) const {
    auto a = *this, b = o;
    return LazyMatrix(field_, [a, b](Index c) {
        Column x = a.column(c);
        add_into(x, b.column(c), a.field());
        return x;
    });
}

LazyMatrix LazyMatrix::operator-(const LazyMatrix& o) const {
    auto a = *this, b = o;
    return LazyMatrix(field_, [a, b](Index c) {
        Column x = a.column(c);
        add_into(x, b.column(c), a.field(), -1);
        return x;
    });
}

LazyMatrix LazyMatrix::operator*(const LazyMatrix& o) const {
    auto a = *this, b = o;
    return LazyMatrix(field_, [a, b](Index c) { return apply_matrix(a, b.column(c)); });
}

LazyMatrix LazyMatrix::scaled(const Scalar& s) const {
    auto a = *this;
    return LazyMatrix(field_, [a, s](Index c) {
        Column x;
        add_into(x, a.column(c), a.field(), s);
        return x;
    });
}

std::size_t LazyMatrix::window_rank(std::size_t w) const {
    std::vector<std::map<Index, Scalar>> rows(w);
    for (Index c = 0; c < w; ++c)
        for (const auto& [r, v] : column(c))
            if (r < w) rows[r][c] = v;
    return rank_of_rows(std::move(rows), field_);
}

Column apply_matrix(const LazyMatrix& m, const Column& v) {
    Column out;
    for (const auto& [k, x] : v) add_into(out, m.column(k), m.field(), x);
    return out;
}

std::optional<std::pair<Index, Index>> window_difference(const LazyMatrix& a, const LazyMatrix& b,
                                                         std::size_t window) {
    for (Index c = 0; c < window; ++c) {
        Column x = a.column(c), y = b.column(c);
        for (Index r = 0; r < window; ++r) {
            auto ix = x.find(r), iy = y.find(r);
            Scalar u = ix == x.end() ? Scalar(0) : ix->second;
            Scalar v = iy == y.end() ? Scalar(0) : iy->second;
            if (u != v) return std::make_pair(r, c);
        }
    }
    return std::nullopt;
}

bool finite_rank_within(const LazyMatrix& m, std::size_t window) {
    return m.window_rank(window) == m.window_rank(2 * window);
}

// ---------------------------------------------------------------- index sets

IndexSet IndexSet::finite(std::vector<Index> xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    auto shared = std::make_shared<std::vector<Index>>(xs);
    return IndexSet{xs, [shared](Index i) { return std::binary_search(shared->begin(), shared->end(), i); }};
}

IndexSet IndexSet::range(Index from, Index to) {
    std::vector<Index> xs;
    for (Index i = from; i < to; ++i) xs.push_back(i);
    return IndexSet{xs, [from, to](Index i) { return i >= from && i < to; }};
}

IndexSet IndexSet::tail(Index from) {
    return IndexSet{std::nullopt, [from](Index i) { return i >= from; }};
}

// ---------------------------------------------------------------- families

MatrixFamily MatrixFamily::list(Field f, std::vector<SparseMatrix> ms) {
    std::vector<LazyMatrix> lz;
    Index nonzero = 0;
    auto by_col = std::make_shared<std::map<Index, std::vector<Index>>>();
    for (Index i = 0; i < ms.size(); ++i) {
        if (!ms[i].is_zero()) ++nonzero;
        std::set<Index> cols;
        for (const auto& [rc, v] : ms[i].entries()) cols.insert(rc.second);
        for (Index c : cols) (*by_col)[c].push_back(i);
        lz.push_back(LazyMatrix::of(ms[i]));
    }
    MatrixFamily fam = lazy_list(f, std::move(lz));
    fam.support = [by_col](Index c) -> std::optional<std::vector<Index>> {
        auto it = by_col->find(c);
        return it == by_col->end() ? std::vector<Index>{} : it->second;
    };
    fam.nonzero_members = nonzero;
    return fam;
}

MatrixFamily MatrixFamily::lazy_list(Field f, std::vector<LazyMatrix> ms, std::string name) {
    auto shared = std::make_shared<std::vector<LazyMatrix>>(std::move(ms));
    MatrixFamily fam;
    fam.name = std::move(name);
    fam.field = f;
    fam.length = shared->size();
    fam.member = [shared](Index i) { return (*shared)[i]; };
    Index n = shared->size();
    fam.support = [n](Index) -> std::optional<std::vector<Index>> {
        std::vector<Index> all;
        for (Index i = 0; i < n; ++i) all.push_back(i);
        return all;
    };
    fam.nonzero_members = n;
    return fam;
}

IndexSet MatrixFamily::domain() const { return length ? IndexSet::range(0, *length) : IndexSet::all(); }

std::optional<std::vector<Index>> MatrixFamily::column_support(Index c) const {
    if (!support) {
        if (length) {
            std::vector<Index> all;
            for (Index i = 0; i < *length; ++i) all.push_back(i);
            return all;
        }
        throw Error(Errc::MissingCertificate, "family " + name + " has no column-support certificate");
    }
    auto s = support(c);
    if (s && length) {
        std::vector<Index> in;
        for (Index i : *s)
            if (i < *length) in.push_back(i);
        return in;
    }
    return s;
}

std::string MatrixFamily::str() const {
    std::string s = name;
    if (!params.empty()) {
        s += "(";
        for (std::size_t i = 0; i < params.size(); ++i) s += (i ? "," : "") + std::to_string(params[i]);
        s += ")";
    }
    if (length) s += "[" + std::to_string(*length) + "]";
    return s;
}

namespace {

MatrixFamily generated(std::string name, Field f, std::vector<Elem> params, std::function<LazyMatrix(Index)> member,
                       std::function<std::optional<std::vector<Index>>(Index)> support) {
    MatrixFamily fam;
    fam.name = std::move(name);
    fam.params = std::move(params);
    fam.field = f;
    fam.member = std::move(member);
    fam.support = std::move(support);
    return fam;
}

LazyMatrix unit_lazy(Field f, Index r, Index c, Scalar v = 1) { return LazyMatrix::of(SparseMatrix::unit(f, r, c, v)); }

using Support = std::optional<std::vector<Index>>;

}  // namespace

const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names = {"diag", "scaled",    "shift",  "column", "row",
                                                   "staircase", "pairs", "blocks", "zero", "ones"};
    return names;
}

MatrixFamily catalog_family(const std::string& name, Field f, std::vector<Elem> params) {
    auto param = [&](std::size_t k, Elem dflt) { return params.size() > k ? params[k] : dflt; };
    if (name == "diag")
        return generated(name, f, params, [f](Index i) { return unit_lazy(f, i, i); },
                         [](Index c) -> Support { return std::vector<Index>{c}; });
    if (name == "scaled") {
        Scalar s = f.norm(Scalar(param(0, 1)));
        auto fam = generated(name, f, params, [f, s](Index i) { return unit_lazy(f, i, i, s); },
                             [s](Index c) -> Support {
                                 if (s == 0) return std::vector<Index>{};
                                 return std::vector<Index>{c};
                             });
        if (s == 0) fam.nonzero_members = 0;
        return fam;
    }
    if (name == "shift")
        return generated(name, f, params, [f](Index i) { return unit_lazy(f, i + 1, i); },
                         [](Index c) -> Support { return std::vector<Index>{c}; });
    if (name == "column") {
        Index k = Index(param(0, 0));
        auto fam = generated(name, f, params, [f, k](Index i) { return unit_lazy(f, i, k); },
                             [k](Index c) -> Support {
                                 if (c == k) return std::nullopt;
                                 return std::vector<Index>{};
                             });
        fam.infinite_columns = {k};
        return fam;
    }
    if (name == "row") {
        Index k = Index(param(0, 0));
        return generated(name, f, params, [f, k](Index i) { return unit_lazy(f, k, i); },
                         [](Index c) -> Support { return std::vector<Index>{c}; });
    }
    if (name == "staircase")
        return generated(name, f, params,
                         [f](Index i) {
                             return LazyMatrix(f, [i](Index b) {
                                 return b > i ? Column{{i, Scalar(1)}} : Column{};
                             });
                         },
                         [](Index b) -> Support {
                             std::vector<Index> xs;
                             for (Index i = 0; i < b; ++i) xs.push_back(i);
                             return xs;
                         });
    if (name == "pairs")
        return generated(name, f, params, [f](Index i) { return unit_lazy(f, i, i) + unit_lazy(f, i, i + 1); },
                         [](Index c) -> Support {
                             if (c == 0) return std::vector<Index>{0};
                             return std::vector<Index>{c - 1, c};
                         });
    if (name == "blocks")
        return generated(name, f, params,
                         [f](Index i) { return unit_lazy(f, 2 * i, 2 * i) + unit_lazy(f, 2 * i + 1, 2 * i + 1); },
                         [](Index c) -> Support { return std::vector<Index>{c / 2}; });
    if (name == "zero") {
        auto fam = generated(name, f, params, [f](Index) { return LazyMatrix::zero(f); },
                             [](Index) -> Support { return std::vector<Index>{}; });
        fam.nonzero_members = 0;
        return fam;
    }
    if (name == "ones") {
        auto fam = generated(name, f, params, [f](Index) { return LazyMatrix::identity(f); },
                             [](Index) -> Support { return std::nullopt; });
        fam.many_infinite_columns = true;
        return fam;
    }
    throw Error(Errc::InvalidInput, "unknown catalog family: " + name);
}

std::optional<std::pair<Index, Index>> certificate_violation(const MatrixFamily& f, std::size_t window) {
    if (!f.support) return std::nullopt;
    Index horizon = f.length ? std::min<Index>(*f.length, 2 * window) : 2 * window;
    for (Index c = 0; c < window; ++c) {
        auto s = f.support(c);
        if (!s) {
            if (!f.many_infinite_columns && !f.infinite_columns.count(c)) return std::make_pair(Index(0), c);
            continue;
        }
        for (Index i = 0; i < horizon; ++i) {
            if (std::find(s->begin(), s->end(), i) != s->end()) continue;
            if (!f.member(i).column(c).empty()) return std::make_pair(i, c);
        }
    }
    return std::nullopt;
}

bool endo_summable(const MatrixFamily& f) {
    if (f.length) return true;
    if (!f.support)
        throw Error(Errc::MissingCertificate, "family " + f.name + " has no column-support certificate");
    return !f.many_infinite_columns && f.infinite_columns.empty();
}

LazyMatrix endo_sum(const MatrixFamily& f) {
    if (!endo_summable(f)) {
        json d = {{"family", f.str()}};
        if (!f.infinite_columns.empty()) d["column"] = *f.infinite_columns.begin();
        throw Error(Errc::NotInDomain, "family " + f.str() + " is not summable", d);
    }
    MatrixFamily fam = f;
    return LazyMatrix(f.field, [fam](Index c) {
        Column acc;
        auto s = fam.column_support(c);
        if (!s) throw Error(Errc::NotInDomain, "column " + std::to_string(c) + " has infinite support");
        for (Index i : *s) add_into(acc, fam.member(i).column(c), fam.field);
        return acc;
    });
}

MatrixFamily restrict_family(const MatrixFamily& f, const IndexSet& s) {
    MatrixFamily out;
    out.name = f.name + "|sub";
    out.params = f.params;
    out.field = f.field;
    if (s.is_finite() || f.length) {
        std::vector<Index> idx;
        if (s.is_finite()) {
            for (Index i : *s.list)
                if (in_domain(f, i)) idx.push_back(i);
        } else {
            for (Index i = 0; i < *f.length; ++i)
                if (s.contains(i)) idx.push_back(i);
        }
        auto shared = std::make_shared<std::vector<Index>>(idx);
        out.length = idx.size();
        out.member = [f, shared](Index j) { return f.member((*shared)[j]); };
        out.support = [f, shared](Index c) -> std::optional<std::vector<Index>> {
            std::optional<std::vector<Index>> base;
            if (f.support) base = f.support(c);
            std::vector<Index> pos;
            for (Index j = 0; j < shared->size(); ++j) {
                Index i = (*shared)[j];
                if (!base || std::find(base->begin(), base->end(), i) != base->end()) pos.push_back(j);
            }
            return pos;
        };
        out.nonzero_members = f.nonzero_members ? std::min<Index>(*f.nonzero_members, idx.size()) : idx.size();
        return out;
    }
    // Infinite index set: members outside it become zero, which changes no sum.
    out.member = [f, s](Index i) { return s.contains(i) ? f.member(i) : LazyMatrix::zero(f.field); };
    if (f.support)
        out.support = [f, s](Index c) -> std::optional<std::vector<Index>> {
            auto base = f.support(c);
            if (!base) return std::nullopt;
            std::vector<Index> kept;
            for (Index i : *base)
                if (s.contains(i)) kept.push_back(i);
            return kept;
        };
    out.infinite_columns = f.infinite_columns;
    out.many_infinite_columns = f.many_infinite_columns;
    out.nonzero_members = f.nonzero_members;
    return out;
}

MatrixFamily left_multiply_family(const MatrixFamily& r, const MatrixFamily& a) {
    if (r.length != a.length)
        throw Error(Errc::IndexMismatch, "coefficient family " + r.str() + " and family " + a.str() +
                                             " have different index sets");
    MatrixFamily out = a;
    out.name = r.str() + "*" + a.str();
    out.params.clear();
    out.member = [r, a](Index i) { return r.member(i) * a.member(i); };
    return out;
}

MatrixFamily scale_family(const LazyMatrix& c, const MatrixFamily& a) {
    MatrixFamily out = a;
    out.name = "c*" + a.str();
    out.params.clear();
    out.member = [c, a](Index i) { return c * a.member(i); };
    return out;
}

MatrixFamily right_scale_family(const MatrixFamily& a, const LazyMatrix& c) {
    MatrixFamily out = a;
    out.name = a.str() + "*c";
    out.params.clear();
    out.member = [c, a](Index i) { return a.member(i) * c; };
    // column j of a_i c combines the columns of a_i at the rows of c's column j
    out.infinite_columns.clear();
    out.many_infinite_columns = a.many_infinite_columns;
    if (a.support)
        out.support = [a, c](Index j) -> std::optional<std::vector<Index>> {
            std::vector<Index> all;
            for (const auto& [k, v] : c.column(j)) {
                auto s = a.support(k);
                if (!s) return std::nullopt;
                all = merge_sorted(std::move(all), *s);
            }
            return all;
        };
    // Only columns reaching an infinite column of a can be infinite; those
    // are listed when c is finitely supported on them, which the catalog uses.
    for (Index k : a.infinite_columns)
        for (Index j = 0; j < 64; ++j)
            if (c.column(j).count(k)) out.infinite_columns.insert(j);
    return out;
}

MatrixFamily combine_families(const MatrixFamily& a, const MatrixFamily& b, bool subtract) {
    if (a.length != b.length)
        throw Error(Errc::IndexMismatch, "families " + a.str() + " and " + b.str() + " have different index sets");
    MatrixFamily out;
    out.name = a.str() + (subtract ? "-" : "+") + b.str();
    out.field = a.field;
    out.length = a.length;
    out.member = [a, b, subtract](Index i) { return subtract ? a.member(i) - b.member(i) : a.member(i) + b.member(i); };
    if (a.support && b.support)
        out.support = [a, b](Index c) -> std::optional<std::vector<Index>> {
            auto x = a.support(c), y = b.support(c);
            if (!x || !y) return std::nullopt;
            return merge_sorted(*x, *y);
        };
    out.infinite_columns = a.infinite_columns;
    out.infinite_columns.insert(b.infinite_columns.begin(), b.infinite_columns.end());
    out.many_infinite_columns = a.many_infinite_columns || b.many_infinite_columns;
    if (a.nonzero_members && b.nonzero_members) out.nonzero_members = *a.nonzero_members + *b.nonzero_members;
    return out;
}

// ---------------------------------------------------------------- reindexing

const std::vector<std::string>& reindexing_names() {
    static const std::vector<std::string> names = {"diagonal", "constant", "tails", "pairs",
                                                   "fibres",   "empty",    "initial"};
    return names;
}

Reindexing catalog_reindexing(const std::string& name, std::optional<Index> n, Index m) {
    auto clip = [n](IndexSet s) -> IndexSet {
        if (!n) return s;
        if (s.is_finite()) {
            std::vector<Index> xs;
            for (Index i : *s.list)
                if (i < *n) xs.push_back(i);
            return IndexSet::finite(xs);
        }
        std::vector<Index> xs;
        for (Index i = 0; i < *n; ++i)
            if (s.contains(i)) xs.push_back(i);
        return IndexSet::finite(xs);
    };
    Reindexing p;
    p.name = name;
    if (name == "diagonal") {
        p.k_length = n;
        p.psi = [](Index k) { return IndexSet::finite({k}); };
        p.dual = [](Index i) { return IndexSet::finite({i}); };
    } else if (name == "constant") {
        p.k_length = 1;
        p.psi = [n](Index) { return n ? IndexSet::range(0, *n) : IndexSet::all(); };
        p.dual = [](Index) { return IndexSet::finite({0}); };
    } else if (name == "tails") {
        p.k_length = n;
        p.psi = [clip](Index k) { return clip(IndexSet::tail(k)); };
        p.dual = [](Index i) { return IndexSet::range(0, i + 1); };
    } else if (name == "initial") {
        p.k_length = n;
        p.psi = [](Index k) { return IndexSet::range(0, k); };
        p.dual = [n](Index i) { return n ? IndexSet::range(i + 1, *n) : IndexSet::tail(i + 1); };
    } else if (name == "pairs") {
        if (n) p.k_length = (*n + 1) / 2;
        p.psi = [clip](Index k) { return clip(IndexSet::finite({2 * k, 2 * k + 1})); };
        p.dual = [](Index i) { return IndexSet::finite({i / 2}); };
    } else if (name == "fibres") {
        if (m == 0) throw Error(Errc::InvalidInput, "fibres needs m >= 1");
        if (n) p.k_length = *n * m;
        p.psi = [m](Index k) { return IndexSet::finite({k / m}); };
        p.dual = [m](Index i) { return IndexSet::range(i * m, i * m + m); };
    } else if (name == "empty") {
        p.k_length = std::nullopt;
        p.psi = [](Index) { return IndexSet::finite({}); };
        p.dual = [](Index) { return IndexSet::finite({}); };
    } else {
        throw Error(Errc::InvalidInput, "unknown reindexing: " + name);
    }
    return p;
}

// ---------------------------------------------------------------- reorder

namespace {

// Sum of r over psi'(i), or HypothesisNotMet.
LazyMatrix dual_coefficient(const MatrixFamily& r, const Reindexing& psi, Index i) {
    MatrixFamily sub = restrict_family(r, psi.dual(i));
    bool ok = false;
    try {
        ok = endo_summable(sub);
    } catch (const Error& e) {
        if (e.code() != Errc::MissingCertificate) throw;
    }
    if (!ok)
        throw Error(Errc::HypothesisNotMet,
                    "coefficients of " + r.str() + " over the dual of " + std::to_string(i) + " are not summable",
                    json{{"index", i}});
    return endo_sum(sub);
}

std::vector<Index> rows_of(const Column& c) {
    std::vector<Index> rs;
    for (const auto& [r, v] : c) rs.push_back(r);
    return rs;
}

// Indices k whose r_k can be nonzero on some vector supported on `rows`.
std::optional<std::vector<Index>> r_support(const MatrixFamily& r, const std::vector<Index>& rows) {
    if (r.length) return r.domain().list;
    if (!r.support) return std::nullopt;
    std::vector<Index> ks;
    for (Index j : rows) {
        auto s = r.support(j);
        if (!s) return std::nullopt;
        ks = merge_sorted(std::move(ks), *s);
    }
    return ks;
}

}  // namespace

ReorderSides reorder_sides(const MatrixFamily& a, const MatrixFamily& r, const Reindexing& psi) {
    bool a_ok = false;
    try {
        a_ok = endo_summable(a);
    } catch (const Error& e) {
        if (e.code() != Errc::MissingCertificate) throw;
    }
    if (!a_ok) throw Error(Errc::HypothesisNotMet, "family " + a.str() + " is not summable");
    if (r.length != psi.k_length)
        throw Error(Errc::IndexMismatch, "coefficient family " + r.str() + " is not indexed by the domain of " +
                                             psi.name);
    Field f = a.field;
    ReorderSides out;

    out.left = LazyMatrix(f, [a, r, psi, f](Index c) {
        Column acc;
        const auto sa = *a.column_support(c);
        for (Index i : sa) {
            Column v = a.member(i).column(c);
            if (v.empty()) continue;
            add_into(acc, apply_matrix(dual_coefficient(r, psi, i), v), f);
        }
        return acc;
    });

    out.right = LazyMatrix(f, [a, r, psi, f](Index c) {
        auto sa = *a.column_support(c);
        std::vector<std::pair<Index, Column>> cols;  // (i, a_i column c)
        std::vector<Index> rows;
        for (Index i : sa) {
            Column v = a.member(i).column(c);
            if (v.empty()) continue;
            rows = merge_sorted(std::move(rows), rows_of(v));
            cols.push_back({i, std::move(v)});
        }
        std::optional<std::vector<Index>> ks;
        if (psi.k_length) {
            ks = IndexSet::range(0, *psi.k_length).list;
        } else {
            ks = r_support(r, rows);
            std::optional<std::vector<Index>> via_dual = std::vector<Index>{};
            for (const auto& [i, v] : cols) {
                IndexSet d = psi.dual(i);
                if (!d.is_finite()) {
                    via_dual.reset();
                    break;
                }
                via_dual = merge_sorted(std::move(*via_dual), *d.list);
            }
            if (!ks || (via_dual && via_dual->size() < ks->size())) ks = via_dual;
        }
        if (!ks)
            throw Error(Errc::NotRepresentable,
                        "cannot bound the coefficients meeting column " + std::to_string(c) + " of " + a.str());
        Column acc;
        for (Index k : *ks) {
            IndexSet p = psi.psi(k);
            Column inner;  // column c of the sum of a over psi(k)
            for (const auto& [i, v] : cols)
                if (p.contains(i)) add_into(inner, v, f);
            if (inner.empty()) continue;
            add_into(acc, apply_matrix(r.member(k), inner), f);
        }
        return acc;
    });

    out.single = LazyMatrix(f, [a, r, psi, f](Index c) {
        Column acc;
        const auto sa = *a.column_support(c);
        for (Index j : sa) {
            Column v = a.member(j).column(c);
            if (v.empty()) continue;
            IndexSet d = psi.dual(j);
            std::vector<Index> ks;
            if (d.is_finite()) {
                ks = *d.list;
            } else {
                auto rs = r_support(r, rows_of(v));
                if (!rs)
                    throw Error(Errc::NotRepresentable,
                                "cannot bound the pairs meeting column " + std::to_string(c) + " of " + a.str());
                for (Index k : *rs)
                    if (d.contains(k)) ks.push_back(k);
            }
            for (Index k : ks) add_into(acc, apply_matrix(r.member(k), v), f);
        }
        return acc;
    });
    return out;
}

CheckReport check_left_reorder(const MatrixFamily& a, const MatrixFamily& r, const Reindexing& psi,
                               std::size_t window) {
    auto t0 = std::chrono::steady_clock::now();
    json bounds = {{"window", window}, {"family", a.str()}, {"coefficients", r.str()}, {"reindexing", psi.name},
                   {"field", a.field.name()}};
    // hypotheses on the sampled part of I
    Index n = a.length ? std::min<Index>(*a.length, window) : window;
    for (Index i = 0; i < n; ++i) dual_coefficient(r, psi, i);
    ReorderSides sides = reorder_sides(a, r, psi);
    CheckReport rep;
    auto d = window_difference(sides.left, sides.right, window);
    auto d2 = window_difference(sides.left, sides.single, window);
    if (d || d2) {
        auto [row, col] = d ? *d : *d2;
        rep = CheckReport::failed("left-reorder",
                                  {{"row", row},
                                   {"col", col},
                                   {"left", scalar_str(sides.left.at(row, col))},
                                   {"right", scalar_str((d ? sides.right : sides.single).at(row, col))},
                                   {"form", d ? "two-sum" : "single-sum"}},
                                  bounds);
    } else {
        rep = CheckReport::passed("left-reorder", bounds);
    }
    rep.millis = elapsed_ms(t0);
    return rep;
}

// ---------------------------------------------------------------- partial sums

MatrixFamily remainder_family(const MatrixFamily& a, const LazyMatrix& t, std::size_t window) {
    Field f = a.field;
    MatrixFamily out;
    out.name = "remainder(" + a.str() + ")";
    out.field = f;
    out.member = [a, t, f](Index k) {
        return LazyMatrix(f, [a, t, f, k](Index c) {
            Column acc = t.column(c);
            std::optional<std::vector<Index>> s;
            if (a.support) s = a.support(c);
            if (s) {
                for (Index i : *s)
                    if (i < k && in_domain(a, i)) add_into(acc, a.member(i).column(c), f, -1);
            } else {
                for (Index i = 0; i < k && in_domain(a, i); ++i) add_into(acc, a.member(i).column(c), f, -1);
            }
            return acc;
        });
    };
    if (!a.support && !a.length) throw Error(Errc::MissingCertificate, "family " + a.str() + " has no certificate");
    // b_k vanishes on column c once the partial sums reach t there.
    auto support = [a, t, f](Index c) -> std::optional<std::vector<Index>> {
        auto s = a.column_support(c);
        if (!s) return std::nullopt;
        Column total;
        for (Index i : *s) add_into(total, a.member(i).column(c), f);
        if (total != t.column(c)) return std::nullopt;
        Index last = s->empty() ? 0 : *std::max_element(s->begin(), s->end()) + 1;
        return IndexSet::range(0, last).list;
    };
    out.support = support;
    out.many_infinite_columns = a.many_infinite_columns;
    out.infinite_columns = a.infinite_columns;
    for (Index c = 0; c < window; ++c)
        if (!support(c)) out.infinite_columns.insert(c);
    return out;
}

CheckReport count_im_check(const MatrixFamily& a, const LazyMatrix& t, std::size_t window) {
    auto t0 = std::chrono::steady_clock::now();
    json bounds = {{"window", window}, {"family", a.str()}, {"field", a.field.name()}};
    bool lhs = endo_summable(a) && !window_difference(endo_sum(a), t, window);
    MatrixFamily b = remainder_family(a, t, window);
    bool rhs = endo_summable(b);
    bounds["summable_with_sum"] = lhs;
    bounds["remainders_summable"] = rhs;
    CheckReport rep;
    if (lhs != rhs) {
        rep = CheckReport::failed("count-im", {{"summable_with_sum", lhs}, {"remainders_summable", rhs}}, bounds);
    } else if (auto v = certificate_violation(b, window)) {
        rep = CheckReport::failed("count-im", {{"unsound_certificate", {{"index", v->first}, {"col", v->second}}}},
                                  bounds);
    } else {
        rep = CheckReport::passed("count-im", bounds);
    }
    rep.millis = elapsed_ms(t0);
    return rep;
}

CheckReport countable_criterion(const MatrixFamily& f, std::size_t window) {
    auto t0 = std::chrono::steady_clock::now();
    json bounds = {{"window", window}, {"family", f.str()}};
    CheckReport rep;
    auto finish = [&](CheckReport r) {
        r.millis = elapsed_ms(t0);
        return r;
    };
    if (f.length) return finish(CheckReport::passed("countable-criterion", bounds, "finite family"));
    if (endo_summable(f)) {
        // every sampled countable subfamily stays summable
        std::vector<IndexSet> subs = {IndexSet::tail(1), IndexSet::range(0, window),
                                      IndexSet{std::nullopt, [](Index i) { return i % 2 == 0; }}};
        for (const auto& s : subs)
            if (!endo_summable(restrict_family(f, s)))
                return finish(CheckReport::failed("countable-criterion", {{"summable_family_with_bad_subfamily", true}},
                                                  bounds));
        return finish(CheckReport::passed("countable-criterion", bounds, "summable"));
    }
    std::optional<Index> col;
    if (!f.infinite_columns.empty()) col = *f.infinite_columns.begin();
    for (Index c = 0; !col && c < window; ++c)
        if (!f.support(c)) col = c;
    if (!col)
        return finish(CheckReport::failed("countable-criterion", {{"no_infinite_column_in_window", true}}, bounds));
    Index horizon = 4 * window;
    std::vector<Index> hits;
    for (Index i = 0; i < horizon; ++i)
        if (!f.member(i).column(*col).empty()) hits.push_back(i);
    // the subfamily of members nonzero on the column, countable and not summable
    bool late = !hits.empty() && hits.back() >= horizon / 2;
    Index c = *col;
    MatrixFamily wit = restrict_family(f, IndexSet{std::nullopt, [f, c](Index i) { return !f.member(i).column(c).empty(); }});
    wit.infinite_columns = {c};
    if (!late || endo_summable(wit))
        return finish(CheckReport::failed("countable-criterion", {{"column", c}, {"hits", hits.size()}}, bounds));
    std::vector<Index> head(hits.begin(), hits.begin() + std::min<std::size_t>(hits.size(), 8));
    bounds["witness_subfamily"] = {{"column", c}, {"first_indices", head}, {"nonzero_within_horizon", hits.size()}};
    return finish(CheckReport::passed("countable-criterion", bounds, "not summable; countable witness on column " +
                                                                         std::to_string(c)));
}

CheckReport szele_topology_check(const MatrixFamily& f, std::size_t window) {
    auto t0 = std::chrono::steady_clock::now();
    Index horizon = f.length ? *f.length : 4 * window;
    json bounds = {{"window", window}, {"horizon", horizon}, {"family", f.str()}};
    Field fd = f.field;
    std::vector<std::vector<Column>> cols(window);  // cols[c][i]
    for (Index c = 0; c < window; ++c)
        for (Index i = 0; i < horizon; ++i) cols[c].push_back(f.member(i).column(c));

    // unconditional: finitely many members move each basis vector
    bool uncond_ok = true;
    std::vector<Column> uncond_sum(window);
    for (Index c = 0; c < window; ++c)
        for (Index i = 0; i < horizon; ++i) {
            if (cols[c][i].empty()) continue;
            if (!f.length && i >= horizon / 2) uncond_ok = false;
            add_into(uncond_sum[c], cols[c][i], fd);
        }

    // recursive partial sums must settle on each basis vector
    bool partial_ok = true;
    std::vector<Column> limit(window);
    for (Index c = 0; c < window; ++c) {
        Column s;
        Column settled;
        for (Index k = 0; k < horizon; ++k) {
            add_into(s, cols[c][k], fd);
            if (k + 1 == horizon / 2) settled = s;
            if (!f.length && k + 1 > horizon / 2 && s != settled) partial_ok = false;
        }
        limit[c] = s;
    }
    bounds["unconditional"] = uncond_ok;
    bounds["partial_sums"] = partial_ok;
    std::optional<bool> cert;
    if (f.length || f.support) cert = endo_summable(f);
    if (cert) bounds["certificate"] = *cert;

    CheckReport rep;
    if (uncond_ok != partial_ok || (cert && *cert != uncond_ok)) {
        rep = CheckReport::failed("szele-topology",
                                  {{"unconditional", uncond_ok}, {"partial_sums", partial_ok}, {"certificate", cert ? json(*cert) : json()}},
                                  bounds);
    } else {
        rep = CheckReport::passed("szele-topology", bounds);
        if (uncond_ok) {
            std::optional<LazyMatrix> s;
            if (cert) s = endo_sum(f);
            for (Index c = 0; c < window && rep.pass(); ++c) {
                auto trunc = [&](const Column& x) {
                    Column y;
                    for (const auto& [r, v] : x)
                        if (r < window) y[r] = v;
                    return y;
                };
                Column a = trunc(uncond_sum[c]), b = trunc(limit[c]);
                bool bad = a != b || (s && trunc(s->column(c)) != a);
                if (bad)
                    rep = CheckReport::failed("szele-topology",
                                              {{"col", c}, {"unconditional", column_json(a)}, {"partial_sums", column_json(b)}},
                                              bounds);
            }
        }
    }
    rep.millis = elapsed_ms(t0);
    return rep;
}

// ---------------------------------------------------------------- suite

namespace {

SparseMatrix swap01(Field f) {
    SparseMatrix m(f);
    m.set(1, 0, 1);
    m.set(0, 1, 1);
    m.set(2, 2, 1);
    m.set(3, 1, 2);
    return m;
}

}  // namespace

std::vector<CheckReport> reorderable_suite(Field f, std::size_t window) {
    std::vector<CheckReport> out;
    auto timed = [&](const std::string& id, json bounds, auto body) {
        auto t0 = std::chrono::steady_clock::now();
        CheckReport rep;
        try {
            json wit = body(bounds);
            rep = wit.is_null() ? CheckReport::passed(id, bounds) : CheckReport::failed(id, wit, bounds);
        } catch (const Error& e) {
            rep = CheckReport::failed(id, {{"error", e.what()}}, bounds);
        }
        rep.millis = elapsed_ms(t0);
        out.push_back(rep);
    };
    auto diff_json = [](const LazyMatrix& x, const LazyMatrix& y, std::size_t w) -> json {
        auto d = window_difference(x, y, w);
        if (!d) return nullptr;
        return {{"row", d->first}, {"col", d->second}, {"left", scalar_str(x.at(d->first, d->second))},
                {"right", scalar_str(y.at(d->first, d->second))}};
    };
    auto fam = [&](const std::string& n, std::vector<Elem> p = {}) { return catalog_family(n, f, p); };
    LazyMatrix one = LazyMatrix::identity(f);
    LazyMatrix m = LazyMatrix::of(swap01(f));

    // Left reorderability on catalog configurations.
    struct Config {
        std::string a, r, psi;
    };
    std::vector<Config> configs = {
        {"diag", "ones", "diagonal"},   {"diag", "row", "diagonal"},     {"diag", "ones", "tails"},
        {"staircase", "diag", "initial"}, {"row", "shift", "diagonal"},  {"pairs", "ones", "pairs"},
        {"blocks", "diag", "fibres"},   {"shift", "staircase", "empty"}, {"diag", "const", "constant"},
        {"staircase", "const", "constant"}, {"pairs", "row", "tails"},   {"staircase", "ones", "pairs"},
        {"row", "diag", "initial"},
    };
    timed("reorder-left-reorderability", {{"window", window}, {"configurations", configs.size()}}, [&](json&) -> json {
        for (const auto& cfg : configs) {
            MatrixFamily a = fam(cfg.a);
            Reindexing p = catalog_reindexing(cfg.psi, a.length);
            MatrixFamily r = cfg.r == "const" ? MatrixFamily::list(f, {swap01(f)}) : fam(cfg.r);
            CheckReport rep = check_left_reorder(a, r, p, window);
            if (!rep.pass()) return {{"a", cfg.a}, {"r", cfg.r}, {"psi", cfg.psi}, {"detail", rep.witness}};
        }
        return nullptr;
    });

    std::vector<LazyMatrix> samples = {one, m, endo_sum(fam("staircase")), endo_sum(fam("row")),
                                       endo_sum(fam("pairs")), LazyMatrix::zero(f)};
    timed("reorder-surjectivity", {{"window", window}, {"samples", samples.size()}}, [&](json&) -> json {
        for (std::size_t k = 0; k < samples.size(); ++k) {
            auto d = diff_json(endo_sum(MatrixFamily::lazy_list(f, {samples[k]})), samples[k], window);
            if (!d.is_null()) return {{"sample", k}, {"detail", d}};
        }
        return nullptr;
    });
    timed("reorder-singleton-one", {{"window", window}}, [&](json&) -> json {
        return diff_json(endo_sum(MatrixFamily::lazy_list(f, {one})), one, window);
    });
    timed("reorder-one-minus-one", {{"window", window}}, [&](json&) -> json {
        auto lhs = endo_sum(MatrixFamily::lazy_list(f, {one, one.scaled(-1)}));
        auto rhs = endo_sum(MatrixFamily::lazy_list(f, {}));
        return diff_json(lhs, rhs, window);
    });

    // Consequences: the ring structure of column-finite matrices.
    timed("ring-induced-addition", {{"window", window}}, [&](json&) -> json {
        for (std::size_t x = 0; x < samples.size(); ++x)
            for (std::size_t y = 0; y < samples.size(); ++y) {
                auto d = diff_json(endo_sum(MatrixFamily::lazy_list(f, {samples[x], samples[y]})),
                                   samples[x] + samples[y], window);
                if (!d.is_null()) return {{"x", x}, {"y", y}, {"detail", d}};
            }
        return nullptr;
    });
    timed("ring-distributivity", {{"window", window}}, [&](json&) -> json {
        for (const auto& n : {"diag", "staircase", "row", "pairs", "blocks", "shift"}) {
            MatrixFamily a = fam(n);
            LazyMatrix s = endo_sum(a);
            for (const auto& c : samples) {
                auto d = diff_json(c * s, endo_sum(scale_family(c, a)), window);
                if (!d.is_null()) return {{"family", n}, {"side", "left"}, {"detail", d}};
                d = diff_json(s * c, endo_sum(right_scale_family(a, c)), window);
                if (!d.is_null()) return {{"family", n}, {"side", "right"}, {"detail", d}};
            }
        }
        // (sum a)(sum b) over a finite product of index sets
        std::vector<SparseMatrix> xs = {swap01(f), SparseMatrix::unit(f, 0, 2), SparseMatrix::unit(f, 1, 1, 3)};
        std::vector<SparseMatrix> ys = {SparseMatrix::unit(f, 2, 0), swap01(f) * swap01(f)};
        std::vector<SparseMatrix> prods;
        SparseMatrix sx(f), sy(f);
        for (const auto& x : xs) sx = sx + x;
        for (const auto& y : ys) sy = sy + y;
        for (const auto& x : xs)
            for (const auto& y : ys) prods.push_back(x * y);
        auto d = diff_json(LazyMatrix::of(sx * sy), endo_sum(MatrixFamily::list(f, prods)), window);
        if (!d.is_null()) return {{"product", true}, {"detail", d}};
        return nullptr;
    });
    timed("ring-negation-functoriality", {{"window", window}}, [&](json&) -> json {
        for (const auto& n : {"diag", "staircase", "row", "pairs", "blocks", "shift"}) {
            MatrixFamily a = fam(n);
            auto d = diff_json(endo_sum(scale_family(one.scaled(-1), a)), endo_sum(a).scaled(-1), window);
            if (!d.is_null()) return {{"family", n}, {"detail", d}};
        }
        return nullptr;
    });
    return out;
}

// ---------------------------------------------------------------- system

bool EndoSystem::summable(const MatrixFamily& f) const {
    if (!restricted) return endo_summable(f);
    if (!below_count) return f.length.has_value();
    if (!endo_summable(f)) return false;
    return f.nonzero_members && *f.nonzero_members < *below_count;
}

LazyMatrix EndoSystem::sum(const MatrixFamily& f) const {
    if (!summable(f)) throw Error(Errc::NotInDomain, "family " + f.str() + " is not summable here");
    return endo_sum(f);
}

EndoSystem endo_system(Field f) { return EndoSystem{f, std::nullopt, false}; }

EndoSystem restricted_system(const EndoSystem& s, std::optional<Index> m) {
    if (m && *m < 1) throw Error(Errc::InvalidInput, "restriction bound must be at least 1");
    EndoSystem out = s;
    out.restricted = true;
    if (!s.restricted)
        out.below_count = m;
    else if (s.below_count && m)
        out.below_count = std::min(*s.below_count, *m);
    else if (m)
        out.below_count = m;
    return out;
}

}  // namespace sigma
