#include "sigma/models.hpp"

#include <algorithm>
#include <sstream>

namespace sigma {

namespace {

// Runs over an ordinal family's entries with a multiplicity flag: entries
// inside a cycle occur infinitely often.
template <class Fn>
void each_entry(const Family& f, Fn fn) {
    if (f.is_explicit()) {
        for (auto& [l, e] : f.ex().entries) fn(e, Mult(1));
    } else if (f.is_multiset()) {
        for (auto& [e, m] : f.ms().counts) fn(e, m);
    } else {
        const auto& t = f.tf();
        for (auto& b : t.blocks) {
            for (Elem e : b.prefix) fn(e, Mult(1));
            for (Elem e : b.cycle) fn(e, kOmega);
        }
        for (Elem e : t.final) fn(e, Mult(1));
    }
}

Traits group_traits(const Carrier& g) {
    Traits t;
    t.reindex_invariant = true;
    t.zero_drop = true;
    t.empty_sum = g.zero();
    return t;
}

std::set<AxiomId> axiom_set(std::initializer_list<int> numbers) {
    std::set<AxiomId> s;
    for (int n : numbers) s.insert(AxiomId(n - 1));
    return s;
}

}  // namespace

System finitary_group(const Carrier& g) {
    if (!g.has_group()) throw Error(Errc::InvalidSpec, "finitary-group needs a finite abelian group");
    const Elem zero = *g.zero();
    auto rule = [g, zero](const Family& f) -> std::optional<Elem> {
        Elem s = zero;
        bool ok = true;
        each_entry(f, [&](Elem e, Mult m) {
            if (e == zero) return;
            if (m == kOmega) { ok = false; return; }
            for (Mult i = 0; i < m; ++i) s = g.add(s, e);
        });
        if (!ok) return std::nullopt;
        return s;
    };
    System s = System::rule(g, rule, group_traits(g), "finitary-group");
    s.declared = axiom_set({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
    if (g.has_mul()) s.declared.merge(axiom_set({17, 18, 19}));
    return s;
}

// ---------------------------------------------------------------- multisets

std::uint32_t ms_count(Elem e, std::size_t symbol) { return std::uint32_t((std::uint64_t(e) >> (16 * symbol)) & 0xffff); }

Elem ms_make(const std::vector<std::uint32_t>& counts) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] > kMsOmega) throw Error(Errc::NotRepresentable, "multiset count too large");
        v |= std::uint64_t(counts[i]) << (16 * i);
    }
    return Elem(v);
}

namespace {

Elem ms_add(Elem a, Elem b, std::size_t k) {
    std::vector<std::uint32_t> c(k);
    for (std::size_t i = 0; i < k; ++i) {
        auto x = ms_count(a, i), y = ms_count(b, i);
        if (x == kMsOmega || y == kMsOmega) c[i] = kMsOmega;
        else if (x + y >= kMsOmega) throw Error(Errc::NotRepresentable, "multiset count overflow");
        else c[i] = x + y;
    }
    return ms_make(c);
}

// Sum of m copies of a, m possibly omega.
Elem ms_scale(Elem a, Mult m, std::size_t k) {
    std::vector<std::uint32_t> c(k);
    for (std::size_t i = 0; i < k; ++i) {
        auto x = ms_count(a, i);
        if (x == 0 || m == 0) c[i] = 0;
        else if (x == kMsOmega || m == kOmega) c[i] = kMsOmega;
        else if (std::uint64_t(x) * m >= kMsOmega) throw Error(Errc::NotRepresentable, "multiset count overflow");
        else c[i] = x * m;
    }
    return ms_make(c);
}

std::string ms_name(Elem e, std::size_t k) {
    std::string s;
    for (std::size_t i = 0; i < k; ++i) {
        auto c = ms_count(e, i);
        if (!c) continue;
        if (!s.empty()) s += ".";
        s += char('a' + i);
        if (c == kMsOmega) s += "^w";
        else if (c > 1) s += "^" + std::to_string(c);
    }
    return s.empty() ? "0" : s;
}

std::optional<Elem> ms_parse(const std::string& s, std::size_t k) {
    std::vector<std::uint32_t> c(k, 0);
    if (s == "0") return ms_make(c);
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) return std::nullopt;
        std::size_t sym = std::size_t(part[0] - 'a');
        if (sym >= k) return std::nullopt;
        std::uint32_t n = 1;
        if (part.size() > 1) {
            if (part[1] != '^') return std::nullopt;
            std::string rest = part.substr(2);
            if (rest == "w") n = kMsOmega;
            else {
                try {
                    std::size_t pos = 0;
                    long v = std::stol(rest, &pos);
                    if (pos != rest.size() || v <= 0 || v >= long(kMsOmega)) return std::nullopt;
                    n = std::uint32_t(v);
                } catch (const std::logic_error&) {
                    return std::nullopt;
                }
            }
        }
        c[sym] = n;
    }
    return ms_make(c);
}

}  // namespace

Carrier multiset_carrier(std::size_t k) {
    if (k == 0 || k > 4) throw Error(Errc::InvalidSpec, "multiset alphabet must have 1 to 4 symbols");
    // Sample: counts in {0,1,2,omega} per symbol.
    const std::uint32_t levels[] = {0, 1, 2, kMsOmega};
    std::vector<Elem> sample;
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= 4;
    for (std::size_t x = 0; x < total; ++x) {
        std::vector<std::uint32_t> c(k);
        std::size_t y = x;
        for (std::size_t i = 0; i < k; ++i) { c[i] = levels[y % 4]; y /= 4; }
        sample.push_back(ms_make(c));
    }
    std::sort(sample.begin(), sample.end());
    return Carrier::unbounded(
        sample, [k](Elem e) { return ms_name(e, k); }, [k](Elem a, Elem b) { return ms_add(a, b, k); }, Elem(0),
        [k](const std::string& s) { return ms_parse(s, k); });
}

System multiset_monoid(std::size_t k) {
    Carrier c = multiset_carrier(k);
    auto rule = [k](const Family& f) -> std::optional<Elem> {
        Elem s = 0;
        each_entry(f, [&](Elem e, Mult m) { s = ms_add(s, ms_scale(e, m, k), k); });
        return s;
    };
    Traits t;
    t.reindex_invariant = true;
    t.zero_drop = true;
    t.empty_sum = Elem(0);
    System s = System::rule(c, rule, t, "multiset-monoid");
    s.declared = axiom_set({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 14, 15, 16});
    return s;
}

// ---------------------------------------------------------------- choice and magmas

System choice(const Carrier& c, Elem empty) {
    if (!c.contains(empty)) throw Error(Errc::InvalidSpec, "choice: empty value outside carrier");
    auto rule = [empty](const Family& f) -> std::optional<Elem> {
        if (f.is_explicit()) {
            if (f.ex().entries.empty()) return empty;
            return f.ex().entries.front().second;
        }
        const auto& t = f.tf();
        if (!t.blocks.empty()) {
            const auto& b = t.blocks.front();
            return b.prefix.empty() ? b.cycle.front() : b.prefix.front();
        }
        return t.final.empty() ? std::optional<Elem>(empty) : t.final.front();
    };
    Traits t;
    t.empty_sum = empty;
    System s = System::rule(c, rule, t, "choice");
    s.declared = axiom_set({2, 3, 5, 6, 8});
    return s;
}

MagmaTable left_projection(std::size_t n) {
    MagmaTable t(n, std::vector<Elem>(n));
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) t[x][y] = Elem(x);
    return t;
}

namespace {

void check_magma(const Carrier& c, const MagmaTable& op) {
    if (!c.finite() || op.size() != c.size()) throw Error(Errc::InvalidSpec, "magma table does not match carrier");
    for (auto& row : op) {
        if (row.size() != c.size()) throw Error(Errc::InvalidSpec, "magma table row has wrong length");
        for (Elem e : row)
            if (!c.contains(e)) throw Error(Errc::InvalidSpec, "magma table entry outside carrier");
    }
}

bool commutative(const MagmaTable& op) {
    for (std::size_t x = 0; x < op.size(); ++x)
        for (std::size_t y = 0; y < op.size(); ++y)
            if (op[x][y] != op[y][x]) return false;
    return true;
}

}  // namespace

System magma_pairs(const Carrier& c, const MagmaTable& op, Elem empty) {
    check_magma(c, op);
    if (!c.contains(empty)) throw Error(Errc::InvalidSpec, "magma-pairs: empty value outside carrier");
    auto rule = [op, empty](const Family& f) -> std::optional<Elem> {
        if (!f.is_explicit()) return std::nullopt;
        const auto& es = f.ex().entries;
        if (es.empty()) return empty;
        if (es.size() == 1) return es[0].second;
        if (es.size() == 2 && es[0].first == 0 && es[1].first == 1) return op[es[0].second][es[1].second];
        return std::nullopt;
    };
    Traits t;
    t.empty_sum = empty;
    t.ordinal = false;
    System s = System::rule(c, rule, t, "magma-pairs");
    // Zero means nothing fails even for an identity: (e@0, x@2) is not
    // summable while its core (x@2) is.
    s.declared = axiom_set({2, 3, 5, 8});
    return s;
}

System pairs_only_magma(const Carrier& c, const MagmaTable& op) {
    check_magma(c, op);
    auto rule = [op](const Family& f) -> std::optional<Elem> {
        if (!f.is_explicit() || f.ex().entries.size() != 2) return std::nullopt;
        const auto& es = f.ex().entries;
        return op[es[0].second][es[1].second];
    };
    Traits t;
    t.ordinal = false;
    System s = System::rule(c, rule, t, "pairs-only-magma");
    s.declared = axiom_set({4});
    if (commutative(op)) s.declared.insert(AxiomId::ReindexInvariance);
    return s;
}

System pairs_only_group(const Carrier& g) {
    if (!g.has_group()) throw Error(Errc::InvalidSpec, "pairs-only group system needs a group");
    auto rule = [g](const Family& f) -> std::optional<Elem> {
        auto vals = [&]() -> std::optional<std::vector<Elem>> {
            if (f.is_explicit()) return f.finite_values();
            if (f.is_multiset() && f.is_finite()) return f.finite_values();
            return std::nullopt;
        }();
        if (!vals || vals->size() != 2) return std::nullopt;
        return g.add((*vals)[0], (*vals)[1]);
    };
    Traits t;
    t.reindex_invariant = true;
    t.ordinal = false;
    System s = System::rule(g, rule, t, "pairs-only-group");
    s.declared = axiom_set({1, 4, 7, 12, 13});
    return s;
}

System constant_system(const Carrier& c, Elem x0) {
    if (!c.contains(x0)) throw Error(Errc::InvalidSpec, "constant: value outside carrier");
    Traits t;
    t.reindex_invariant = true;
    t.empty_sum = x0;
    System s = System::rule(c, [x0](const Family&) -> std::optional<Elem> { return x0; }, t, "constant");
    s.declared = axiom_set({1, 2, 3, 4, 6, 8, 9});
    if (c.size() <= 1) s.declared.insert(AxiomId::SingletonsSumSimply);
    return s;
}

System zero_only(const Carrier& g) {
    if (!g.has_group()) throw Error(Errc::InvalidSpec, "zero-only needs a group");
    const Elem zero = *g.zero();
    auto rule = [zero](const Family& f) -> std::optional<Elem> {
        bool ok = true;
        each_entry(f, [&](Elem e, Mult) { ok = ok && e == zero; });
        if (!ok) return std::nullopt;
        return zero;
    };
    System s = System::rule(g, rule, group_traits(g), "zero-only");
    s.declared = axiom_set({1, 2, 3, 4, 7, 8, 9, 11, 12, 13, 14, 15, 16});
    if (g.size() <= 1) s.declared = axiom_set({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
    return s;
}

Carrier cyclic_ring(std::size_t n) {
    std::vector<std::vector<Elem>> mul(n, std::vector<Elem>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) mul[a][b] = Elem((a * b) % n);
    return Carrier::cyclic(n).with_mul(mul, Elem(n > 1 ? 1 : 0));
}

// ---------------------------------------------------------------- registry

namespace {

std::string param(const ModelSpec& s, const std::string& key, const std::string& dflt) {
    auto it = s.params.find(key);
    return it == s.params.end() ? dflt : it->second;
}

std::size_t size_param(const ModelSpec& s, const std::string& key, std::size_t dflt) {
    auto v = param(s, key, std::to_string(dflt));
    try {
        std::size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size() || x < 0) throw std::invalid_argument(v);
        return std::size_t(x);
    } catch (const std::logic_error&) {
        throw Error(Errc::InvalidSpec, "parameter " + key + " must be a natural number, got '" + v + "'");
    }
}

Carrier group_param(const ModelSpec& s, const std::string& dflt) {
    auto name = param(s, "group", dflt);
    bool ring = param(s, "ring", "false") == "true";
    if (!ring) return Carrier::from_group_name(name);
    if (name.size() < 2 || name[0] != 'z' || name.find('x') != std::string::npos)
        throw Error(Errc::InvalidSpec, "ring structure is available for cyclic groups only");
    return cyclic_ring(size_param(ModelSpec{"", {{"n", name.substr(1)}}}, "n", 2));
}

Elem elem_param(const ModelSpec& s, const Carrier& c, const std::string& key, const std::string& dflt) {
    auto v = param(s, key, dflt);
    auto e = c.parse_elem(v);
    if (!e) throw Error(Errc::InvalidSpec, "parameter " + key + ": '" + v + "' is not an element");
    return *e;
}

MagmaTable table_param(const ModelSpec& s, std::size_t n) {
    auto v = param(s, "table", "");
    if (v.empty()) return left_projection(n);
    MagmaTable t;
    std::stringstream rows(v);
    std::string row;
    while (std::getline(rows, row, ';')) {
        std::stringstream cells(row);
        std::vector<Elem> r;
        long x;
        while (cells >> x) r.push_back(Elem(x));
        t.push_back(r);
    }
    return t;
}

}  // namespace

const std::vector<std::string>& model_names() {
    static const std::vector<std::string> v = {"finitary-group", "multiset-monoid", "choice",   "magma-pairs",
                                               "constant",       "zero-only",       "pairs-only", "rational-series"};
    return v;
}

System build_model(const ModelSpec& spec) {
    const auto& n = spec.name;
    if (n == "finitary-group") return finitary_group(group_param(spec, "z2"));
    if (n == "multiset-monoid") return multiset_monoid(size_param(spec, "alphabet", 1));
    if (n == "choice") {
        Carrier c = Carrier::plain(size_param(spec, "size", 3));
        return choice(c, elem_param(spec, c, "empty", "0"));
    }
    if (n == "magma-pairs") {
        Carrier c = Carrier::plain(size_param(spec, "size", 2));
        return magma_pairs(c, table_param(spec, c.size()), elem_param(spec, c, "empty", "0"));
    }
    if (n == "constant") {
        Carrier c = spec.params.count("group") ? group_param(spec, "z2") : Carrier::plain(size_param(spec, "size", 3));
        return constant_system(c, elem_param(spec, c, "value", "0"));
    }
    if (n == "zero-only") return zero_only(group_param(spec, "z2"));
    if (n == "pairs-only") {
        if (spec.params.count("group")) return pairs_only_group(group_param(spec, "z2"));
        Carrier c = Carrier::plain(size_param(spec, "size", 2));
        return pairs_only_magma(c, table_param(spec, c.size()));
    }
    if (n == "rational-series")
        throw Error(Errc::InvalidSpec, "rational-series is exact-rational, run it with --suite series");
    throw Error(Errc::InvalidSpec, "unknown model '" + n + "'");
}

// ---------------------------------------------------------------- rational series

namespace {

void check_ratio(const Rational& r) {
    if (abs(r) >= 1) throw Error(Errc::RatioOutOfRange, "geometric ratio " + r.str() + " is not below 1 in size");
}

Rational rpow(const Rational& r, std::uint64_t k) {
    Rational out = 1, b = r;
    while (k) {
        if (k & 1) out *= b;
        b *= b;
        k >>= 1;
    }
    return out;
}

struct Piece1 {
    Rational first;
    Rational ratio;  // 0 for a single term
};

std::vector<Piece1> pieces_of(const SeriesFamily& f) {
    std::vector<Piece1> v;
    for (auto& [i, x] : f.finite) v.push_back({x, 0});
    for (auto& t : f.tails) {
        check_ratio(t.ratio);
        v.push_back({t.first, t.ratio});
    }
    return v;
}

}  // namespace

Rational series_sum(const SeriesFamily& f) {
    Rational s = 0;
    for (auto& p : pieces_of(f)) s += p.first / (1 - p.ratio);
    return s;
}

Rational series_term(const SeriesFamily& f, std::uint64_t i) {
    Rational s = 0;
    if (auto it = f.finite.find(i); it != f.finite.end()) s += it->second;
    for (auto& t : f.tails) {
        check_ratio(t.ratio);
        if (i >= t.start) s += t.first * rpow(t.ratio, i - t.start);
    }
    return s;
}

SeriesProduct series_product(const SeriesFamily& f, const SeriesFamily& g) {
    SeriesProduct p;
    for (auto& x : pieces_of(f))
        for (auto& y : pieces_of(g)) p.pieces.push_back({x.first * y.first, x.ratio, y.ratio});
    return p;
}

Rational product_sum(const SeriesProduct& p) {
    Rational s = 0;
    for (auto& q : p.pieces) s += q.coeff / ((1 - q.ratio_left) * (1 - q.ratio_right));
    return s;
}

Rational product_term(const SeriesFamily& f, const SeriesFamily& g, std::uint64_t i, std::uint64_t j) {
    return series_term(f, i) * series_term(g, j);
}

SeriesFamily grandi_grouped() {
    SeriesFamily f;
    f.tails.push_back({0, 0, 0});
    return f;
}

RegroupingTrace regrouping_pipeline(const std::function<Rational(std::uint64_t)>& term, std::uint64_t window) {
    RegroupingTrace tr;
    for (std::uint64_t i = 0; i < window; ++i)
        if (term(i) > 0) tr.kept.push_back(i);
    // Greedy grouping: close a group once it exceeds twice the previous one.
    Rational acc = 0;
    std::uint64_t start = 0;
    for (std::uint64_t k = 0; k < tr.kept.size(); ++k) {
        acc += term(tr.kept[k]);
        if (tr.grouped.empty() || acc > 2 * tr.grouped.back()) {
            tr.cuts.push_back(start);
            tr.grouped.push_back(acc);
            acc = 0;
            start = k + 1;
        }
    }
    if (!tr.grouped.empty()) tr.cuts.push_back(start);
    tr.doubling_holds = tr.grouped.size() >= 2;
    tr.worst_ratio = 0;
    for (std::size_t k = 0; k + 1 < tr.grouped.size(); ++k) {
        tr.doubling_holds = tr.doubling_holds && tr.grouped[k + 1] > 2 * tr.grouped[k];
        // ratio of consecutive reciprocals
        tr.worst_ratio = std::max(tr.worst_ratio, Rational(tr.grouped[k] / tr.grouped[k + 1]));
    }
    for (std::size_t i = 0; i < tr.grouped.size(); ++i)
        for (std::size_t j = 0; j < tr.grouped.size(); ++j)
            if (tr.grouped[i] == tr.grouped[j]) tr.ones.emplace_back(i, j);
    // One 1 on every diagonal position: the profile has infinitely many 1s.
    tr.contradiction = tr.doubling_holds && tr.worst_ratio < Rational(1, 2) && tr.ones.size() >= tr.grouped.size();
    return tr;
}

}  // namespace sigma
