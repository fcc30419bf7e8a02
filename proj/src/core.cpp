#include "sigma/core.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace sigma {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::DuplicateLabel: return "DuplicateLabel";
    case Errc::UnrepresentableSelection: return "UnrepresentableSelection";
    case Errc::MultisetNotAllowed: return "MultisetNotAllowed";
    case Errc::FunctionhoodConflict: return "FunctionhoodConflict";
    case Errc::MissingStructure: return "MissingStructure";
    case Errc::HypothesisNotMet: return "HypothesisNotMet";
    case Errc::CoreConflict: return "CoreConflict";
    case Errc::CarrierTooLarge: return "CarrierTooLarge";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::RatioOutOfRange: return "RatioOutOfRange";
    case Errc::NotRepresentable: return "NotRepresentable";
    case Errc::MissingCertificate: return "MissingCertificate";
    case Errc::IndexMismatch: return "IndexMismatch";
    case Errc::NotInDomain: return "NotInDomain";
    case Errc::NotReindexInvariant: return "NotReindexInvariant";
    case Errc::NotAFunction: return "NotAFunction";
    case Errc::ParseError: return "ParseError";
    }
    return "Unknown";
}

std::string label_str(Label l) {
    auto i = OrdinalIndex::of(l);
    if (i.block == 0) return std::to_string(i.offset);
    std::string s = i.block == 1 ? "w" : "w" + std::to_string(i.block);
    if (i.offset) s += "+" + std::to_string(i.offset);
    return s;
}

// ---------------------------------------------------------------- carrier

namespace {

std::vector<std::string> index_names(std::size_t n) {
    std::vector<std::string> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::to_string(i);
    return v;
}

void check_square(const std::vector<std::vector<Elem>>& t, std::size_t n, const char* what) {
    if (t.size() != n) throw Error(Errc::InvalidSpec, std::string(what) + " table has wrong row count");
    for (auto& row : t) {
        if (row.size() != n) throw Error(Errc::InvalidSpec, std::string(what) + " table row has wrong length");
        for (Elem e : row)
            if (e < 0 || std::size_t(e) >= n)
                throw Error(Errc::InvalidSpec, std::string(what) + " table entry outside carrier");
    }
}

}  // namespace

Carrier Carrier::plain(std::size_t n) { return named(index_names(n)); }

Carrier Carrier::named(std::vector<std::string> names) {
    Carrier c;
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size()) throw Error(Errc::InvalidSpec, "duplicate element name");
    if (names.size() > 63) throw Error(Errc::CarrierTooLarge, "finite carriers hold at most 63 elements");
    c.names_ = std::move(names);
    return c;
}

Carrier Carrier::group(std::vector<std::string> names, std::vector<std::vector<Elem>> add) {
    Carrier c = named(std::move(names));
    const std::size_t n = c.names_.size();
    check_square(add, n, "group");
    std::optional<Elem> zero;
    for (std::size_t e = 0; e < n && !zero; ++e) {
        bool ok = true;
        for (std::size_t x = 0; x < n && ok; ++x) ok = add[e][x] == Elem(x) && add[x][e] == Elem(x);
        if (ok) zero = Elem(e);
    }
    if (!zero) throw Error(Errc::InvalidSpec, "group table has no identity");
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (add[a][b] != add[b][a])
                throw Error(Errc::InvalidSpec, "group table is not commutative at (" + c.names_[a] + "," + c.names_[b] + ")");
            for (std::size_t d = 0; d < n; ++d)
                if (add[add[a][b]][d] != add[a][add[b][d]])
                    throw Error(Errc::InvalidSpec, "group table is not associative");
        }
    std::vector<Elem> neg(n, -1);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b)
            if (add[a][b] == *zero) neg[a] = Elem(b);
        if (neg[a] < 0) throw Error(Errc::InvalidSpec, "element " + c.names_[a] + " has no inverse");
    }
    c.add_ = std::move(add);
    c.neg_ = std::move(neg);
    c.zero_ = zero;
    return c;
}

Carrier Carrier::cyclic(std::size_t n) { return product({n}); }

Carrier Carrier::product(const std::vector<std::size_t>& orders) {
    std::size_t n = 1;
    for (auto o : orders) {
        if (o == 0) throw Error(Errc::InvalidSpec, "group factor of order 0");
        n *= o;
        if (n > 63) throw Error(Errc::CarrierTooLarge, "group too large");
    }
    // element index = mixed radix digits, first factor least significant
    auto digits = [&](std::size_t x) {
        std::vector<std::size_t> d;
        for (auto o : orders) { d.push_back(x % o); x /= o; }
        return d;
    };
    auto undigits = [&](const std::vector<std::size_t>& d) {
        std::size_t x = 0, m = 1;
        for (std::size_t i = 0; i < orders.size(); ++i) { x += d[i] * m; m *= orders[i]; }
        return x;
    };
    std::vector<std::vector<Elem>> add(n, std::vector<Elem>(n));
    std::vector<std::string> names(n);
    for (std::size_t a = 0; a < n; ++a) {
        auto da = digits(a);
        if (orders.size() == 1) names[a] = std::to_string(a);
        else {
            std::string s;
            for (std::size_t i = 0; i < da.size(); ++i) s += (i ? "." : "") + std::to_string(da[i]);
            names[a] = s;
        }
        for (std::size_t b = 0; b < n; ++b) {
            auto db = digits(b);
            std::vector<std::size_t> s(orders.size());
            for (std::size_t i = 0; i < orders.size(); ++i) s[i] = (da[i] + db[i]) % orders[i];
            add[a][b] = Elem(undigits(s));
        }
    }
    return group(std::move(names), std::move(add));
}

Carrier Carrier::from_group_name(const std::string& name) {
    if (name == "trivial") return cyclic(1);
    if (name == "klein" || name == "v4") return product({2, 2});
    if (name.empty() || name[0] != 'z') throw Error(Errc::InvalidSpec, "unknown group '" + name + "'");
    std::vector<std::size_t> orders;
    std::stringstream ss(name);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        if (part.size() < 2 || part[0] != 'z') throw Error(Errc::InvalidSpec, "unknown group '" + name + "'");
        try {
            std::size_t pos = 0;
            long v = std::stol(part.substr(1), &pos);
            if (pos != part.size() - 1 || v <= 0) throw std::invalid_argument("order");
            orders.push_back(std::size_t(v));
        } catch (const std::logic_error&) {
            throw Error(Errc::InvalidSpec, "unknown group '" + name + "'");
        }
    }
    return product(orders);
}

Carrier Carrier::unbounded(std::vector<Elem> sample, std::function<std::string(Elem)> namer,
                           std::function<Elem(Elem, Elem)> add, std::optional<Elem> zero,
                           std::function<std::optional<Elem>(const std::string&)> parser) {
    Carrier c;
    c.parser_ = std::move(parser);
    c.finite_ = false;
    c.sample_ = std::move(sample);
    c.namer_ = std::move(namer);
    c.add_fn_ = std::move(add);
    c.zero_ = zero;
    return c;
}

Carrier Carrier::with_mul(std::vector<std::vector<Elem>> mul, std::optional<Elem> one) const {
    if (!finite_) throw Error(Errc::InvalidSpec, "multiplication tables need a finite carrier");
    const std::size_t n = names_.size();
    check_square(mul, n, "mul");
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t d = 0; d < n; ++d)
                if (mul[mul[a][b]][d] != mul[a][mul[b][d]])
                    throw Error(Errc::InvalidSpec, "mul table is not associative at (" + names_[a] + "," +
                                                       names_[b] + "," + names_[d] + ")");
    if (one) {
        if (*one < 0 || std::size_t(*one) >= n) throw Error(Errc::InvalidSpec, "identity outside carrier");
        for (std::size_t a = 0; a < n; ++a)
            if (mul[*one][a] != Elem(a) || mul[a][*one] != Elem(a))
                throw Error(Errc::InvalidSpec, "claimed multiplicative identity fails");
    }
    Carrier c = *this;
    c.mul_ = std::move(mul);
    c.one_ = one;
    return c;
}

std::vector<Elem> Carrier::elements() const {
    if (!finite_) return sample_;
    std::vector<Elem> v(names_.size());
    std::iota(v.begin(), v.end(), Elem(0));
    return v;
}

bool Carrier::contains(Elem e) const {
    if (finite_) return e >= 0 && std::size_t(e) < names_.size();
    return e >= 0;
}

Elem Carrier::add(Elem a, Elem b) const {
    if (!finite_) {
        if (!add_fn_) throw Error(Errc::MissingStructure, "carrier has no addition");
        return add_fn_(a, b);
    }
    if (add_.empty()) throw Error(Errc::MissingStructure, "carrier has no addition");
    return add_[a][b];
}

Elem Carrier::neg(Elem a) const {
    if (neg_.empty()) throw Error(Errc::MissingStructure, "carrier has no negation");
    return neg_[a];
}

Elem Carrier::mul(Elem a, Elem b) const {
    if (mul_.empty()) throw Error(Errc::MissingStructure, "carrier has no multiplication");
    return mul_[a][b];
}

std::size_t Carrier::order(Elem a) const {
    std::size_t k = 1;
    Elem x = a;
    while (x != *zero_) { x = add(x, a); ++k; }
    return k;
}

std::string Carrier::name(Elem e) const {
    if (!finite_) return namer_ ? namer_(e) : std::to_string(e);
    if (e >= 0 && std::size_t(e) < names_.size()) return names_[e];
    return "?" + std::to_string(e);
}

std::optional<Elem> Carrier::parse_elem(const std::string& s) const {
    if (finite_) {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == s) return Elem(i);
        return std::nullopt;
    }
    if (parser_) return parser_(s);
    for (Elem e : sample_)
        if (name(e) == s) return e;
    return std::nullopt;
}

std::uint64_t Carrier::full_mask() const {
    const std::size_t n = size();
    return n >= 64 ? ~0ull : ((1ull << n) - 1);
}

std::string Carrier::mask_str(std::uint64_t m) const {
    std::string s = "{";
    bool first = true;
    for (std::size_t i = 0; i < size(); ++i)
        if (m >> i & 1) {
            if (!first) s += ",";
            s += name(Elem(i));
            first = false;
        }
    return s + "}";
}

// ---------------------------------------------------------------- families

std::strong_ordering Generated::operator<=>(const Generated& o) const {
    if (auto c = rule <=> o.rule; c != 0) return c;
    if (auto c = params <=> o.params; c != 0) return c;
    if (auto c = start <=> o.start; c != 0) return c;
    if (auto c = period <=> o.period; c != 0) return c;
    return length <=> o.length;
}

Family Family::seq(const std::vector<Elem>& xs) {
    Explicit e;
    for (std::size_t i = 0; i < xs.size(); ++i) e.entries.emplace_back(Label(i), xs[i]);
    return Family(std::move(e));
}

Family Family::labeled(std::vector<std::pair<Label, Elem>> entries) {
    std::sort(entries.begin(), entries.end());
    for (std::size_t i = 1; i < entries.size(); ++i)
        if (entries[i].first == entries[i - 1].first)
            throw Error(Errc::DuplicateLabel, "label " + label_str(entries[i].first) + " repeated");
    return Family(Explicit{std::move(entries)});
}

Family Family::omega(std::vector<Elem> prefix, std::vector<Elem> cycle) {
    if (cycle.empty()) throw Error(Errc::InvalidInput, "limit block needs a nonempty cycle");
    Transfinite t;
    t.blocks.push_back({std::move(prefix), std::move(cycle)});
    return Family(std::move(t));
}

bool Family::is_finite() const {
    return std::visit(
        [](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Explicit>) return true;
            else if constexpr (std::is_same_v<T, Transfinite>) return v.blocks.empty();
            else if constexpr (std::is_same_v<T, Multiset>) {
                for (auto& [e, m] : v.counts)
                    if (m == kOmega) return false;
                return true;
            } else return v.length.has_value();
        },
        v_);
}

std::size_t Family::finite_size() const {
    if (!is_finite()) throw Error(Errc::InvalidInput, "family is infinite");
    return finite_values().size();
}

std::vector<Elem> Family::finite_values() const {
    std::vector<Elem> out;
    if (is_explicit()) {
        for (auto& [l, e] : ex().entries) out.push_back(e);
    } else if (is_transfinite()) {
        if (!tf().blocks.empty()) throw Error(Errc::InvalidInput, "family is infinite");
        out = tf().final;
    } else if (is_multiset()) {
        for (auto& [e, m] : ms().counts) {
            if (m == kOmega) throw Error(Errc::InvalidInput, "family is infinite");
            out.insert(out.end(), m, e);
        }
    } else {
        const auto& g = gen();
        if (!g.length) throw Error(Errc::InvalidInput, "family is infinite");
        for (std::uint64_t i = 0; i < *g.length; ++i) out.push_back(g.entry(i));
    }
    return out;
}

std::vector<Label> Family::finite_labels() const {
    std::vector<Label> out;
    if (is_explicit()) {
        for (auto& [l, e] : ex().entries) out.push_back(l);
        return out;
    }
    auto n = finite_values().size();
    for (std::size_t i = 0; i < n; ++i) out.push_back(Label(i));
    return out;
}

std::strong_ordering Family::operator<=>(const Family& o) const {
    if (v_.index() != o.v_.index()) return v_.index() <=> o.v_.index();
    return std::visit(
        [&](const auto& a) -> std::strong_ordering {
            using T = std::decay_t<decltype(a)>;
            const auto& b = std::get<T>(o.v_);
            return a <=> b;
        },
        v_);
}

namespace {

std::string elem_name(const Carrier* c, Elem e) { return c ? c->name(e) : std::to_string(e); }

std::string list_str(const Carrier* c, const std::vector<Elem>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + elem_name(c, xs[i]);
    return s;
}

}  // namespace

std::string Family::str(const Carrier* c) const {
    if (is_explicit()) {
        if (ex().entries.empty()) return "()";
        std::string s = "(";
        bool first = true;
        for (auto& [l, e] : ex().entries) {
            if (!first) s += ", ";
            s += label_str(l) + ":" + elem_name(c, e);
            first = false;
        }
        return s + ")";
    }
    if (is_transfinite()) {
        std::string s = "ord:";
        for (auto& b : tf().blocks) s += " [" + list_str(c, b.prefix) + " | " + list_str(c, b.cycle) + "]";
        if (!tf().final.empty()) s += " " + list_str(c, tf().final);
        return s;
    }
    if (is_multiset()) {
        std::string s = "ms:";
        for (auto& [e, m] : ms().counts) s += " " + elem_name(c, e) + "*" + (m == kOmega ? "w" : std::to_string(m));
        return s;
    }
    const auto& g = gen();
    std::string s = "gen:" + g.rule;
    for (Elem p : g.params) s += " " + std::to_string(p);
    return s;
}

Transfinite expand_generated(const Generated& g, int spot_checks) {
    if (!g.entry) throw Error(Errc::MissingCertificate, "generated family '" + g.rule + "' has no entry rule");
    Transfinite t;
    if (g.length) {
        for (std::uint64_t i = 0; i < *g.length; ++i) t.final.push_back(g.entry(i));
        return t;
    }
    if (g.period == 0) throw Error(Errc::MissingCertificate, "generated family '" + g.rule + "' has period 0");
    LimitBlock b;
    for (std::uint64_t i = 0; i < g.start; ++i) b.prefix.push_back(g.entry(i));
    for (std::uint64_t r = 0; r < g.period; ++r) b.cycle.push_back(g.entry(g.start + r));
    for (int k = 1; k <= spot_checks; ++k)
        for (std::uint64_t r = 0; r < g.period; ++r)
            if (g.entry(g.start + std::uint64_t(k) * g.period + r) != b.cycle[r])
                throw Error(Errc::MissingCertificate,
                            "generated family '" + g.rule + "' breaks its periodicity certificate");
    t.blocks.push_back(std::move(b));
    return t;
}

// ---------------------------------------------------------------- normal forms

LimitBlock normalize_block(LimitBlock b) {
    const std::size_t n = b.cycle.size();
    if (n == 0) throw Error(Errc::InvalidInput, "limit block needs a nonempty cycle");
    for (std::size_t p = 1; p <= n; ++p) {
        if (n % p) continue;
        bool ok = true;
        for (std::size_t i = p; i < n && ok; ++i) ok = b.cycle[i] == b.cycle[i - p];
        if (ok) { b.cycle.resize(p); break; }
    }
    while (!b.prefix.empty() && b.prefix.back() == b.cycle.back()) {
        b.prefix.pop_back();
        std::rotate(b.cycle.rbegin(), b.cycle.rbegin() + 1, b.cycle.rend());
    }
    return b;
}

Transfinite normalize_transfinite(Transfinite t) {
    for (auto& b : t.blocks) b = normalize_block(std::move(b));
    return t;
}

namespace {

// A run of entries: finite when cycle is empty, otherwise an omega block.
struct Piece {
    std::vector<Elem> prefix;
    std::vector<Elem> cycle;
};

Transfinite assemble(const std::vector<Piece>& pieces) {
    Transfinite t;
    std::vector<Elem> pending;
    for (auto& p : pieces) {
        pending.insert(pending.end(), p.prefix.begin(), p.prefix.end());
        if (!p.cycle.empty()) {
            t.blocks.push_back({std::move(pending), p.cycle});
            pending.clear();
        }
    }
    t.final = std::move(pending);
    return normalize_transfinite(std::move(t));
}

Family to_family(Transfinite t) {
    if (t.blocks.empty()) return Family::seq(t.final);
    return Family(std::move(t));
}

Elem block_entry(const LimitBlock& b, std::uint64_t n) {
    if (n < b.prefix.size()) return b.prefix[n];
    return b.cycle[(n - b.prefix.size()) % b.cycle.size()];
}

// Same omega sequence with prefix lengthened to at least len.
LimitBlock unroll(const LimitBlock& b, std::size_t len) {
    LimitBlock r;
    std::size_t plen = std::max(len, b.prefix.size());
    for (std::size_t i = 0; i < plen; ++i) r.prefix.push_back(block_entry(b, i));
    for (std::size_t i = 0; i < b.cycle.size(); ++i) r.cycle.push_back(block_entry(b, plen + i));
    return r;
}

std::vector<Piece> pieces_of(const Transfinite& t) {
    std::vector<Piece> ps;
    for (auto& b : t.blocks) ps.push_back({b.prefix, b.cycle});
    if (!t.final.empty()) ps.push_back({t.final, {}});
    return ps;
}

Transfinite as_transfinite(const Family& f) {
    if (f.is_transfinite()) return f.tf();
    if (f.is_generated()) return expand_generated(f.gen());
    if (f.is_explicit()) {
        // Only for families indexed by an initial segment of omega.
        Transfinite t;
        Label next = 0;
        for (auto& [l, e] : f.ex().entries) {
            if (l != next) throw Error(Errc::InvalidInput, "explicit family is not indexed by an initial ordinal");
            t.final.push_back(e);
            ++next;
        }
        return t;
    }
    throw Error(Errc::InvalidInput, "multiset family has no ordinal indexing");
}

}  // namespace

Family canonicalize(const Family& f, const Traits& t) {
    if (f.is_explicit()) {
        auto e = f.ex();
        std::sort(e.entries.begin(), e.entries.end());
        for (std::size_t i = 1; i < e.entries.size(); ++i)
            if (e.entries[i].first == e.entries[i - 1].first)
                throw Error(Errc::DuplicateLabel, "label " + label_str(e.entries[i].first) + " repeated");
        return Family(std::move(e));
    }
    if (f.is_multiset()) {
        if (!t.reindex_invariant)
            throw Error(Errc::MultisetNotAllowed, "multiset families need a reindexing-invariant system");
        Multiset m;
        for (auto& [e, c] : f.ms().counts) {
            if (c == 0) continue;
            if (t.zero_drop && t.empty_sum && e == *t.empty_sum) continue;
            m.counts[e] = c;
        }
        return Family(std::move(m));
    }
    Transfinite tr = f.is_generated() ? expand_generated(f.gen()) : f.tf();
    // An empty-cycle block is not a limit block; merge it into what follows.
    std::vector<Piece> ps = pieces_of(tr);
    return to_family(assemble(ps));
}

std::size_t limit_blocks(const Family& f) {
    if (f.is_transfinite()) return f.tf().blocks.size();
    if (f.is_generated()) return f.gen().length ? 0 : 1;
    if (f.is_multiset()) return f.is_finite() ? 0 : 1;
    return 0;
}

bool has_last_element(const Family& f) {
    if (f.is_explicit()) return !f.ex().entries.empty();
    if (f.is_transfinite()) return !f.tf().final.empty();
    if (f.is_generated()) return f.gen().length && *f.gen().length > 0;
    return false;
}

std::optional<Elem> entry_at(const Family& f, OrdinalIndex i) {
    if (f.is_explicit()) {
        Label l = i.label();
        for (auto& [k, e] : f.ex().entries)
            if (k == l) return e;
        return std::nullopt;
    }
    if (f.is_multiset()) return std::nullopt;
    Transfinite t = as_transfinite(f);
    if (i.block < t.blocks.size()) return block_entry(t.blocks[i.block], i.offset);
    if (i.block == t.blocks.size() && i.offset < t.final.size()) return t.final[i.offset];
    return std::nullopt;
}

std::pair<std::size_t, std::size_t> order_type(const Family& f) {
    if (f.is_explicit()) return {0, f.ex().entries.size()};
    Transfinite t = as_transfinite(f);
    return {t.blocks.size(), t.final.size()};
}

// ---------------------------------------------------------------- selections

namespace {

std::vector<Piece> drop_positions(const Transfinite& t, const std::set<Label>& drop) {
    std::vector<Piece> out;
    for (std::size_t j = 0; j <= t.blocks.size(); ++j) {
        std::vector<std::uint32_t> offs;
        for (Label l : drop) {
            auto oi = OrdinalIndex::of(l);
            if (oi.block == j) offs.push_back(oi.offset);
        }
        if (j == t.blocks.size()) {
            std::vector<Elem> fin;
            for (std::size_t i = 0; i < t.final.size(); ++i)
                if (std::find(offs.begin(), offs.end(), i) == offs.end()) fin.push_back(t.final[i]);
            out.push_back({fin, {}});
            break;
        }
        std::size_t need = 0;
        for (auto o : offs) need = std::max<std::size_t>(need, o + 1);
        LimitBlock b = unroll(t.blocks[j], need);
        std::vector<Elem> pre;
        for (std::size_t i = 0; i < b.prefix.size(); ++i)
            if (std::find(offs.begin(), offs.end(), i) == offs.end()) pre.push_back(b.prefix[i]);
        out.push_back({pre, b.cycle});
    }
    return out;
}

std::vector<Piece> tail_pieces(const Transfinite& t, OrdinalIndex from) {
    std::vector<Piece> out;
    if (from.block < t.blocks.size()) {
        LimitBlock b = unroll(t.blocks[from.block], from.offset);
        b.prefix.erase(b.prefix.begin(), b.prefix.begin() + from.offset);
        out.push_back({b.prefix, b.cycle});
        for (std::size_t j = from.block + 1; j < t.blocks.size(); ++j)
            out.push_back({t.blocks[j].prefix, t.blocks[j].cycle});
        out.push_back({t.final, {}});
    } else if (from.block == t.blocks.size() && from.offset < t.final.size()) {
        out.push_back({std::vector<Elem>(t.final.begin() + from.offset, t.final.end()), {}});
    }
    return out;
}

std::vector<Piece> initial_pieces(const Transfinite& t, OrdinalIndex to) {
    std::vector<Piece> out;
    for (std::size_t j = 0; j < t.blocks.size() && j < to.block; ++j)
        out.push_back({t.blocks[j].prefix, t.blocks[j].cycle});
    if (to.block < t.blocks.size()) {
        LimitBlock b = unroll(t.blocks[to.block], to.offset);
        out.push_back({std::vector<Elem>(b.prefix.begin(), b.prefix.begin() + to.offset), {}});
    } else if (to.block == t.blocks.size()) {
        std::size_t k = std::min<std::size_t>(to.offset, t.final.size());
        out.push_back({std::vector<Elem>(t.final.begin(), t.final.begin() + k), {}});
    } else {
        out.push_back({t.final, {}});
    }
    return out;
}

}  // namespace

Family subfamily(const Family& f, const Selector& sel) {
    if (f.is_multiset()) {
        // Unordered: only label-free selections make sense; they keep cardinalities.
        if (sel.kind == Selector::PeriodicKeep || sel.kind == Selector::CofinalKeep) {
            bool any = std::find(sel.keep.begin(), sel.keep.end(), true) != sel.keep.end();
            bool cofinal = sel.kind == Selector::CofinalKeep;
            if (any && !cofinal) return f;
            Multiset m;
            for (auto& [e, c] : f.ms().counts)
                if ((c == kOmega) == (any && cofinal)) m.counts[e] = c;
            return Family(std::move(m));
        }
        throw Error(Errc::UnrepresentableSelection, "multiset families support only periodic selections");
    }
    if (f.is_explicit()) {
        Explicit out;
        for (auto& [l, e] : f.ex().entries) {
            bool keep = false;
            switch (sel.kind) {
            case Selector::Labels: keep = sel.labels.count(l) > 0; break;
            case Selector::DropIndices: keep = sel.labels.count(l) == 0; break;
            case Selector::Initial: keep = l < sel.to.label(); break;
            case Selector::Tail: keep = l >= sel.from.label(); break;
            case Selector::Interval: keep = l >= sel.from.label() && l < sel.to.label(); break;
            case Selector::PeriodicKeep:
            case Selector::CofinalKeep:
                throw Error(Errc::UnrepresentableSelection, "periodic selection on a finite family");
            }
            if (keep) out.entries.emplace_back(l, e);
        }
        return Family(std::move(out));
    }
    Transfinite t = as_transfinite(f);
    switch (sel.kind) {
    case Selector::Labels: {
        Explicit out;
        for (Label l : sel.labels)
            if (auto e = entry_at(Family(t), OrdinalIndex::of(l))) out.entries.emplace_back(l, *e);
        return Family(std::move(out));
    }
    case Selector::DropIndices: return to_family(assemble(drop_positions(t, sel.labels)));
    case Selector::Initial: return to_family(assemble(initial_pieces(t, sel.to)));
    case Selector::Tail: return to_family(assemble(tail_pieces(t, sel.from)));
    case Selector::Interval: {
        if (sel.to <= sel.from) return Family::empty();
        Transfinite tail = assemble(tail_pieces(t, sel.from));
        // Re-express the upper end relative to the tail's own indexing.
        OrdinalIndex to = sel.to;
        if (to.block == sel.from.block) to.offset -= sel.from.offset;
        to.block -= sel.from.block;
        return to_family(assemble(initial_pieces(tail, to)));
    }
    case Selector::PeriodicKeep: {
        if (sel.block >= t.blocks.size())
            throw Error(Errc::UnrepresentableSelection, "periodic selection outside the limit blocks");
        const auto& b = t.blocks[sel.block];
        if (sel.keep.empty() || sel.keep.size() % b.cycle.size())
            throw Error(Errc::UnrepresentableSelection, "selection mask does not match the cycle length");
        std::vector<Piece> ps;
        for (std::size_t j = 0; j < t.blocks.size(); ++j) {
            if (j != sel.block) { ps.push_back({t.blocks[j].prefix, t.blocks[j].cycle}); continue; }
            std::vector<Elem> cyc;
            for (std::size_t r = 0; r < sel.keep.size(); ++r)
                if (sel.keep[r]) cyc.push_back(b.cycle[r % b.cycle.size()]);
            ps.push_back({b.prefix, cyc});
        }
        ps.push_back({t.final, {}});
        return to_family(assemble(ps));
    }
    case Selector::CofinalKeep: {
        if (sel.block >= t.blocks.size())
            throw Error(Errc::UnrepresentableSelection, "cofinal selection outside the limit blocks");
        const auto& b = t.blocks[sel.block];
        if (sel.keep.empty() || sel.keep.size() % b.cycle.size())
            throw Error(Errc::UnrepresentableSelection, "selection mask does not match the cycle length");
        std::vector<Elem> cyc;
        for (std::size_t r = 0; r < sel.keep.size(); ++r)
            if (sel.keep[r]) cyc.push_back(b.cycle[r % b.cycle.size()]);
        return to_family(assemble({Piece{{}, cyc}}));
    }
    }
    return f;
}

Family initial_segment(const Family& f, OrdinalIndex i) { return subfamily(f, Selector::initial(i)); }

Family extend(const Family& f, Label l, Elem x) {
    if (f.is_explicit()) {
        auto e = f.ex();
        for (auto& [k, v] : e.entries)
            if (k == l) throw Error(Errc::DuplicateLabel, "label " + label_str(l) + " already in the family");
        e.entries.emplace_back(l, x);
        std::sort(e.entries.begin(), e.entries.end());
        return Family(std::move(e));
    }
    if (f.is_multiset()) {
        auto m = f.ms();
        auto& c = m.counts[x];
        if (c != kOmega) ++c;
        return Family(std::move(m));
    }
    Transfinite t = as_transfinite(f);
    OrdinalIndex end{std::uint32_t(t.blocks.size()), std::uint32_t(t.final.size())};
    if (OrdinalIndex::of(l) < end) throw Error(Errc::DuplicateLabel, "label " + label_str(l) + " already in the family");
    // Labels past the end are represented up to order type.
    t.final.push_back(x);
    return Family(std::move(t));
}

Family append(const Family& f, Elem x) {
    if (f.is_explicit()) {
        Label next = f.ex().entries.empty() ? 0 : f.ex().entries.back().first + 1;
        return extend(f, next, x);
    }
    Transfinite t = as_transfinite(f);
    t.final.push_back(x);
    return Family(std::move(t));
}

Family drop_last(const Family& f) {
    if (!has_last_element(f)) throw Error(Errc::InvalidInput, "family has no last element");
    if (f.is_explicit()) {
        auto e = f.ex();
        e.entries.pop_back();
        return Family(std::move(e));
    }
    Transfinite t = as_transfinite(f);
    t.final.pop_back();
    return to_family(std::move(t));
}

std::optional<Elem> last_entry(const Family& f) {
    if (!has_last_element(f)) return std::nullopt;
    if (f.is_explicit()) return f.ex().entries.back().second;
    return as_transfinite(f).final.back();
}

Family map_entries(const Family& f, const std::function<Elem(Elem)>& fn) {
    if (f.is_explicit()) {
        auto e = f.ex();
        for (auto& [l, v] : e.entries) v = fn(v);
        return Family(std::move(e));
    }
    if (f.is_multiset()) {
        Multiset m;
        for (auto& [e, c] : f.ms().counts) {
            auto& d = m.counts[fn(e)];
            d = (d == kOmega || c == kOmega) ? kOmega : d + c;
        }
        return Family(std::move(m));
    }
    Transfinite t = as_transfinite(f);
    for (auto& b : t.blocks) {
        for (auto& v : b.prefix) v = fn(v);
        for (auto& v : b.cycle) v = fn(v);
    }
    for (auto& v : t.final) v = fn(v);
    return Family(normalize_transfinite(std::move(t)));
}

namespace {

// Zero extension of an ordinal-indexed family into the order type omega*K + len.
Transfinite embed(const Family& f, std::size_t K, std::size_t len, Elem zero) {
    Transfinite out;
    out.blocks.assign(K, LimitBlock{{}, {zero}});
    out.final.assign(len, zero);
    auto put = [&](OrdinalIndex i, Elem e) {
        if (i.block < K) {
            auto& b = out.blocks[i.block];
            if (b.prefix.size() <= i.offset) b.prefix.resize(i.offset + 1, zero);
            b.prefix[i.offset] = e;
        } else {
            out.final.at(i.offset) = e;
        }
    };
    if (f.is_explicit()) {
        for (auto& [l, e] : f.ex().entries) put(OrdinalIndex::of(l), e);
        return out;
    }
    Transfinite t = as_transfinite(f);
    for (std::size_t j = 0; j < t.blocks.size(); ++j) out.blocks[j] = t.blocks[j];
    if (t.blocks.size() < K) {
        for (std::size_t i = 0; i < t.final.size(); ++i) put({std::uint32_t(t.blocks.size()), std::uint32_t(i)}, t.final[i]);
    } else {
        for (std::size_t i = 0; i < t.final.size(); ++i) out.final[i] = t.final[i];
    }
    return out;
}

}  // namespace

Family zip_entries(const Family& a, const Family& b, Elem zero, const std::function<Elem(Elem, Elem)>& fn) {
    if (a.is_multiset() || b.is_multiset())
        throw Error(Errc::InvalidInput, "componentwise operations need indexed families");
    if (a.is_explicit() && b.is_explicit()) {
        std::map<Label, std::pair<Elem, Elem>> m;
        for (auto& [l, e] : a.ex().entries) m[l] = {e, zero};
        for (auto& [l, e] : b.ex().entries) {
            auto it = m.find(l);
            if (it == m.end()) m[l] = {zero, e};
            else it->second.second = e;
        }
        Explicit out;
        for (auto& [l, p] : m) out.entries.emplace_back(l, fn(p.first, p.second));
        return Family(std::move(out));
    }
    // Ambient order type: large enough for both index sets.
    std::size_t K = 0, len = 0;
    auto account = [&](const Family& f) {
        if (f.is_explicit()) {
            for (auto& [l, e] : f.ex().entries) {
                auto i = OrdinalIndex::of(l);
                if (i.block > K) { K = i.block; len = 0; }
            }
        } else {
            auto t = as_transfinite(f);
            if (t.blocks.size() > K) { K = t.blocks.size(); len = 0; }
        }
    };
    account(a);
    account(b);
    auto fit = [&](const Family& f) {
        if (f.is_explicit()) {
            for (auto& [l, e] : f.ex().entries) {
                auto i = OrdinalIndex::of(l);
                if (i.block == K) len = std::max<std::size_t>(len, i.offset + 1);
            }
        } else {
            auto t = as_transfinite(f);
            if (t.blocks.size() == K) len = std::max(len, t.final.size());
        }
    };
    fit(a);
    fit(b);
    Transfinite ea = embed(a, K, len, zero), eb = embed(b, K, len, zero);
    Transfinite out;
    for (std::size_t j = 0; j < K; ++j) {
        std::size_t p = std::max(ea.blocks[j].prefix.size(), eb.blocks[j].prefix.size());
        LimitBlock x = unroll(ea.blocks[j], p), y = unroll(eb.blocks[j], p);
        std::size_t c = std::lcm(x.cycle.size(), y.cycle.size());
        LimitBlock r;
        for (std::size_t i = 0; i < p; ++i) r.prefix.push_back(fn(x.prefix[i], y.prefix[i]));
        for (std::size_t i = 0; i < c; ++i) r.cycle.push_back(fn(x.cycle[i % x.cycle.size()], y.cycle[i % y.cycle.size()]));
        out.blocks.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < len; ++i) out.final.push_back(fn(ea.final[i], eb.final[i]));
    return to_family(normalize_transfinite(std::move(out)));
}

Multiset to_multiset(const Family& f) {
    if (f.is_multiset()) return f.ms();
    Multiset m;
    auto bump = [&](Elem e, bool inf) {
        auto& c = m.counts[e];
        if (inf || c == kOmega) c = kOmega;
        else ++c;
    };
    if (f.is_explicit()) {
        for (auto& [l, e] : f.ex().entries) bump(e, false);
        return m;
    }
    Transfinite t = as_transfinite(f);
    for (auto& b : t.blocks) {
        for (Elem e : b.prefix) bump(e, false);
        for (Elem e : b.cycle) bump(e, true);
    }
    for (Elem e : t.final) bump(e, false);
    return m;
}

Family from_multiset(const Multiset& m) {
    std::vector<Elem> fin, cyc;
    for (auto& [e, c] : m.counts) {
        if (c == kOmega) cyc.push_back(e);
        else fin.insert(fin.end(), c, e);
    }
    if (cyc.empty()) return Family::seq(fin);
    return Family(normalize_transfinite(Transfinite{{LimitBlock{fin, cyc}}, {}}));
}

std::set<Elem> tail_set(const Family& f) {
    if (f.is_explicit()) {
        if (f.ex().entries.empty()) return {};
        return {f.ex().entries.back().second};
    }
    Transfinite t = as_transfinite(f);
    if (!t.final.empty()) return {t.final.back()};
    if (t.blocks.empty()) return {};
    const auto& c = t.blocks.back().cycle;
    return {c.begin(), c.end()};
}

// ---------------------------------------------------------------- json

namespace {

json label_json(Label l) {
    auto i = OrdinalIndex::of(l);
    if (i.block == 0) return i.offset;
    return json::array({i.block, i.offset});
}

Label label_from_json(const json& j) {
    if (j.is_number_unsigned() || j.is_number_integer()) {
        auto v = j.get<std::int64_t>();
        if (v < 0) throw Error(Errc::ParseError, "negative label");
        return Label(v);
    }
    if (j.is_array() && j.size() == 2)
        return OrdinalIndex{j[0].get<std::uint32_t>(), j[1].get<std::uint32_t>()}.label();
    throw Error(Errc::ParseError, "bad label " + j.dump());
}

Elem elem_from_json(const json& j, const Carrier& c) {
    Elem e;
    if (j.is_string()) {
        auto p = c.parse_elem(j.get<std::string>());
        if (!p) throw Error(Errc::ParseError, "unknown element " + j.dump());
        e = *p;
    } else {
        e = j.get<Elem>();
    }
    if (!c.contains(e)) throw Error(Errc::ParseError, "element " + j.dump() + " not in carrier");
    return e;
}

std::vector<Elem> elems_from_json(const json& j, const Carrier& c) {
    std::vector<Elem> v;
    for (auto& x : j) v.push_back(elem_from_json(x, c));
    return v;
}

}  // namespace

json family_to_json(const Family& f, const Carrier& c) {
    json j;
    if (f.is_explicit()) {
        json es = json::array();
        for (auto& [l, e] : f.ex().entries) es.push_back(json::array({label_json(l), e}));
        j["explicit"] = es;
    } else if (f.is_multiset()) {
        json es = json::array();
        for (auto& [e, m] : f.ms().counts) es.push_back(json::array({e, m == kOmega ? json("w") : json(m)}));
        j["multiset"] = es;
    } else {
        Transfinite t = as_transfinite(f);
        json bs = json::array();
        for (auto& b : t.blocks) bs.push_back({{"prefix", b.prefix}, {"cycle", b.cycle}});
        j["transfinite"] = {{"blocks", bs}, {"final", t.final}};
    }
    j["text"] = f.str(&c);
    return j;
}

Family family_from_json(const json& j, const Carrier& c) {
    try {
        if (j.contains("explicit")) {
            std::vector<std::pair<Label, Elem>> es;
            for (auto& p : j.at("explicit")) es.emplace_back(label_from_json(p.at(0)), elem_from_json(p.at(1), c));
            return Family::labeled(std::move(es));
        }
        if (j.contains("multiset")) {
            Multiset m;
            for (auto& p : j.at("multiset")) {
                Elem e = elem_from_json(p.at(0), c);
                Mult k = p.at(1).is_string() ? kOmega : p.at(1).get<Mult>();
                m.counts[e] = k;
            }
            return Family(std::move(m));
        }
        if (j.contains("transfinite")) {
            Transfinite t;
            for (auto& b : j.at("transfinite").at("blocks")) {
                LimitBlock lb{elems_from_json(b.at("prefix"), c), elems_from_json(b.at("cycle"), c)};
                if (lb.cycle.empty()) throw Error(Errc::ParseError, "limit block with empty cycle");
                t.blocks.push_back(std::move(lb));
            }
            t.final = elems_from_json(j.at("transfinite").at("final"), c);
            return Family(std::move(t));
        }
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad family json: ") + e.what());
    }
    throw Error(Errc::ParseError, "bad family json: " + j.dump());
}

// ---------------------------------------------------------------- axioms registry

namespace {

struct AxiomInfo {
    AxiomId id;
    const char* slug;
};

const AxiomInfo kAxioms[] = {
    {AxiomId::ReindexInvariance, "reindex-invariance"},
    {AxiomId::SubsSummable, "subs-summable"},
    {AxiomId::EmptyExists, "empty-exists"},
    {AxiomId::ZeroMeansNothing, "zero-means-nothing"},
    {AxiomId::SingletonsSumSimply, "singletons-sum-simply"},
    {AxiomId::FiniteTotality, "finite-totality"},
    {AxiomId::PrefixAssociativity, "prefix-associativity"},
    {AxiomId::InsertiveAssociativity, "insertive-associativity"},
    {AxiomId::MonoidMerger, "monoid-merger"},
    {AxiomId::AdditiveExtensionClosure, "additive-extension-closure"},
    {AxiomId::AdditionFunctoriality, "addition-functoriality"},
    {AxiomId::NegationFunctoriality, "negation-functoriality"},
    {AxiomId::OrdinalReindexInvariance, "ordinal-reindex-invariance"},
    {AxiomId::InitialSummability, "initial-summability"},
    {AxiomId::PostfixAssociativity, "postfix-associativity"},
    {AxiomId::OrdinalInsertiveAssociativity, "ordinal-insertive-associativity"},
    {AxiomId::InfiniteDistributivity, "infinite-distributivity"},
    {AxiomId::LeftMultipleSummable, "left-multiple-summable"},
    {AxiomId::LeftReorderability, "left-reorderability"},
};

}  // namespace

const std::vector<AxiomId>& all_axioms() {
    static const std::vector<AxiomId> v = [] {
        std::vector<AxiomId> r;
        for (auto& a : kAxioms) r.push_back(a.id);
        return r;
    }();
    return v;
}

std::string axiom_slug(AxiomId a) { return kAxioms[int(a)].slug; }

std::optional<AxiomId> axiom_from_slug(const std::string& s) {
    for (auto& a : kAxioms)
        if (s == a.slug) return a.id;
    return std::nullopt;
}

int axiom_number(AxiomId a) { return int(a) + 1; }

// ---------------------------------------------------------------- systems

System System::table(Carrier c, std::vector<std::pair<Family, Elem>> pairs, Traits t, std::string name) {
    System s;
    s.carrier_ = std::move(c);
    s.name_ = std::move(name);
    s.is_table_ = true;
    auto tab = std::make_shared<std::map<Family, Elem>>();
    auto ms = std::make_shared<std::map<Multiset, Elem>>();
    for (auto& [f, x] : pairs) {
        if (!s.carrier_.contains(x)) throw Error(Errc::InvalidInput, "sum outside carrier");
        Family cf = canonicalize(f, t);
        bool valid = true;
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Explicit>) {
                    for (auto& [l, e] : v.entries) valid = valid && s.carrier_.contains(e);
                } else if constexpr (std::is_same_v<T, Multiset>) {
                    for (auto& [e, m] : v.counts) valid = valid && s.carrier_.contains(e);
                } else if constexpr (std::is_same_v<T, Transfinite>) {
                    for (auto& b : v.blocks)
                        for (auto* part : {&b.prefix, &b.cycle})
                            for (Elem e : *part) valid = valid && s.carrier_.contains(e);
                    for (Elem e : v.final) valid = valid && s.carrier_.contains(e);
                }
            },
            cf.var());
        if (!valid) throw Error(Errc::InvalidInput, "family " + cf.str(&s.carrier_) + " has entries outside the carrier");
        auto [it, fresh] = tab->emplace(cf, x);
        if (!fresh && it->second != x) {
            throw Error(Errc::FunctionhoodConflict,
                        "family " + cf.str(&s.carrier_) + " given sums " + s.carrier_.name(it->second) + " and " +
                            s.carrier_.name(x),
                        json{{"family", family_to_json(cf, s.carrier_)}, {"sums", {it->second, x}}});
        }
        if (t.reindex_invariant) {
            Multiset m = to_multiset(cf);
            Family cm = canonicalize(Family(m), t);
            auto [jt, fresh2] = ms->emplace(cm.ms(), x);
            if (!fresh2 && jt->second != x)
                throw Error(Errc::FunctionhoodConflict,
                            "reindexings of " + cf.str(&s.carrier_) + " given different sums",
                            json{{"family", family_to_json(cf, s.carrier_)}, {"sums", {jt->second, x}}});
        }
    }
    s.table_ = tab;
    if (t.reindex_invariant) s.by_multiset_ = ms;
    s.traits_ = t;
    return s;
}

System System::rule(Carrier c, RuleFn fn, Traits t, std::string name) {
    System s;
    s.carrier_ = std::move(c);
    s.traits_ = t;
    s.name_ = std::move(name);
    s.rule_ = std::move(fn);
    return s;
}

std::vector<std::pair<Family, Elem>> System::pairs() const {
    if (!table_) return {};
    return {table_->begin(), table_->end()};
}

std::optional<Elem> System::query(const Family& f) const {
    Family cf = canonicalize(f, traits_);
    if (is_table_) {
        if (auto it = table_->find(cf); it != table_->end()) return it->second;
        if (by_multiset_) {
            Family cm = canonicalize(Family(to_multiset(cf)), traits_);
            if (auto it = by_multiset_->find(cm.ms()); it != by_multiset_->end()) return it->second;
        }
        return std::nullopt;
    }
    if (!rule_) return std::nullopt;
    return rule_(cf);
}

std::optional<Elem> query_sum(const System& s, const Family& f) { return s.query(f); }

std::optional<Elem> induced_addition(const System& s, Elem a, Elem b) {
    return s.query(Family::seq({a, b}));
}

// ---------------------------------------------------------------- reports

const char* verdict_str(Verdict v) { return v == Verdict::PassWithinBounds ? "pass-within-bounds" : "fail"; }

CheckReport CheckReport::passed(std::string id, json bounds, std::string note) {
    CheckReport r;
    r.id = std::move(id);
    r.bounds = std::move(bounds);
    r.note = std::move(note);
    return r;
}

CheckReport CheckReport::failed(std::string id, json witness, json bounds, std::string note) {
    CheckReport r;
    r.id = std::move(id);
    r.verdict = Verdict::Fail;
    r.witness = std::move(witness);
    r.bounds = std::move(bounds);
    r.note = std::move(note);
    return r;
}

json report_to_json(const CheckReport& r) {
    json j{{"check-id", r.id},
           {"verdict", verdict_str(r.verdict)},
           {"witness", r.witness},
           {"bounds", r.bounds},
           {"millis", r.millis}};
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

}  // namespace sigma
