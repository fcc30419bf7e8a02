#include "sigma/topo.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <functional>
#include <set>
#include <chrono>
#include <map>
#include <mutex>
#include <sstream>

namespace sigma {

namespace {

constexpr std::size_t kMaxPoints = 16;

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Elem> members(Mask m) {
    std::vector<Elem> out;
    for (Elem i = 0; m; ++i, m >>= 1)
        if (m & 1) out.push_back(i);
    return out;
}

std::string mask_text(Mask m) {
    std::string s = "{";
    bool first = true;
    for (Elem e : members(m)) {
        if (!first) s += ",";
        s += std::to_string(e);
        first = false;
    }
    return s + "}";
}

void require_small(std::size_t n) {
    if (n > kMaxPoints) throw Error(Errc::CarrierTooLarge, "topologies need at most 16 points");
}

}  // namespace

// ---------------------------------------------------------------- topology

Topology Topology::from_opens(std::size_t n, std::vector<Mask> opens) {
    require_small(n);
    Topology t;
    t.n_ = n;
    Mask full = t.full();
    for (Mask u : opens)
        if (u & ~full) throw Error(Errc::InvalidInput, "open set " + mask_text(u) + " has points outside the carrier");
    std::sort(opens.begin(), opens.end());
    opens.erase(std::unique(opens.begin(), opens.end()), opens.end());
    auto has = [&](Mask u) { return std::binary_search(opens.begin(), opens.end(), u); };
    if (!has(0)) throw Error(Errc::InvalidInput, "the empty set is not open");
    if (!has(full)) throw Error(Errc::InvalidInput, "the whole carrier is not open");
    for (Mask u : opens)
        for (Mask v : opens) {
            if (!has(u & v))
                throw Error(Errc::InvalidInput, "not closed under intersection: " + mask_text(u) + " and " + mask_text(v));
            if (!has(u | v))
                throw Error(Errc::InvalidInput, "not closed under union: " + mask_text(u) + " and " + mask_text(v));
        }
    t.opens_ = std::move(opens);
    t.nbhd_.assign(n, full);
    for (Mask u : t.opens_)
        for (std::size_t x = 0; x < n; ++x)
            if (u & bit(Elem(x))) t.nbhd_[x] &= u;
    return t;
}

Topology Topology::discrete(std::size_t n) {
    require_small(n);
    std::vector<Mask> all;
    for (Mask u = 0; u < (Mask(1) << n); ++u) all.push_back(u);
    return from_opens(n, std::move(all));
}

Topology Topology::trivial(std::size_t n) {
    require_small(n);
    return from_opens(n, {0, n == 0 ? 0 : (Mask(1) << n) - 1});
}

Topology Topology::generated(std::size_t n, const std::vector<Mask>& subbase) {
    require_small(n);
    Mask full = (Mask(1) << n) - 1;
    std::vector<Mask> nb(n, full);
    for (Mask u : subbase)
        for (std::size_t x = 0; x < n; ++x)
            if (u & bit(Elem(x))) nb[x] &= u;
    std::vector<Mask> opens;
    for (Mask u = 0; u <= full; ++u) {
        bool ok = true;
        for (std::size_t x = 0; x < n && ok; ++x)
            if ((u & bit(Elem(x))) && (nb[x] & ~u)) ok = false;
        if (ok) opens.push_back(u);
    }
    return from_opens(n, std::move(opens));
}

Topology Topology::parse(std::size_t n, const std::string& s) {
    std::vector<Mask> opens;
    std::size_t i = 0;
    auto fail = [&](const std::string& why) {
        throw Error(Errc::ParseError, "topology literal: " + why + " in '" + s + "'");
    };
    while (i < s.size()) {
        char ch = s[i];
        if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
            ++i;
            continue;
        }
        if (ch != '{') fail("expected '{'");
        auto close = s.find('}', i);
        if (close == std::string::npos) fail("unterminated set");
        Mask m = 0;
        std::stringstream in(s.substr(i + 1, close - i - 1));
        std::string tok;
        while (std::getline(in, tok, ',')) {
            tok.erase(std::remove_if(tok.begin(), tok.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }),
                      tok.end());
            if (tok.empty()) continue;
            std::size_t used = 0;
            long v = -1;
            try {
                v = std::stol(tok, &used);
            } catch (const std::exception&) {
                fail("bad point '" + tok + "'");
            }
            if (used != tok.size() || v < 0 || std::size_t(v) >= n) fail("bad point '" + tok + "'");
            m |= bit(v);
        }
        opens.push_back(m);
        i = close + 1;
    }
    // The empty set and the carrier may be left implicit.
    opens.push_back(0);
    opens.push_back(n == 0 ? 0 : (Mask(1) << n) - 1);
    return from_opens(n, std::move(opens));
}

bool Topology::is_open(Mask u) const { return std::binary_search(opens_.begin(), opens_.end(), u); }

Mask Topology::closure(Mask s) const {
    Mask out = 0;
    for (std::size_t x = 0; x < n_; ++x)
        if (nbhd_[x] & s) out |= bit(Elem(x));
    return out;
}

bool Topology::is_t1() const {
    for (std::size_t x = 0; x < n_; ++x)
        if (!is_closed(bit(Elem(x)))) return false;
    return true;
}

bool Topology::coarser_than(const Topology& o) const {
    for (Mask u : opens_)
        if (!o.is_open(u)) return false;
    return true;
}

std::string Topology::str() const {
    std::string s;
    for (Mask u : opens_) {
        if (!s.empty()) s += ", ";
        s += mask_text(u);
    }
    return s;
}

json Topology::to_json() const {
    json opens = json::array();
    for (Mask u : opens_) opens.push_back(members(u));
    return json{{"points", n_}, {"opens", opens}};
}

std::vector<Topology> enumerate_topologies(std::size_t n) {
    if (n > 5) throw Error(Errc::CarrierTooLarge, "topology enumeration is limited to 5 points");
    // Finite topologies are the up-set topologies of preorders; up[x] is the
    // smallest open set around x.
    std::vector<Topology> out;
    std::vector<Mask> up(n);
    Mask full = (Mask(1) << n) - 1;
    std::function<void(std::size_t)> rec = [&](std::size_t x) {
        if (x == n) {
            for (std::size_t a = 0; a < n; ++a)
                for (Elem b : members(up[a]))
                    if (up[b] & ~up[a]) return;
            std::vector<Mask> opens;
            for (Mask u = 0; u <= full; ++u) {
                bool ok = true;
                for (Elem p : members(u))
                    if (up[p] & ~u) {
                        ok = false;
                        break;
                    }
                if (ok) opens.push_back(u);
            }
            out.push_back(Topology::from_opens(n, std::move(opens)));
            return;
        }
        Mask others = full & ~bit(Elem(x));
        for (Mask sub = others;; sub = (sub - 1) & others) {
            up[x] = sub | bit(Elem(x));
            rec(x + 1);
            if (sub == 0) break;
        }
    };
    rec(0);
    std::sort(out.begin(), out.end());
    return out;
}

Topology join(std::size_t n, const std::vector<Topology>& ts) {
    std::vector<Mask> sub;
    for (auto& t : ts) sub.insert(sub.end(), t.opens().begin(), t.opens().end());
    return Topology::generated(n, sub);
}

// ---------------------------------------------------------------- limit sets

Transfinite ordinal_form(const Family& f) {
    if (f.is_transfinite()) return f.tf();
    if (f.is_generated()) return expand_generated(f.gen());
    if (f.is_explicit()) {
        // Finite label sets are ordered like their order type.
        Transfinite t;
        auto e = f.ex().entries;
        std::sort(e.begin(), e.end());
        for (auto& [l, x] : e) t.final.push_back(x);
        return t;
    }
    throw Error(Errc::InvalidInput, "multiset family has no ordinal indexing");
}

Mask tail_mask(const Family& f) {
    Mask m = 0;
    for (Elem e : tail_set(f.is_explicit() ? Family(ordinal_form(f)) : f)) m |= bit(e);
    return m;
}

Mask limit_set_of_tail(Mask tail, const Topology& t) {
    Mask out = 0;
    for (std::size_t x = 0; x < t.size(); ++x)
        if ((t.neighborhood(Elem(x)) & tail) == tail) out |= bit(Elem(x));
    return out;
}

Mask limit_set(const Family& f, const Topology& t, std::optional<Elem> point) {
    Transfinite tr = ordinal_form(f);
    if (tr.blocks.empty() && tr.final.empty()) return point ? bit(*point) : 0;
    return limit_set_of_tail(tail_mask(Family(tr)), t);
}

std::optional<Elem> unique_point(Mask m) {
    if (std::popcount(m) != 1) return std::nullopt;
    return Elem(std::countr_zero(m));
}

namespace {

Mask cycle_mask(const std::vector<Elem>& c) {
    Mask m = 0;
    for (Elem e : c) m |= bit(e);
    return m;
}

}  // namespace

bool is_gapless(const Family& f, const Topology& t) {
    // Successor cuts always have their last entry as a limit.
    for (auto& b : ordinal_form(f).blocks)
        if (!limit_set_of_tail(cycle_mask(b.cycle), t)) return false;
    return true;
}

std::optional<Elem> unique_limits_everywhere(const Family& f, const Topology& t, Elem zero) {
    Transfinite tr = ordinal_form(f);
    std::optional<Elem> lim = zero;
    auto point = [&](Elem e) {
        lim = unique_point(limit_set_of_tail(bit(e), t));
        return lim.has_value();
    };
    for (auto& b : tr.blocks) {
        for (Elem e : b.prefix)
            if (!point(e)) return std::nullopt;
        for (Elem e : b.cycle)
            if (!point(e)) return std::nullopt;
        lim = unique_point(limit_set_of_tail(cycle_mask(b.cycle), t));
        if (!lim) return std::nullopt;
    }
    for (Elem e : tr.final)
        if (!point(e)) return std::nullopt;
    return lim;
}

Topology finest_topology_with_limits(std::size_t n, const std::vector<TailConstraint>& pairs) {
    require_small(n);
    std::vector<Mask> opens;
    Mask full = (Mask(1) << n) - 1;
    for (Mask u = 0; u <= full; ++u) {
        bool ok = true;
        for (auto& p : pairs)
            if ((u & bit(p.limit)) && (p.tail & ~u)) {
                ok = false;
                break;
            }
        if (ok) opens.push_back(u);
    }
    return Topology::from_opens(n, std::move(opens));
}

Topology finest_topology_with_limits(std::size_t n, const std::vector<std::pair<Family, Elem>>& pairs) {
    std::vector<TailConstraint> tc;
    for (auto& [f, x] : pairs) tc.push_back({x, tail_mask(f)});
    return finest_topology_with_limits(n, tc);
}

// ---------------------------------------------------------------- limits

namespace {

// Walks an ordinal family and builds an output family whose entry at index
// i combines the input entry with the sum of an initial segment below i:
// of the output (difference family) or of the input (partial sums).
struct Stepper {
    enum Kind { Difference, PartialSum } kind;
    const System* s;
    Transfinite in, out;
    std::optional<Elem> q;  // sum of the tracked family so far
    OrdinalIndex next{};    // index of the next entry
    OrdinalIndex failed{};

    Stepper(Kind k, const System& sys) : kind(k), s(&sys) { q = s->query(Family::empty()); }

    const Transfinite& tracked() const { return kind == Difference ? out : in; }

    Elem combine(Elem x, Elem sum) const {
        const Carrier& c = s->carrier();
        return kind == Difference ? c.sub(x, sum) : c.add(sum, x);
    }

    std::optional<Elem> query(const Transfinite& t) const {
        if (t.blocks.empty()) return s->query(Family::seq(t.final));
        return s->query(Family(t));
    }

    bool push(Elem x) {
        if (!q) {
            failed = next;
            return false;
        }
        out.final.push_back(combine(x, *q));
        in.final.push_back(x);
        q = query(tracked());
        ++next.offset;
        return true;
    }

    // Closes the pending entries into a limit block with the given cycle.
    bool close(const std::vector<Elem>& cycle, std::size_t carrier_size) {
        std::size_t plen = in.final.size();
        std::size_t cl = cycle.size();
        std::size_t periods = 2 * carrier_size + 2;
        std::vector<Elem> vals = out.final;
        Transfinite probe = tracked();
        auto grow = [&](std::size_t upto) {
            while (vals.size() < upto) {
                std::size_t k = vals.size();
                Elem x = cycle[(k - plen) % cl];
                if (!q) {
                    failed = {next.block, std::uint32_t(k)};
                    return false;
                }
                Elem v = combine(x, *q);
                vals.push_back(v);
                probe.final.push_back(kind == Difference ? v : x);
                q = query(probe);
            }
            return true;
        };
        auto settle = [&]() -> std::optional<LimitBlock> {
            std::size_t N = vals.size();
            for (std::size_t m = 1; m <= carrier_size + 1; ++m) {
                std::size_t P = cl * m;
                if (N < plen + 2 * P) break;
                std::size_t st = N - P;
                while (st > 0 && vals[st - 1] == vals[st - 1 + P]) --st;
                if (N - st < 2 * P) continue;
                LimitBlock b;
                b.prefix.assign(vals.begin(), vals.begin() + st);
                b.cycle.assign(vals.begin() + st, vals.begin() + st + P);
                return b;
            }
            return std::nullopt;
        };
        if (!grow(plen + 3 * cl)) return false;
        auto b = settle();
        if (!b) {
            if (!grow(plen + periods * cl)) return false;
            b = settle();
        }
        if (!b)
            throw Error(Errc::NotRepresentable,
                        "values inside a limit block did not settle into a period within the window");
        out.blocks.push_back(normalize_block(std::move(*b)));
        out.final.clear();
        in.blocks.push_back(normalize_block({in.final, cycle}));
        in.final.clear();
        q = query(tracked());
        next = {next.block + 1, 0};
        return true;
    }

    Family result() const {
        if (out.blocks.empty()) return Family::seq(out.final);
        return canonicalize(Family(out));
    }
};

std::size_t window_size(const Carrier& c) { return c.finite() ? c.size() : 6; }

Family run_stepper(Stepper::Kind kind, const System& s, const Family& f) {
    Transfinite t = ordinal_form(f);
    Stepper st(kind, s);
    auto fail = [&]() {
        throw Error(Errc::NotInDomain, "initial segment below index " + label_str(st.failed.label()) + " has no " +
                                           (kind == Stepper::Difference ? "limit" : "sum"),
                    json{{"index", st.failed.label()}});
    };
    for (auto& b : t.blocks) {
        for (Elem e : b.prefix)
            if (!st.push(e)) fail();
        if (!st.close(b.cycle, window_size(s.carrier()))) fail();
    }
    for (Elem e : t.final)
        if (!st.push(e)) fail();
    return st.result();
}

}  // namespace

Family difference_family(const System& s, const Family& f) {
    if (!s.carrier().has_group()) throw Error(Errc::MissingStructure, "limits need a group carrier");
    return run_stepper(Stepper::Difference, s, f);
}

Family partial_sum_family(const System& s, const Family& f) {
    if (!s.carrier().has_add()) throw Error(Errc::MissingStructure, "partial sums need an addition");
    return run_stepper(Stepper::PartialSum, s, f);
}

std::optional<Elem> sigma_limit(const System& s, const Family& f) {
    Family d;
    try {
        d = difference_family(s, f);
    } catch (const Error& e) {
        if (e.code() == Errc::NotInDomain) return std::nullopt;
        throw;
    }
    return s.query(d);
}

System induced_summation(const Topology& t, const Carrier& group) {
    if (!group.has_group()) throw Error(Errc::MissingStructure, "induced summation needs a group");
    if (!group.finite() || group.size() != t.size())
        throw Error(Errc::InvalidInput, "topology and group have different carriers");
    Elem zero = *group.zero();
    auto rule = [t, group, zero](const Family& f) -> std::optional<Elem> {
        if (f.is_multiset()) return std::nullopt;
        Transfinite tr = ordinal_form(f);
        Elem sum = zero;
        // The partial sum at each entry ends a successor segment; its limit set
        // is the closure of that point.
        auto step = [&](Elem x) {
            Elem p = group.add(sum, x);
            auto u = unique_point(limit_set_of_tail(bit(p), t));
            if (!u) return false;
            sum = *u;
            return true;
        };
        for (auto& b : tr.blocks) {
            for (Elem x : b.prefix)
                if (!step(x)) return std::nullopt;
            // Partial sums over the cycle repeat once the running sum returns to
            // where the cycle started.
            Mask tail = 0;
            Elem start = sum;
            do {
                for (Elem x : b.cycle) {
                    if (!step(x)) return std::nullopt;
                    tail |= bit(sum);
                }
            } while (sum != start);
            auto u = unique_point(limit_set_of_tail(tail, t));
            if (!u) return std::nullopt;
            sum = *u;
        }
        for (Elem x : tr.final)
            if (!step(x)) return std::nullopt;
        return sum;
    };
    Traits tr;
    tr.empty_sum = zero;
    tr.ordinal = true;
    return System::rule(group, rule, tr, "induced[" + t.str() + "]");
}

// ---------------------------------------------------------------- sigma topology

std::size_t SearchBounds::finite_for(std::size_t n) const {
    if (max_finite) return max_finite;
    return n <= 3 ? n + 2 : 4;
}

std::size_t SearchBounds::cycle_for(std::size_t n) const {
    if (max_cycle) return max_cycle;
    return n <= 3 ? n : 2;
}

json SearchBounds::to_json(std::size_t n) const {
    return json{{"max_finite", finite_for(n)}, {"max_cycle", cycle_for(n)}, {"max_blocks", max_blocks}};
}

namespace {

// Cycles that are not a power of a shorter word.
std::vector<std::vector<Elem>> primitive_cycles(const std::vector<Elem>& els, std::size_t max_len) {
    std::vector<std::vector<Elem>> out;
    std::vector<Elem> w;
    std::function<void(std::size_t)> rec = [&](std::size_t len) {
        if (w.size() == len) {
            for (std::size_t p = 1; p < len; ++p) {
                if (len % p) continue;
                bool periodic = true;
                for (std::size_t i = p; i < len && periodic; ++i) periodic = w[i] == w[i - p];
                if (periodic) return;
            }
            out.push_back(w);
            return;
        }
        for (Elem e : els) {
            w.push_back(e);
            rec(len);
            w.pop_back();
        }
    };
    for (std::size_t len = 1; len <= max_len; ++len) rec(len);
    return out;
}

}  // namespace

SigmaTopology sigma_topology_search(const System& s, const SearchBounds& b) {
    auto t0 = std::chrono::steady_clock::now();
    const Carrier& c = s.carrier();
    if (!c.has_group()) throw Error(Errc::MissingStructure, "the sigma topology needs a group carrier");
    std::size_t n = c.size();
    require_small(n);
    std::size_t max_finite = b.finite_for(n);
    std::size_t max_cycle = b.cycle_for(n);
    auto els = c.elements();
    auto cycles = primitive_cycles(els, max_cycle);
    std::set<TailConstraint> seen;
    SigmaTopology r;
    // Families without a limit have no extension with one, so the search
    // prunes there.
    std::function<void(const Stepper&, std::size_t, std::size_t)> dfs = [&](const Stepper& st, std::size_t used,
                                                                            std::size_t blocks) {
        if (!st.q) return;
        ++r.families;
        if (!st.in.final.empty() || !st.in.blocks.empty()) seen.insert({*st.q, tail_mask(Family(st.in))});
        if (used < max_finite)
            for (Elem x : els) {
                Stepper child = st;
                if (child.push(x)) dfs(child, used + 1, blocks);
            }
        if (blocks < b.max_blocks)
            for (auto& cy : cycles) {
                if (!st.in.final.empty() && st.in.final.back() == cy.back()) continue;
                Stepper child = st;
                if (child.close(cy, n)) dfs(child, used, blocks + 1);
            }
    };
    dfs(Stepper(Stepper::Difference, s), 0, 0);
    r.constraints.assign(seen.begin(), seen.end());
    r.topology = finest_topology_with_limits(n, r.constraints);
    r.bounds = b.to_json(n);
    r.bounds["families"] = r.families;
    r.bounds["constraints"] = r.constraints.size();
    r.bounds["millis"] = since(t0);
    return r;
}

Topology sigma_topology(const System& s, const SearchBounds& b) { return sigma_topology_search(s, b).topology; }

Topology phi(const Topology& t, const Carrier& group, const SearchBounds& b) {
    using Key = std::tuple<std::vector<Mask>, std::vector<std::vector<Elem>>, std::size_t, std::size_t, std::size_t>;
    static std::mutex mu;
    static std::map<Key, Topology> memo;
    Key k{t.opens(), group.add_table(), b.max_finite, b.max_cycle, b.max_blocks};
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = memo.find(k); it != memo.end()) return it->second;
    }
    Topology r = sigma_topology(induced_summation(t, group), b);
    std::lock_guard<std::mutex> lock(mu);
    memo.emplace(k, r);
    return r;
}

std::vector<Family> comparison_families(const Carrier& c, std::size_t max_finite) {
    std::vector<Family> out{Family::empty()};
    auto els = c.elements();
    std::vector<std::vector<Elem>> level{{}};
    for (std::size_t len = 1; len <= max_finite; ++len) {
        std::vector<std::vector<Elem>> nxt;
        for (auto& w : level)
            for (Elem e : els) {
                auto v = w;
                v.push_back(e);
                out.push_back(Family::seq(v));
                nxt.push_back(std::move(v));
            }
        level = std::move(nxt);
    }
    Bounds ob;
    ob.max_blocks = c.size() <= 3 ? 2 : 1;
    ob.max_prefix = 1;
    ob.max_cycle = 2;
    ob.max_final = 1;
    ob.max_ordinal_elements = c.size();
    for (auto& f : ordinal_universe(c, ob)) out.push_back(f);
    return out;
}

std::optional<Family> first_difference(const System& a, const System& b, const std::vector<Family>& fams) {
    for (auto& f : fams)
        if (a.query(f) != b.query(f)) return f;
    return std::nullopt;
}

FullSigma full_sigma_topology(const System& s, std::size_t max_finite) {
    const Carrier& c = s.carrier();
    if (!c.finite() || c.size() > 4) throw Error(Errc::CarrierTooLarge, "the full sigma topology needs at most 4 points");
    if (!c.has_group()) throw Error(Errc::MissingStructure, "the full sigma topology needs a group carrier");
    auto fams = comparison_families(c, max_finite ? max_finite : c.size() + 1);
    FullSigma r;
    for (auto& t : enumerate_topologies(c.size())) {
        ++r.candidates;
        if (!first_difference(induced_summation(t, c), s, fams)) r.inducing.push_back(t);
    }
    r.topology = join(c.size(), r.inducing);
    return r;
}

Coreflections coreflections(const Topology& t) {
    std::size_t n = t.size();
    std::vector<TailConstraint> seq, chain, net;
    for (Mask tail = 1; tail <= t.full(); ++tail)
        for (Elem x : members(limit_set_of_tail(tail, t))) {
            seq.push_back({x, tail});
            chain.push_back({x, tail});
        }
    // Successor-type chains end at their last point.
    for (std::size_t y = 0; y < n; ++y)
        for (Elem x : members(limit_set_of_tail(bit(Elem(y)), t))) chain.push_back({x, bit(Elem(y))});
    // The neighbourhood filter of x, as a net, converges to x.
    for (std::size_t x = 0; x < n; ++x) net.push_back({Elem(x), t.neighborhood(Elem(x))});
    Coreflections r;
    r.seq = finest_topology_with_limits(n, seq);
    r.chain = finest_topology_with_limits(n, chain);
    r.net_equals_tau = finest_topology_with_limits(n, net) == t;
    if (t.is_t1() && n > 0) {
        Topology p = phi(t, Carrier::cyclic(n));
        r.chain_phi_seq = r.chain.coarser_than(p) && p.coarser_than(r.seq);
    }
    return r;
}

Carrier transported_group(const Carrier& g, const std::vector<Elem>& perm) {
    std::size_t n = g.size();
    if (perm.size() != n) throw Error(Errc::InvalidInput, "permutation size differs from the group");
    std::vector<Elem> inv(n);
    for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = Elem(i);
    std::vector<std::vector<Elem>> add(n, std::vector<Elem>(n));
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) add[x][y] = inv[g.add(perm[x], perm[y])];
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back(std::to_string(i));
    return Carrier::group(names, add);
}

// ---------------------------------------------------------------- theorems

namespace {

struct TopoInfo {
    TopoTheoremId id;
    const char* slug;
};

const TopoInfo kTopo[] = {
    {TopoTheoremId::InducedEmptySum, "induced-empty-sum"},
    {TopoTheoremId::InducedOrdinalReindexing, "induced-ordinal-reindexing"},
    {TopoTheoremId::InducedInitialSummability, "induced-initial-summability"},
    {TopoTheoremId::InducedPostfix, "induced-postfix"},
    {TopoTheoremId::InducedLimitsAreTauLimits, "induced-limits-are-tau-limits"},
    {TopoTheoremId::InducedPostfixBiconditional, "induced-postfix-biconditional"},
    {TopoTheoremId::InducedZeroTails, "induced-zero-tails"},
    {TopoTheoremId::InducedCofinalSubsequences, "induced-cofinal-subsequences"},
    {TopoTheoremId::PhiGroupIndependent, "phi-group-independent"},
    {TopoTheoremId::PhiSystemInclusion, "phi-system-inclusion"},
    {TopoTheoremId::PhiT1, "phi-t1"},
    {TopoTheoremId::PhiExtensive, "phi-extensive"},
    {TopoTheoremId::PhiIdempotent, "phi-idempotent"},
    {TopoTheoremId::PhiClosureOperator, "phi-closure-operator"},
    {TopoTheoremId::SigmaTopologyReversal, "sigma-topology-reversal"},
    {TopoTheoremId::SuccessorLimits, "successor-limits"},
    {TopoTheoremId::CofinalSubsequenceLimits, "cofinal-subsequence-limits"},
    {TopoTheoremId::T1SigmaTopology, "t1-sigma-topology"},
};

std::vector<std::vector<bool>> nonempty_masks(std::size_t len) {
    std::vector<std::vector<bool>> out;
    for (std::size_t m = 1; m < (std::size_t(1) << len); ++m) {
        std::vector<bool> v(len);
        for (std::size_t i = 0; i < len; ++i) v[i] = (m >> i) & 1;
        out.push_back(v);
    }
    return out;
}

}  // namespace

std::string topo_theorem_slug(TopoTheoremId t) { return kTopo[int(t)].slug; }

std::optional<TopoTheoremId> topo_theorem_from_slug(const std::string& s) {
    for (auto& i : kTopo)
        if (s == i.slug) return i.id;
    return std::nullopt;
}

const std::vector<TopoTheoremId>& all_topo_theorems() {
    static const std::vector<TopoTheoremId> v = [] {
        std::vector<TopoTheoremId> r;
        for (auto& i : kTopo) r.push_back(i.id);
        return r;
    }();
    return v;
}

// Cofinal subfamilies: drop early entries, thin out the final cycle, or keep
// only the final cycle.
std::vector<Family> cofinal_subfamilies(const Family& f) {
    Transfinite t = ordinal_form(f);
    Family base = t.blocks.empty() ? Family::seq(t.final) : Family(t);
    std::vector<Family> out;
    std::vector<Label> early;
    if (!t.blocks.empty()) {
        for (std::uint32_t k = 0; k < 3; ++k) early.push_back(OrdinalIndex{0, k}.label());
    } else {
        for (std::uint32_t k = 0; k + 1 < t.final.size() && k < 3; ++k) early.push_back(OrdinalIndex{0, k}.label());
    }
    for (std::size_t m = 1; m < (std::size_t(1) << early.size()); ++m) {
        std::set<Label> drop;
        for (std::size_t i = 0; i < early.size(); ++i)
            if ((m >> i) & 1) drop.insert(early[i]);
        out.push_back(subfamily(base, Selector::drop(drop)));
    }
    if (!t.blocks.empty() && t.final.empty()) {
        std::uint32_t last = std::uint32_t(t.blocks.size() - 1);
        std::size_t cl = t.blocks.back().cycle.size();
        for (auto& mask : nonempty_masks(cl == 1 ? 2 : cl)) {
            out.push_back(subfamily(base, Selector::periodic(last, mask)));
            out.push_back(subfamily(base, Selector::cofinal(last, mask)));
        }
    }
    return out;
}

namespace {

Carrier scope_group(const TopoScope& sc) {
    Carrier g = sc.group.empty() ? Carrier::cyclic(sc.n) : Carrier::from_group_name(sc.group);
    if (g.size() != sc.n)
        throw Error(Errc::InvalidSpec, "group '" + sc.group + "' does not have " + std::to_string(sc.n) + " elements");
    return g;
}

Carrier other_group(const Carrier& g) {
    std::size_t n = g.size();
    if (n == 4) {
        // Different isomorphism type when available.
        bool cyclic = false;
        for (Elem e : g.elements()) cyclic = cyclic || g.order(e) == 4;
        return cyclic ? Carrier::from_group_name("klein") : Carrier::cyclic(4);
    }
    std::vector<Elem> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = Elem(i);
    if (n >= 2) std::swap(perm[0], perm[n - 1]);
    return transported_group(g, perm);
}

struct Run {
    TopoTheoremId id;
    const TopoScope& sc;
    Carrier g;
    std::vector<Topology> tops;
    std::vector<Family> fams;
    std::size_t instances = 0;
    std::size_t eligible = 0;
    json witness = nullptr;
    std::string note;
    std::vector<std::string> skipped;  // topologies whose induced system fails ordinal insertive associativity

    Run(TopoTheoremId i, const TopoScope& s) : id(i), sc(s), g(scope_group(s)) {
        tops = s.only ? *s.only : enumerate_topologies(s.n);
        for (auto& t : tops)
            if (t.size() != s.n) throw Error(Errc::InvalidSpec, "topology in scope has the wrong number of points");
        fams = comparison_families(g, s.max_finite ? s.max_finite : s.n + 1);
    }

    json fam(const Family& f) const { return family_to_json(f, g); }

    bool fail(const Topology& t, json detail) {
        witness = json{{"theorem", topo_theorem_slug(id)}, {"topology", t.to_json()}, {"detail", std::move(detail)}};
        return false;
    }

    std::optional<Elem> lim(const System& s, const Family& f) { return sigma_limit(s, f); }

    json opt(std::optional<Elem> e) const { return e ? json(g.name(*e)) : json(nullptr); }

    bool gapless_unique(const Topology& t) const {
        for (auto& f : fams) {
            Transfinite tr = ordinal_form(f);
            if (tr.blocks.empty() && tr.final.empty()) continue;
            if (is_gapless(f, t) && !unique_limits_everywhere(f, t, *g.zero())) return false;
        }
        return true;
    }

    bool zero_tails_ok(const System& s, const Topology& t, bool record) {
        Elem z = *g.zero();
        for (auto& f : fams) {
            auto v = s.query(f);
            if (!v) continue;
            Transfinite tr = ordinal_form(f);
            std::vector<Transfinite> ext;
            Transfinite a = tr;
            a.final.push_back(z);
            ext.push_back(a);
            a.final.push_back(z);
            ext.push_back(a);
            Transfinite b = tr;
            b.blocks.push_back({b.final, {z}});
            b.final.clear();
            ext.push_back(b);
            b.final.push_back(z);
            ext.push_back(b);
            for (auto& e : ext) {
                ++instances;
                Family ef = canonicalize(Family(e));
                auto w = s.query(ef);
                if (w != v) {
                    if (record) fail(t, json{{"family", fam(f)}, {"extended", fam(ef)}, {"sum", g.name(*v)}, {"extended_sum", opt(w)}});
                    return false;
                }
            }
        }
        return true;
    }

    bool subsequence_property(const System& s, const Topology& t, bool strong, bool record) {
        for (auto& f : fams) {
            auto L = lim(s, f);
            if (!L) continue;
            for (auto& sub : cofinal_subfamilies(f)) {
                ++instances;
                auto M = lim(s, sub);
                if (!M && !strong) continue;
                if (M != L) {
                    if (record) fail(t, json{{"family", fam(f)}, {"limit", g.name(*L)}, {"subfamily", fam(sub)}, {"sub_limit", opt(M)}});
                    return false;
                }
            }
        }
        return true;
    }

    bool axiom_holds(const System& s, AxiomId a, const Topology& t, bool record) {
        auto r = check_axiom(s, a, sc.families);
        instances += r.bounds.value("instances", std::size_t(0));
        if (!r.pass() && record) fail(t, json{{"axiom", axiom_slug(a)}, {"witness", r.witness}});
        return r.pass();
    }

    bool included(const System& small, const System& big, const Topology& t, bool record) {
        for (auto& f : fams) {
            ++instances;
            auto v = small.query(f);
            if (v && big.query(f) != v) {
                if (record) fail(t, json{{"family", fam(f)}, {"sum", g.name(*v)}, {"other", opt(big.query(f))}});
                return false;
            }
        }
        return true;
    }

    // One topology; false on a violation (witness recorded).
    bool one(const Topology& t) {
        Elem z = *g.zero();
        System s = induced_summation(t, g);
        switch (id) {
        case TopoTheoremId::InducedEmptySum: {
            ++eligible;
            ++instances;
            auto v = s.query(Family::empty());
            if (v != z) return fail(t, json{{"empty_sum", opt(v)}});
            return true;
        }
        case TopoTheoremId::InducedOrdinalReindexing:
            ++eligible;
            return axiom_holds(s, AxiomId::OrdinalReindexInvariance, t, true);
        case TopoTheoremId::InducedInitialSummability:
            ++eligible;
            return axiom_holds(s, AxiomId::InitialSummability, t, true);
        case TopoTheoremId::InducedPostfix:
            ++eligible;
            return axiom_holds(s, AxiomId::PostfixAssociativity, t, true);
        case TopoTheoremId::InducedLimitsAreTauLimits:
            ++eligible;
            for (auto& f : fams) {
                ++instances;
                auto a = lim(s, f);
                auto b = unique_limits_everywhere(f, t, z);
                if (a != b) return fail(t, json{{"family", fam(f)}, {"sigma_limit", opt(a)}, {"tau_limit", opt(b)}});
            }
            return true;
        case TopoTheoremId::InducedPostfixBiconditional: {
            if (!t.is_t1()) return true;
            ++eligible;
            for (auto& f : fams) {
                auto v = s.query(f);
                for (Elem x : g.elements()) {
                    ++instances;
                    Family e = append(Family(ordinal_form(f)), x);
                    auto w = s.query(e);
                    std::optional<Elem> want;
                    if (v) want = g.add(*v, x);
                    if (w != want)
                        return fail(t, json{{"family", fam(f)}, {"appended", g.name(x)}, {"sum", opt(v)}, {"extended_sum", opt(w)}});
                }
            }
            for (Elem x : g.elements()) {
                ++instances;
                if (s.query(Family::seq({x})) != x) return fail(t, json{{"singleton", g.name(x)}});
                for (Elem y : g.elements()) {
                    ++instances;
                    if (induced_addition(s, x, y) != g.add(x, y))
                        return fail(t, json{{"pair", {g.name(x), g.name(y)}}});
                }
            }
            for (auto& f : fams) {
                if (!f.is_explicit()) continue;
                ++instances;
                Elem acc = z;
                for (Elem x : f.finite_values()) acc = g.add(acc, x);
                if (s.query(f) != acc) return fail(t, json{{"family", fam(f)}, {"iterated", g.name(acc)}, {"sum", opt(s.query(f))}});
            }
            return true;
        }
        case TopoTheoremId::InducedZeroTails:
            if (!t.is_t1()) return true;
            ++eligible;
            return zero_tails_ok(s, t, true);
        case TopoTheoremId::InducedCofinalSubsequences: {
            ++eligible;
            bool strong = gapless_unique(t);
            if (strong) note = "gapless uniqueness held within bounds for every topology checked strongly";
            return subsequence_property(s, t, strong, true);
        }
        case TopoTheoremId::PhiGroupIndependent: {
            ++eligible;
            ++instances;
            Carrier h = other_group(g);
            Topology a = phi(t, g, sc.search), b = phi(t, h, sc.search);
            if (a != b) return fail(t, json{{"phi", a.to_json()}, {"phi_other_group", b.to_json()}});
            return true;
        }
        case TopoTheoremId::PhiSystemInclusion: {
            ++eligible;
            System big = induced_summation(phi(t, g, sc.search), g);
            return included(s, big, t, true);
        }
        case TopoTheoremId::PhiT1: {
            ++eligible;
            ++instances;
            Topology p = phi(t, g, sc.search);
            if (!p.is_t1()) return fail(t, json{{"phi", p.to_json()}});
            return true;
        }
        case TopoTheoremId::PhiExtensive: {
            ++eligible;
            ++instances;
            Topology p = phi(t, g, sc.search);
            if (!t.coarser_than(p)) return fail(t, json{{"phi", p.to_json()}});
            return true;
        }
        case TopoTheoremId::PhiIdempotent: {
            ++eligible;
            ++instances;
            Topology p = phi(t, g, sc.search);
            Topology pp = phi(p, g, sc.search);
            if (p != pp) return fail(t, json{{"phi", p.to_json()}, {"phi_phi", pp.to_json()}});
            return true;
        }
        case TopoTheoremId::PhiClosureOperator: {
            if (!gapless_unique(t)) return true;
            ++eligible;
            Topology p = phi(t, g, sc.search);
            if (!included(induced_summation(p, g), s, t, true)) return false;
            for (auto& u : tops) {
                if (!t.coarser_than(u) || !gapless_unique(u)) continue;
                ++instances;
                Topology q = phi(u, g, sc.search);
                if (!p.coarser_than(q))
                    return fail(t, json{{"finer", u.to_json()}, {"phi", p.to_json()}, {"phi_finer", q.to_json()}});
            }
            return true;
        }
        case TopoTheoremId::SigmaTopologyReversal: {
            ++eligible;
            Topology p = phi(t, g, sc.search);
            System big = induced_summation(p, g);
            // Both pairs below are inclusions of systems: induced by a
            // topology and by its image, and finite families only.
            if (!included(s, big, t, true)) return false;
            ++instances;
            // These two are phi of the topology and of its image.
            Topology ts = phi(t, g, sc.search), tb = phi(p, g, sc.search);
            if (!tb.coarser_than(ts)) return fail(t, json{{"small", ts.to_json()}, {"big", tb.to_json()}});
            System fin = System::rule(
                g, [s](const Family& f) -> std::optional<Elem> { return f.is_finite() ? s.query(f) : std::nullopt; },
                s.traits(), "finite part");
            ++instances;
            Topology tf = sigma_topology(fin, sc.search);
            if (!ts.coarser_than(tf)) return fail(t, json{{"finite_part", tf.to_json()}, {"system", ts.to_json()}});
            return true;
        }
        case TopoTheoremId::SuccessorLimits: {
            if (!axiom_holds(s, AxiomId::PostfixAssociativity, t, false)) return true;
            ++eligible;
            for (auto& f : fams) {
                if (!has_last_element(f)) continue;
                ++instances;
                auto L = lim(s, f);
                if (L && L != last_entry(f)) return fail(t, json{{"family", fam(f)}, {"limit", g.name(*L)}});
            }
            return true;
        }
        case TopoTheoremId::CofinalSubsequenceLimits: {
            if (!axiom_holds(s, AxiomId::PostfixAssociativity, t, false)) return true;
            if (!axiom_holds(s, AxiomId::OrdinalInsertiveAssociativity, t, false)) {
                skipped.push_back(t.str());
                return true;
            }
            ++eligible;
            return subsequence_property(s, t, true, true);
        }
        case TopoTheoremId::T1SigmaTopology: {
            if (!subsequence_property(s, t, true, false)) return true;
            if (!axiom_holds(s, AxiomId::SingletonsSumSimply, t, false)) return true;
            if (!zero_tails_ok(s, t, false)) return true;
            ++eligible;
            ++instances;
            Topology ts = sigma_topology(s, sc.search);
            if (!ts.is_t1()) return fail(t, json{{"sigma_topology", ts.to_json()}});
            return true;
        }
        }
        return true;
    }
};

}  // namespace

CheckReport check_topo_theorem(TopoTheoremId id, const TopoScope& scope) {
    auto t0 = std::chrono::steady_clock::now();
    Run run(id, scope);
    bool ok = true;
    for (auto& t : run.tops)
        if (!run.one(t)) {
            ok = false;
            break;
        }
    std::string slug = topo_theorem_slug(id);
    if (!run.skipped.empty())
        run.note = "ordinal insertive associativity fails within bounds for " + std::to_string(run.skipped.size()) +
                   " topologies, e.g. " + run.skipped.front();
    if (ok && run.eligible == 0)
        throw Error(Errc::HypothesisNotMet, slug + ": no topology in scope meets the hypotheses");
    json bounds{{"points", scope.n},
                {"topologies", run.tops.size()},
                {"eligible", run.eligible},
                {"instances", run.instances},
                {"families", run.fams.size()},
                {"search", scope.search.to_json(scope.n)}};
    CheckReport r = ok ? CheckReport::passed(slug, bounds, run.note) : CheckReport::failed(slug, run.witness, bounds, run.note);
    r.millis = since(t0);
    return r;
}

TrivialExample trivial_topology_example(std::size_t n) {
    Carrier g = Carrier::cyclic(n);
    System s = induced_summation(Topology::trivial(n), g);
    TrivialExample r;
    for (auto& f : comparison_families(g, n + 1))
        if (s.summable(f)) r.summable.push_back(f);
    r.sigma = sigma_topology(s);
    FullSigma full = full_sigma_topology(s);
    r.full = full.topology;
    r.topologies = full.candidates;
    r.inducing = full.inducing;
    return r;
}

}  // namespace sigma
