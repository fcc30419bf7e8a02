#include "sigma/uncond.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "sigma/modelfile.hpp"

namespace sigma {

namespace {

constexpr std::size_t kMaxElements = 12;

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Elem> members(Mask m) {
    std::vector<Elem> out;
    for (Elem i = 0; m; ++i, m >>= 1)
        if (m & 1) out.push_back(i);
    return out;
}

int count(Mask m) { return std::popcount(m); }

void require_group(const Carrier& c) {
    if (!c.finite() || !c.has_group()) throw Error(Errc::MissingStructure, "unconditional sums need a finite abelian group");
    if (c.size() > kMaxElements) throw Error(Errc::CarrierTooLarge, "set systems need at most 12 elements");
}

// Mask arithmetic in the group.
Mask shift(const Carrier& g, Mask m, Elem t) {
    Mask out = 0;
    for (Elem e : members(m)) out |= bit(g.add(e, t));
    return out;
}

Mask difference(const Carrier& g, Mask a, Mask b) {
    Mask out = 0;
    for (Elem x : members(a))
        for (Elem y : members(b)) out |= bit(g.sub(x, y));
    return out;
}

Mask minkowski(const Carrier& g, Mask a, Mask b) {
    Mask out = 0;
    for (Elem x : members(a))
        for (Elem y : members(b)) out |= bit(g.add(x, y));
    return out;
}

// {k g : lo <= k <= hi}
Mask multiples(const Carrier& g, Elem e, std::size_t lo, std::size_t hi) {
    Elem acc = *g.zero();
    for (std::size_t k = 0; k < lo; ++k) acc = g.add(acc, e);
    Mask out = 0;
    for (std::size_t k = lo; k <= hi; ++k) {
        out |= bit(acc);
        acc = g.add(acc, e);
    }
    return out;
}

Elem times(const Carrier& g, Elem e, Mult k) {
    Elem acc = *g.zero();
    for (Mult i = 0; i < k; ++i) acc = g.add(acc, e);
    return acc;
}

// Keep only masks with no proper subset in the list.
std::vector<Mask> minimal_masks(std::vector<Mask> ms) {
    std::sort(ms.begin(), ms.end(), [](Mask a, Mask b) { return count(a) < count(b) || (count(a) == count(b) && a < b); });
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    std::vector<Mask> out;
    for (Mask m : ms)
        if (std::none_of(out.begin(), out.end(), [&](Mask o) { return (o & ~m) == 0; })) out.push_back(m);
    return out;
}

// Per-entry ranges of the brute-force oracles.
struct EntryRange {
    Elem e;
    std::size_t lo, hi;  // range of the chosen F count
    std::size_t cap;     // largest count a superset or disjoint set may take
    bool infinite;
};

std::vector<EntryRange> ranges(const Multiset& m, std::size_t n) {
    std::vector<EntryRange> out;
    for (auto& [e, c] : m.counts) {
        if (c == 0) continue;
        if (c == kOmega) out.push_back({e, 0, n, 3 * n, true});
        else out.push_back({e, 0, c, c, false});
    }
    return out;
}

template <class Fn>
void each_choice(const std::vector<EntryRange>& rs, Fn fn) {
    std::vector<std::size_t> f(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) f[i] = rs[i].lo;
    while (true) {
        fn(f);
        std::size_t i = 0;
        while (i < rs.size() && f[i] == rs[i].hi) {
            f[i] = rs[i].lo;
            ++i;
        }
        if (i == rs.size()) return;
        ++f[i];
    }
}

// Sums of all finite F' with F <= F' <= I, one mask per F.
std::vector<Mask> superset_sums(const Multiset& m, const Carrier& g) {
    auto rs = ranges(m, g.size());
    std::vector<Mask> out;
    each_choice(rs, [&](const std::vector<std::size_t>& f) {
        Mask r = bit(*g.zero());
        for (std::size_t i = 0; i < rs.size(); ++i) {
            std::size_t hi = rs[i].infinite ? f[i] + 2 * g.size() : rs[i].cap;
            r = minkowski(g, r, multiples(g, rs[i].e, f[i], hi));
        }
        out.push_back(r);
    });
    return minimal_masks(std::move(out));
}

// Sums of all finite F' disjoint from F, one mask per F.
std::vector<Mask> disjoint_sums(const Multiset& m, const Carrier& g) {
    auto rs = ranges(m, g.size());
    std::vector<Mask> out;
    each_choice(rs, [&](const std::vector<std::size_t>& f) {
        Mask r = bit(*g.zero());
        for (std::size_t i = 0; i < rs.size(); ++i) {
            std::size_t hi = rs[i].infinite ? 2 * g.size() : rs[i].cap - f[i];
            r = minkowski(g, r, multiples(g, rs[i].e, 0, hi));
        }
        out.push_back(r);
    });
    return minimal_masks(std::move(out));
}

// Elements x with R - x inside S for some R.
Mask oracle_ok(const Carrier& g, const std::vector<Mask>& rs, Mask s) {
    Mask out = 0;
    for (Elem x : g.elements())
        for (Mask r : rs)
            if ((shift(g, r, g.neg(x)) & ~s) == 0) {
                out |= bit(x);
                break;
            }
    return out;
}

Multiset merge(const Multiset& a, const Multiset& b) {
    Multiset m = a;
    for (auto& [e, c] : b.counts) {
        auto& d = m.counts[e];
        d = (d == kOmega || c == kOmega) ? kOmega : d + c;
    }
    return m;
}

Multiset map_multiset(const Multiset& a, const std::function<Elem(Elem)>& fn) {
    Multiset m;
    for (auto& [e, c] : a.counts) m = merge(m, Multiset{{{fn(e), c}}});
    return m;
}

// Multisets with at most `support` distinct entries, counts 1..max_count or omega.
std::vector<Multiset> scope_families(const Carrier& g, std::size_t support, Mult max_count) {
    std::vector<Mult> counts;
    for (Mult c = 1; c <= max_count; ++c) counts.push_back(c);
    counts.push_back(kOmega);
    std::vector<Multiset> out;
    auto els = g.elements();
    std::function<void(std::size_t, Multiset&)> rec = [&](std::size_t from, Multiset& m) {
        out.push_back(m);
        if (m.counts.size() == support) return;
        for (std::size_t i = from; i < els.size(); ++i)
            for (Mult c : counts) {
                m.counts[els[i]] = c;
                rec(i + 1, m);
                m.counts.erase(els[i]);
            }
    };
    Multiset m;
    rec(0, m);
    return out;
}

// Sub-multisets: counts 0..c, and 0, 1, 2 or omega below omega.
std::vector<Multiset> sub_multisets(const Multiset& m) {
    std::vector<Multiset> out{Multiset{}};
    for (auto& [e, c] : m.counts) {
        std::vector<Mult> opts;
        if (c == kOmega) opts = {0, 1, 2, kOmega};
        else
            for (Mult k = 0; k <= c; ++k) opts.push_back(k);
        std::vector<Multiset> next;
        for (auto& s : out)
            for (Mult k : opts) {
                Multiset t = s;
                if (k) t.counts[e] = k;
                next.push_back(std::move(t));
            }
        out = std::move(next);
    }
    return out;
}

std::vector<std::string> set_texts(const SetSystem& a) {
    std::vector<std::string> out;
    for (Mask s : a.sets) out.push_back(a.carrier.mask_str(s));
    return out;
}

SetSystem set_system_from_json(const json& j, const Carrier& g) {
    std::vector<Mask> sets;
    for (auto& s : j) {
        auto p = parse_set_list(s.get<std::string>(), g);
        if (p.size() != 1) throw Error(Errc::ParseError, "bad set literal in witness");
        sets.push_back(p[0]);
    }
    return SetSystem::of(g, sets);
}

json base_witness(const std::string& check, const std::string& group, const SetSystem& a) {
    return json{{"check", check}, {"group", group}, {"A", set_texts(a)}};
}

std::size_t set_index_count(const Carrier& g) { return std::size_t(1) << g.size(); }

}  // namespace

// ---------------------------------------------------------------- set systems

SetSystem SetSystem::of(Carrier c, std::vector<Mask> sets) {
    require_group(c);
    Mask full = c.full_mask();
    for (Mask s : sets)
        if (s & ~full) throw Error(Errc::InvalidInput, "set has elements outside the carrier");
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    return SetSystem{std::move(c), std::move(sets)};
}

SetSystem SetSystem::parse(Carrier c, const std::string& text) {
    auto sets = parse_set_list(text, c);
    return of(std::move(c), sets);
}

SetSystem SetSystem::principal(Carrier c, Mask core) {
    require_group(c);
    std::vector<Mask> sets;
    Mask full = c.full_mask();
    Mask rest = full & ~core;
    // every subset of the complement, added to the core
    for (Mask s = rest;; s = (s - 1) & rest) {
        sets.push_back(core | s);
        if (s == 0) break;
    }
    return of(std::move(c), sets);
}

SetSystem SetSystem::power_set(Carrier c) { return principal(std::move(c), 0); }

Mask SetSystem::intersection() const {
    Mask k = carrier.full_mask();
    for (Mask s : sets) k &= s;
    return k;
}

bool SetSystem::has_zero_intersection() const { return intersection() == bit(*carrier.zero()); }

bool SetSystem::has_tu() const {
    std::vector<Mask> diffs;
    for (Mask t : sets)
        for (Mask u : sets) diffs.push_back(difference(carrier, t, u));
    for (Mask s : sets)
        if (std::none_of(diffs.begin(), diffs.end(), [&](Mask d) { return (d & ~s) == 0; })) return false;
    return true;
}

bool SetSystem::is_filter() const {
    if (sets.empty() || contains(0)) return false;
    Mask full = carrier.full_mask();
    for (Mask s : sets) {
        for (Mask t : sets)
            if (!contains(s & t)) return false;
        Mask rest = full & ~s;
        for (Mask e = rest; e; e = (e - 1) & rest)
            if (!contains(s | e)) return false;
    }
    return true;
}

bool SetSystem::contains(Mask s) const { return std::binary_search(sets.begin(), sets.end(), s); }

bool SetSystem::subset_of(const SetSystem& o) const {
    return std::all_of(sets.begin(), sets.end(), [&](Mask s) { return o.contains(s); });
}

std::string SetSystem::str() const { return write_set_list(sets, carrier); }

json SetSystem::to_json() const {
    return json{{"sets", set_texts(*this)},
                {"zero_intersection", has_zero_intersection()},
                {"tu", has_tu()},
                {"filter", is_filter()}};
}

std::vector<SetSystem> set_systems(const Carrier& c, std::size_t k) {
    require_group(c);
    std::vector<SetSystem> out;
    const Mask top = set_index_count(c);
    std::vector<Mask> cur;
    std::function<void(Mask)> rec = [&](Mask from) {
        out.push_back(SetSystem{c, cur});
        if (cur.size() == k) return;
        for (Mask s = from; s < top; ++s) {
            cur.push_back(s);
            rec(s + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

Mask generated_subgroup(const Carrier& g, Mask gens) {
    Mask h = bit(*g.zero());
    while (true) {
        Mask next = h | minkowski(g, h, gens);
        if (next == h) return h;
        h = next;
    }
}

std::vector<Mask> subgroups(const Carrier& g) {
    require_group(g);
    std::set<Mask> out;
    for (Mask s = 0; s < set_index_count(g); ++s) out.insert(generated_subgroup(g, s));
    return {out.begin(), out.end()};
}

UncondProfile uncond_profile(const Multiset& m, const Carrier& g) {
    require_group(g);
    UncondProfile p{*g.zero(), 0};
    Mask gens = 0;
    for (auto& [e, c] : m.counts) {
        if (!g.contains(e)) throw Error(Errc::InvalidInput, "entry outside the carrier");
        if (c == kOmega) gens |= bit(e);
        else p.finite_sum = g.add(p.finite_sum, times(g, e, c));
    }
    p.subgroup = generated_subgroup(g, gens);
    return p;
}

Mask unconditional_sums(const UncondProfile& p, const SetSystem& a) {
    const Carrier& g = a.carrier;
    Mask k = a.intersection();
    Mask out = 0;
    for (Elem x : g.elements())
        if ((shift(g, p.subgroup, g.sub(p.finite_sum, x)) & ~k) == 0) out |= bit(x);
    return out;
}

Mask unconditional_sums(const Multiset& m, const SetSystem& a) { return unconditional_sums(uncond_profile(m, a.carrier), a); }

Mask unconditional_sums_oracle(const Multiset& m, const SetSystem& a) {
    const Carrier& g = a.carrier;
    auto rs = superset_sums(m, g);
    Mask out = g.full_mask();
    for (Mask s : a.sets) out &= oracle_ok(g, rs, s);
    return out;
}

bool is_sum_cauchy(const Multiset& m, const SetSystem& a) {
    Mask h = uncond_profile(m, a.carrier).subgroup;
    return (h & ~a.intersection()) == 0;
}

bool is_sum_cauchy_oracle(const Multiset& m, const SetSystem& a) {
    auto ds = disjoint_sums(m, a.carrier);
    return std::all_of(a.sets.begin(), a.sets.end(), [&](Mask s) {
        return std::any_of(ds.begin(), ds.end(), [&](Mask d) { return (d & ~s) == 0; });
    });
}

System uncond_system(const SetSystem& a) {
    const Carrier g = a.carrier;
    auto rule = [a](const Family& f) -> std::optional<Elem> {
        Mask s = unconditional_sums(to_multiset(f), a);
        if (count(s) != 1) return std::nullopt;
        return Elem(std::countr_zero(s));
    };
    Traits t;
    t.reindex_invariant = true;
    Mask empty = unconditional_sums(Multiset{}, a);
    if (count(empty) == 1) t.empty_sum = Elem(std::countr_zero(empty));
    System s = System::rule(g, rule, t, "uncond");
    const Mask k = a.intersection();
    const Elem zero = *g.zero();
    auto add = [&](AxiomId x) { s.declared.insert(x); };
    for (AxiomId x : {AxiomId::ReindexInvariance, AxiomId::OrdinalReindexInvariance, AxiomId::PrefixAssociativity,
                      AxiomId::PostfixAssociativity, AxiomId::AdditiveExtensionClosure})
        add(x);
    // Zero entries add nothing; that is the empty-sum form unless the empty sum is a nonzero element.
    if (count(k) != 1 || k == bit(zero)) add(AxiomId::ZeroMeansNothing);
    if (count(k) == 1) {
        add(AxiomId::EmptyExists);
        add(AxiomId::FiniteTotality);
    }
    if (k == bit(zero)) add(AxiomId::SingletonsSumSimply);
    if (k == bit(zero) && a.has_tu()) {
        add(AxiomId::AdditionFunctoriality);
        add(AxiomId::NegationFunctoriality);
    }
    return s;
}

SetSystem sigma_filter(const System& s, const Bounds& b) {
    const Carrier& g = s.carrier();
    require_group(g);
    Mask core = 0;
    auto take = [&](const Multiset& m, Elem x) {
        UncondProfile p = uncond_profile(m, g);
        core |= shift(g, p.subgroup, g.sub(p.finite_sum, x));
    };
    if (s.is_table()) {
        for (auto& [f, x] : s.pairs()) take(to_multiset(f), x);
    } else if (s.traits().reindex_invariant) {
        auto els = g.elements();
        for (auto& m : scope_families(g, std::min<std::size_t>(b.max_size, els.size()), 2)) {
            if (m.counts.size() && std::prev(m.counts.end())->first >= Elem(b.max_elements)) continue;
            if (auto x = s.query(Family(m))) take(m, *x);
        }
    } else {
        throw Error(Errc::NotReindexInvariant, "the filter is read on multisets; declare reindexing invariance");
    }
    return SetSystem::principal(g, core);
}

SetSystem psi(const SetSystem& a) {
    const Carrier& g = a.carrier;
    Mask core = 0;
    for (Mask h : subgroups(g))
        for (Elem s : g.elements()) {
            Mask sums = unconditional_sums(UncondProfile{s, h}, a);
            if (count(sums) != 1) continue;
            core |= shift(g, h, g.sub(s, Elem(std::countr_zero(sums))));
        }
    return SetSystem::principal(g, core);
}

bool unique_sums(const SetSystem& a) {
    for (Mask h : subgroups(a.carrier))
        for (Elem s : a.carrier.elements())
            if (count(unconditional_sums(UncondProfile{s, h}, a)) > 1) return false;
    return true;
}

SetSystem deleted_neighborhoods_z8() {
    Carrier g = Carrier::cyclic(8);
    return SetSystem::parse(g, "{4}, {2,4,6}, {1,2,3,4,5,6,7}");
}

json multiset_to_json(const Multiset& m, const Carrier& c) {
    json j = json::object();
    for (auto& [e, n] : m.counts) {
        if (n == 0) continue;
        if (n == kOmega) j[c.name(e)] = "w";
        else j[c.name(e)] = n;
    }
    return j;
}

Multiset multiset_from_json(const json& j, const Carrier& c) {
    if (!j.is_object()) throw Error(Errc::ParseError, "multiset must be an object");
    Multiset m;
    for (auto& [k, v] : j.items()) {
        auto e = c.parse_elem(k);
        if (!e) throw Error(Errc::ParseError, "unknown element '" + k + "'");
        Mult n = 0;
        if (v.is_string() && v.get<std::string>() == "w") n = kOmega;
        else if (v.is_number_unsigned()) n = v.get<Mult>();
        else throw Error(Errc::ParseError, "count must be a natural number or \"w\"");
        if (n) m.counts[*e] = n;
    }
    return m;
}

// ---------------------------------------------------------------- checks

namespace {

const std::vector<std::pair<UncondPropId, const char*>> kSlugs = {
    {UncondPropId::ClosedForm, "uncond-closed-form"},
    {UncondPropId::SumCauchyClosedForm, "sum-cauchy-closed-form"},
    {UncondPropId::ZeroIntersectionTrio, "uncond-zero-intersection-trio"},
    {UncondPropId::TuUniqueness, "uncond-tu-uniqueness"},
    {UncondPropId::PartitionSums, "uncond-partition-sums"},
    {UncondPropId::SumCauchyNecessary, "sum-cauchy-necessary"},
    {UncondPropId::SumCauchySufficiency, "sum-cauchy-sufficiency"},
    {UncondPropId::PsiExtensiveIdempotent, "psi-extensive-idempotent"},
    {UncondPropId::PsiClosureOperator, "psi-closure-operator"},
    {UncondPropId::PsiGroupDependence, "psi-group-dependence"},
    {UncondPropId::SystemAxioms, "uncond-system-axioms"},
    {UncondPropId::DeletedNeighborhoods, "deleted-neighborhoods"},
    {UncondPropId::FilterContainsNeighborhoods, "filter-contains-neighborhoods"},
};

// Per-instance predicates shared by the checks and witness replay. Each
// returns a description of the violation, if any.

std::optional<json> closed_form_violation(const Multiset& m, const SetSystem& a) {
    Mask c = unconditional_sums(m, a), o = unconditional_sums_oracle(m, a);
    if (c == o) return std::nullopt;
    return json{{"closed_form", a.carrier.mask_str(c)}, {"oracle", a.carrier.mask_str(o)}};
}

std::optional<json> cauchy_form_violation(const Multiset& m, const SetSystem& a) {
    bool c = is_sum_cauchy(m, a), o = is_sum_cauchy_oracle(m, a);
    if (c == o) return std::nullopt;
    return json{{"closed_form", c}, {"oracle", o}};
}

std::optional<json> trio_violation(const SetSystem& a) {
    System s = uncond_system(a);
    const Carrier& g = a.carrier;
    bool zero = a.has_zero_intersection();
    bool empty = s.query(Family::empty()) == g.zero();
    bool singles = true;
    for (Elem x : g.elements())
        if (s.query(Family::seq({x})) != x) singles = false;
    if (zero == empty && empty == singles) return std::nullopt;
    return json{{"zero_intersection", zero}, {"empty_sum_zero", empty}, {"singletons_simple", singles}};
}

std::optional<json> uniqueness_violation(const Multiset& m, const SetSystem& a) {
    if (!a.has_tu() || !a.has_zero_intersection()) return std::nullopt;
    Mask s = unconditional_sums(m, a);
    if (count(s) <= 1) return std::nullopt;
    return json{{"sums", a.carrier.mask_str(s)}};
}

// Index-aligned pairs of families: entry (a_i, b_i) with a multiplicity.
using PairFamily = std::vector<std::tuple<Elem, Elem, Mult>>;

json pair_family_json(const PairFamily& p, const Carrier& g) {
    json j = json::array();
    for (auto& [x, y, c] : p) j.push_back(json{g.name(x), g.name(y), c == kOmega ? json("w") : json(c)});
    return j;
}

PairFamily pair_family_from_json(const json& j, const Carrier& g) {
    PairFamily p;
    for (auto& t : j) {
        auto x = g.parse_elem(t.at(0).get<std::string>()), y = g.parse_elem(t.at(1).get<std::string>());
        if (!x || !y) throw Error(Errc::ParseError, "unknown element in pair family");
        Mult c = t.at(2).is_string() ? kOmega : t.at(2).get<Mult>();
        p.emplace_back(*x, *y, c);
    }
    return p;
}

Multiset pair_map(const PairFamily& p, const std::function<Elem(Elem, Elem)>& fn) {
    Multiset m;
    for (auto& [x, y, c] : p) m = merge(m, Multiset{{{fn(x, y), c}}});
    return m;
}

std::optional<json> functoriality_violation(const PairFamily& p, const SetSystem& a) {
    if (!a.has_tu()) return std::nullopt;
    const Carrier& g = a.carrier;
    Mask sa = unconditional_sums(pair_map(p, [](Elem x, Elem) { return x; }), a);
    Mask sb = unconditional_sums(pair_map(p, [](Elem, Elem y) { return y; }), a);
    Mask sd = unconditional_sums(pair_map(p, [&](Elem x, Elem y) { return g.sub(x, y); }), a);
    Mask ss = unconditional_sums(pair_map(p, [&](Elem x, Elem y) { return g.add(x, y); }), a);
    Mask sn = unconditional_sums(pair_map(p, [&](Elem, Elem y) { return g.neg(y); }), a);
    for (Elem y : members(sb)) {
        if (!(sn & bit(g.neg(y)))) return json{{"reason", "negation"}, {"sum_b", g.name(y)}};
        for (Elem x : members(sa)) {
            if (!(sd & bit(g.sub(x, y)))) return json{{"reason", "subtraction"}, {"sum_a", g.name(x)}, {"sum_b", g.name(y)}};
            if (!(ss & bit(g.add(x, y)))) return json{{"reason", "addition"}, {"sum_a", g.name(x)}, {"sum_b", g.name(y)}};
        }
    }
    return std::nullopt;
}

std::optional<json> partition_violation(const Multiset& m, const std::vector<Multiset>& parts,
                                        const std::vector<Elem>& part_sums, Elem x, const SetSystem& a) {
    const Carrier& g = a.carrier;
    if (!a.has_tu() || !(unconditional_sums(m, a) & bit(x))) return std::nullopt;
    Multiset joined;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!(unconditional_sums(parts[i], a) & bit(part_sums[i]))) return std::nullopt;
        joined = merge(joined, parts[i]);
    }
    if (joined != m) return std::nullopt;
    Multiset outer;
    for (Elem s : part_sums) outer = merge(outer, Multiset{{{s, 1}}});
    if (unconditional_sums(outer, a) & bit(x)) return std::nullopt;
    return json{{"reason", "x is not a sum of the part sums"}, {"x", g.name(x)}};
}

std::optional<json> necessity_violation(const Multiset& m, const SetSystem& a) {
    if (!a.has_tu()) return std::nullopt;
    if (unconditional_sums(m, a) == 0 || is_sum_cauchy(m, a)) return std::nullopt;
    return json{{"reason", "summable but not sum-Cauchy"}};
}

// The doubled family merges m with a disjoint copy of -m and sums to 0.
Multiset doubled(const Multiset& m, const Carrier& g) { return merge(m, map_multiset(m, [&](Elem e) { return g.neg(e); })); }

std::optional<json> doubling_violation(const Multiset& m, const SetSystem& a) {
    if (!a.has_tu() || !is_sum_cauchy(m, a)) return std::nullopt;
    if (unconditional_sums(doubled(m, a.carrier), a) & bit(*a.carrier.zero())) return std::nullopt;
    return json{{"reason", "doubled family does not sum to 0"}};
}

// Families that settle one side of the sufficiency biconditional.
std::optional<json> cauchy_not_summable(const Multiset& m, const SetSystem& a) {
    if (is_sum_cauchy(m, a) && unconditional_sums(m, a) == 0) return json{{"reason", "sum-Cauchy but not summable"}};
    return std::nullopt;
}

std::optional<json> subfamily_not_summable(const Multiset& m, const Multiset& sub, const SetSystem& a) {
    if (unconditional_sums(m, a) == 0 || unconditional_sums(sub, a) != 0) return std::nullopt;
    for (auto& [e, c] : sub.counts) {
        auto it = m.counts.find(e);
        if (it == m.counts.end() || (it->second != kOmega && (c == kOmega || c > it->second))) return std::nullopt;
    }
    return json{{"reason", "subfamily of a summable family is not summable"}};
}

// Sigma_A on every (finite sum, subgroup) profile.
std::map<UncondProfile, Elem> profile_sums(const SetSystem& a) {
    std::map<UncondProfile, Elem> out;
    for (Mask h : subgroups(a.carrier))
        for (Elem s : a.carrier.elements()) {
            Mask sums = unconditional_sums(UncondProfile{s, h}, a);
            if (count(sums) == 1) out[{s, h}] = Elem(std::countr_zero(sums));
        }
    return out;
}

bool system_inside(const std::map<UncondProfile, Elem>& a, const std::map<UncondProfile, Elem>& b) {
    return std::all_of(a.begin(), a.end(), [&](auto& kv) {
        auto it = b.find(kv.first);
        return it != b.end() && it->second == kv.second;
    });
}

std::optional<json> psi_violation(const SetSystem& a) {
    SetSystem p = psi(a);
    if (!a.subset_of(p)) return json{{"reason", "not extensive"}, {"psi", p.str()}};
    SetSystem pp = psi(p);
    if (!(pp == p)) return json{{"reason", "not idempotent"}, {"psi", p.str()}, {"psi_psi", pp.str()}};
    if (!p.is_filter() && !(p == SetSystem::power_set(a.carrier))) return json{{"reason", "not a filter"}, {"psi", p.str()}};
    if (!system_inside(profile_sums(a), profile_sums(p))) return json{{"reason", "system not inside the system of psi"}};
    return std::nullopt;
}

std::optional<json> closure_violation(const SetSystem& a, const SetSystem& b) {
    if (!a.subset_of(b) || !unique_sums(a)) return std::nullopt;
    SetSystem pa = psi(a), pb = psi(b);
    if (!pa.subset_of(pb)) return json{{"reason", "not monotone"}, {"psi_a", pa.str()}, {"psi_b", pb.str()}};
    if (profile_sums(a) != profile_sums(pa)) return json{{"reason", "system of psi differs"}};
    return std::nullopt;
}

std::optional<json> biconditional_violation(const Multiset& m, Elem x, const SetSystem& a) {
    System s = uncond_system(a);
    auto before = s.query(Family(m));
    auto after = s.query(Family(merge(m, Multiset{{{x, 1}}})));
    const Carrier& g = a.carrier;
    if (bool(before) != bool(after))
        return json{{"reason", before ? "extension not summable" : "extension summable, family not"}};
    if (before && *after != g.add(*before, x)) return json{{"reason", "extension sum differs"}};
    return std::nullopt;
}

struct DeletedFacts {
    bool unique = false, zero_intersection = false, tu = false;
    CheckReport subfamilies;
};

DeletedFacts deleted_facts(const SetSystem& a) {
    DeletedFacts d;
    d.unique = unique_sums(a);
    d.zero_intersection = a.has_zero_intersection();
    d.tu = a.has_tu();
    Bounds b;
    b.max_size = 3;
    b.max_label = 3;
    d.subfamilies = check_axiom(uncond_system(a), AxiomId::SubsSummable, b);
    return d;
}

std::optional<json> deleted_violation(const SetSystem& a) {
    auto d = deleted_facts(a);
    if (d.unique && !d.zero_intersection && !d.tu) return std::nullopt;
    return json{{"unique", d.unique}, {"zero_intersection", d.zero_intersection}, {"tu", d.tu}};
}

std::optional<json> neighborhood_violation(const SetSystem& a, Mask open) {
    const Carrier& g = a.carrier;
    if (!(open & bit(*g.zero()))) return std::nullopt;
    if (psi(a).contains(open)) return std::nullopt;
    return json{{"reason", "open neighbourhood of 0 outside the filter"}, {"open", g.mask_str(open)}};
}

// ---------------------------------------------------------------- runs

struct Run {
    const UncondScope& scope;
    std::string slug;
    std::size_t instances = 0;
    std::size_t eligible = 0;
    std::optional<json> witness;
    std::string note;
    json extra = json::object();

    bool fail(json w, const json& v) {
        w["violation"] = v;
        witness = std::move(w);
        return false;
    }
};

bool run_closed_form(Run& r) {
    for (auto& name : r.scope.groups) {
        Carrier g = Carrier::from_group_name(name);
        auto fams = scope_families(g, r.scope.max_support, r.scope.max_count);
        const std::size_t nsets = set_index_count(g);
        // oracle verdict per family and single set, closed form per profile and intersection
        std::vector<std::vector<Mask>> ok(fams.size(), std::vector<Mask>(nsets));
        std::vector<UncondProfile> prof(fams.size());
        for (std::size_t i = 0; i < fams.size(); ++i) {
            auto rs = superset_sums(fams[i], g);
            for (Mask s = 0; s < nsets; ++s) ok[i][s] = oracle_ok(g, rs, s);
            prof[i] = uncond_profile(fams[i], g);
        }
        std::map<std::pair<UncondProfile, Mask>, Mask> closed;
        auto closed_of = [&](const UncondProfile& p, Mask k) {
            auto key = std::make_pair(p, k);
            auto it = closed.find(key);
            if (it != closed.end()) return it->second;
            SetSystem one{g, {k}};
            return closed[key] = unconditional_sums(p, one);
        };
        for (auto& a : set_systems(g, r.scope.max_sets)) {
            Mask k = a.intersection();
            for (std::size_t i = 0; i < fams.size(); ++i) {
                ++r.instances;
                Mask o = g.full_mask();
                for (Mask s : a.sets) o &= ok[i][s];
                if (o != closed_of(prof[i], k)) {
                    json w = base_witness(r.slug, name, a);
                    w["family"] = multiset_to_json(fams[i], g);
                    return r.fail(w, *closed_form_violation(fams[i], a));
                }
            }
        }
    }
    std::mt19937_64 rng(r.scope.seed);
    const std::vector<std::string> pool = {"z2", "z3", "z4", "z6", "klein", "z8", "z2xz4"};
    for (std::size_t c = 0; c < r.scope.random_cases; ++c) {
        const std::string& name = pool[rng() % pool.size()];
        Carrier g = Carrier::from_group_name(name);
        Multiset m;
        std::size_t support = 1 + rng() % std::min<std::size_t>(5, g.size());
        for (std::size_t i = 0; i < support; ++i) {
            Elem e = Elem(rng() % g.size());
            m.counts[e] = (rng() % 3 == 0) ? kOmega : Mult(1 + rng() % 5);
        }
        std::vector<Mask> sets;
        std::size_t ns = rng() % 5;
        for (std::size_t i = 0; i < ns; ++i) sets.push_back(rng() & g.full_mask());
        SetSystem a = SetSystem::of(g, sets);
        ++r.instances;
        if (auto v = closed_form_violation(m, a)) {
            json w = base_witness(r.slug, name, a);
            w["family"] = multiset_to_json(m, g);
            return r.fail(w, *v);
        }
    }
    r.eligible = r.instances;
    return true;
}

bool run_cauchy_form(Run& r) {
    for (auto& name : r.scope.groups) {
        Carrier g = Carrier::from_group_name(name);
        auto fams = scope_families(g, r.scope.max_support, r.scope.max_count);
        const std::size_t nsets = set_index_count(g);
        std::vector<std::vector<bool>> ok(fams.size(), std::vector<bool>(nsets));
        std::vector<Mask> sub(fams.size());
        for (std::size_t i = 0; i < fams.size(); ++i) {
            auto ds = disjoint_sums(fams[i], g);
            for (Mask s = 0; s < nsets; ++s)
                ok[i][s] = std::any_of(ds.begin(), ds.end(), [&](Mask d) { return (d & ~s) == 0; });
            sub[i] = uncond_profile(fams[i], g).subgroup;
        }
        for (auto& a : set_systems(g, r.scope.max_sets)) {
            Mask k = a.intersection();
            for (std::size_t i = 0; i < fams.size(); ++i) {
                ++r.instances;
                bool o = std::all_of(a.sets.begin(), a.sets.end(), [&](Mask s) { return bool(ok[i][s]); });
                if (o != ((sub[i] & ~k) == 0)) {
                    json w = base_witness(r.slug, name, a);
                    w["family"] = multiset_to_json(fams[i], g);
                    return r.fail(w, *cauchy_form_violation(fams[i], a));
                }
            }
        }
    }
    r.eligible = r.instances;
    return true;
}

bool run_trio(Run& r) {
    std::size_t holds = 0;
    for (auto& name : r.scope.groups) {
        Carrier g = Carrier::from_group_name(name);
        for (auto& a : set_systems(g, r.scope.max_sets)) {
            ++r.instances;
            if (auto v = trio_violation(a)) return r.fail(base_witness(r.slug, name, a), *v);
            if (a.has_zero_intersection()) ++holds;
        }
    }
    r.eligible = r.instances;
    r.extra["zero_intersection"] = holds;
    return true;
}

// The set systems of a group with the T-U property (and zero intersection when asked).
std::vector<SetSystem> tu_systems(const Carrier& g, std::size_t k, bool zero) {
    std::vector<SetSystem> out;
    for (auto& a : set_systems(g, k))
        if (a.has_tu() && (!zero || a.has_zero_intersection())) out.push_back(a);
    return out;
}

std::vector<PairFamily> pair_families(const Carrier& g) {
    std::vector<std::pair<Elem, Elem>> ps;
    for (Elem x : g.elements())
        for (Elem y : g.elements()) ps.emplace_back(x, y);
    std::vector<PairFamily> out{{}};
    const std::vector<Mult> counts = {1, kOmega};
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (Mult c : counts) {
            out.push_back({{ps[i].first, ps[i].second, c}});
            for (std::size_t j = i + 1; j < ps.size(); ++j)
                for (Mult d : counts) out.push_back({{ps[i].first, ps[i].second, c}, {ps[j].first, ps[j].second, d}});
        }
    return out;
}

bool run_tu_uniqueness(Run& r) {
    std::optional<json> sharp;
    for (auto& name : r.scope.groups) {
        Carrier g = Carrier::from_group_name(name);
        auto fams = scope_families(g, r.scope.max_support, r.scope.max_count);
        auto pfs = pair_families(g);
        for (auto& a : set_systems(g, r.scope.max_sets)) {
            bool tu = a.has_tu(), zero = a.has_zero_intersection();
            if (!tu) {
                if (!sharp)
                    for (auto& m : fams)
                        if (count(unconditional_sums(m, a)) > 1) {
                            sharp = base_witness(r.slug, name, a);
                            (*sharp)["family"] = multiset_to_json(m, g);
                            (*sharp)["sums"] = g.mask_str(unconditional_sums(m, a));
                            break;
                        }
                continue;
            }
            ++r.eligible;
            if (zero)
                for (auto& m : fams) {
                    ++r.instances;
                    if (auto v = uniqueness_violation(m, a)) {
                        json w = base_witness(r.slug, name, a);
                        w["family"] = multiset_to_json(m, g);
                        return r.fail(w, *v);
                    }
                }
            for (auto& p : pfs) {
                ++r.instances;
                if (auto v = functoriality_violation(p, a)) {
                    json w = base_witness(r.slug, name, a);
                    w["pairs"] = pair_family_json(p, g);
                    return r.fail(w, *v);
                }
            }
        }
    }
    if (sharp) {
        r.extra["without_tu"] = *sharp;
        r.note = "without the T-U condition sums need not be unique: " + sharp->at("A").dump() + " gives " +
                 sharp->at("family").dump() + " the sums " + sharp->at("sums").get<std::string>();
    }
    return true;
}

// Ways to split a multiset into `parts` nonempty pieces; omega counts split
// into pieces of 0, 1 or omega with at least one omega.
std::vector<std::vector<Multiset>> partitions(const Multiset& m, std::size_t parts) {
    std::vector<std::vector<Multiset>> out{std::vector<Multiset>(parts)};
    for (auto& [e, c] : m.counts) {
        std::vector<std::vector<Mult>> splits;
        std::vector<Mult> cur(parts);
        std::function<void(std::size_t, Mult)> rec = [&](std::size_t i, Mult left) {
            if (i + 1 == parts) {
                cur[i] = left;
                splits.push_back(cur);
                return;
            }
            for (Mult k = 0; k <= left; ++k) {
                cur[i] = k;
                rec(i + 1, left - k);
            }
        };
        if (c == kOmega) {
            std::vector<Mult> opts = {0, 1, kOmega};
            std::function<void(std::size_t)> rec2 = [&](std::size_t i) {
                if (i == parts) {
                    if (std::count(cur.begin(), cur.end(), kOmega)) splits.push_back(cur);
                    return;
                }
                for (Mult k : opts) {
                    cur[i] = k;
                    rec2(i + 1);
                }
            };
            rec2(0);
        } else {
            rec(0, c);
        }
        std::vector<std::vector<Multiset>> next;
        for (auto& p : out)
            for (auto& s : splits) {
                auto q = p;
                for (std::size_t i = 0; i < parts; ++i)
                    if (s[i]) q[i].counts[e] = s[i];
                next.push_back(std::move(q));
            }
        out = std::move(next);
    }
    std::vector<std::vector<Multiset>> kept;
    for (auto& p : out)
        if (std::none_of(p.begin(), p.end(), [](const Multiset& q) { return q.counts.empty(); })) kept.push_back(std::move(p));
    return kept;
}

bool run_partition(Run& r) {
    for (auto& name : r.scope.groups) {
        Carrier g = Carrier::from_group_name(name);
        auto fams = scope_families(g, std::min<std::size_t>(2, r.scope.max_support), std::min<Mult>(2, r.scope.max_count));
        for (auto& a : tu_systems(g, r.scope.max_sets, false)) {
            ++r.eligible;
            const Mask k = a.intersection();
            for (auto& m : fams) {
                Mask xs = unconditional_sums(m, a);
                if (!xs) continue;
                for (std::size_t parts : {2, 3})
                    for (auto& p : partitions(m, parts)) {
                        std::vector<Mask> ps;
                        for (auto& q : p) ps.push_back(unconditional_sums(q, a));
                        if (std::any_of(ps.begin(), ps.end(), [](Mask s) { return s == 0; })) continue;
                        // every choice of part sums
                        std::vector<Elem> choice(parts);
                        std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
                            if (i == parts) {
                                Elem total = *g.zero();
                                for (Elem c : choice) total = g.add(total, c);
                                for (Elem x : members(xs)) {
                                    ++r.instances;
                                    if (k & bit(g.sub(total, x))) continue;
                                    if (auto v = partition_violation(m, p, choice, x, a)) {
                                        json w = base_witness(r.slug, name, a);
                                        w["family"] = multiset_to_json(m, g);
                                        json parts_j = json::array(), sums_j = json::array();
                                        for (std::size_t k = 0; k < parts; ++k) {
                                            parts_j.push_back(multiset_to_json(p[k], g));
                                            sums_j.push_back(g.name(choice[k]));
                                        }
                                        w["parts"] = parts_j;
                                        w["part_sums"] = sums_j;
                                        w["x"] = g.name(x);
                                        return r.fail(w, *v);
                                    }
                                }
                                return true;
                            }
                            for (Elem s : members(ps[i])) {
                                choice[i] = s;
                                if (!rec(i + 1)) return false;
                            }
                            return true;
                        };
                        if (!rec(0)) return false;
                    }
            }
        }
    }
    return true;
}

bool run_necessity(Run& r) {
    std::optional<json> sharp;
    for (auto& name : r.scope.groups) {
        Carrier g = Carrier::from_group_name(name);
        auto fams = scope_families(g, r.scope.max_support, r.scope.max_count);
        for (auto& a : set_systems(g, r.scope.max_sets)) {
            if (!a.has_tu()) {
                if (!sharp)
                    for (auto& m : fams)
                        if (unconditional_sums(m, a) && !is_sum_cauchy(m, a)) {
                            sharp = base_witness(r.slug, name, a);
                            (*sharp)["family"] = multiset_to_json(m, g);
                            break;
                        }
                continue;
            }
            ++r.eligible;
            for (auto& m : fams) {
                ++r.instances;
                if (auto v = necessity_violation(m, a)) {
                    json w = base_witness(r.slug, name, a);
                    w["family"] = multiset_to_json(m, g);
                    return r.fail(w, *v);
                }
            }
        }
    }
    if (sharp) {
        r.extra["without_tu"] = *sharp;
        r.note = "without the T-U condition a summable family need not be sum-Cauchy: " + sharp->at("A").dump() +
                 " with " + sharp->at("family").dump();
    }
    return true;
}

bool run_sufficiency(Run& r) {
    std::size_t both_hold = 0, both_fail = 0, doublings = 0;
    for (auto& name : r.scope.groups) {
        Carrier g = Carrier::from_group_name(name);
        auto fams = scope_families(g, r.scope.max_support, std::min<Mult>(2, r.scope.max_count));
        for (auto& a : tu_systems(g, r.scope.max_sets, false)) {
            ++r.eligible;
            std::optional<json> not_p, not_q;
            for (auto& m : fams) {
                ++r.instances;
                if (!not_p)
                    if (auto v = cauchy_not_summable(m, a)) {
                        not_p = base_witness(r.slug, name, a);
                        (*not_p)["kind"] = "cauchy-not-summable";
                        (*not_p)["family"] = multiset_to_json(m, g);
                    }
                if (!not_q && unconditional_sums(m, a))
                    for (auto& s : sub_multisets(m))
                        if (auto v = subfamily_not_summable(m, s, a)) {
                            not_q = base_witness(r.slug, name, a);
                            (*not_q)["kind"] = "subfamily-not-summable";
                            (*not_q)["family"] = multiset_to_json(m, g);
                            (*not_q)["subfamily"] = multiset_to_json(s, g);
                            break;
                        }
                if (is_sum_cauchy(m, a)) {
                    ++doublings;
                    if (auto v = doubling_violation(m, a)) {
                        json w = base_witness(r.slug, name, a);
                        w["kind"] = "doubling";
                        w["family"] = multiset_to_json(m, g);
                        return r.fail(w, *v);
                    }
                }
            }
            // sufficiency holds iff subfamilies stay summable
            if (bool(not_p) != bool(not_q)) {
                json w = not_p ? *not_p : *not_q;
                return r.fail(w, json{{"reason", not_p ? "sum-Cauchy is not sufficient, yet subfamilies stay summable"
                                                       : "subfamilies lose summability, yet sum-Cauchy is sufficient"}});
            }
            if (not_p) ++both_fail;
            else ++both_hold;
        }
    }
    r.extra["both_hold"] = both_hold;
    r.extra["both_fail"] = both_fail;
    r.extra["doublings"] = doublings;
    if (both_fail == 0)
        r.note = "over finite groups every sum-Cauchy family is summable, so only the case where both sides hold occurs";
    return true;
}

bool run_psi(Run& r, const std::vector<std::string>& groups) {
    for (auto& name : groups) {
        Carrier g = Carrier::from_group_name(name);
        for (auto& a : set_systems(g, r.scope.max_sets)) {
            ++r.instances;
            if (auto v = psi_violation(a)) return r.fail(base_witness(r.slug, name, a), *v);
        }
    }
    r.eligible = r.instances;
    return true;
}

bool run_closure(Run& r, const std::vector<std::string>& groups) {
    for (auto& name : groups) {
        Carrier g = Carrier::from_group_name(name);
        auto all = set_systems(g, r.scope.max_sets);
        for (auto& a : all) {
            if (!unique_sums(a)) continue;
            ++r.eligible;
            for (auto& b : all) {
                if (!a.subset_of(b)) continue;
                ++r.instances;
                if (auto v = closure_violation(a, b)) {
                    json w = base_witness(r.slug, name, a);
                    w["B"] = set_texts(b);
                    return r.fail(w, *v);
                }
            }
        }
    }
    return true;
}

bool run_group_dependence(Run& r) {
    std::size_t structures = 0, differing = 0;
    std::optional<json> found;
    for (std::size_t n : {2, 3, 4}) {
        std::vector<Carrier> bases;
        if (n == 4) bases = {Carrier::cyclic(4), Carrier::product({2, 2})};
        else bases = {Carrier::cyclic(n)};
        std::set<std::vector<std::vector<Elem>>> seen;
        std::vector<Carrier> gs;
        for (auto& base : bases) {
            std::vector<Elem> perm(n);
            for (std::size_t i = 0; i < n; ++i) perm[i] = Elem(i);
            do {
                Carrier t = transported_group(base, perm);
                if (seen.insert(t.add_table()).second) gs.push_back(t);
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
        structures += gs.size();
        for (auto& a : set_systems(gs[0], r.scope.max_sets)) {
            ++r.eligible;
            SetSystem first = psi(SetSystem{gs[0], a.sets});
            for (std::size_t i = 1; i < gs.size(); ++i) {
                ++r.instances;
                SetSystem other = psi(SetSystem{gs[i], a.sets});
                if (!(other.sets == first.sets)) {
                    ++differing;
                    if (!found) found = json{{"points", n}, {"A", set_texts(a)}, {"structure", i}};
                }
            }
        }
    }
    r.extra["group_structures"] = structures;
    r.extra["differing"] = differing;
    if (found) {
        r.extra["example"] = *found;
        r.note = "psi depends on the group structure, e.g. " + found->dump();
    } else {
        r.note = "no finite dependence found: over a finite group psi(A) is the filter of supersets of the single point "
                 "of the intersection of A when there is one, and every set otherwise";
    }
    return true;
}

bool run_system_axioms(Run& r) {
    Bounds b;
    b.max_size = 2;
    b.max_label = 3;
    b.max_cycle = 1;
    for (auto& name : r.scope.groups) {
        Carrier g = Carrier::from_group_name(name);
        if (g.size() > 3) continue;
        auto fams = scope_families(g, 2, 2);
        for (auto& a : set_systems(g, 1)) {
            ++r.eligible;
            System s = uncond_system(a);
            for (AxiomId ax : s.declared) {
                ++r.instances;
                CheckReport c = check_axiom(s, ax, b);
                if (!c.pass()) {
                    json w = base_witness(r.slug, name, a);
                    w["axiom"] = c.witness;
                    return r.fail(w, json{{"reason", "declared axiom fails"}, {"axiom", axiom_slug(ax)}});
                }
            }
            for (auto& m : fams)
                for (Elem x : g.elements()) {
                    ++r.instances;
                    if (auto v = biconditional_violation(m, x, a)) {
                        json w = base_witness(r.slug, name, a);
                        w["family"] = multiset_to_json(m, g);
                        w["x"] = g.name(x);
                        return r.fail(w, *v);
                    }
                }
        }
    }
    if (!r.eligible) throw Error(Errc::HypothesisNotMet, r.slug + ": needs a group of order at most 3 in scope");
    return true;
}

bool run_deleted(Run& r) {
    SetSystem a = deleted_neighborhoods_z8();
    ++r.instances;
    ++r.eligible;
    auto d = deleted_facts(a);
    r.extra["subfamilies_summable"] = d.subfamilies.pass();
    r.note = d.subfamilies.pass()
                 ? "sums are unique although neither uniqueness hypothesis holds; subfamilies stay summable here, "
                   "since over a finite group summable families are exactly those with finitely many nonzero entries"
                 : "sums are unique although neither uniqueness hypothesis holds; subfamilies can lose summability";
    if (auto v = deleted_violation(a)) return r.fail(base_witness(r.slug, "z8", a), *v);
    return true;
}

bool run_filter_neighborhoods(Run& r) {
    Bounds b;
    b.max_size = 3;
    b.max_label = 3;
    for (auto& name : r.scope.groups) {
        Carrier g = Carrier::from_group_name(name);
        if (g.size() > 3) continue;
        for (auto& a : set_systems(g, 1)) {
            if (!a.has_zero_intersection()) continue;
            System s = uncond_system(a);
            if (!check_axiom(s, AxiomId::InsertiveAssociativity, b).pass()) continue;
            ++r.eligible;
            Topology t = sigma_topology(s);
            for (Mask u : t.opens()) {
                ++r.instances;
                if (auto v = neighborhood_violation(a, u)) {
                    json w = base_witness(r.slug, name, a);
                    w["open"] = g.mask_str(u);
                    return r.fail(w, *v);
                }
            }
        }
    }
    if (!r.eligible) throw Error(Errc::HypothesisNotMet, r.slug + ": no set system in scope meets the hypotheses");
    return true;
}

}  // namespace

std::string uncond_prop_slug(UncondPropId p) {
    for (auto& [id, s] : kSlugs)
        if (id == p) return s;
    return "unknown";
}

std::optional<UncondPropId> uncond_prop_from_slug(const std::string& s) {
    for (auto& [id, slug] : kSlugs)
        if (s == slug) return id;
    return std::nullopt;
}

const std::vector<UncondPropId>& all_uncond_props() {
    static const std::vector<UncondPropId> all = [] {
        std::vector<UncondPropId> v;
        for (auto& [id, s] : kSlugs) v.push_back(id);
        return v;
    }();
    return all;
}

json UncondScope::to_json() const {
    return json{{"groups", groups},         {"max_sets", max_sets}, {"max_support", max_support},
                {"max_count", max_count},   {"random_cases", random_cases}, {"seed", seed}};
}

CheckReport check_uncond_prop(UncondPropId id, const UncondScope& scope) {
    auto t0 = std::chrono::steady_clock::now();
    Run r{scope, uncond_prop_slug(id), 0, 0, std::nullopt, {}, json::object()};
    std::vector<std::string> small;
    for (auto& n : scope.groups)
        if (Carrier::from_group_name(n).size() <= 4) small.push_back(n);
    if (std::find(small.begin(), small.end(), "klein") == small.end()) small.push_back("klein");
    bool ok = true;
    switch (id) {
    case UncondPropId::ClosedForm: ok = run_closed_form(r); break;
    case UncondPropId::SumCauchyClosedForm: ok = run_cauchy_form(r); break;
    case UncondPropId::ZeroIntersectionTrio: ok = run_trio(r); break;
    case UncondPropId::TuUniqueness: ok = run_tu_uniqueness(r); break;
    case UncondPropId::PartitionSums: ok = run_partition(r); break;
    case UncondPropId::SumCauchyNecessary: ok = run_necessity(r); break;
    case UncondPropId::SumCauchySufficiency: ok = run_sufficiency(r); break;
    case UncondPropId::PsiExtensiveIdempotent: ok = run_psi(r, small); break;
    case UncondPropId::PsiClosureOperator: ok = run_closure(r, small); break;
    case UncondPropId::PsiGroupDependence: ok = run_group_dependence(r); break;
    case UncondPropId::SystemAxioms: ok = run_system_axioms(r); break;
    case UncondPropId::DeletedNeighborhoods: ok = run_deleted(r); break;
    case UncondPropId::FilterContainsNeighborhoods: ok = run_filter_neighborhoods(r); break;
    }
    if (ok && r.eligible == 0) throw Error(Errc::HypothesisNotMet, r.slug + ": nothing in scope meets the hypotheses");
    json bounds = scope.to_json();
    bounds["instances"] = r.instances;
    bounds["eligible"] = r.eligible;
    for (auto& [k, v] : r.extra.items()) bounds[k] = v;
    CheckReport rep = ok ? CheckReport::passed(r.slug, bounds, r.note) : CheckReport::failed(r.slug, *r.witness, bounds, r.note);
    rep.millis = since(t0);
    return rep;
}

bool uncond_witness_refails(const json& w) {
    auto id = uncond_prop_from_slug(w.at("check").get<std::string>());
    if (!id) throw Error(Errc::ParseError, "unknown check in witness");
    Carrier g = Carrier::from_group_name(w.at("group").get<std::string>());
    SetSystem a = set_system_from_json(w.at("A"), g);
    auto fam = [&](const char* key) { return multiset_from_json(w.at(key), g); };
    auto elem = [&](const json& j) {
        auto e = g.parse_elem(j.get<std::string>());
        if (!e) throw Error(Errc::ParseError, "unknown element in witness");
        return *e;
    };
    switch (*id) {
    case UncondPropId::ClosedForm: return bool(closed_form_violation(fam("family"), a));
    case UncondPropId::SumCauchyClosedForm: return bool(cauchy_form_violation(fam("family"), a));
    case UncondPropId::ZeroIntersectionTrio: return bool(trio_violation(a));
    case UncondPropId::TuUniqueness:
        if (w.contains("pairs")) return bool(functoriality_violation(pair_family_from_json(w.at("pairs"), g), a));
        return bool(uniqueness_violation(fam("family"), a));
    case UncondPropId::PartitionSums: {
        std::vector<Multiset> parts;
        std::vector<Elem> sums;
        for (auto& p : w.at("parts")) parts.push_back(multiset_from_json(p, g));
        for (auto& s : w.at("part_sums")) sums.push_back(elem(s));
        return bool(partition_violation(fam("family"), parts, sums, elem(w.at("x")), a));
    }
    case UncondPropId::SumCauchyNecessary: return bool(necessity_violation(fam("family"), a));
    case UncondPropId::SumCauchySufficiency: {
        std::string kind = w.at("kind").get<std::string>();
        if (kind == "doubling") return bool(doubling_violation(fam("family"), a));
        if (kind == "cauchy-not-summable") return bool(cauchy_not_summable(fam("family"), a));
        return bool(subfamily_not_summable(fam("family"), fam("subfamily"), a));
    }
    case UncondPropId::PsiExtensiveIdempotent: return bool(psi_violation(a));
    case UncondPropId::PsiClosureOperator: return bool(closure_violation(a, set_system_from_json(w.at("B"), g)));
    case UncondPropId::PsiGroupDependence: return false;
    case UncondPropId::SystemAxioms:
        if (w.contains("axiom")) return witness_refails(uncond_system(a), w.at("axiom"));
        return bool(biconditional_violation(fam("family"), elem(w.at("x")), a));
    case UncondPropId::DeletedNeighborhoods: return bool(deleted_violation(a));
    case UncondPropId::FilterContainsNeighborhoods: {
        auto u = parse_set_list(w.at("open").get<std::string>(), g);
        return u.size() == 1 && bool(neighborhood_violation(a, u[0]));
    }
    }
    return false;
}

}  // namespace sigma
