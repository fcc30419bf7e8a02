#include <algorithm>
#include <chrono>
#include <map>

#include "sigma/axioms.hpp"

namespace sigma {

namespace {

std::vector<Elem> bounded_elements(const Carrier& c, const Bounds& b) {
    auto all = c.elements();
    return {all.begin(), all.begin() + std::min(all.size(), b.max_elements)};
}

Family constant_omega(Elem x) { return Family::omega({}, {x}); }

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

[[noreturn]] void unmet(const std::string& what, json detail = nullptr) {
    throw Error(Errc::HypothesisNotMet, what, std::move(detail));
}

void require_add(const Carrier& c) {
    if (!c.has_add()) unmet("the carrier has no addition");
}

std::optional<json> shift_equality_failure(const System& s, const std::vector<Elem>& els) {
    const Carrier& c = s.carrier();
    for (Elem a : els)
        for (Elem b : els) {
            auto l = s.query(constant_omega(c.add(a, b)));
            auto r = s.query(constant_omega(c.add(b, a)));
            if (!l || !r) continue;
            if (*l != c.add(a, *r))
                return json{{"a", c.name(a)}, {"b", c.name(b)}, {"lhs", c.name(*l)}, {"rhs", c.name(c.add(a, *r))}};
        }
    return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------- theorems

namespace {
const std::pair<TheoremId, const char*> kTheorems[] = {
    {TheoremId::WeakSwindle, "weak-swindle"},
    {TheoremId::Absorption, "absorption"},
    {TheoremId::Swindle, "swindle"},
    {TheoremId::ShiftEquality, "shift-equality"},
};
}  // namespace

std::string theorem_slug(TheoremId t) {
    for (auto& [id, s] : kTheorems)
        if (id == t) return s;
    return "?";
}

std::optional<TheoremId> theorem_from_slug(const std::string& s) {
    for (auto& [id, n] : kTheorems)
        if (s == n) return id;
    return std::nullopt;
}

const std::vector<TheoremId>& all_theorems() {
    static const std::vector<TheoremId> v = {TheoremId::WeakSwindle, TheoremId::Absorption, TheoremId::Swindle,
                                             TheoremId::ShiftEquality};
    return v;
}

std::optional<Elem> absorbing_element(const System& s, const std::vector<Elem>& xs) {
    if (xs.empty()) return std::nullopt;
    return s.query(Family::omega({}, xs));
}

std::vector<Elem> invertible_elements(const Carrier& c) {
    std::vector<Elem> out;
    if (!c.has_add() || !c.zero()) return out;
    auto els = c.elements();
    for (Elem a : els)
        for (Elem b : els)
            if (c.add(a, b) == *c.zero() && c.add(b, a) == *c.zero()) {
                out.push_back(a);
                break;
            }
    return out;
}

CheckReport check_theorem(const System& s, TheoremId t, const Bounds& b) {
    auto t0 = std::chrono::steady_clock::now();
    const Carrier& c = s.carrier();
    const auto els = bounded_elements(c, b);
    const std::string id = theorem_slug(t);
    json bj = b.to_json();
    bj["elements"] = els.size();
    require_add(c);
    auto finish = [&](CheckReport r) {
        r.millis = since(t0);
        return r;
    };

    switch (t) {
    case TheoremId::WeakSwindle: {
        for (Elem x : els)
            for (Elem y : els)
                for (Elem z : els)
                    if (c.add(c.add(x, y), z) != c.add(x, c.add(y, z)))
                        unmet("addition is not associative", {{"x", c.name(x)}, {"y", c.name(y)}, {"z", c.name(z)}});
        for (Elem x : els)
            for (Elem y : els)
                for (Elem z : els)
                    if (x != y && c.add(x, z) == c.add(y, z))
                        unmet("addition is not right cancellative", {{"x", c.name(x)}, {"y", c.name(y)}, {"z", c.name(z)}});
        for (Elem x : els) {
            auto sx = s.query(constant_omega(x));
            if (sx && c.add(x, *sx) != *sx)
                unmet("prefix associativity fails on a constant family", {{"entry", c.name(x)}, {"sum", c.name(*sx)}});
        }
        std::optional<Elem> left_identity;
        for (Elem e : els) {
            bool ok = true;
            for (Elem y : els) ok = ok && c.add(e, y) == y;
            if (ok) { left_identity = e; break; }
        }
        std::vector<std::string> summable;
        for (Elem x : els) {
            if (!s.query(constant_omega(x))) continue;
            summable.push_back(c.name(x));
            if (c.add(x, x) != x)
                return finish(CheckReport::failed(id, {{"entry", c.name(x)}, {"reason", "a + a != a"}}, bj));
            if (left_identity && x != *left_identity)
                return finish(CheckReport::failed(id, {{"entry", c.name(x)}, {"reason", "summable constant is not the identity"}}, bj));
        }
        std::string note = "omega-summable constants:";
        for (auto& n : summable) note += " " + n;
        return finish(CheckReport::passed(id, bj, note));
    }
    case TheoremId::Absorption: {
        Bounds perm = b;
        perm.permutations_only = true;
        auto r1 = check_axiom(s, AxiomId::ReindexInvariance, perm);
        if (!r1.pass()) unmet("reindexing invariance for permutations fails", r1.witness);
        auto r7 = check_axiom(s, AxiomId::PrefixAssociativity, b);
        if (!r7.pass()) unmet("prefix associativity fails", r7.witness);
        for (auto& f : ordinal_universe(c, b))
            if (order_type(f) == std::pair<std::size_t, std::size_t>{1, 0} && !s.summable(f))
                unmet("omega-totality fails", {{"family", f.str(&c)}});
        std::string note;
        std::vector<Elem> xs;
        std::function<std::optional<json>(std::size_t)> rec = [&](std::size_t left) -> std::optional<json> {
            if (!xs.empty()) {
                auto y = absorbing_element(s, xs);
                if (!y) return json{{"reason", "cycle family not summable"}};
                for (Elem x : xs)
                    if (c.add(x, *y) != *y) {
                        json w{{"y", c.name(*y)}, {"x", c.name(x)}, {"x_plus_y", c.name(c.add(x, *y))}};
                        return w;
                    }
                if (note.empty() && xs.size() == 2 && xs[0] != xs[1])
                    note = "y for (" + c.name(xs[0]) + ", " + c.name(xs[1]) + ") = " + c.name(*y);
            }
            if (left == 0) return std::nullopt;
            for (Elem e : els) {
                xs.push_back(e);
                auto r = rec(left - 1);
                xs.pop_back();
                if (r) return r;
            }
            return std::nullopt;
        };
        if (auto w = rec(std::min<std::size_t>(b.max_size, 3))) return finish(CheckReport::failed(id, *w, bj));
        return finish(CheckReport::passed(id, bj, note));
    }
    case TheoremId::Swindle: {
        if (!c.zero()) unmet("no additive identity");
        const Elem zero = *c.zero();
        for (Elem y : els)
            if (c.add(zero, y) != y || c.add(y, zero) != y)
                unmet("zero is not an additive identity", {{"x", c.name(y)}});
        if (s.query(constant_omega(zero)) != zero) unmet("the constant zero family does not sum to zero");
        if (auto w = shift_equality_failure(s, els)) unmet("shift equality fails", *w);
        std::vector<std::string> inv;
        for (Elem a : invertible_elements(c)) {
            if (a != zero) return finish(CheckReport::failed(id, {{"invertible", c.name(a)}}, bj));
            inv.push_back(c.name(a));
        }
        std::string note = "invertible elements:";
        for (auto& n : inv) note += " " + n;
        return finish(CheckReport::passed(id, bj, note));
    }
    case TheoremId::ShiftEquality: {
        if (auto w = shift_equality_failure(s, els)) return finish(CheckReport::failed(id, *w, bj));
        return finish(CheckReport::passed(id, bj));
    }
    }
    return finish(CheckReport::passed(id, bj));
}

// ---------------------------------------------------------------- zero extensions

namespace {

bool contains_entries(const Family& big, const Family& small, Elem z);

}  // namespace

ZeroClosure zero_extension_closure(const System& s, const Bounds& b) {
    const Carrier& c = s.carrier();
    auto zs = s.query(Family::empty());
    if (!zs) unmet("the empty family is not summable");
    const Elem z = *zs;

    // Summable families grouped by core; the precondition says one sum per core.
    std::vector<std::pair<Family, Elem>> known;
    if (s.is_table()) {
        known = s.pairs();
    } else {
        for (auto& f : universe(s, b))
            if (auto v = s.query(f)) known.emplace_back(f, *v);
    }
    auto by_core = std::make_shared<std::map<Family, std::vector<std::pair<Family, Elem>>>>();
    for (auto& [f, v] : known) {
        Family cf = core_of(f, z);
        auto& bucket = (*by_core)[cf];
        for (auto& [g, w] : bucket)
            if (w != v)
                throw Error(Errc::CoreConflict, "families " + g.str(&c) + " and " + f.str(&c) + " share a core but not a sum",
                            json{{"a", family_to_json(g, c)}, {"b", family_to_json(f, c)}, {"sum_a", c.name(w)}, {"sum_b", c.name(v)}});
        bucket.emplace_back(f, v);
    }

    const bool table = s.is_table();
    const std::size_t L = b.max_label;
    const bool ordinal = s.traits().ordinal;
    auto prime_fn = [s, by_core, z, table, L, ordinal](const Family& f) -> std::optional<Elem> {
        if (auto v = s.query(f)) return v;
        if (table) {
            auto it = by_core->find(core_of(f, z));
            if (it == by_core->end()) return std::nullopt;
            for (auto& [g, v] : it->second)
                if (contains_entries(g, f, z)) return v;
            return std::nullopt;
        }
        // Rule systems: look for a summable core-extension among small ones.
        if (f.is_explicit()) {
            auto ls = f.finite_labels();
            std::vector<Label> fresh;
            for (Label l = 0; l < L + 2; ++l)
                if (std::find(ls.begin(), ls.end(), l) == ls.end()) fresh.push_back(l);
            for (std::size_t i = 0; i < fresh.size(); ++i) {
                if (auto v = s.query(extend(f, fresh[i], z))) return v;
                for (std::size_t j = i + 1; j < fresh.size(); ++j)
                    if (auto v = s.query(extend(extend(f, fresh[i], z), fresh[j], z))) return v;
            }
        }
        if (ordinal) {
            bool initial = true;
            if (f.is_explicit()) {
                Label next = 0;
                for (Label l : f.finite_labels()) initial = initial && l == next++;
            }
            if (initial && !f.is_multiset()) {
                Transfinite t = f.is_explicit() ? Transfinite{{}, f.finite_values()} : f.tf();
                t.blocks.push_back({t.final, {z}});
                t.final.clear();
                if (auto v = s.query(Family(t))) return v;
            }
        }
        return std::nullopt;
    };
    Traits tr = s.traits();
    System prime = System::rule(c, prime_fn, tr, s.name() + "-prime");
    auto dprime_fn = [prime, z](const Family& f) -> std::optional<Elem> { return prime.query(core_of(f, z)); };
    System dprime = System::rule(c, dprime_fn, tr, s.name() + "-double-prime");
    return {prime, dprime};
}

namespace {

// `big` is a core-extension of `small`.
bool contains_entries(const Family& big, const Family& small, Elem z) {
    if (big.is_explicit() && small.is_explicit()) {
        std::map<Label, Elem> bm(big.ex().entries.begin(), big.ex().entries.end());
        for (auto& [l, e] : small.ex().entries) {
            auto it = bm.find(l);
            if (it == bm.end() || it->second != e) return false;
        }
        return true;
    }
    // Up to order type: same core, no more copies of the empty sum.
    auto ms = to_multiset(small), mb = to_multiset(big);
    Mult a = ms.counts.count(z) ? ms.counts[z] : 0, b = mb.counts.count(z) ? mb.counts[z] : 0;
    return b == kOmega || (a != kOmega && a <= b);
}

}  // namespace

// ---------------------------------------------------------------- image restriction

ImageRestriction restrict_to_image(const System& s, const Bounds& b) {
    const Carrier& c = s.carrier();
    std::set<Elem> img;
    std::vector<std::pair<Family, Elem>> known;
    if (s.is_table()) known = s.pairs();
    else
        for (auto& f : universe(s, b))
            if (auto v = s.query(f)) known.emplace_back(f, *v);
    for (auto& [f, v] : known) img.insert(v);

    std::vector<Elem> image(img.begin(), img.end());
    std::map<Elem, Elem> to_new;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < image.size(); ++i) {
        to_new[image[i]] = Elem(i);
        names.push_back(c.name(image[i]));
    }
    Carrier y = Carrier::named(names);
    Traits tr = s.traits();
    if (tr.empty_sum) {
        auto it = to_new.find(*tr.empty_sum);
        tr.empty_sum = it == to_new.end() ? std::nullopt : std::optional<Elem>(it->second);
    }
    auto all_in = [&](const Family& f) {
        bool ok = true;
        auto m = to_multiset(f);
        for (auto& [e, k] : m.counts) ok = ok && img.count(e);
        return ok;
    };
    auto remap = [to_new](const Family& f) {
        return map_entries(f, [&](Elem e) { return to_new.at(e); });
    };
    if (s.is_table()) {
        std::vector<std::pair<Family, Elem>> pairs;
        for (auto& [f, v] : known)
            if (all_in(f)) pairs.emplace_back(remap(f), to_new.at(v));
        System r = System::table(y, pairs, tr, s.name() + "-image");
        return {r, image};
    }
    auto fn = [s, image, to_new](const Family& f) -> std::optional<Elem> {
        Family g = map_entries(f, [&](Elem e) { return image.at(std::size_t(e)); });
        auto v = s.query(g);
        if (!v) return std::nullopt;
        auto it = to_new.find(*v);
        if (it == to_new.end()) return std::nullopt;
        return it->second;
    };
    return {System::rule(y, fn, tr, s.name() + "-image"), image};
}

// ---------------------------------------------------------------- finite extensions

namespace {

std::vector<std::vector<std::size_t>> subsets_by_size(std::size_t n) {
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<bool> pick(n, false);
        std::fill(pick.begin(), pick.begin() + k, true);
        do {
            std::vector<std::size_t> s;
            for (std::size_t i = 0; i < n; ++i)
                if (pick[i]) s.push_back(i);
            out.push_back(s);
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    return out;
}

// Positions a finite removal may touch: prefixes, one period of each cycle, the final segment.
std::vector<OrdinalIndex> removable(const Transfinite& t) {
    std::vector<OrdinalIndex> ps;
    for (std::uint32_t j = 0; j < t.blocks.size(); ++j) {
        auto n = t.blocks[j].prefix.size() + t.blocks[j].cycle.size();
        for (std::uint32_t o = 0; o < n; ++o) ps.push_back({j, o});
    }
    for (std::uint32_t o = 0; o < t.final.size(); ++o) ps.push_back({std::uint32_t(t.blocks.size()), o});
    if (ps.size() > 10) ps.resize(10);
    return ps;
}

}  // namespace

System finite_extension_closure(const System& s, const Bounds& b) {
    auto merger = check_axiom(s, AxiomId::MonoidMerger, b);
    if (!merger.pass()) unmet("monoid merger fails", merger.witness);
    const Carrier& c = s.carrier();
    bool nonempty = s.is_table() ? s.table_size() > 0 : false;
    if (!nonempty)
        for (auto& f : finite_universe(c, b))
            if (s.summable(f)) { nonempty = true; break; }
    if (!nonempty) unmet("the system is empty");

    // Prefer the carrier's own addition when the induced one agrees with it.
    bool own = c.has_add();
    const auto els = bounded_elements(c, b);
    for (Elem x : els)
        for (Elem y : els)
            if (own) {
                auto v = induced_addition(s, x, y);
                if (v && *v != c.add(x, y)) own = false;
            }

    System base = s;
    if (!own) {
        auto r = restrict_to_image(s, b);
        const Carrier& y = r.system.carrier();
        const std::size_t n = y.size();
        std::vector<std::vector<Elem>> add(n, std::vector<Elem>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                auto v = induced_addition(r.system, Elem(i), Elem(j));
                if (!v) unmet("induced addition is not total on the image", {{"x", y.name(Elem(i))}, {"y", y.name(Elem(j))}});
                add[i][j] = *v;
            }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    if (add[add[i][j]][k] != add[i][add[j][k]])
                        unmet("induced addition is not associative", {{"x", y.name(Elem(i))}, {"y", y.name(Elem(j))}, {"z", y.name(Elem(k))}});
        std::optional<Elem> zero = r.system.traits().empty_sum;
        Carrier yc;
        try {
            yc = Carrier::group(y.names(), add);
        } catch (const Error&) {
            auto names = y.names();
            std::vector<Elem> sample(n);
            for (std::size_t i = 0; i < n; ++i) sample[i] = Elem(i);
            yc = Carrier::unbounded(
                sample, [names](Elem e) { return e >= 0 && std::size_t(e) < names.size() ? names[e] : "?"; },
                [add](Elem a, Elem b) { return add.at(a).at(b); }, zero,
                [names](const std::string& s) -> std::optional<Elem> {
                    for (std::size_t i = 0; i < names.size(); ++i)
                        if (names[i] == s) return Elem(i);
                    return std::nullopt;
                });
        }
        if (r.system.is_table()) {
            base = System::table(yc, r.system.pairs(), r.system.traits(), s.name());
        } else {
            System inner = r.system;
            base = System::rule(yc, [inner](const Family& f) { return inner.query(f); }, r.system.traits(), s.name());
        }
    }

    const Carrier bc = base.carrier();
    auto fn = [base, bc](const Family& f0) -> std::optional<Elem> {
        if (auto v = base.query(f0)) return v;
        Family f = f0.is_multiset() ? canonicalize(from_multiset(f0.ms())) : f0;
        if (f.is_explicit()) {
            const auto& es = f.ex().entries;
            for (auto& pick : subsets_by_size(es.size())) {
                std::set<Label> drop;
                for (auto i : pick) drop.insert(es[i].first);
                auto v = base.query(subfamily(f, Selector::drop(drop)));
                if (!v) continue;
                Elem sum = *v;
                for (auto i : pick) sum = bc.add(sum, es[i].second);
                return sum;
            }
            return std::nullopt;
        }
        if (!f.is_transfinite()) return std::nullopt;
        auto ps = removable(f.tf());
        for (auto& pick : subsets_by_size(ps.size())) {
            std::set<Label> drop;
            for (auto i : pick) drop.insert(ps[i].label());
            auto v = base.query(subfamily(f, Selector::drop(drop)));
            if (!v) continue;
            Elem sum = *v;
            for (auto i : pick) sum = bc.add(sum, *entry_at(f, ps[i]));
            return sum;
        }
        return std::nullopt;
    };
    return System::rule(bc, fn, base.traits(), s.name() + "-finite-closure");
}

}  // namespace sigma
