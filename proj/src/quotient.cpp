#include "sigma/quotient.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <random>

#include "sigma/models.hpp"

namespace sigma {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

Family plain_family(const Family& f) {
    if (f.is_multiset()) return from_multiset(f.ms());
    if (f.is_generated()) return Family(expand_generated(f.gen()));
    return f;
}

Mask entry_mask(const Family& f) {
    Mask m = 0;
    for (const auto& [e, c] : to_multiset(plain_family(f)).counts)
        if (c > 0) m |= bit(e);
    return m;
}

bool entries_in(const Family& f, Mask s) { return (entry_mask(f) & ~s) == 0; }

std::vector<Elem> mask_elems(Mask m) {
    std::vector<Elem> xs;
    for (Elem e = 0; e < 64; ++e)
        if (m & bit(e)) xs.push_back(e);
    return xs;
}

// Short sequences and single-block ordinal families with entries in `s`.
std::vector<Family> families_over(const System& sys, Mask s, const Bounds& b) {
    std::vector<Elem> els = mask_elems(s);
    std::vector<Family> out;
    std::vector<std::vector<Elem>> level{{}};
    out.push_back(Family::empty());
    for (std::size_t len = 1; len <= b.max_size; ++len) {
        std::vector<std::vector<Elem>> nxt;
        for (const auto& w : level)
            for (Elem e : els) {
                auto v = w;
                v.push_back(e);
                out.push_back(Family::seq(v));
                nxt.push_back(std::move(v));
            }
        level = std::move(nxt);
    }
    if (!sys.traits().ordinal || els.empty()) return out;
    auto words = [&](std::size_t maxlen, std::size_t minlen) {
        std::vector<std::vector<Elem>> all;
        std::vector<std::vector<Elem>> lvl{{}};
        if (minlen == 0) all.push_back({});
        for (std::size_t len = 1; len <= maxlen; ++len) {
            std::vector<std::vector<Elem>> nxt;
            for (const auto& w : lvl)
                for (Elem e : els) {
                    auto v = w;
                    v.push_back(e);
                    all.push_back(v);
                    nxt.push_back(std::move(v));
                }
            lvl = std::move(nxt);
        }
        return all;
    };
    auto prefixes = words(b.max_prefix, 0), cycles = words(b.max_cycle, 1), finals = words(b.max_final, 0);
    for (const auto& p : prefixes)
        for (const auto& c : cycles)
            for (const auto& f : finals) out.push_back(Family(Transfinite{{LimitBlock{p, c}}, f}));
    return out;
}

Elem coset_rep(const Carrier& g, Mask s, Elem x) {
    Elem best = x;
    for (Elem e : mask_elems(s)) best = std::min(best, g.add(x, e));
    return best;
}

Family to_reps(const Carrier& g, Mask s, const Family& f) {
    return map_entries(plain_family(f), [&](Elem x) { return coset_rep(g, s, x); });
}

std::optional<Elem> summed(const System& s, const Family& f) {
    try {
        return s.query(f);
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

// ---------------------------------------------------------------- closed sets

json SigmaClosedCertificate::to_json(const Carrier& c) const {
    json j = {{"subset", c.mask_str(subset)}, {"closed", closed}, {"families", families}, {"exhaustive", exhaustive}};
    if (witness) {
        j["witness"] = family_to_json(*witness, c);
        j["witness_sum"] = c.name(*witness_sum);
    }
    return j;
}

SigmaClosedCertificate is_sigma_closed(const System& s, Mask subset, const Bounds& b, std::uint64_t seed) {
    const Carrier& c = s.carrier();
    if (!c.finite() || (subset & ~c.full_mask()))
        throw Error(Errc::InvalidInput, "subset must lie inside a finite carrier");
    SigmaClosedCertificate cert;
    cert.subset = subset;
    auto visit = [&](const Family& f, std::optional<Elem> x) {
        if (!x || !entries_in(f, subset)) return false;
        ++cert.families;
        if (subset & bit(*x)) return false;
        cert.closed = false;
        cert.witness = f;
        cert.witness_sum = x;
        return true;
    };
    if (s.is_table()) {
        cert.exhaustive = true;
        for (const auto& [f, x] : s.pairs())
            if (visit(f, x)) return cert;
        // the empty family of a table may come from its traits
        visit(Family::empty(), summed(s, Family::empty()));
        return cert;
    }
    for (const auto& f : families_over(s, subset, b))
        if (visit(f, summed(s, f))) return cert;
    for (const auto& f : universe(s, b))
        if (visit(f, summed(s, f))) return cert;
    std::vector<Elem> els = mask_elems(subset);
    if (els.empty()) return cert;
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 200; ++k) {
        std::size_t len = b.max_size + 1 + rng() % 3;
        std::vector<Elem> v;
        for (std::size_t i = 0; i < len; ++i) v.push_back(els[rng() % els.size()]);
        Family f = Family::seq(v);
        if (visit(f, summed(s, f))) return cert;
    }
    return cert;
}

bool certificate_valid(const System& s, const SigmaClosedCertificate& c) {
    if (c.closed) return !c.witness;
    if (!c.witness || !c.witness_sum) return false;
    auto x = summed(s, *c.witness);
    return x && *x == *c.witness_sum && entries_in(*c.witness, c.subset) && !(c.subset & bit(*x));
}

bool is_subgroup(const Carrier& g, Mask s) {
    if (!g.has_group() || !(s & bit(*g.zero()))) return false;
    for (Elem a : mask_elems(s))
        for (Elem b : mask_elems(s))
            if (!(s & bit(g.sub(a, b)))) return false;
    return true;
}

bool is_ideal(const Carrier& r, Mask s) {
    if (!is_subgroup(r, s) || !r.has_mul()) return false;
    for (Elem a : mask_elems(s))
        for (Elem x : r.elements())
            if (!(s & bit(r.mul(a, x))) || !(s & bit(r.mul(x, a)))) return false;
    return true;
}

// ---------------------------------------------------------------- quotients

json QuotientConflict::to_json(const Carrier& c) const {
    return {{"left", family_to_json(left, c)},
            {"left_sum", c.name(left_sum)},
            {"right", family_to_json(right, c)},
            {"right_sum", c.name(right_sum)}};
}

std::optional<QuotientConflict> quotient_conflict(const System& s, Mask subgroup, const Bounds& b) {
    const Carrier& g = s.carrier();
    std::map<Family, std::pair<Family, Elem>> seen;
    auto visit = [&](const Family& f, std::optional<Elem> x) -> std::optional<QuotientConflict> {
        if (!x) return std::nullopt;
        Family key = to_reps(g, subgroup, f);
        auto [it, fresh] = seen.emplace(key, std::make_pair(f, *x));
        if (fresh) return std::nullopt;
        if (coset_rep(g, subgroup, it->second.second) == coset_rep(g, subgroup, *x)) return std::nullopt;
        return QuotientConflict{it->second.first, f, it->second.second, *x};
    };
    if (s.is_table()) {
        for (const auto& [f, x] : s.pairs())
            if (auto c = visit(f, x)) return c;
        return std::nullopt;
    }
    for (const auto& f : families_over(s, g.full_mask(), b))
        if (auto c = visit(f, summed(s, f))) return c;
    for (const auto& f : universe(s, b))
        if (auto c = visit(f, summed(s, f))) return c;
    return std::nullopt;
}

namespace {

constexpr std::size_t kMaxLifts = std::size_t(1) << 16;

std::size_t lift_count(const Family& f, std::size_t coset_size) {
    Family pf = plain_family(f);
    std::size_t positions = 0;
    if (pf.is_explicit()) {
        positions = pf.ex().entries.size();
    } else {
        for (const auto& blk : pf.tf().blocks) positions += blk.prefix.size() + blk.cycle.size();
        positions += pf.tf().final.size();
    }
    std::size_t total = 1;
    for (std::size_t i = 0; i < positions && total <= kMaxLifts; ++i) total *= coset_size;
    return total;
}

// Lifts a family over cosets entrywise; cycles are lifted periodically.
std::optional<Elem> lift_query(const System& base, const std::vector<Mask>& cosets, const std::vector<Elem>& coset_of,
                               const Family& f) {
    Family pf = plain_family(f);
    std::vector<Elem> vals;
    auto collect = [&](const std::vector<Elem>& xs) { vals.insert(vals.end(), xs.begin(), xs.end()); };
    if (pf.is_explicit()) {
        for (const auto& [l, e] : pf.ex().entries) vals.push_back(e);
    } else {
        for (const auto& blk : pf.tf().blocks) {
            collect(blk.prefix);
            collect(blk.cycle);
        }
        collect(pf.tf().final);
    }
    std::vector<std::vector<Elem>> choices;
    std::size_t total = 1;
    for (Elem v : vals) {
        if (v < 0 || std::size_t(v) >= cosets.size()) throw Error(Errc::InvalidInput, "entry outside the coset carrier");
        choices.push_back(mask_elems(cosets[v]));
        total *= choices.back().size();
        if (total > kMaxLifts) throw Error(Errc::NotRepresentable, "too many lifts of " + pf.str());
    }
    std::vector<std::size_t> pos(vals.size(), 0);
    auto rebuild = [&]() {
        std::size_t k = 0;
        auto next = [&]() {
            Elem v = choices[k][pos[k]];
            ++k;
            return v;
        };
        if (pf.is_explicit()) {
            Explicit e;
            for (const auto& [l, x] : pf.ex().entries) e.entries.emplace_back(l, next());
            return Family(std::move(e));
        }
        Transfinite t;
        for (const auto& blk : pf.tf().blocks) {
            LimitBlock nb;
            for (std::size_t i = 0; i < blk.prefix.size(); ++i) nb.prefix.push_back(next());
            for (std::size_t i = 0; i < blk.cycle.size(); ++i) nb.cycle.push_back(next());
            t.blocks.push_back(std::move(nb));
        }
        for (std::size_t i = 0; i < pf.tf().final.size(); ++i) t.final.push_back(next());
        return Family(std::move(t));
    };
    for (std::size_t n = 0; n < total; ++n) {
        if (auto x = summed(base, rebuild())) return coset_of[*x];
        for (std::size_t k = 0; k < pos.size(); ++k) {
            if (++pos[k] < choices[k].size()) break;
            pos[k] = 0;
        }
    }
    return std::nullopt;
}

QuotientSystem build_quotient(const System& s, Mask subgroup, const Bounds& b) {
    const Carrier& g = s.carrier();
    auto cert = is_sigma_closed(s, subgroup, b);
    if (!cert.closed) {
        // the pair (a, x), (a - a, 0) from the closedness witness
        Family a = *cert.witness;
        Family z = map_entries(plain_family(a), [&](Elem) { return *g.zero(); });
        auto y = summed(s, z);
        json d = {{"left", family_to_json(a, g)}, {"left_sum", g.name(*cert.witness_sum)},
                  {"right", family_to_json(z, g)}, {"subgroup", g.mask_str(subgroup)}};
        if (y && coset_rep(g, subgroup, *y) != coset_rep(g, subgroup, *cert.witness_sum)) {
            d["right_sum"] = g.name(*y);
            throw Error(Errc::NotAFunction, "subgroup " + g.mask_str(subgroup) + " is not closed", d);
        }
        if (auto c = quotient_conflict(s, subgroup, b)) {
            json dc = c->to_json(g);
            dc["subgroup"] = g.mask_str(subgroup);
            throw Error(Errc::NotAFunction, "subgroup " + g.mask_str(subgroup) + " is not closed", dc);
        }
        throw Error(Errc::HypothesisNotMet, "a - a is not summable for the closedness witness", d);
    }
    if (auto c = quotient_conflict(s, subgroup, b)) {
        json dc = c->to_json(g);
        dc["subgroup"] = g.mask_str(subgroup);
        throw Error(Errc::NotAFunction, "quotient relation is not a function", dc);
    }

    QuotientSystem q;
    q.subgroup = subgroup;
    q.coset_of.assign(g.size(), -1);
    for (Elem x : g.elements()) {
        if (q.coset_of[x] >= 0) continue;
        Mask m = 0;
        for (Elem e : mask_elems(subgroup)) m |= bit(g.add(x, e));
        for (Elem e : mask_elems(m)) q.coset_of[e] = Elem(q.cosets.size());
        q.cosets.push_back(m);
    }
    std::size_t n = q.cosets.size();
    auto least = [&](std::size_t k) { return mask_elems(q.cosets[k]).front(); };
    std::vector<std::string> names;
    std::vector<std::vector<Elem>> add(n, std::vector<Elem>(n));
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back(g.mask_str(q.cosets[i]));
        for (std::size_t j = 0; j < n; ++j) add[i][j] = q.coset_of[g.add(least(i), least(j))];
    }
    Carrier qc = Carrier::group(names, add);
    if (g.has_mul() && is_ideal(g, subgroup)) {
        std::vector<std::vector<Elem>> mul(n, std::vector<Elem>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) mul[i][j] = q.coset_of[g.mul(least(i), least(j))];
        std::optional<Elem> one;
        if (g.one()) one = q.coset_of[*g.one()];
        qc = qc.with_mul(mul, one);
    }
    Traits tr;
    tr.reindex_invariant = s.traits().reindex_invariant;
    tr.ordinal = s.traits().ordinal;
    if (s.traits().empty_sum) tr.empty_sum = q.coset_of[*s.traits().empty_sum];
    std::string name = "quotient(" + s.name() + ", " + g.mask_str(subgroup) + ")";
    if (s.is_table()) {
        std::vector<std::pair<Family, Elem>> pairs;
        for (const auto& [f, x] : s.pairs())
            pairs.push_back({map_entries(plain_family(f), [&](Elem e) { return q.coset_of[e]; }), q.coset_of[x]});
        q.system = System::table(qc, pairs, tr, name);
    } else {
        System base = s;
        auto cosets = q.cosets;
        auto coset_of = q.coset_of;
        q.system = System::rule(qc, [base, cosets, coset_of](const Family& f) { return lift_query(base, cosets, coset_of, f); },
                                tr, name);
    }
    return q;
}

}  // namespace

QuotientSystem quotient_system(const System& s, Mask subgroup, const Bounds& b) {
    const Carrier& g = s.carrier();
    if (!is_subgroup(g, subgroup)) throw Error(Errc::InvalidInput, g.mask_str(subgroup) + " is not a subgroup");
    for (AxiomId a : {AxiomId::AdditionFunctoriality, AxiomId::NegationFunctoriality}) {
        CheckReport r = check_axiom(s, a, b);
        if (!r.pass())
            throw Error(Errc::HypothesisNotMet, axiom_slug(a) + " fails", r.witness);
    }
    return build_quotient(s, subgroup, b);
}

std::vector<CheckReport> reorderable_system_suite(const System& s, const Bounds& b) {
    const Carrier& c = s.carrier();
    if (!c.has_mul() || !c.one() || !c.has_group())
        throw Error(Errc::HypothesisNotMet, "reorderable rings need a ring carrier with 1");
    std::vector<CheckReport> out;
    CheckReport lr = check_axiom(s, AxiomId::LeftReorderability, b);
    lr.id = "reorder-left-reorderability";
    out.push_back(lr);
    auto simple = [&](const std::string& id, auto body) {
        auto t0 = std::chrono::steady_clock::now();
        json w = body();
        CheckReport r = w.is_null() ? CheckReport::passed(id, b.to_json()) : CheckReport::failed(id, w, b.to_json());
        r.millis = elapsed_ms(t0);
        out.push_back(r);
    };
    simple("reorder-surjectivity", [&]() -> json {
        for (Elem x : c.elements())
            if (summed(s, Family::seq({x})) != x) return {{"element", c.name(x)}};
        return nullptr;
    });
    Elem one = *c.one();
    simple("reorder-singleton-one", [&]() -> json {
        auto x = summed(s, Family::seq({one}));
        if (x != one) return {{"sum", x ? json(c.name(*x)) : json()}};
        return nullptr;
    });
    simple("reorder-one-minus-one", [&]() -> json {
        auto x = summed(s, Family::seq({one, c.neg(one)}));
        auto e = summed(s, Family::empty());
        if (!x || x != e) return {{"pair", x ? json(c.name(*x)) : json()}, {"empty", e ? json(c.name(*e)) : json()}};
        return nullptr;
    });
    return out;
}

// ---------------------------------------------------------------- endo

std::string endo_ideal_name(EndoIdeal i) {
    switch (i) {
        case EndoIdeal::Zero: return "zero";
        case EndoIdeal::FiniteRank: return "finite-rank";
        case EndoIdeal::Full: return "full";
    }
    return "?";
}

std::optional<EndoIdeal> endo_ideal_from_name(const std::string& s) {
    for (EndoIdeal i : {EndoIdeal::Zero, EndoIdeal::FiniteRank, EndoIdeal::Full})
        if (endo_ideal_name(i) == s) return i;
    return std::nullopt;
}

json EndoClosedCertificate::to_json() const {
    json j = {{"ideal", endo_ideal_name(ideal)}, {"closed", closed}, {"families", families}, {"window", window}};
    if (witness) j["witness"] = *witness;
    return j;
}

namespace {

bool in_ideal(EndoIdeal ideal, const LazyMatrix& m, std::size_t window) {
    switch (ideal) {
        case EndoIdeal::Zero: return !window_difference(m, LazyMatrix::zero(m.field()), window);
        case EndoIdeal::FiniteRank: return finite_rank_within(m, window);
        case EndoIdeal::Full: return true;
    }
    return false;
}

std::vector<MatrixFamily> endo_candidates(Field f) {
    std::vector<MatrixFamily> out;
    for (const auto& n : catalog_names()) {
        MatrixFamily g = catalog_family(n, f);
        out.push_back(g);
        MatrixFamily t = restrict_family(g, IndexSet::range(0, 8));
        t.name = n + "|8";
        out.push_back(t);
    }
    return out;
}

}  // namespace

EndoClosedCertificate is_sigma_closed(const EndoSystem& s, EndoIdeal ideal, std::size_t window) {
    EndoClosedCertificate cert;
    cert.ideal = ideal;
    cert.window = window;
    for (const auto& fam : endo_candidates(s.field)) {
        bool ok = false;
        try {
            ok = s.summable(fam);
        } catch (const Error& e) {
            if (e.code() != Errc::MissingCertificate) throw;
        }
        if (!ok) continue;
        Index n = fam.length ? std::min<Index>(*fam.length, window) : window;
        bool members_in = true;
        for (Index i = 0; i < n && members_in; ++i) members_in = in_ideal(ideal, fam.member(i), window);
        if (!members_in) continue;
        ++cert.families;
        if (!in_ideal(ideal, s.sum(fam), window)) {
            cert.closed = false;
            cert.witness = fam.str();
            return cert;
        }
    }
    return cert;
}

void endo_quotient(const EndoSystem& s, EndoIdeal ideal, std::size_t window) {
    auto cert = is_sigma_closed(s, ideal, window);
    if (cert.closed) return;
    throw Error(Errc::NotAFunction, "ideal " + endo_ideal_name(ideal) + " is not closed",
                {{"left", *cert.witness}, {"left_sum", "outside the ideal"}, {"right", *cert.witness + " - " + *cert.witness},
                 {"right_sum", "0"}, {"window", window}});
}

// ---------------------------------------------------------------- checks

std::string quotient_theorem_slug(QuotientTheoremId t) {
    switch (t) {
        case QuotientTheoremId::ClosedIffFunction: return "closed-iff-function";
        case QuotientTheoremId::LimitClosure: return "limit-closure";
        case QuotientTheoremId::HausdorffClosure: return "hausdorff-closure";
        case QuotientTheoremId::ReorderableQuotient: return "reorderable-quotient";
        case QuotientTheoremId::FinitaryQuotient: return "finitary-quotient";
        case QuotientTheoremId::EndoClosedIdeals: return "endo-closed-ideals";
    }
    return "?";
}

std::optional<QuotientTheoremId> quotient_theorem_from_slug(const std::string& s) {
    for (auto t : all_quotient_theorems())
        if (quotient_theorem_slug(t) == s) return t;
    return std::nullopt;
}

const std::vector<QuotientTheoremId>& all_quotient_theorems() {
    static const std::vector<QuotientTheoremId> all = {
        QuotientTheoremId::ClosedIffFunction,   QuotientTheoremId::LimitClosure,
        QuotientTheoremId::HausdorffClosure,    QuotientTheoremId::ReorderableQuotient,
        QuotientTheoremId::FinitaryQuotient,    QuotientTheoremId::EndoClosedIdeals,
    };
    return all;
}

json QuotientScope::to_json() const {
    return {{"groups", groups}, {"max_pairs", max_pairs}, {"labels", labels}, {"window", window},
            {"bounds", bounds.to_json()}};
}

namespace {

std::vector<Mask> all_subgroups(const Carrier& g) {
    std::vector<Mask> out;
    for (Mask m = 1; m <= g.full_mask(); ++m)
        if (is_subgroup(g, m)) out.push_back(m);
    return out;
}

// Subgroups of X^I (|I| = k) of size at most `cap` with their homomorphisms
// to X, as graphs over the labels.
using Graph = std::vector<std::pair<Family, Elem>>;

std::vector<Graph> hom_graphs(const Carrier& g, const std::vector<Label>& labels, std::size_t cap) {
    std::size_t k = labels.size(), n = g.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= n;
    auto digits = [&](std::size_t v) {
        std::vector<Elem> d(k);
        for (std::size_t i = 0; i < k; ++i) {
            d[i] = Elem(v % n);
            v /= n;
        }
        return d;
    };
    auto code = [&](const std::vector<Elem>& d) {
        std::size_t v = 0;
        for (std::size_t i = k; i-- > 0;) v = v * n + std::size_t(d[i]);
        return v;
    };
    auto addv = [&](std::size_t a, std::size_t b) {
        auto x = digits(a), y = digits(b);
        for (std::size_t i = 0; i < k; ++i) x[i] = g.add(x[i], y[i]);
        return code(x);
    };
    // subgroups generated by at most two elements, enough below the size cap here
    std::set<std::vector<std::size_t>> subs;
    auto close = [&](std::vector<std::size_t> gens) {
        std::set<std::size_t> s{code(std::vector<Elem>(k, *g.zero()))};
        bool grew = true;
        while (grew) {
            grew = false;
            std::vector<std::size_t> cur(s.begin(), s.end());
            for (std::size_t a : cur)
                for (std::size_t x : gens)
                    if (s.insert(addv(a, x)).second) grew = true;
        }
        return std::vector<std::size_t>(s.begin(), s.end());
    };
    for (std::size_t a = 0; a < total; ++a)
        for (std::size_t b = a; b < total; ++b) {
            auto s = close({a, b});
            if (s.size() <= cap) subs.insert(s);
        }
    std::vector<Graph> out;
    for (const auto& d : subs) {
        std::size_t m = d.size();
        std::map<std::size_t, std::size_t> pos;
        for (std::size_t i = 0; i < m; ++i) pos[d[i]] = i;
        std::vector<Elem> phi(m, 0);
        std::size_t count = 1;
        for (std::size_t i = 0; i < m; ++i) count *= n;
        for (std::size_t c = 0; c < count; ++c) {
            std::size_t v = c;
            for (std::size_t i = 0; i < m; ++i) {
                phi[i] = Elem(v % n);
                v /= n;
            }
            bool hom = true;
            for (std::size_t i = 0; i < m && hom; ++i)
                for (std::size_t j = 0; j < m && hom; ++j)
                    hom = phi[pos[addv(d[i], d[j])]] == g.add(phi[i], phi[j]);
            if (!hom) continue;
            Graph gr;
            for (std::size_t i = 0; i < m; ++i) {
                auto x = digits(d[i]);
                std::vector<std::pair<Label, Elem>> es;
                for (std::size_t t = 0; t < k; ++t) es.emplace_back(labels[t], x[t]);
                gr.push_back({Family::labeled(es), phi[i]});
            }
            out.push_back(std::move(gr));
        }
    }
    return out;
}

// Closed under negation and under sums over the union of index sets, with
// absent entries read as zero.
bool table_functorial(const Carrier& g, const Graph& pairs) {
    std::map<Family, Elem> tab(pairs.begin(), pairs.end());
    for (const auto& [a, x] : pairs) {
        Family na = map_entries(a, [&](Elem e) { return g.neg(e); });
        auto it = tab.find(na);
        if (it == tab.end() || it->second != g.neg(x)) return false;
        for (const auto& [b, y] : pairs) {
            Family s = zip_entries(a, b, *g.zero(), [&](Elem u, Elem v) { return g.add(u, v); });
            auto jt = tab.find(s);
            if (jt == tab.end() || jt->second != g.add(x, y)) return false;
        }
    }
    return true;
}

struct Run {
    std::string id;
    json bounds;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    CheckReport pass(std::string note = {}) {
        CheckReport r = CheckReport::passed(id, bounds, std::move(note));
        r.millis = elapsed_ms(t0);
        return r;
    }
    CheckReport fail(json w) {
        CheckReport r = CheckReport::failed(id, std::move(w), bounds);
        r.millis = elapsed_ms(t0);
        return r;
    }
};

CheckReport run_closed_iff_function(const QuotientScope& sc, Run run) {
    std::size_t tables = 0, instances = 0, not_closed = 0, axiom_crosschecks = 0, candidates = 0;
    for (const auto& gname : sc.groups) {
        Carrier g = Carrier::from_group_name(gname);
        auto subs = all_subgroups(g);
        // graphs per index set
        std::vector<std::vector<Graph>> per_set;
        for (std::size_t m = 0; m < (std::size_t(1) << sc.labels); ++m) {
            std::vector<Label> ls;
            for (std::size_t l = 0; l < sc.labels; ++l)
                if (m & (std::size_t(1) << l)) ls.push_back(Label(l));
            per_set.push_back(hom_graphs(g, ls, sc.max_pairs));
        }
        Graph cur;
        std::function<std::optional<json>(std::size_t)> rec = [&](std::size_t k) -> std::optional<json> {
            if (k == per_set.size()) {
                ++candidates;
                if (!table_functorial(g, cur)) return std::nullopt;
                System s = System::table(g, cur);
                ++tables;
                if (tables % 997 == 1) {
                    ++axiom_crosschecks;
                    for (AxiomId a : {AxiomId::AdditionFunctoriality, AxiomId::NegationFunctoriality})
                        if (!check_axiom(s, a, sc.bounds).pass())
                            return json{{"group", gname}, {"table_fails", axiom_slug(a)}, {"table", cur.size()}};
                }
                for (Mask sub : subs) {
                    ++instances;
                    auto cert = is_sigma_closed(s, sub, sc.bounds);
                    auto conflict = quotient_conflict(s, sub, sc.bounds);
                    auto ctx = [&]() {
                        json pairs = json::array();
                        for (const auto& [f, x] : cur) pairs.push_back({family_to_json(f, g), g.name(x)});
                        return json{{"group", gname}, {"subgroup", g.mask_str(sub)}, {"pairs", pairs}};
                    };
                    if (cert.closed == bool(conflict)) {
                        json w = ctx();
                        w["closed"] = cert.closed;
                        if (conflict) w["conflict"] = conflict->to_json(g);
                        return w;
                    }
                    if (!certificate_valid(s, cert)) {
                        json w = ctx();
                        w["invalid_certificate"] = cert.to_json(g);
                        return w;
                    }
                    bool threw = false;
                    try {
                        build_quotient(s, sub, sc.bounds);
                    } catch (const Error& e) {
                        if (e.code() != Errc::NotAFunction) throw;
                        threw = true;
                        // the returned pair must be a genuine conflict
                        const json& d = e.detail();
                        Family l = family_from_json(d["left"], g), r = family_from_json(d["right"], g);
                        auto lx = summed(s, l), rx = summed(s, r);
                        bool genuine = lx && rx && to_reps(g, sub, l) == to_reps(g, sub, r) &&
                                       coset_rep(g, sub, *lx) != coset_rep(g, sub, *rx);
                        if (!genuine) {
                            json w = ctx();
                            w["bad_conflict"] = d;
                            return w;
                        }
                    }
                    if (threw != !cert.closed) {
                        json w = ctx();
                        w["construction_disagrees"] = true;
                        return w;
                    }
                    if (!cert.closed) ++not_closed;
                }
                return std::nullopt;
            }
            if (auto w = rec(k + 1)) return w;
            for (const auto& gr : per_set[k]) {
                if (cur.size() + gr.size() > sc.max_pairs) continue;
                cur.insert(cur.end(), gr.begin(), gr.end());
                auto w = rec(k + 1);
                cur.resize(cur.size() - gr.size());
                if (w) return w;
            }
            return std::nullopt;
        };
        if (auto w = rec(0)) return run.fail(*w);
    }
    run.bounds["candidate_tables"] = candidates;
    run.bounds["tables"] = tables;
    run.bounds["instances"] = instances;
    run.bounds["not_closed"] = not_closed;
    run.bounds["axiom_crosschecks"] = axiom_crosschecks;
    return run.pass();
}

// Closed under limits: every family of S-members with a limit has it in S.
bool limit_closed(const System& s, Mask sub, const Bounds& b, json& why) {
    for (const auto& f : families_over(s, sub, b)) {
        std::optional<Elem> x;
        try {
            x = sigma_limit(s, f);
        } catch (const Error&) {
            continue;
        }
        if (x && !(sub & bit(*x))) {
            why = {{"family", family_to_json(f, s.carrier())}, {"limit", s.carrier().name(*x)}};
            return false;
        }
    }
    return true;
}

CheckReport run_limit_closure(const QuotientScope& sc, Run run) {
    std::vector<System> systems = {finitary_group(Carrier::cyclic(8))};
    for (std::size_t n : {2, 3})
        for (const auto& t : enumerate_topologies(n)) systems.push_back(induced_summation(t, Carrier::cyclic(n)));
    std::size_t instances = 0, biconditionals = 0, hypothesis = 0;
    for (const auto& s : systems) {
        const Carrier& g = s.carrier();
        if (s.name() != "finitary-group") {
            if (!check_axiom(s, AxiomId::InitialSummability, sc.bounds).pass()) continue;
        }
        ++hypothesis;
        auto fams = families_over(s, g.full_mask(), sc.bounds);
        for (Mask sub : all_subgroups(g)) {
            ++instances;
            auto cert = is_sigma_closed(s, sub, sc.bounds);
            json why;
            bool lc = limit_closed(s, sub, sc.bounds, why);
            if (cert.closed != lc)
                return run.fail({{"system", s.name()}, {"subgroup", g.mask_str(sub)}, {"closed", cert.closed},
                                 {"limit_closed", lc}, {"detail", why}});
            if (!cert.closed) continue;
            for (const auto& a : fams) {
                if (!summed(s, a)) continue;
                Family p;
                try {
                    p = partial_sum_family(s, a);
                } catch (const Error&) {
                    continue;
                }
                ++biconditionals;
                if (entries_in(a, sub) != entries_in(p, sub))
                    return run.fail({{"system", s.name()}, {"subgroup", g.mask_str(sub)},
                                     {"family", family_to_json(a, g)}, {"partial_sums", family_to_json(p, g)}});
            }
        }
    }
    run.bounds["systems"] = hypothesis;
    run.bounds["instances"] = instances;
    run.bounds["biconditionals"] = biconditionals;
    return run.pass();
}

CheckReport run_hausdorff_closure(const QuotientScope& sc, Run run) {
    std::size_t instances = 0, hausdorff = 0, topologies = 0;
    for (const auto& gname : sc.groups) {
        Carrier g = Carrier::from_group_name(gname);
        if (g.size() > 4) continue;
        for (const auto& t : enumerate_topologies(g.size())) {
            ++topologies;
            // on a finite set T1, Hausdorff and discrete coincide
            if (!t.is_t1()) continue;
            if (!t.is_discrete()) return run.fail({{"group", gname}, {"t1_not_discrete", t.to_json()}});
            ++hausdorff;
            System s = induced_summation(t, g);
            Topology ts = sigma_topology(s);
            for (Mask sub : all_subgroups(g)) {
                ++instances;
                bool closed = is_sigma_closed(s, sub, sc.bounds).closed;
                if (closed != ts.is_closed(sub))
                    return run.fail({{"group", gname}, {"subgroup", g.mask_str(sub)}, {"sigma_closed", closed},
                                     {"tau_sigma", ts.to_json()}});
            }
        }
    }
    run.bounds["topologies"] = topologies;
    run.bounds["hausdorff"] = hausdorff;
    run.bounds["instances"] = instances;
    return run.pass("finite Hausdorff topologies are discrete; every subgroup is closed on both sides");
}

CheckReport run_reorderable_quotient(const QuotientScope& sc, Run run) {
    std::size_t fixtures = 0;
    for (std::size_t n : {2, 3, 4, 6}) {
        System base = finitary_group(cyclic_ring(n));
        for (const auto& r : reorderable_system_suite(base, sc.bounds))
            if (!r.pass()) return run.fail({{"ring", n}, {"base_fails", r.id}, {"detail", r.witness}});
        // proper ideals; the whole ring gives the zero ring
        for (Mask sub = 1; sub < base.carrier().full_mask(); ++sub) {
            if (!is_ideal(base.carrier(), sub)) continue;
            if (!is_sigma_closed(base, sub, sc.bounds).closed) continue;
            QuotientSystem q = build_quotient(base, sub, sc.bounds);
            ++fixtures;
            for (const auto& r : reorderable_system_suite(q.system, sc.bounds))
                if (!r.pass())
                    return run.fail({{"ring", n}, {"ideal", base.carrier().mask_str(sub)}, {"check", r.id},
                                     {"detail", r.witness}});
        }
    }
    // the zero ideal of the endomorphism ring gives an identical copy
    for (Field f : {Field{2}, Field::rationals()}) {
        EndoSystem e = endo_system(f);
        endo_quotient(e, EndoIdeal::Zero, sc.window);
        ++fixtures;
        for (const auto& r : reorderable_suite(f, sc.window))
            if (!r.pass()) return run.fail({{"endo", f.name()}, {"check", r.id}, {"detail", r.witness}});
    }
    run.bounds["fixtures"] = fixtures;
    return run.pass();
}

CheckReport run_finitary_quotient(const QuotientScope& sc, Run run) {
    std::size_t instances = 0, skipped = 0;
    for (std::size_t n : {2, 4, 8}) {
        Carrier g = Carrier::cyclic(n);
        System base = finitary_group(g);
        for (Mask sub : all_subgroups(g)) {
            QuotientSystem q = quotient_system(base, sub, sc.bounds);
            std::size_t m = q.cosets.size();
            Carrier target = Carrier::cyclic(m);
            if (q.system.carrier().add_table() != target.add_table())
                return run.fail({{"group", n}, {"subgroup", g.mask_str(sub)}, {"add_table_differs", true}});
            System expect = finitary_group(target);
            std::vector<Family> fams;
            for (auto& f : comparison_families(target, 3)) {
                if (lift_count(f, n / m) <= kMaxLifts)
                    fams.push_back(f);
                else
                    ++skipped;
            }
            ++instances;
            if (auto d = first_difference(q.system, expect, fams))
                return run.fail({{"group", n}, {"subgroup", g.mask_str(sub)}, {"family", family_to_json(*d, target)}});
        }
    }
    // quotient by {0} leaves a system unchanged
    for (const auto& gname : {"klein", "z2xz4"}) {
        Carrier g = Carrier::from_group_name(gname);
        System base = finitary_group(g);
        QuotientSystem q = quotient_system(base, bit(*g.zero()), sc.bounds);
        ++instances;
        if (auto d = first_difference(q.system, base, comparison_families(g, 2)))
            return run.fail({{"group", gname}, {"zero_quotient_differs", family_to_json(*d, g)}});
    }
    run.bounds["instances"] = instances;
    run.bounds["families_over_lift_cap"] = skipped;
    run.bounds["lift_cap"] = kMaxLifts;
    return run.pass();
}

CheckReport run_endo_closed_ideals(const QuotientScope& sc, Run run) {
    std::size_t instances = 0;
    for (Field f : {Field{2}, Field::rationals()}) {
        EndoSystem full = endo_system(f);
        std::vector<std::pair<EndoSystem, std::string>> systems = {
            {full, "full"}, {restricted_system(full, std::nullopt), "finite"}, {restricted_system(full, 3), "below-3"}};
        for (const auto& [s, sname] : systems)
            for (EndoIdeal ideal : {EndoIdeal::Zero, EndoIdeal::FiniteRank, EndoIdeal::Full}) {
                ++instances;
                auto cert = is_sigma_closed(s, ideal, sc.window);
                bool expect = !(sname == "full" && ideal == EndoIdeal::FiniteRank);
                if (cert.closed != expect)
                    return run.fail({{"field", f.name()}, {"system", sname}, {"certificate", cert.to_json()}});
                if (!cert.closed && cert.witness != "diag" && cert.witness != "scaled")
                    return run.fail({{"field", f.name()}, {"unexpected_witness", cert.to_json()}});
            }
        // limit route: partial sums of (e_{i,i}) have finite rank, their limit does not
        MatrixFamily d = catalog_family("diag", f);
        LazyMatrix partial = LazyMatrix::zero(f);
        for (Index k = 0; k < sc.window / 2; ++k) {
            if (!finite_rank_within(partial, sc.window))
                return run.fail({{"field", f.name()}, {"partial_sum_rank", k}});
            partial = partial + d.member(k);
        }
        if (finite_rank_within(endo_sum(d), sc.window))
            return run.fail({{"field", f.name()}, {"identity_reads_finite_rank", true}});
        bool threw = false;
        try {
            endo_quotient(full, EndoIdeal::FiniteRank, sc.window);
        } catch (const Error& e) {
            threw = e.code() == Errc::NotAFunction;
        }
        if (!threw) return run.fail({{"field", f.name()}, {"finite_rank_quotient_defined", true}});
    }
    run.bounds["instances"] = instances;
    return run.pass();
}

}  // namespace

CheckReport check_quotient_theorem(QuotientTheoremId id, const QuotientScope& scope) {
    Run run{quotient_theorem_slug(id), scope.to_json()};
    switch (id) {
        case QuotientTheoremId::ClosedIffFunction: return run_closed_iff_function(scope, run);
        case QuotientTheoremId::LimitClosure: return run_limit_closure(scope, run);
        case QuotientTheoremId::HausdorffClosure: return run_hausdorff_closure(scope, run);
        case QuotientTheoremId::ReorderableQuotient: return run_reorderable_quotient(scope, run);
        case QuotientTheoremId::FinitaryQuotient: return run_finitary_quotient(scope, run);
        case QuotientTheoremId::EndoClosedIdeals: return run_endo_closed_ideals(scope, run);
    }
    throw Error(Errc::InvalidInput, "unknown quotient theorem");
}

}  // namespace sigma
