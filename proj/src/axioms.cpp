#include "sigma/axioms.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <set>
#include <sstream>

namespace sigma {

// ---------------------------------------------------------------- bounds

namespace {

struct SizeField {
    const char* key;
    std::size_t Bounds::*ptr;
};
struct FlagField {
    const char* key;
    bool Bounds::*ptr;
};

const SizeField kSizeFields[] = {
    {"max_size", &Bounds::max_size},
    {"max_label", &Bounds::max_label},
    {"max_parts", &Bounds::max_parts},
    {"max_blocks", &Bounds::max_blocks},
    {"max_prefix", &Bounds::max_prefix},
    {"max_cycle", &Bounds::max_cycle},
    {"max_final", &Bounds::max_final},
    {"max_elements", &Bounds::max_elements},
    {"max_ordinal_elements", &Bounds::max_ordinal_elements},
};
const FlagField kFlagFields[] = {
    {"permutations_only", &Bounds::permutations_only},
    {"forward_only", &Bounds::forward_only},
};

}  // namespace

json Bounds::to_json() const {
    json j = json::object();
    for (auto& f : kSizeFields) j[f.key] = this->*f.ptr;
    for (auto& f : kFlagFields) j[f.key] = this->*f.ptr;
    return j;
}

Bounds Bounds::parse(const std::string& kv, Bounds base) {
    std::stringstream ss(kv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(Errc::InvalidSpec, "bound '" + item + "' is not key=value");
        std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        bool found = false;
        for (auto& f : kSizeFields) {
            if (key != f.key) continue;
            found = true;
            try {
                std::size_t pos = 0;
                long v = std::stol(val, &pos);
                if (pos != val.size() || v <= 0) throw std::invalid_argument(val);
                base.*f.ptr = std::size_t(v);
            } catch (const std::logic_error&) {
                throw Error(Errc::InvalidSpec, "bound " + key + " needs a positive integer, got '" + val + "'");
            }
        }
        for (auto& f : kFlagFields) {
            if (key != f.key) continue;
            found = true;
            if (val == "true" || val == "1") base.*f.ptr = true;
            else if (val == "false" || val == "0") base.*f.ptr = false;
            else throw Error(Errc::InvalidSpec, "bound " + key + " needs true or false");
        }
        if (!found) throw Error(Errc::InvalidSpec, "unknown bound '" + key + "'");
    }
    return base;
}

Bounds Bounds::parse(const std::string& kv) { return parse(kv, Bounds()); }

// ---------------------------------------------------------------- json for instances

namespace {

json lj(Label l) {
    auto i = OrdinalIndex::of(l);
    if (i.block == 0) return i.offset;
    return json::array({i.block, i.offset});
}

Label label_of(const json& j) {
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return Label(j.get<std::int64_t>());
    if (j.is_array() && j.size() == 2) return OrdinalIndex{j[0].get<std::uint32_t>(), j[1].get<std::uint32_t>()}.label();
    throw Error(Errc::ParseError, "bad label " + j.dump());
}

json ij(OrdinalIndex i) { return json::array({i.block, i.offset}); }
OrdinalIndex index_of(const json& j) { return OrdinalIndex::of(label_of(j)); }

const char* kKindNames[] = {"labels", "initial", "tail", "interval", "drop", "periodic", "cofinal"};

}  // namespace

json selector_to_json(const Selector& s) {
    json j{{"kind", kKindNames[s.kind]}};
    switch (s.kind) {
    case Selector::Labels:
    case Selector::DropIndices: {
        json ls = json::array();
        for (Label l : s.labels) ls.push_back(lj(l));
        j["labels"] = ls;
        break;
    }
    case Selector::Initial: j["to"] = ij(s.to); break;
    case Selector::Tail: j["from"] = ij(s.from); break;
    case Selector::Interval: j["from"] = ij(s.from); j["to"] = ij(s.to); break;
    case Selector::PeriodicKeep:
    case Selector::CofinalKeep: j["block"] = s.block; j["keep"] = s.keep; break;
    }
    return j;
}

Selector selector_from_json(const json& j) {
    try {
        std::string k = j.at("kind").get<std::string>();
        int kind = -1;
        for (int i = 0; i < 7; ++i)
            if (k == kKindNames[i]) kind = i;
        if (kind < 0) throw Error(Errc::ParseError, "unknown selector kind " + k);
        Selector s;
        s.kind = Selector::Kind(kind);
        if (j.contains("labels"))
            for (auto& l : j.at("labels")) s.labels.insert(label_of(l));
        if (j.contains("to")) s.to = index_of(j.at("to"));
        if (j.contains("from")) s.from = index_of(j.at("from"));
        if (j.contains("block")) s.block = j.at("block").get<std::uint32_t>();
        if (j.contains("keep")) s.keep = j.at("keep").get<std::vector<bool>>();
        return s;
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad selector: ") + e.what());
    }
}

json instance_to_json(const Instance& in, const Carrier& c) {
    json j{{"axiom", axiom_slug(in.axiom)}, {"a", family_to_json(in.a, c)}};
    if (in.b != Family::empty() || in.axiom == AxiomId::ReindexInvariance || in.axiom == AxiomId::ZeroMeansNothing ||
        in.axiom == AxiomId::AdditionFunctoriality || in.axiom == AxiomId::OrdinalReindexInvariance ||
        in.axiom == AxiomId::InfiniteDistributivity)
        j["b"] = family_to_json(in.b, c);
    if (!in.parts.empty()) {
        json ps = json::array();
        for (auto& p : in.parts) ps.push_back(selector_to_json(p));
        j["parts"] = ps;
    }
    if (!in.outer.empty()) {
        json os = json::array();
        for (Label l : in.outer) os.push_back(lj(l));
        j["outer"] = os;
    }
    if (in.group) j["group"] = in.group;
    if (in.axiom == AxiomId::AdditiveExtensionClosure) {
        j["label"] = lj(in.label);
        j["x"] = in.x;
    }
    if (in.axiom == AxiomId::LeftMultipleSummable || in.axiom == AxiomId::LeftReorderability)
        j["r"] = family_to_json(in.r, c);
    if (in.permutations_only) j["permutations_only"] = true;
    if (in.forward_only) j["forward_only"] = true;
    return j;
}

Instance instance_from_json(const json& j, const Carrier& c) {
    try {
        Instance in;
        auto a = axiom_from_slug(j.at("axiom").get<std::string>());
        if (!a) throw Error(Errc::ParseError, "unknown axiom " + j.at("axiom").dump());
        in.axiom = *a;
        in.a = family_from_json(j.at("a"), c);
        if (j.contains("b")) in.b = family_from_json(j.at("b"), c);
        if (j.contains("parts"))
            for (auto& p : j.at("parts")) in.parts.push_back(selector_from_json(p));
        if (j.contains("outer"))
            for (auto& l : j.at("outer")) in.outer.push_back(label_of(l));
        if (j.contains("group")) in.group = j.at("group").get<std::uint32_t>();
        if (j.contains("label")) in.label = label_of(j.at("label"));
        if (j.contains("x")) in.x = j.at("x").get<Elem>();
        if (j.contains("r")) in.r = family_from_json(j.at("r"), c);
        in.permutations_only = j.value("permutations_only", false);
        in.forward_only = j.value("forward_only", false);
        return in;
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad witness instance: ") + e.what());
    }
}

// ---------------------------------------------------------------- helpers

Family core_of(const Family& f, std::optional<Elem> empty) {
    if (!empty) return f;
    const Elem z = *empty;
    if (f.is_explicit()) {
        Explicit out;
        for (auto& [l, e] : f.ex().entries)
            if (e != z) out.entries.emplace_back(l, e);
        return Family(std::move(out));
    }
    if (f.is_multiset()) {
        Multiset m = f.ms();
        m.counts.erase(z);
        return Family(std::move(m));
    }
    Transfinite t = f.is_generated() ? expand_generated(f.gen()) : f.tf();
    auto keep = [z](std::vector<Elem>& v) { v.erase(std::remove(v.begin(), v.end(), z), v.end()); };
    // Filtering may empty a cycle; canonicalize folds such blocks into what follows.
    Transfinite out;
    std::vector<Elem> pending;
    for (auto b : t.blocks) {
        keep(b.prefix);
        keep(b.cycle);
        pending.insert(pending.end(), b.prefix.begin(), b.prefix.end());
        if (!b.cycle.empty()) {
            out.blocks.push_back({pending, b.cycle});
            pending.clear();
        }
    }
    keep(t.final);
    pending.insert(pending.end(), t.final.begin(), t.final.end());
    out.final = pending;
    return canonicalize(Family(std::move(out)));
}

namespace {

std::optional<Elem> empty_sum(const System& s) { return s.query(Family::empty()); }

bool needs_add(AxiomId a) {
    switch (a) {
    case AxiomId::PrefixAssociativity:
    case AxiomId::AdditiveExtensionClosure:
    case AxiomId::AdditionFunctoriality:
    case AxiomId::NegationFunctoriality:
    case AxiomId::OrdinalReindexInvariance:
    case AxiomId::InitialSummability:
    case AxiomId::PostfixAssociativity:
    case AxiomId::OrdinalInsertiveAssociativity: return true;
    default: return false;
    }
}

bool needs_mul(AxiomId a) {
    return a == AxiomId::InfiniteDistributivity || a == AxiomId::LeftMultipleSummable ||
           a == AxiomId::LeftReorderability;
}

// Positions of an ordinal family worth cutting at: every prefix offset and one
// period of each cycle, then the final segment.
std::vector<OrdinalIndex> positions(const Transfinite& t) {
    std::vector<OrdinalIndex> ps;
    for (std::uint32_t j = 0; j < t.blocks.size(); ++j) {
        auto n = t.blocks[j].prefix.size() + t.blocks[j].cycle.size();
        for (std::uint32_t o = 0; o < n; ++o) ps.push_back({j, o});
    }
    for (std::uint32_t o = 0; o < t.final.size(); ++o) ps.push_back({std::uint32_t(t.blocks.size()), o});
    return ps;
}

std::vector<std::vector<bool>> masks(std::size_t len) {
    std::vector<std::vector<bool>> out;
    for (std::size_t m = 0; m < (std::size_t(1) << len); ++m) {
        std::vector<bool> v(len);
        for (std::size_t i = 0; i < len; ++i) v[i] = (m >> i) & 1;
        out.push_back(v);
    }
    return out;
}

// Masks over a cycle, doubled when the cycle has length 1 so that a constant
// tail can still be split in two.
std::vector<std::vector<bool>> cycle_masks(std::size_t cycle) { return masks(cycle == 1 ? 2 : cycle); }

bool all_of(const std::vector<bool>& v, bool x) {
    return std::all_of(v.begin(), v.end(), [x](bool b) { return b == x; });
}

std::vector<bool> flip(std::vector<bool> v) {
    v.flip();
    return v;
}

// All set partitions of {0..n-1} as block-assignment vectors (restricted growth strings).
std::vector<std::vector<int>> set_partitions(std::size_t n) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int mx) {
        if (i == n) { out.push_back(a); return; }
        for (int k = 0; k <= mx + 1; ++k) {
            a[i] = k;
            rec(i + 1, std::max(mx, k));
        }
    };
    rec(0, -1);
    return out;
}

// Two part lists partition the same finite index set.
void require_partition(const Family& a, const std::vector<Family>& parts, bool allow_empty) {
    if (!a.is_explicit()) return;
    std::multiset<Label> got;
    for (auto& p : parts) {
        if (!p.is_explicit()) throw Error(Errc::InvalidInput, "part of a finite family is not finite");
        if (!allow_empty && p.ex().entries.empty()) throw Error(Errc::InvalidInput, "empty part in a partition");
        for (auto& [l, e] : p.ex().entries) got.insert(l);
    }
    std::multiset<Label> want;
    for (auto& [l, e] : a.ex().entries) want.insert(l);
    if (got != want) throw Error(Errc::InvalidInput, "parts do not partition the family's index set");
}

json describe(const Carrier& c, std::optional<Elem> e) { return e ? json(c.name(*e)) : json(nullptr); }

// Regrouped sum: parts summed, then the outer family over `outer` summed.
std::optional<json> merge_violation(const System& s, const Family& a, const std::vector<Family>& parts,
                                    const std::vector<Label>& outer) {
    const Carrier& c = s.carrier();
    auto sa = s.query(a);
    if (!sa) return std::nullopt;
    if (parts.size() != outer.size()) throw Error(Errc::InvalidInput, "one outer label per part is needed");
    std::vector<std::pair<Label, Elem>> es;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        auto v = s.query(parts[k]);
        if (!v)
            return json{{"reason", "inner sum undefined"}, {"part", k}, {"family", parts[k].str(&c)}};
        es.emplace_back(outer[k], *v);
    }
    Family of = Family::labeled(es);
    auto so = s.query(of);
    if (!so) return json{{"reason", "outer sum undefined"}, {"outer", of.str(&c)}};
    if (*so != *sa)
        return json{{"reason", "sums differ"}, {"sum", c.name(*sa)}, {"regrouped", c.name(*so)}, {"outer", of.str(&c)}};
    return std::nullopt;
}

// Consecutive groups of g entries in a one-block family; final entries stay single.
std::variant<Family, json> grouped(const System& s, const Family& a, std::uint32_t g) {
    if (!a.is_transfinite() || a.tf().blocks.size() != 1 || g == 0)
        throw Error(Errc::InvalidInput, "grouping needs a family of type omega + n");
    const auto& t = a.tf();
    const auto& b = t.blocks[0];
    std::size_t P = (b.prefix.size() + g - 1) / g * g;
    std::size_t L = std::lcm(b.cycle.size(), std::size_t(g));
    auto at = [&](std::size_t i) { return i < b.prefix.size() ? b.prefix[i] : b.cycle[(i - b.prefix.size()) % b.cycle.size()]; };
    auto group_sum = [&](std::size_t from) -> std::optional<Elem> {
        std::vector<Elem> xs;
        for (std::size_t i = from; i < from + g; ++i) xs.push_back(at(i));
        return s.query(Family::seq(xs));
    };
    LimitBlock ob;
    for (std::size_t i = 0; i < P + L; i += g) {
        auto v = group_sum(i);
        if (!v) return json{{"reason", "inner sum undefined"}, {"group_start", i}};
        (i < P ? ob.prefix : ob.cycle).push_back(*v);
    }
    Transfinite out{{ob}, {}};
    for (Elem e : t.final) {
        auto v = s.query(Family::seq({e}));
        if (!v) return json{{"reason", "inner sum undefined"}, {"final_entry", s.carrier().name(e)}};
        out.final.push_back(*v);
    }
    return canonicalize(Family(out));
}

bool is_core_extension(const Family& b, const Family& a, Elem z) {
    if (a.is_explicit() && b.is_explicit()) {
        std::map<Label, Elem> bm(b.ex().entries.begin(), b.ex().entries.end());
        for (auto& [l, e] : a.ex().entries) {
            auto it = bm.find(l);
            if (it == bm.end() || it->second != e) return false;
            bm.erase(it);
        }
        for (auto& [l, e] : bm)
            if (e != z) return false;
        return true;
    }
    // Ordinal families are compared up to order type.
    auto ca = core_of(a, z), cb = core_of(b, z);
    if (ca.is_explicit() != cb.is_explicit()) return false;
    if (ca.is_explicit()) {
        if (ca.finite_values() != cb.finite_values()) return false;
    } else if (ca != cb) {
        return false;
    }
    auto ma = to_multiset(a), mb = to_multiset(b);
    Mult za = ma.counts.count(z) ? ma.counts[z] : 0, zb = mb.counts.count(z) ? mb.counts[z] : 0;
    return zb == kOmega || (za != kOmega && za <= zb);
}

// Product family indexed by I x J.
std::optional<Family> product_family(const System& s, const Family& a, const Family& b) {
    const Carrier& c = s.carrier();
    auto block0 = [](const Family& f) {
        if (!f.is_explicit()) return false;
        for (auto& [l, e] : f.ex().entries)
            if (l >> 32) return false;
        return true;
    };
    if (block0(a) && block0(b)) {
        Label M = b.ex().entries.empty() ? 1 : b.ex().entries.back().first + 1;
        Explicit out;
        for (auto& [i, x] : a.ex().entries)
            for (auto& [j, y] : b.ex().entries) out.entries.emplace_back(i * M + j, c.mul(x, y));
        return Family(std::move(out));
    }
    if (!s.traits().reindex_invariant) return std::nullopt;
    Multiset ma = to_multiset(a), mb = to_multiset(b), out;
    for (auto& [x, m] : ma.counts)
        for (auto& [y, n] : mb.counts) {
            Mult k = (m == kOmega || n == kOmega) ? kOmega : m * n;
            auto& d = out.counts[c.mul(x, y)];
            d = (d == kOmega || k == kOmega) ? kOmega : d + k;
        }
    return Family(std::move(out));
}

}  // namespace

// ---------------------------------------------------------------- violation

std::optional<json> violation(const System& s, const Instance& in) {
    const Carrier& c = s.carrier();
    auto Q = [&](const Family& f) { return s.query(f); };
    auto need_add = [&] {
        if (!c.has_add()) throw Error(Errc::MissingStructure, axiom_slug(in.axiom) + " needs a carrier addition");
    };
    auto sub = [&](const Family& f, std::size_t k) {
        if (k >= in.parts.size()) throw Error(Errc::InvalidInput, "instance lacks a selector");
        return subfamily(f, in.parts[k]);
    };
    switch (in.axiom) {
    case AxiomId::ReindexInvariance: {
        if (!(to_multiset(in.a) == to_multiset(in.b)))
            throw Error(Errc::InvalidInput, "families are not reindexings of each other");
        if (in.permutations_only && order_type(in.a) != order_type(in.b))
            throw Error(Errc::InvalidInput, "families are not permutations of each other");
        if (in.permutations_only && in.a.is_explicit() && in.a.finite_labels() != in.b.finite_labels())
            throw Error(Errc::InvalidInput, "families are not permutations of each other");
        auto sa = Q(in.a), sb = Q(in.b);
        if (sa == sb) return std::nullopt;
        json v{{"sum_a", describe(c, sa)}, {"sum_b", describe(c, sb)}};
        if (in.a.is_explicit() && in.b.is_explicit()) {
            // b_{l'} = a_{phi(l')}: match equal entries in label order.
            json phi = json::array();
            auto ea = in.a.ex().entries;
            std::vector<bool> used(ea.size());
            for (auto& [l, e] : in.b.ex().entries)
                for (std::size_t i = 0; i < ea.size(); ++i)
                    if (!used[i] && ea[i].second == e) {
                        used[i] = true;
                        phi.push_back(json::array({lj(l), lj(ea[i].first)}));
                        break;
                    }
            v["bijection"] = phi;
        }
        return v;
    }
    case AxiomId::SubsSummable: {
        if (!Q(in.a)) return std::nullopt;
        Family f = sub(in.a, 0);
        if (Q(f)) return std::nullopt;
        return json{{"reason", "subfamily not summable"}, {"subfamily", f.str(&c)}};
    }
    case AxiomId::EmptyExists:
        if (Q(Family::empty())) return std::nullopt;
        return json{{"reason", "empty family not summable"}};
    case AxiomId::ZeroMeansNothing: {
        auto z = empty_sum(s);
        if (!z) return std::nullopt;
        if (!is_core_extension(in.b, in.a, *z)) throw Error(Errc::InvalidInput, "b is not a core-extension of a");
        auto sa = Q(in.a), sb = Q(in.b);
        if (sb && !sa) return json{{"reason", "extension summable, core-restriction not"}, {"sum_b", c.name(*sb)}};
        if (sa && !sb && !in.forward_only)
            return json{{"reason", "core-restriction summable, extension not"}, {"sum_a", c.name(*sa)}};
        if (sa && sb && *sa != *sb) return json{{"reason", "sums differ"}, {"sum_a", c.name(*sa)}, {"sum_b", c.name(*sb)}};
        return std::nullopt;
    }
    case AxiomId::SingletonsSumSimply: {
        if (!in.a.is_explicit() || in.a.ex().entries.size() != 1) throw Error(Errc::InvalidInput, "not a singleton");
        Elem x = in.a.ex().entries[0].second;
        auto sa = Q(in.a);
        if (sa == x) return std::nullopt;
        return json{{"expected", c.name(x)}, {"sum", describe(c, sa)}};
    }
    case AxiomId::FiniteTotality:
        if (!in.a.is_finite()) throw Error(Errc::InvalidInput, "not a finite family");
        if (Q(in.a)) return std::nullopt;
        return json{{"reason", "finite family not summable"}};
    case AxiomId::PrefixAssociativity: {
        need_add();
        auto [K, len] = order_type(in.a);
        if (K != 1 || len != 0) throw Error(Errc::InvalidInput, "prefix associativity is about families of type omega");
        auto sa = Q(in.a);
        if (!sa) return std::nullopt;
        Family shift = subfamily(in.a, Selector::tail({0, 1}));
        auto ss = Q(shift);
        if (!ss) return json{{"reason", "shift not summable"}, {"shift", shift.str(&c)}};
        Elem a0 = *entry_at(in.a, {0, 0});
        if (c.add(a0, *ss) != *sa)
            return json{{"reason", "sums differ"}, {"sum", c.name(*sa)}, {"first_plus_shift", c.name(c.add(a0, *ss))}};
        return std::nullopt;
    }
    case AxiomId::InsertiveAssociativity:
    case AxiomId::MonoidMerger: {
        std::vector<Family> parts;
        for (std::size_t k = 0; k < in.parts.size(); ++k) parts.push_back(sub(in.a, k));
        require_partition(in.a, parts, in.axiom == AxiomId::MonoidMerger);
        std::set<Label> distinct(in.outer.begin(), in.outer.end());
        if (distinct.size() != in.outer.size()) throw Error(Errc::InvalidInput, "outer labels repeat");
        return merge_violation(s, in.a, parts, in.outer);
    }
    case AxiomId::AdditiveExtensionClosure: {
        need_add();
        auto sa = Q(in.a);
        if (!sa) return std::nullopt;
        Family ext = extend(in.a, in.label, in.x);
        auto se = Q(ext);
        Elem want = c.add(*sa, in.x);
        if (se == want) return std::nullopt;
        return json{{"extended", ext.str(&c)}, {"expected", c.name(want)}, {"sum", describe(c, se)}};
    }
    case AxiomId::AdditionFunctoriality: {
        need_add();
        auto sa = Q(in.a), sb = Q(in.b);
        if (!sa || !sb) return std::nullopt;
        if (!c.zero()) throw Error(Errc::MissingStructure, "addition functoriality needs a zero");
        Family ab = zip_entries(in.a, in.b, *c.zero(), [&](Elem x, Elem y) { return c.add(x, y); });
        auto s2 = Q(ab);
        Elem want = c.add(*sa, *sb);
        if (s2 == want) return std::nullopt;
        return json{{"sum_family", ab.str(&c)}, {"expected", c.name(want)}, {"sum", describe(c, s2)}};
    }
    case AxiomId::NegationFunctoriality: {
        if (!c.has_group()) throw Error(Errc::MissingStructure, "negation functoriality needs a group");
        auto sa = Q(in.a);
        if (!sa) return std::nullopt;
        Family na = map_entries(in.a, [&](Elem x) { return c.neg(x); });
        auto sn = Q(na);
        if (sn == c.neg(*sa)) return std::nullopt;
        return json{{"negated", na.str(&c)}, {"expected", c.name(c.neg(*sa))}, {"sum", describe(c, sn)}};
    }
    case AxiomId::OrdinalReindexInvariance: {
        need_add();
        if (!in.a.is_explicit() || !in.b.is_explicit() || in.a.finite_values() != in.b.finite_values())
            throw Error(Errc::InvalidInput, "families are not order-isomorphic reindexings");
        auto sa = Q(in.a);
        if (!sa) return std::nullopt;
        auto sb = Q(in.b);
        if (sb == sa) return std::nullopt;
        return json{{"sum_a", c.name(*sa)}, {"sum_b", describe(c, sb)}};
    }
    case AxiomId::InitialSummability: {
        need_add();
        if (!Q(in.a)) return std::nullopt;
        Family f = sub(in.a, 0);
        if (Q(f)) return std::nullopt;
        return json{{"reason", "initial segment not summable"}, {"segment", f.str(&c)}};
    }
    case AxiomId::PostfixAssociativity: {
        need_add();
        auto sa = Q(in.a);
        if (!sa) return std::nullopt;
        Family d = drop_last(in.a);
        auto sd = Q(d);
        if (!sd) return json{{"reason", "dropping the last entry is not summable"}, {"rest", d.str(&c)}};
        Elem want = c.add(*sd, *last_entry(in.a));
        if (want == *sa) return std::nullopt;
        return json{{"reason", "sums differ"}, {"sum", c.name(*sa)}, {"rest_plus_last", c.name(want)}};
    }
    case AxiomId::OrdinalInsertiveAssociativity: {
        need_add();
        if (in.group) {
            if (!Q(in.a)) return std::nullopt;
            auto g = grouped(s, in.a, in.group);
            if (auto* j = std::get_if<json>(&g)) return *j;
            const Family& of = std::get<Family>(g);
            auto so = Q(of), sa = Q(in.a);
            if (!so) return json{{"reason", "outer sum undefined"}, {"outer", of.str(&c)}};
            if (*so != *sa) return json{{"reason", "sums differ"}, {"sum", c.name(*sa)}, {"regrouped", c.name(*so)}};
            return std::nullopt;
        }
        std::vector<Family> parts;
        for (std::size_t k = 0; k < in.parts.size(); ++k) parts.push_back(sub(in.a, k));
        require_partition(in.a, parts, false);
        if (in.a.is_explicit()) {
            // Intervals in label order, each containing its outer label.
            auto labels = in.a.finite_labels();
            std::size_t pos = 0;
            for (std::size_t k = 0; k < parts.size(); ++k) {
                auto pl = parts[k].finite_labels();
                for (Label l : pl)
                    if (pos >= labels.size() || labels[pos++] != l)
                        throw Error(Errc::InvalidInput, "parts are not consecutive intervals");
                if (k >= in.outer.size() || std::find(pl.begin(), pl.end(), in.outer[k]) == pl.end())
                    throw Error(Errc::InvalidInput, "outer label outside its interval");
            }
        }
        return merge_violation(s, in.a, parts, in.outer);
    }
    case AxiomId::InfiniteDistributivity: {
        auto sa = Q(in.a), sb = Q(in.b);
        if (!sa || !sb) return std::nullopt;
        auto p = product_family(s, in.a, in.b);
        if (!p) throw Error(Errc::InvalidInput, "product family not representable");
        auto sp = Q(*p);
        Elem want = c.mul(*sa, *sb);
        if (sp == want) return std::nullopt;
        return json{{"product", p->str(&c)}, {"expected", c.name(want)}, {"sum", describe(c, sp)}};
    }
    case AxiomId::LeftMultipleSummable: {
        if (!Q(in.a)) return std::nullopt;
        Family ra;
        if (in.a.is_explicit()) {
            if (!in.r.is_explicit() || in.r.finite_labels() != in.a.finite_labels())
                throw Error(Errc::InvalidInput, "multipliers must share the family's labels");
            ra = zip_entries(in.r, in.a, 0, [&](Elem r, Elem x) { return c.mul(r, x); });
        } else {
            if (!in.r.is_explicit() || in.r.ex().entries.size() != 1)
                throw Error(Errc::InvalidInput, "ordinal families take one constant multiplier");
            Elem r = in.r.ex().entries[0].second;
            ra = map_entries(in.a, [&](Elem x) { return c.mul(r, x); });
        }
        if (Q(ra)) return std::nullopt;
        return json{{"reason", "left multiple not summable"}, {"multiple", ra.str(&c)}};
    }
    case AxiomId::LeftReorderability: {
        if (!in.a.is_explicit() || !in.r.is_explicit()) throw Error(Errc::InvalidInput, "left reorderability instances are finite");
        if (!Q(in.a)) return std::nullopt;
        const auto& rk = in.r.ex().entries;
        if (in.parts.size() != rk.size()) throw Error(Errc::InvalidInput, "one subset per multiplier is needed");
        std::vector<Family> psi;
        for (std::size_t k = 0; k < rk.size(); ++k) psi.push_back(sub(in.a, k));
        // Dual map: i -> {k : i in psi(k)}; its r-sums are the hypothesis.
        std::vector<std::pair<Label, Elem>> lhs;
        for (auto& [i, ai] : in.a.ex().entries) {
            Explicit rs;
            for (std::size_t k = 0; k < rk.size(); ++k) {
                auto ls = psi[k].finite_labels();
                if (std::find(ls.begin(), ls.end(), i) != ls.end()) rs.entries.push_back(rk[k]);
            }
            auto srs = Q(Family(rs));
            if (!srs) return std::nullopt;  // hypothesis fails
            lhs.emplace_back(i, c.mul(*srs, ai));
        }
        std::vector<std::pair<Label, Elem>> rhs;
        for (std::size_t k = 0; k < rk.size(); ++k) {
            auto sp = Q(psi[k]);
            if (!sp) return json{{"reason", "inner right sum undefined"}, {"subset", psi[k].str(&c)}};
            rhs.emplace_back(rk[k].first, c.mul(rk[k].second, *sp));
        }
        Family lf = Family::labeled(lhs), rf = Family::labeled(rhs);
        auto sl = Q(lf), sr = Q(rf);
        if (!sl) return json{{"reason", "left outer sum undefined"}, {"left", lf.str(&c)}};
        if (!sr) return json{{"reason", "right outer sum undefined"}, {"right", rf.str(&c)}};
        if (*sl != *sr) return json{{"reason", "sums differ"}, {"left", c.name(*sl)}, {"right", c.name(*sr)}};
        return std::nullopt;
    }
    }
    return std::nullopt;
}

bool witness_refails(const System& s, const json& witness) {
    Instance in = instance_from_json(witness.at("instance"), s.carrier());
    return violation(s, in).has_value();
}

// ---------------------------------------------------------------- universes

std::vector<Family> finite_universe(const Carrier& c, const Bounds& b) {
    auto all = c.elements();
    std::vector<Elem> els(all.begin(), all.begin() + std::min(all.size(), b.max_elements));
    std::vector<Family> out;
    const std::size_t L = b.max_label;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << L); ++mask) {
        std::vector<Label> ls;
        for (std::size_t i = 0; i < L; ++i)
            if ((mask >> i) & 1) ls.push_back(i);
        if (ls.size() > b.max_size) continue;
        std::vector<std::size_t> idx(ls.size(), 0);
        if (!ls.empty() && els.empty()) continue;
        while (true) {
            Explicit e;
            for (std::size_t i = 0; i < ls.size(); ++i) e.entries.emplace_back(ls[i], els[idx[i]]);
            out.emplace_back(std::move(e));
            std::size_t i = 0;
            while (i < idx.size() && ++idx[i] == els.size()) idx[i++] = 0;
            if (i == idx.size()) break;
        }
    }
    std::sort(out.begin(), out.end(), [](const Family& x, const Family& y) {
        if (x.finite_size() != y.finite_size()) return x.finite_size() < y.finite_size();
        return x < y;
    });
    return out;
}

namespace {

void all_lists(const std::vector<Elem>& els, std::size_t lo, std::size_t hi,
               const std::function<void(const std::vector<Elem>&)>& fn) {
    std::vector<Elem> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t len) {
        if (cur.size() == len) { fn(cur); return; }
        for (Elem e : els) {
            cur.push_back(e);
            rec(len);
            cur.pop_back();
        }
    };
    for (std::size_t len = lo; len <= hi; ++len) rec(len);
}

}  // namespace

std::vector<Family> ordinal_universe(const Carrier& c, const Bounds& b) {
    auto all = c.elements();
    std::vector<Elem> els(all.begin(), all.begin() + std::min(all.size(), b.max_ordinal_elements));
    std::set<Family> seen;
    std::vector<LimitBlock> blocks;
    all_lists(els, 0, b.max_prefix, [&](const std::vector<Elem>& p) {
        all_lists(els, 1, b.max_cycle, [&](const std::vector<Elem>& cy) { blocks.push_back({p, cy}); });
    });
    std::vector<std::vector<Elem>> finals;
    all_lists(els, 0, b.max_final, [&](const std::vector<Elem>& f) { finals.push_back(f); });
    std::function<void(Transfinite&, std::size_t)> rec = [&](Transfinite& t, std::size_t left) {
        if (!t.blocks.empty())
            for (auto& f : finals) {
                t.final = f;
                Family cf = canonicalize(Family(t));
                if (cf.is_transfinite()) seen.insert(cf);
            }
        if (left == 0) return;
        for (auto& bl : blocks) {
            t.blocks.push_back(bl);
            rec(t, left - 1);
            t.blocks.pop_back();
        }
    };
    Transfinite t;
    rec(t, b.max_blocks);
    return {seen.begin(), seen.end()};
}

std::vector<Family> universe(const System& s, const Bounds& b) {
    std::vector<Family> out = finite_universe(s.carrier(), b);
    std::set<Family> have(out.begin(), out.end());
    auto add = [&](const Family& f) {
        if (have.insert(f).second) out.push_back(f);
    };
    if (s.traits().ordinal)
        for (auto& f : ordinal_universe(s.carrier(), b)) add(f);
    for (auto& [f, e] : s.pairs()) add(f.is_multiset() ? canonicalize(from_multiset(f.ms())) : f);
    return out;
}

bool axiom_applicable(const System& s, AxiomId a) {
    const Carrier& c = s.carrier();
    if (a == AxiomId::NegationFunctoriality) return c.has_group();
    if (needs_add(a)) return c.has_add();
    if (needs_mul(a)) return c.has_mul();
    return true;
}

// ---------------------------------------------------------------- generators

namespace {

using Visit = std::function<bool(const Instance&)>;

struct Ctx {
    const System& s;
    const Bounds& b;
    std::vector<Family> U;
    std::vector<Family> summable;
    std::vector<Elem> els;
    std::optional<Elem> z;
};

Instance make(AxiomId a, const Family& f) {
    Instance in;
    in.axiom = a;
    in.a = f;
    return in;
}

// Outer label of a part: the least index of `a` the part keeps.
Label first_label(const Transfinite& t, const Selector& sel) {
    switch (sel.kind) {
    case Selector::Initial: return 0;
    case Selector::Tail: return sel.from.label();
    case Selector::Labels: return *sel.labels.begin();
    case Selector::DropIndices: return sel.labels.count(0) ? OrdinalIndex{0, 1}.label() : 0;
    case Selector::PeriodicKeep:
        if (sel.block > 0 || !t.blocks[0].prefix.empty()) return 0;
        return OrdinalIndex{1, 0}.label();
    case Selector::CofinalKeep: {
        std::uint32_t r = 0;
        while (!sel.keep[r]) ++r;
        return OrdinalIndex{sel.block, std::uint32_t(t.blocks[sel.block].prefix.size() + r)}.label();
    }
    default: return 0;
    }
}

// Partitions of an ordinal family into at most three parts.
std::vector<std::vector<Selector>> ordinal_partitions(const Transfinite& t, bool intervals_only) {
    std::vector<std::vector<Selector>> out;
    auto ps = positions(t);
    for (auto p : ps)
        if (p != OrdinalIndex{0, 0}) out.push_back({Selector::initial(p), Selector::tail(p)});
    // The end of the last limit block as a cut point when a final segment follows.
    if (!t.final.empty() && t.blocks.size() > 0) {
        OrdinalIndex e{std::uint32_t(t.blocks.size()), 0};
        bool have = std::find(ps.begin(), ps.end(), e) != ps.end();
        if (!have) out.push_back({Selector::initial(e), Selector::tail(e)});
    }
    if (intervals_only) return out;
    for (auto p : ps) out.push_back({Selector::drop({p.label()}), Selector::keep_labels({p.label()})});
    for (std::uint32_t j = 0; j < t.blocks.size(); ++j) {
        for (auto& m : cycle_masks(t.blocks[j].cycle.size())) {
            if (all_of(m, false) || all_of(m, true)) continue;
            std::vector<Selector> parts;
            Selector rest = Selector::periodic(j, std::vector<bool>(m.size(), false));
            Family rf = subfamily(Family(t), rest);
            if (!(rf == Family::empty())) parts.push_back(rest);
            parts.push_back(Selector::cofinal(j, m));
            parts.push_back(Selector::cofinal(j, flip(m)));
            out.push_back(parts);
        }
    }
    return out;
}

void gen_reindex(Ctx& x, const Visit& visit) {
    std::map<std::pair<Multiset, std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < x.U.size(); ++i) {
        const Family& f = x.U[i];
        std::string shape;
        if (x.b.permutations_only) {
            if (f.is_explicit())
                for (Label l : f.finite_labels()) shape += label_str(l) + ",";
            else
                shape = "ord" + std::to_string(order_type(f).first) + "+" + std::to_string(order_type(f).second);
        }
        groups[{to_multiset(f), shape}].push_back(i);
    }
    for (auto& [key, idx] : groups) {
        for (std::size_t k = 1; k < idx.size(); ++k) {
            Instance in = make(AxiomId::ReindexInvariance, x.U[idx[0]]);
            in.b = x.U[idx[k]];
            in.permutations_only = x.b.permutations_only;
            if (!visit(in)) return;
        }
    }
}

void gen_subs(Ctx& x, const Visit& visit) {
    for (auto& f : x.summable) {
        Instance in = make(AxiomId::SubsSummable, f);
        if (f.is_explicit()) {
            auto ls = f.finite_labels();
            for (std::uint64_t m = 0; m + 1 < (std::uint64_t(1) << ls.size()); ++m) {
                std::set<Label> keep;
                for (std::size_t i = 0; i < ls.size(); ++i)
                    if ((m >> i) & 1) keep.insert(ls[i]);
                in.parts = {Selector::keep_labels(keep)};
                if (!visit(in)) return;
            }
            continue;
        }
        const auto& t = f.tf();
        std::vector<Selector> sels;
        auto ps = positions(t);
        for (auto p : ps) {
            sels.push_back(Selector::initial(p));
            sels.push_back(Selector::tail(p));
            sels.push_back(Selector::drop({p.label()}));
        }
        for (std::uint64_t m = 1; m < 8 && ps.size() >= 3; ++m) {
            std::set<Label> keep;
            for (std::size_t i = 0; i < 3; ++i)
                if ((m >> i) & 1) keep.insert(ps[i].label());
            sels.push_back(Selector::keep_labels(keep));
        }
        for (std::uint32_t j = 0; j < t.blocks.size(); ++j)
            for (auto& m : cycle_masks(t.blocks[j].cycle.size())) {
                sels.push_back(Selector::periodic(j, m));
                if (!all_of(m, false)) sels.push_back(Selector::cofinal(j, m));
            }
        for (auto& sel : sels) {
            in.parts = {sel};
            if (!visit(in)) return;
        }
    }
}

void gen_zero(Ctx& x, const Visit& visit) {
    if (!x.z) return;
    const Elem z = *x.z;
    for (auto& bf : x.U) {
        Instance in = make(AxiomId::ZeroMeansNothing, Family::empty());
        in.b = bf;
        in.forward_only = x.b.forward_only;
        if (bf.is_explicit()) {
            std::vector<Label> zs;
            for (auto& [l, e] : bf.ex().entries)
                if (e == z) zs.push_back(l);
            for (std::uint64_t m = 1; m < (std::uint64_t(1) << zs.size()); ++m) {
                std::set<Label> drop;
                for (std::size_t i = 0; i < zs.size(); ++i)
                    if ((m >> i) & 1) drop.insert(zs[i]);
                in.a = subfamily(bf, Selector::drop(drop));
                if (!visit(in)) return;
            }
            continue;
        }
        const auto& t = bf.tf();
        std::vector<Label> finite_atoms;
        for (std::uint32_t j = 0; j < t.blocks.size(); ++j)
            for (std::uint32_t o = 0; o < t.blocks[j].prefix.size(); ++o)
                if (t.blocks[j].prefix[o] == z) finite_atoms.push_back(OrdinalIndex{j, o}.label());
        for (std::uint32_t o = 0; o < t.final.size(); ++o)
            if (t.final[o] == z) finite_atoms.push_back(OrdinalIndex{std::uint32_t(t.blocks.size()), o}.label());
        std::vector<std::uint32_t> cycle_atoms;
        for (std::uint32_t j = 0; j < t.blocks.size(); ++j) {
            auto& cy = t.blocks[j].cycle;
            if (std::find(cy.begin(), cy.end(), z) != cy.end()) cycle_atoms.push_back(j);
        }
        std::size_t n = finite_atoms.size() + cycle_atoms.size();
        if (n > 8) n = 8;
        for (std::uint64_t m = 1; m < (std::uint64_t(1) << n); ++m) {
            std::set<Label> drop;
            std::vector<std::uint32_t> cyc;
            for (std::size_t i = 0; i < n; ++i) {
                if (!((m >> i) & 1)) continue;
                if (i < finite_atoms.size()) drop.insert(finite_atoms[i]);
                else cyc.push_back(cycle_atoms[i - finite_atoms.size()]);
            }
            Family a = drop.empty() ? bf : subfamily(bf, Selector::drop(drop));
            // Remove the empty-sum residues of whole cycles, last block first.
            for (auto it = cyc.rbegin(); it != cyc.rend(); ++it) {
                if (!a.is_transfinite() || *it >= a.tf().blocks.size()) break;
                const auto& cy = a.tf().blocks[*it].cycle;
                std::vector<bool> keep(cy.size());
                for (std::size_t r = 0; r < cy.size(); ++r) keep[r] = cy[r] != z;
                a = subfamily(a, Selector::periodic(*it, keep));
            }
            in.a = a;
            if (!visit(in)) return;
        }
    }
}

void gen_singletons(Ctx& x, const Visit& visit) {
    std::vector<Label> ls;
    for (std::size_t l = 0; l < x.b.max_label; ++l) ls.push_back(l);
    if (x.s.traits().ordinal) ls.push_back(OrdinalIndex{1, 0}.label());
    for (Label l : ls)
        for (Elem e : x.els)
            if (!visit(make(AxiomId::SingletonsSumSimply, Family::labeled({{l, e}})))) return;
}

void gen_totality(Ctx& x, const Visit& visit) {
    for (auto& f : x.U)
        if (f.is_finite() && !visit(make(AxiomId::FiniteTotality, f))) return;
}

void gen_prefix(Ctx& x, const Visit& visit) {
    for (auto& f : x.summable)
        if (order_type(f) == std::pair<std::size_t, std::size_t>{1, 0} && !visit(make(AxiomId::PrefixAssociativity, f)))
            return;
}

void gen_merge(Ctx& x, AxiomId id, const Visit& visit) {
    const bool merger = id == AxiomId::MonoidMerger;
    for (auto& f : x.summable) {
        Instance in = make(id, f);
        if (f.is_explicit()) {
            auto ls = f.finite_labels();
            if (!merger) {
                for (auto& rg : set_partitions(ls.size())) {
                    int nb = rg.empty() ? 0 : *std::max_element(rg.begin(), rg.end()) + 1;
                    std::vector<std::set<Label>> blocks(nb);
                    for (std::size_t i = 0; i < ls.size(); ++i) blocks[rg[i]].insert(ls[i]);
                    in.parts.clear();
                    in.outer.clear();
                    for (auto& bl : blocks) {
                        in.parts.push_back(Selector::keep_labels(bl));
                        in.outer.push_back(*bl.begin());
                    }
                    if (!visit(in)) return;
                }
                continue;
            }
            // psi: K -> P(I) with each index in exactly one image, i.e. a map I -> K.
            const std::size_t L = x.b.max_label;
            for (std::uint64_t km = 0; km < (std::uint64_t(1) << L); ++km) {
                std::vector<Label> K;
                for (std::size_t i = 0; i < L; ++i)
                    if ((km >> i) & 1) K.push_back(i);
                if (K.size() > x.b.max_parts || (K.empty() && !ls.empty())) continue;
                std::vector<std::size_t> idx(ls.size(), 0);
                while (true) {
                    std::vector<std::set<Label>> pre(K.size());
                    for (std::size_t i = 0; i < ls.size(); ++i) pre[idx[i]].insert(ls[i]);
                    in.parts.clear();
                    in.outer = K;
                    for (auto& p : pre) in.parts.push_back(Selector::keep_labels(p));
                    if (!visit(in)) return;
                    std::size_t i = 0;
                    while (i < idx.size() && ++idx[i] == K.size()) idx[i++] = 0;
                    if (i == idx.size()) break;
                }
            }
            continue;
        }
        const auto& t = f.tf();
        for (auto& parts : ordinal_partitions(t, false)) {
            in.parts = parts;
            if (!merger) {
                in.outer.clear();
                for (auto& p : parts) in.outer.push_back(first_label(t, p));
                if (!visit(in)) return;
                continue;
            }
            std::vector<Label> perm(parts.size());
            std::iota(perm.begin(), perm.end(), Label(0));
            do {
                in.parts = parts;
                in.outer = perm;
                if (!visit(in)) return;
            } while (std::next_permutation(perm.begin(), perm.end()));
            in.parts = parts;
            in.parts.push_back(Selector::keep_labels({}));
            in.outer.resize(parts.size());
            std::iota(in.outer.begin(), in.outer.end(), Label(0));
            in.outer.push_back(parts.size());
            if (!visit(in)) return;
        }
    }
}

void gen_extension(Ctx& x, const Visit& visit) {
    for (auto& f : x.summable) {
        Instance in = make(AxiomId::AdditiveExtensionClosure, f);
        std::vector<Label> fresh;
        if (f.is_explicit()) {
            auto ls = f.finite_labels();
            for (Label l = 0; l <= x.b.max_label; ++l)
                if (std::find(ls.begin(), ls.end(), l) == ls.end()) fresh.push_back(l);
            Label w = OrdinalIndex{1, 0}.label();
            if (x.s.traits().ordinal && std::find(ls.begin(), ls.end(), w) == ls.end()) fresh.push_back(w);
        } else {
            auto [K, len] = order_type(f);
            fresh.push_back(OrdinalIndex{std::uint32_t(K), std::uint32_t(len)}.label());
        }
        for (Label l : fresh)
            for (Elem e : x.els) {
                in.label = l;
                in.x = e;
                if (!visit(in)) return;
            }
    }
}

bool small(const Family& f) {
    if (f.is_explicit()) return f.finite_size() <= 2;
    const auto& t = f.tf();
    std::size_t m = t.final.size();
    for (auto& b : t.blocks) m += b.prefix.size() + b.cycle.size();
    return m <= 2;
}

void gen_pairs(Ctx& x, AxiomId id, const Visit& visit) {
    std::vector<const Family*> right;
    for (auto& f : x.summable)
        if (small(f) && right.size() < 40) right.push_back(&f);
    for (auto& f : x.summable)
        for (auto* g : right) {
            if (id == AxiomId::InfiniteDistributivity && !product_family(x.s, f, *g)) continue;
            Instance in = make(id, f);
            in.b = *g;
            if (!visit(in)) return;
        }
}

void gen_negation(Ctx& x, const Visit& visit) {
    for (auto& f : x.summable)
        if (!visit(make(AxiomId::NegationFunctoriality, f))) return;
}

void gen_ordinal_reindex(Ctx& x, const Visit& visit) {
    std::vector<Label> targets;
    for (std::size_t l = 0; l < x.b.max_label; ++l) targets.push_back(l);
    targets.push_back(OrdinalIndex{1, 0}.label());
    targets.push_back(OrdinalIndex{1, 1}.label());
    for (auto& f : x.summable) {
        if (!f.is_explicit()) continue;
        auto vals = f.finite_values();
        const std::size_t n = vals.size();
        if (n > targets.size()) continue;
        std::vector<bool> pick(targets.size(), false);
        std::fill(pick.begin(), pick.begin() + n, true);
        do {
            std::vector<std::pair<Label, Elem>> es;
            std::size_t k = 0;
            for (std::size_t i = 0; i < targets.size(); ++i)
                if (pick[i]) es.emplace_back(targets[i], vals[k++]);
            Instance in = make(AxiomId::OrdinalReindexInvariance, f);
            in.b = Family::labeled(es);
            if (in.b != f && !visit(in)) return;
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
}

void gen_initial(Ctx& x, const Visit& visit) {
    for (auto& f : x.summable) {
        Instance in = make(AxiomId::InitialSummability, f);
        std::vector<OrdinalIndex> cuts;
        if (f.is_explicit()) {
            for (Label l : f.finite_labels()) cuts.push_back(OrdinalIndex::of(l));
        } else {
            cuts = positions(f.tf());
            cuts.push_back({std::uint32_t(f.tf().blocks.size()), 0});
        }
        for (auto p : cuts) {
            in.parts = {Selector::initial(p)};
            if (!visit(in)) return;
        }
    }
}

void gen_postfix(Ctx& x, const Visit& visit) {
    for (auto& f : x.summable)
        if (has_last_element(f) && !visit(make(AxiomId::PostfixAssociativity, f))) return;
}

void gen_ordinal_assoc(Ctx& x, const Visit& visit) {
    for (auto& f : x.summable) {
        Instance in = make(AxiomId::OrdinalInsertiveAssociativity, f);
        if (f.is_explicit()) {
            auto ls = f.finite_labels();
            if (ls.empty()) continue;
            // Compositions of the label sequence, then a transversal choice per interval.
            for (std::uint64_t cut = 0; cut < (std::uint64_t(1) << (ls.size() - 1)); ++cut) {
                std::vector<std::vector<Label>> ivs(1);
                for (std::size_t i = 0; i < ls.size(); ++i) {
                    if (i > 0 && ((cut >> (i - 1)) & 1)) ivs.emplace_back();
                    ivs.back().push_back(ls[i]);
                }
                std::vector<std::size_t> pick(ivs.size(), 0);
                while (true) {
                    in.parts.clear();
                    in.outer.clear();
                    for (std::size_t k = 0; k < ivs.size(); ++k) {
                        in.parts.push_back(Selector::keep_labels({ivs[k].begin(), ivs[k].end()}));
                        in.outer.push_back(ivs[k][pick[k]]);
                    }
                    if (!visit(in)) return;
                    std::size_t i = 0;
                    while (i < pick.size() && ++pick[i] == ivs[i].size()) pick[i++] = 0;
                    if (i == pick.size()) break;
                }
            }
            continue;
        }
        const auto& t = f.tf();
        for (auto& parts : ordinal_partitions(t, true)) {
            in.parts = parts;
            in.outer = {0, parts[1].from.label()};
            if (!visit(in)) return;
        }
        in.parts.clear();
        in.outer.clear();
        if (t.blocks.size() == 1)
            for (std::uint32_t g : {2u, 3u}) {
                in.group = g;
                if (!visit(in)) return;
            }
    }
}

void gen_left_multiple(Ctx& x, const Visit& visit) {
    for (auto& f : x.summable) {
        Instance in = make(AxiomId::LeftMultipleSummable, f);
        if (!f.is_explicit()) {
            for (Elem r : x.els) {
                in.r = Family::seq({r});
                if (!visit(in)) return;
            }
            continue;
        }
        auto ls = f.finite_labels();
        std::vector<std::size_t> idx(ls.size(), 0);
        while (true) {
            std::vector<std::pair<Label, Elem>> es;
            for (std::size_t i = 0; i < ls.size(); ++i) es.emplace_back(ls[i], x.els[idx[i]]);
            in.r = Family::labeled(es);
            if (!visit(in)) return;
            std::size_t i = 0;
            while (i < idx.size() && ++idx[i] == x.els.size()) idx[i++] = 0;
            if (i == idx.size()) break;
        }
    }
}

void gen_reorder(Ctx& x, const Visit& visit) {
    for (auto& f : x.summable) {
        if (!f.is_explicit() || f.finite_size() > 2) continue;
        auto ls = f.finite_labels();
        const std::size_t nsub = std::size_t(1) << ls.size();
        for (std::size_t kn = 0; kn <= 2; ++kn) {
            // psi(k) for each k, then multipliers r_k.
            std::size_t combos = 1;
            for (std::size_t k = 0; k < kn; ++k) combos *= nsub;
            for (std::size_t pc = 0; pc < combos; ++pc) {
                Instance in = make(AxiomId::LeftReorderability, f);
                std::size_t y = pc;
                for (std::size_t k = 0; k < kn; ++k) {
                    std::size_t m = y % nsub;
                    y /= nsub;
                    std::set<Label> img;
                    for (std::size_t i = 0; i < ls.size(); ++i)
                        if ((m >> i) & 1) img.insert(ls[i]);
                    in.parts.push_back(Selector::keep_labels(img));
                }
                std::vector<std::size_t> idx(kn, 0);
                while (true) {
                    std::vector<std::pair<Label, Elem>> rs;
                    for (std::size_t k = 0; k < kn; ++k) rs.emplace_back(k, x.els[idx[k]]);
                    in.r = Family::labeled(rs);
                    if (!visit(in)) return;
                    std::size_t i = 0;
                    while (i < idx.size() && ++idx[i] == x.els.size()) idx[i++] = 0;
                    if (i == idx.size()) break;
                }
            }
        }
    }
}

void generate(Ctx& x, AxiomId a, const Visit& visit) {
    switch (a) {
    case AxiomId::ReindexInvariance: gen_reindex(x, visit); break;
    case AxiomId::SubsSummable: gen_subs(x, visit); break;
    case AxiomId::EmptyExists: visit(make(a, Family::empty())); break;
    case AxiomId::ZeroMeansNothing: gen_zero(x, visit); break;
    case AxiomId::SingletonsSumSimply: gen_singletons(x, visit); break;
    case AxiomId::FiniteTotality: gen_totality(x, visit); break;
    case AxiomId::PrefixAssociativity: gen_prefix(x, visit); break;
    case AxiomId::InsertiveAssociativity:
    case AxiomId::MonoidMerger: gen_merge(x, a, visit); break;
    case AxiomId::AdditiveExtensionClosure: gen_extension(x, visit); break;
    case AxiomId::AdditionFunctoriality:
    case AxiomId::InfiniteDistributivity: gen_pairs(x, a, visit); break;
    case AxiomId::NegationFunctoriality: gen_negation(x, visit); break;
    case AxiomId::OrdinalReindexInvariance: gen_ordinal_reindex(x, visit); break;
    case AxiomId::InitialSummability: gen_initial(x, visit); break;
    case AxiomId::PostfixAssociativity: gen_postfix(x, visit); break;
    case AxiomId::OrdinalInsertiveAssociativity: gen_ordinal_assoc(x, visit); break;
    case AxiomId::LeftMultipleSummable: gen_left_multiple(x, visit); break;
    case AxiomId::LeftReorderability: gen_reorder(x, visit); break;
    }
}

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

CheckReport check_axiom(const System& s, AxiomId a, const Bounds& b) {
    auto t0 = std::chrono::steady_clock::now();
    if (!axiom_applicable(s, a))
        throw Error(Errc::MissingStructure, axiom_slug(a) + " needs " +
                                                (needs_mul(a) ? "a multiplication" : a == AxiomId::NegationFunctoriality ? "a group" : "a carrier addition"));
    Ctx x{s, b, universe(s, b), {}, {}, empty_sum(s)};
    for (auto& f : x.U)
        if (s.summable(f)) x.summable.push_back(f);
    auto all = s.carrier().elements();
    x.els.assign(all.begin(), all.begin() + std::min(all.size(), b.max_elements));

    std::size_t count = 0;
    std::optional<json> witness;
    generate(x, a, [&](const Instance& in) {
        ++count;
        if (auto v = violation(s, in)) {
            witness = json{{"axiom", axiom_slug(a)}, {"instance", instance_to_json(in, s.carrier())}, {"violation", *v}};
            return false;
        }
        return true;
    });
    json bj = b.to_json();
    bj["instances"] = count;
    bj["universe"] = x.U.size();
    CheckReport r = witness ? CheckReport::failed(axiom_slug(a), *witness, bj) : CheckReport::passed(axiom_slug(a), bj);
    if (a == AxiomId::ZeroMeansNothing && !x.z) r.note = "vacuous: the empty family is not summable";
    r.millis = since(t0);
    return r;
}

std::vector<CheckReport> check_all_axioms(const System& s, const Bounds& b) {
    std::vector<CheckReport> out;
    for (AxiomId a : all_axioms())
        if (axiom_applicable(s, a)) out.push_back(check_axiom(s, a, b));
    return out;
}

}  // namespace sigma
