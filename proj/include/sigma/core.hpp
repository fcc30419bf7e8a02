#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace sigma {

using json = nlohmann::json;

using Elem = std::int64_t;

// Labels are ordinals below omega*2^32, packed as block*2^32 + offset.
// Plain natural-number labels are therefore just block 0.
using Label = std::uint64_t;

using Mult = std::uint32_t;
inline constexpr Mult kOmega = 0xffffffffu;

enum class Errc {
    InvalidInput,
    DuplicateLabel,
    UnrepresentableSelection,
    MultisetNotAllowed,
    FunctionhoodConflict,
    MissingStructure,
    HypothesisNotMet,
    CoreConflict,
    CarrierTooLarge,
    InvalidSpec,
    RatioOutOfRange,
    NotRepresentable,
    MissingCertificate,
    IndexMismatch,
    NotInDomain,
    NotReindexInvariant,
    NotAFunction,
    ParseError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg, json detail = nullptr)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code),
          detail_(std::move(detail)) {}
    Errc code() const { return code_; }
    const json& detail() const { return detail_; }

private:
    Errc code_;
    json detail_;
};

struct OrdinalIndex {
    std::uint32_t block = 0;
    std::uint32_t offset = 0;
    auto operator<=>(const OrdinalIndex&) const = default;
    Label label() const { return (Label(block) << 32) | offset; }
    static OrdinalIndex of(Label l) {
        return {std::uint32_t(l >> 32), std::uint32_t(l & 0xffffffffu)};
    }
};

std::string label_str(Label l);

// ---------------------------------------------------------------- carrier

class Carrier {
public:
    Carrier() = default;

    // Bare set of n elements named by their index.
    static Carrier plain(std::size_t n);
    static Carrier named(std::vector<std::string> names);

    // Abelian group from a Cayley table. Validates the group laws.
    static Carrier group(std::vector<std::string> names, std::vector<std::vector<Elem>> add);
    static Carrier cyclic(std::size_t n);
    // Product of cyclic groups, e.g. {2,2} for the Klein four-group.
    static Carrier product(const std::vector<std::size_t>& orders);
    // "z4", "klein", "z2xz2", "trivial"
    static Carrier from_group_name(const std::string& name);

    // Carriers without an element list: elements are produced by a sampler.
    static Carrier unbounded(std::vector<Elem> sample,
                             std::function<std::string(Elem)> namer,
                             std::function<Elem(Elem, Elem)> add, std::optional<Elem> zero,
                             std::function<std::optional<Elem>(const std::string&)> parser = {});

    Carrier with_mul(std::vector<std::vector<Elem>> mul, std::optional<Elem> one = std::nullopt) const;

    bool finite() const { return finite_; }
    std::size_t size() const { return finite_ ? names_.size() : sample_.size(); }
    // All elements for finite carriers, the sample otherwise.
    std::vector<Elem> elements() const;
    bool contains(Elem e) const;

    bool has_add() const { return finite_ ? !add_.empty() : bool(add_fn_); }
    bool has_group() const { return has_add() && zero_.has_value() && (finite_ ? !neg_.empty() : false); }
    bool has_mul() const { return !mul_.empty(); }
    std::optional<Elem> zero() const { return zero_; }
    std::optional<Elem> one() const { return one_; }

    Elem add(Elem a, Elem b) const;
    Elem neg(Elem a) const;
    Elem sub(Elem a, Elem b) const { return add(a, neg(b)); }
    Elem mul(Elem a, Elem b) const;
    // Additive order of a group element.
    std::size_t order(Elem a) const;

    std::string name(Elem e) const;
    std::optional<Elem> parse_elem(const std::string& s) const;

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<std::vector<Elem>>& add_table() const { return add_; }
    const std::vector<std::vector<Elem>>& mul_table() const { return mul_; }

    // Subsets of a finite carrier as bitmasks (n <= 63).
    std::uint64_t full_mask() const;
    std::string mask_str(std::uint64_t m) const;

private:
    bool finite_ = true;
    std::vector<std::string> names_;
    std::vector<std::vector<Elem>> add_;
    std::vector<Elem> neg_;
    std::vector<std::vector<Elem>> mul_;
    std::optional<Elem> zero_;
    std::optional<Elem> one_;
    std::vector<Elem> sample_;
    std::function<std::string(Elem)> namer_;
    std::function<Elem(Elem, Elem)> add_fn_;
    std::function<std::optional<Elem>(const std::string&)> parser_;
};

// ---------------------------------------------------------------- families

struct Explicit {
    std::vector<std::pair<Label, Elem>> entries;
    auto operator<=>(const Explicit&) const = default;
};

struct LimitBlock {
    std::vector<Elem> prefix;
    std::vector<Elem> cycle;  // nonempty
    auto operator<=>(const LimitBlock&) const = default;
};

// Family indexed by the ordinal omega*blocks.size() + final.size().
struct Transfinite {
    std::vector<LimitBlock> blocks;
    std::vector<Elem> final;
    auto operator<=>(const Transfinite&) const = default;
};

struct Multiset {
    std::map<Elem, Mult> counts;
    auto operator<=>(const Multiset&) const = default;
};

// Rule-based family over the index domain omega (or a finite prefix of it).
// The certificate says entries are periodic from `start` with `period`.
struct Generated {
    std::string rule;
    std::vector<Elem> params;
    std::function<Elem(std::uint64_t)> entry;
    std::uint64_t start = 0;
    std::uint64_t period = 1;
    std::optional<std::uint64_t> length;  // finite domain when set

    bool operator==(const Generated& o) const {
        return rule == o.rule && params == o.params && start == o.start && period == o.period &&
               length == o.length;
    }
    std::strong_ordering operator<=>(const Generated& o) const;
};

class Family {
public:
    using Variant = std::variant<Explicit, Transfinite, Multiset, Generated>;

    Family() : v_(Explicit{}) {}
    Family(Explicit e) : v_(std::move(e)) {}
    Family(Transfinite t) : v_(std::move(t)) {}
    Family(Multiset m) : v_(std::move(m)) {}
    Family(Generated g) : v_(std::move(g)) {}

    static Family empty() { return Family(Explicit{}); }
    // Finite family on labels 0..n-1.
    static Family seq(const std::vector<Elem>& xs);
    static Family labeled(std::vector<std::pair<Label, Elem>> entries);
    // Type omega family: prefix followed by cycle repeated.
    static Family omega(std::vector<Elem> prefix, std::vector<Elem> cycle);

    const Variant& var() const { return v_; }
    bool is_explicit() const { return std::holds_alternative<Explicit>(v_); }
    bool is_transfinite() const { return std::holds_alternative<Transfinite>(v_); }
    bool is_multiset() const { return std::holds_alternative<Multiset>(v_); }
    bool is_generated() const { return std::holds_alternative<Generated>(v_); }
    const Explicit& ex() const { return std::get<Explicit>(v_); }
    const Transfinite& tf() const { return std::get<Transfinite>(v_); }
    const Multiset& ms() const { return std::get<Multiset>(v_); }
    const Generated& gen() const { return std::get<Generated>(v_); }

    // True for explicit families and transfinite ones with no limit block.
    bool is_finite() const;
    std::size_t finite_size() const;  // number of entries of a finite family
    // Entries of a finite family in label order.
    std::vector<Elem> finite_values() const;
    std::vector<Label> finite_labels() const;

    bool operator==(const Family& o) const { return v_ == o.v_; }
    std::strong_ordering operator<=>(const Family& o) const;

    std::string str(const Carrier* c = nullptr) const;

private:
    Variant v_;
};

// Number of limit blocks of an ordinal-indexed family (0 for finite ones).
std::size_t limit_blocks(const Family& f);
bool has_last_element(const Family& f);
// Entry at an ordinal index of an explicit or transfinite family.
std::optional<Elem> entry_at(const Family& f, OrdinalIndex i);
// Expand a Generated family into transfinite form, spot-checking its certificate.
Transfinite expand_generated(const Generated& g, int spot_checks = 4);
// Order type of an ordinal-indexed family as (blocks, final length).
std::pair<std::size_t, std::size_t> order_type(const Family& f);

struct Traits {
    bool reindex_invariant = false;  // Multiset families are accepted
    bool zero_drop = false;          // Multiset entries equal to the empty sum are dropped
    std::optional<Elem> empty_sum;
    bool ordinal = true;             // system understands transfinite families
    bool operator==(const Traits&) const = default;
};

Family canonicalize(const Family& f, const Traits& t = {});
// Canonical form of a single limit block: primitive cycle, shortest prefix.
LimitBlock normalize_block(LimitBlock b);
Transfinite normalize_transfinite(Transfinite t);

// Selectors for subfamily().
struct Selector {
    enum Kind { Labels, Initial, Tail, Interval, DropIndices, PeriodicKeep, CofinalKeep } kind = Labels;
    std::set<Label> labels;           // Labels: keep these; DropIndices: drop these
    OrdinalIndex from{}, to{};        // Initial uses `to`, Tail uses `from`, Interval both
    std::uint32_t block = 0;          // PeriodicKeep: which block
    std::vector<bool> keep;           // PeriodicKeep: mask over cycle positions
                                      // CofinalKeep: same mask, but nothing else of the family is kept

    static Selector keep_labels(std::set<Label> ls) { Selector s; s.kind = Labels; s.labels = std::move(ls); return s; }
    static Selector initial(OrdinalIndex to) { Selector s; s.kind = Initial; s.to = to; return s; }
    static Selector tail(OrdinalIndex from) { Selector s; s.kind = Tail; s.from = from; return s; }
    static Selector interval(OrdinalIndex from, OrdinalIndex to) { Selector s; s.kind = Interval; s.from = from; s.to = to; return s; }
    static Selector drop(std::set<Label> ls) { Selector s; s.kind = DropIndices; s.labels = std::move(ls); return s; }
    static Selector periodic(std::uint32_t block, std::vector<bool> keep) { Selector s; s.kind = PeriodicKeep; s.block = block; s.keep = std::move(keep); return s; }
    static Selector cofinal(std::uint32_t block, std::vector<bool> keep) { Selector s; s.kind = CofinalKeep; s.block = block; s.keep = std::move(keep); return s; }
};

Family subfamily(const Family& f, const Selector& sel);
Family initial_segment(const Family& f, OrdinalIndex i);
// Hash-extension a#l x. For transfinite families only the next ordinal after
// the family is a fresh label that keeps the family representable.
Family extend(const Family& f, Label l, Elem x);
// Append x after every index of an ordinal-indexed family.
Family append(const Family& f, Elem x);
// Drop the last entry of a family with a last element.
Family drop_last(const Family& f);
std::optional<Elem> last_entry(const Family& f);

// Componentwise maps; finite families combine on the union of their labels
// with absent entries read as `zero`.
Family map_entries(const Family& f, const std::function<Elem(Elem)>& fn);
Family zip_entries(const Family& a, const Family& b, Elem zero,
                   const std::function<Elem(Elem, Elem)>& fn);

// Multiset of entries (finite families or transfinite ones with cycle entries at omega).
Multiset to_multiset(const Family& f);
// Representative ordinal-indexed family of a multiset (finite part first, then cycles).
Family from_multiset(const Multiset& m);

// Cofinal element set of a transfinite family of limit type; {last} otherwise.
std::set<Elem> tail_set(const Family& f);

json family_to_json(const Family& f, const Carrier& c);
Family family_from_json(const json& j, const Carrier& c);

// ---------------------------------------------------------------- systems

enum class AxiomId {
    ReindexInvariance,
    SubsSummable,
    EmptyExists,
    ZeroMeansNothing,
    SingletonsSumSimply,
    FiniteTotality,
    PrefixAssociativity,
    InsertiveAssociativity,
    MonoidMerger,
    AdditiveExtensionClosure,
    AdditionFunctoriality,
    NegationFunctoriality,
    OrdinalReindexInvariance,
    InitialSummability,
    PostfixAssociativity,
    OrdinalInsertiveAssociativity,
    InfiniteDistributivity,
    LeftMultipleSummable,
    LeftReorderability,
};

const std::vector<AxiomId>& all_axioms();
std::string axiom_slug(AxiomId a);
std::optional<AxiomId> axiom_from_slug(const std::string& s);
int axiom_number(AxiomId a);

class System {
public:
    using RuleFn = std::function<std::optional<Elem>(const Family&)>;

    static System table(Carrier c, std::vector<std::pair<Family, Elem>> pairs, Traits t = {},
                        std::string name = "table");
    static System rule(Carrier c, RuleFn fn, Traits t = {}, std::string name = "rule");

    const Carrier& carrier() const { return carrier_; }
    const Traits& traits() const { return traits_; }
    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }
    std::set<AxiomId> declared;

    bool is_table() const { return is_table_; }
    // Canonical (family, sum) pairs of a table system.
    std::vector<std::pair<Family, Elem>> pairs() const;
    std::size_t table_size() const { return table_ ? table_->size() : 0; }

    std::optional<Elem> query(const Family& f) const;
    bool summable(const Family& f) const { return query(f).has_value(); }

private:
    Carrier carrier_;
    Traits traits_;
    std::string name_;
    bool is_table_ = false;
    std::shared_ptr<const std::map<Family, Elem>> table_;
    std::shared_ptr<const std::map<Multiset, Elem>> by_multiset_;
    RuleFn rule_;
};

std::optional<Elem> query_sum(const System& s, const Family& f);
std::optional<Elem> induced_addition(const System& s, Elem a, Elem b);

// ---------------------------------------------------------------- reports

enum class Verdict { PassWithinBounds, Fail };

struct CheckReport {
    std::string id;
    Verdict verdict = Verdict::PassWithinBounds;
    json witness = nullptr;
    json bounds = json::object();
    double millis = 0;
    std::string note;

    bool pass() const { return verdict == Verdict::PassWithinBounds; }
    static CheckReport passed(std::string id, json bounds = json::object(), std::string note = {});
    static CheckReport failed(std::string id, json witness, json bounds = json::object(),
                              std::string note = {});
};

json report_to_json(const CheckReport& r);
const char* verdict_str(Verdict v);

}  // namespace sigma
