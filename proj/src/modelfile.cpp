#include "sigma/modelfile.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace sigma {

namespace {

const std::set<std::string> kKeys = {"name", "carrier", "group", "mul", "one", "traits", "declared", "sigma", "opens", "A"};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
    std::stringstream ss(s);
    std::vector<std::string> out;
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw Error(Errc::ParseError, "line " + std::to_string(line) + ": " + msg);
}

Elem elem_of(const Carrier& c, const std::string& w, int line) {
    auto e = c.parse_elem(w);
    if (!e) fail(line, "unknown element '" + w + "'");
    return *e;
}

Label parse_label(const std::string& w, int line) {
    try {
        if (w.empty()) fail(line, "empty label");
        if (w[0] != 'w') {
            std::size_t pos = 0;
            long v = std::stol(w, &pos);
            if (pos != w.size() || v < 0 || v > 0xffffffffL) fail(line, "bad label '" + w + "'");
            return Label(v);
        }
        std::uint32_t block = 1, offset = 0;
        std::string rest = w.substr(1);
        auto plus = rest.find('+');
        std::string b = rest.substr(0, plus);
        if (!b.empty()) block = std::uint32_t(std::stoul(b));
        if (plus != std::string::npos) offset = std::uint32_t(std::stoul(rest.substr(plus + 1)));
        return OrdinalIndex{block, offset}.label();
    } catch (const std::logic_error&) {
        fail(line, "bad label '" + w + "'");
    }
}

std::vector<std::vector<Elem>> parse_rows(const std::vector<std::pair<int, std::string>>& rows, const Carrier& c,
                                          const char* what) {
    std::vector<std::vector<Elem>> t;
    for (auto& [ln, r] : rows) {
        std::vector<Elem> row;
        for (auto& w : words(r)) row.push_back(elem_of(c, w, ln));
        if (row.size() != c.size()) fail(ln, std::string(what) + " row needs " + std::to_string(c.size()) + " entries");
        t.push_back(row);
    }
    if (t.size() != c.size()) throw Error(Errc::ParseError, std::string(what) + " table needs " + std::to_string(c.size()) + " rows");
    return t;
}

Family parse_family_at(const std::string& text, const Carrier& c, int line) {
    std::string s = trim(text);
    if (s == "()") return Family::empty();
    if (s.rfind("ord:", 0) == 0) {
        Transfinite t;
        std::string rest = s.substr(4);
        std::size_t i = 0;
        while (i < rest.size()) {
            if (rest[i] == '[') {
                auto close = rest.find(']', i);
                if (close == std::string::npos) fail(line, "unclosed block");
                std::string inner = rest.substr(i + 1, close - i - 1);
                auto bar = inner.find('|');
                if (bar == std::string::npos) fail(line, "block needs prefix | cycle");
                LimitBlock b;
                for (auto& w : words(inner.substr(0, bar))) b.prefix.push_back(elem_of(c, w, line));
                for (auto& w : words(inner.substr(bar + 1))) b.cycle.push_back(elem_of(c, w, line));
                if (b.cycle.empty()) fail(line, "block with empty cycle");
                if (!t.final.empty()) fail(line, "final segment must come last");
                t.blocks.push_back(std::move(b));
                i = close + 1;
            } else if (std::isspace(static_cast<unsigned char>(rest[i]))) {
                ++i;
            } else {
                auto end = rest.find_first_of(" \t[", i);
                std::string w = rest.substr(i, end == std::string::npos ? std::string::npos : end - i);
                t.final.push_back(elem_of(c, w, line));
                i = end == std::string::npos ? rest.size() : end;
            }
        }
        return Family(std::move(t));
    }
    if (s.rfind("ms:", 0) == 0) {
        Multiset m;
        for (auto& w : words(s.substr(3))) {
            auto star = w.find('*');
            Elem e = elem_of(c, w.substr(0, star), line);
            Mult k = 1;
            if (star != std::string::npos) {
                std::string n = w.substr(star + 1);
                if (n == "w") k = kOmega;
                else {
                    try {
                        k = Mult(std::stoul(n));
                    } catch (const std::logic_error&) {
                        fail(line, "bad multiplicity '" + n + "'");
                    }
                }
            }
            auto& slot = m.counts[e];
            slot = (slot == kOmega || k == kOmega) ? kOmega : slot + k;
        }
        return Family(std::move(m));
    }
    auto bar = s.find('|');
    if (bar == std::string::npos) {
        // Bare element list: labels 0..n-1.
        std::vector<Elem> xs;
        for (auto& w : words(s)) xs.push_back(elem_of(c, w, line));
        return Family::seq(xs);
    }
    auto ls = words(s.substr(0, bar));
    auto es = words(s.substr(bar + 1));
    if (ls.size() != es.size()) fail(line, "label and element counts differ");
    std::vector<std::pair<Label, Elem>> entries;
    for (std::size_t i = 0; i < ls.size(); ++i) entries.emplace_back(parse_label(ls[i], line), elem_of(c, es[i], line));
    try {
        return Family::labeled(std::move(entries));
    } catch (const Error& e) {
        fail(line, e.what());
    }
}

std::vector<std::uint64_t> parse_sets_at(const std::string& text, const Carrier& c, int line) {
    std::vector<std::uint64_t> out;
    std::size_t i = 0;
    while (true) {
        auto open = text.find('{', i);
        if (open == std::string::npos) break;
        auto close = text.find('}', open);
        if (close == std::string::npos) fail(line, "unclosed set");
        std::string inner = text.substr(open + 1, close - open - 1);
        std::replace(inner.begin(), inner.end(), ',', ' ');
        std::uint64_t m = 0;
        for (auto& w : words(inner)) {
            Elem e = elem_of(c, w, line);
            if (e >= 63) fail(line, "set literal element out of range");
            m |= 1ull << e;
        }
        out.push_back(m);
        i = close + 1;
    }
    return out;
}

std::string elems_str(const std::vector<Elem>& xs, const Carrier& c) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + c.name(xs[i]);
    return s;
}

}  // namespace

Carrier ModelFile::carrier() const {
    Carrier c = add.empty() ? Carrier::named(names) : Carrier::group(names, add);
    if (!mul.empty()) c = c.with_mul(mul, one);
    return c;
}

System ModelFile::system() const {
    Traits t = traits;
    if (!traits_given) {
        t.empty_sum = std::nullopt;
        for (auto& [f, x] : sigma)
            if (f.is_explicit() && f.ex().entries.empty()) t.empty_sum = x;
    }
    System s = System::table(carrier(), sigma, t, name);
    s.declared = {declared.begin(), declared.end()};
    return s;
}

ModelFile parse_model(const std::string& text) {
    ModelFile m;
    std::stringstream in(text);
    std::string raw;
    int ln = 0;
    std::string section;
    std::vector<std::pair<int, std::string>> group_rows, mul_rows, sigma_rows;
    std::string traits_line, one_line, opens_line, a_line;
    int traits_ln = 0, one_ln = 0, opens_ln = 0, a_ln = 0;
    bool have_carrier = false;
    while (std::getline(in, raw)) {
        ++ln;
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        auto colon = line.find(':');
        std::string key = colon == std::string::npos ? "" : trim(line.substr(0, colon));
        if (kKeys.count(key)) {
            std::string val = trim(line.substr(colon + 1));
            section = key;
            if (key == "name") m.name = val;
            else if (key == "carrier") {
                auto ws = words(val);
                if (ws.empty()) fail(ln, "carrier needs a size or element names");
                if (ws.size() == 1 && std::all_of(ws[0].begin(), ws[0].end(), ::isdigit)) {
                    std::size_t n = std::stoul(ws[0]);
                    m.names.clear();
                    for (std::size_t i = 0; i < n; ++i) m.names.push_back(std::to_string(i));
                } else {
                    m.names = ws;
                }
                have_carrier = true;
            } else if (key == "traits") { traits_line = val; traits_ln = ln; m.traits_given = true; }
            else if (key == "one") { one_line = val; one_ln = ln; }
            else if (key == "declared") {
                for (auto& w : words(val)) {
                    auto a = axiom_from_slug(w);
                    if (!a) fail(ln, "unknown axiom id '" + w + "'");
                    m.declared.push_back(*a);
                }
            } else if (key == "opens") { opens_line = val; opens_ln = ln; }
            else if (key == "A") { a_line = val; a_ln = ln; }
            else if (!val.empty()) {
                // Allow the first row on the header line.
                if (key == "group") group_rows.emplace_back(ln, val);
                else if (key == "mul") mul_rows.emplace_back(ln, val);
                else if (key == "sigma") sigma_rows.emplace_back(ln, val);
            }
            continue;
        }
        if (section == "group") group_rows.emplace_back(ln, line);
        else if (section == "mul") mul_rows.emplace_back(ln, line);
        else if (section == "sigma") sigma_rows.emplace_back(ln, line);
        else fail(ln, "line outside any table section");
    }
    if (!have_carrier) throw Error(Errc::ParseError, "model has no carrier line");
    Carrier plain = Carrier::named(m.names);
    if (!group_rows.empty()) m.add = parse_rows(group_rows, plain, "group");
    if (!mul_rows.empty()) m.mul = parse_rows(mul_rows, plain, "mul");
    if (!one_line.empty()) m.one = elem_of(plain, one_line, one_ln);
    if (!traits_line.empty()) {
        for (auto& w : words(traits_line)) {
            if (w == "reindex-invariant") m.traits.reindex_invariant = true;
            else if (w == "zero-drop") m.traits.zero_drop = true;
            else if (w == "no-ordinal") m.traits.ordinal = false;
            else if (w.rfind("empty=", 0) == 0) m.traits.empty_sum = elem_of(plain, w.substr(6), traits_ln);
            else fail(traits_ln, "unknown trait '" + w + "'");
        }
    }
    Carrier c = m.add.empty() ? plain : Carrier::group(m.names, m.add);
    for (auto& [l, row] : sigma_rows) {
        auto arrow = row.rfind("->");
        if (arrow == std::string::npos) fail(l, "sigma row needs '-> sum'");
        Family f = parse_family_at(row.substr(0, arrow), c, l);
        Elem x = elem_of(c, trim(row.substr(arrow + 2)), l);
        m.sigma.emplace_back(std::move(f), x);
    }
    if (!opens_line.empty()) m.opens = parse_sets_at(opens_line, c, opens_ln);
    if (!a_line.empty()) m.set_system = parse_sets_at(a_line, c, a_ln);
    return m;
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ParseError, "cannot read model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string write_family(const Family& f, const Carrier& c) {
    if (f.is_explicit()) {
        const auto& es = f.ex().entries;
        if (es.empty()) return "()";
        std::string ls, xs;
        for (std::size_t i = 0; i < es.size(); ++i) {
            ls += (i ? " " : "") + label_str(es[i].first);
            xs += (i ? " " : "") + c.name(es[i].second);
        }
        return ls + " | " + xs;
    }
    if (f.is_multiset()) {
        std::string s = "ms:";
        for (auto& [e, k] : f.ms().counts) s += " " + c.name(e) + "*" + (k == kOmega ? "w" : std::to_string(k));
        return s;
    }
    if (f.is_transfinite()) {
        std::string s = "ord:";
        for (auto& b : f.tf().blocks) s += " [" + elems_str(b.prefix, c) + " | " + elems_str(b.cycle, c) + "]";
        if (!f.tf().final.empty()) s += " " + elems_str(f.tf().final, c);
        return s;
    }
    return write_family(canonicalize(f), c);
}

Family parse_family(const std::string& text, const Carrier& c) { return parse_family_at(text, c, 0); }

std::vector<std::uint64_t> parse_set_list(const std::string& text, const Carrier& c) { return parse_sets_at(text, c, 0); }

std::string write_set_list(const std::vector<std::uint64_t>& sets, const Carrier& c) {
    std::string s;
    for (std::size_t i = 0; i < sets.size(); ++i) s += (i ? ", " : "") + c.mask_str(sets[i]);
    return s;
}

std::string write_model(const ModelFile& m) {
    Carrier c = Carrier::named(m.names);
    std::ostringstream out;
    out << "name: " << m.name << "\n";
    out << "carrier:";
    for (auto& n : m.names) out << " " << n;
    out << "\n";
    auto table = [&](const char* key, const std::vector<std::vector<Elem>>& t) {
        if (t.empty()) return;
        out << key << ":\n";
        for (auto& row : t) out << "  " << elems_str(row, c) << "\n";
    };
    table("group", m.add);
    table("mul", m.mul);
    if (m.one) out << "one: " << c.name(*m.one) << "\n";
    if (m.traits_given) {
        out << "traits:";
        if (m.traits.reindex_invariant) out << " reindex-invariant";
        if (m.traits.zero_drop) out << " zero-drop";
        if (!m.traits.ordinal) out << " no-ordinal";
        if (m.traits.empty_sum) out << " empty=" << c.name(*m.traits.empty_sum);
        out << "\n";
    }
    if (!m.declared.empty()) {
        out << "declared:";
        for (auto a : m.declared) out << " " << axiom_slug(a);
        out << "\n";
    }
    if (!m.sigma.empty()) {
        out << "sigma:\n";
        for (auto& [f, x] : m.sigma) out << "  " << write_family(f, c) << " -> " << c.name(x) << "\n";
    }
    if (m.opens) out << "opens: " << write_set_list(*m.opens, c) << "\n";
    if (m.set_system) out << "A: " << write_set_list(*m.set_system, c) << "\n";
    return out.str();
}

}  // namespace sigma
