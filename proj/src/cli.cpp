#include "sigma/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sigma/axioms.hpp"
#include "sigma/endo.hpp"
#include "sigma/modelfile.hpp"
#include "sigma/models.hpp"
#include "sigma/quotient.hpp"
#include "sigma/suites.hpp"
#include "sigma/topo.hpp"
#include "sigma/uncond.hpp"

namespace sigma {

namespace {

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

std::map<std::string, std::string> parse_params(const std::string& text) {
    std::map<std::string, std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(Errc::InvalidSpec, "parameter '" + item + "' is not key=value");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

bool is_cyclic_name(const std::string& g) {
    return g.size() >= 2 && g[0] == 'z' && g.find('x') == std::string::npos;
}

System builtin(const std::string& name, std::map<std::string, std::string> params) {
    if (auto colon = name.find(':'); colon != std::string::npos) {
        auto extra = parse_params(name.substr(colon + 1));
        extra.insert(params.begin(), params.end());
        return builtin(name.substr(0, colon), extra);
    }
    const auto& names = model_names();
    if (std::find(names.begin(), names.end(), name) != names.end()) return build_model(ModelSpec{name, params});
    for (auto& fx : independence_fixtures())
        if (fx.name == name && name != "finitary-group" && name != "choice") return fx.system;
    for (std::string base : {"finitary", "zero-only", "pairs-only"}) {
        if (!starts_with(name, base + "-")) continue;
        std::string g = name.substr(base.size() + 1);
        params["group"] = g;
        if (base == "finitary" && is_cyclic_name(g) && !params.count("ring")) params["ring"] = "true";
        System s = build_model(ModelSpec{base == "finitary" ? "finitary-group" : base, params});
        s.set_name(name);
        return s;
    }
    if (starts_with(name, "multiset-")) {
        params["alphabet"] = name.substr(9);
        return build_model(ModelSpec{"multiset-monoid", params});
    }
    throw Error(Errc::InvalidSpec, "unknown builtin model '" + name + "'");
}

}  // namespace

System resolve_model(const std::string& ref, const std::map<std::string, std::string>& params) {
    if (ref.empty()) throw Error(Errc::InvalidSpec, "empty model reference");
    if (starts_with(ref, "builtin:")) return builtin(ref.substr(8), params);
    const auto& names = model_names();
    if (std::find(names.begin(), names.end(), ref) != names.end()) return build_model(ModelSpec{ref, params});
    System s = load_model(ref).system();
    return s;
}

json report_schema() {
    json row = {
        {"type", "object"},
        {"required", {"check-id", "verdict", "witness", "bounds", "millis"}},
        {"properties",
         {{"check-id", {{"type", "string"}, {"description", "axiom, theorem or check id from the registry"}}},
          {"verdict", {{"enum", {"pass-within-bounds", "fail"}}}},
          {"witness", {{"type", {"object", "array", "string", "number", "boolean", "null"}},
                       {"description", "null on pass; on fail, enough to re-evaluate the violation"}}},
          {"bounds", {{"type", "object"}, {"description", "search bounds and counts actually used"}}},
          {"millis", {{"type", "number"}, {"minimum", 0}, {"description", "wall time; 0 under --deterministic"}}},
          {"note", {{"type", "string"}}}}}};
    json ids = json::array();
    for (auto a : all_axioms()) ids.push_back(axiom_slug(a));
    for (auto t : all_theorems()) ids.push_back(theorem_slug(t));
    for (auto t : all_topo_theorems()) ids.push_back(topo_theorem_slug(t));
    for (auto p : all_uncond_props()) ids.push_back(uncond_prop_slug(p));
    for (auto q : all_quotient_theorems()) ids.push_back(quotient_theorem_slug(q));
    return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
            {"title", "check report"},
            {"type", "object"},
            {"required", {"command", "pass", "reports"}},
            {"properties",
             {{"command", {{"type", "string"}}},
              {"model", {{"type", {"string", "null"}}}},
              {"suite", {{"type", "string"}}},
              {"seed", {{"type", "integer"}}},
              {"window", {{"type", "integer"}}},
              {"bounds", {{"type", "object"}}},
              {"pass", {{"type", "boolean"}}},
              {"reports", {{"type", "array"}, {"items", row}}}}},
            {"registered-ids", ids}};
}

namespace {

struct Common {
    std::string format = "text";
    std::string bounds;
    std::uint64_t seed = 1;
    std::size_t window = 16;
    bool deterministic = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--format", c.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--bounds", c.bounds, "k=v,... overrides of the search bounds");
    sub->add_option("--seed", c.seed, "seed for randomized searches");
    sub->add_option("--window", c.window, "matrix window for endomorphism checks");
    sub->add_flag("--deterministic", c.deterministic, "report wall time as 0");
}

void zero_millis(json& j) {
    if (j.is_object()) {
        if (j.contains("millis")) j["millis"] = 0;
        for (auto& [k, v] : j.items()) zero_millis(v);
    } else if (j.is_array()) {
        for (auto& v : j) zero_millis(v);
    }
}

std::string millis_str(double ms) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(1);
    o << ms << "ms";
    return o.str();
}

// Prints a report document; returns the exit code.
int emit_reports(std::ostream& out, const Common& c, json doc, const std::vector<CheckReport>& rows) {
    json arr = json::array();
    bool pass = true;
    for (auto& r : rows) {
        arr.push_back(report_to_json(r));
        pass = pass && r.pass();
    }
    doc["bounds"] = Bounds::parse(c.bounds).to_json();
    doc["seed"] = c.seed;
    doc["window"] = c.window;
    doc["pass"] = pass;
    doc["reports"] = arr;
    if (c.deterministic) zero_millis(doc["reports"]);
    if (c.format == "json") {
        out << doc.dump(2) << "\n";
    } else {
        std::size_t failed = 0;
        for (auto& r : doc["reports"]) {
            bool ok = r["verdict"] == "pass-within-bounds";
            failed += !ok;
            out << (ok ? "PASS  " : "FAIL  ") << r["check-id"].get<std::string>() << "  "
                << millis_str(r["millis"].get<double>());
            if (r.contains("note")) out << "  " << r["note"].get<std::string>();
            out << "\n";
            if (!ok) out << "      witness: " << r["witness"].dump() << "\n";
        }
        out << rows.size() << " checks, " << failed << " failed\n";
    }
    return pass ? 0 : 1;
}

void emit_doc(std::ostream& out, const std::string& format, const json& doc, const std::string& text) {
    if (format == "json") out << doc.dump(2) << "\n";
    else out << text;
}

Topology parse_space(const std::string& s) {
    auto colon = s.find(':');
    if (colon == std::string::npos) throw Error(Errc::InvalidSpec, "space must be trivial:n, discrete:n or n:<opens>");
    std::string head = s.substr(0, colon), rest = s.substr(colon + 1);
    auto count = [](const std::string& t) {
        try {
            std::size_t pos = 0;
            long v = std::stol(t, &pos);
            if (pos != t.size() || v <= 0 || v > 5) throw std::invalid_argument(t);
            return std::size_t(v);
        } catch (const std::logic_error&) {
            throw Error(Errc::InvalidSpec, "point count must be 1..5, got '" + t + "'");
        }
    };
    if (head == "trivial") return Topology::trivial(count(rest));
    if (head == "discrete") return Topology::discrete(count(rest));
    return Topology::parse(count(head), rest);
}

std::vector<Elem> parse_elements(const std::string& text, const Carrier& c) {
    std::vector<Elem> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" {"));
        item.erase(item.find_last_not_of(" }") + 1);
        if (item.empty()) continue;
        auto e = c.parse_elem(item);
        if (!e) throw Error(Errc::InvalidSpec, "'" + item + "' is not an element");
        out.push_back(*e);
    }
    return out;
}

json read_json(const std::string& path) {
    std::stringstream ss;
    if (path == "-") {
        ss << std::cin.rdbuf();
    } else {
        std::ifstream in(path);
        if (!in) throw Error(Errc::ParseError, "cannot read '" + path + "'");
        ss << in.rdbuf();
    }
    try {
        return json::parse(ss.str());
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad json: ") + e.what());
    }
}

// nullopt when no verifier exists for the row.
std::optional<bool> refails(const json& row, const System* model) {
    const json& w = row.contains("witness") ? row["witness"] : row;
    if (w.is_object() && w.contains("axiom") && w.contains("instance")) {
        if (!model) throw Error(Errc::InvalidSpec, "axiom witnesses need --model");
        return witness_refails(*model, w);
    }
    if (row.contains("check-id") && uncond_prop_from_slug(row["check-id"].get<std::string>()))
        return uncond_witness_refails(w);
    return std::nullopt;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Checks for summation systems"};
    app.require_subcommand(1);
    Common c;

    std::string model, suite = "axioms", group, space, sets, subgroup, witness, field = "f2", ideal, below, out_path;
    std::vector<std::string> params;
    std::size_t points = 2, n = 0;
    bool list = false;

    auto* check = app.add_subcommand("check", "run a suite of checks");
    check->add_option("--model", model, "model reference");
    check->add_option("--suite", suite, "suite name")->check(CLI::IsMember(suite_names()));
    check->add_option("--param", params, "k=v model parameter");
    check->add_option("--points", points, "carrier size for the phi suite");
    add_common(check, c);

    auto* phi_cmd = app.add_subcommand("phi", "the induced self-map on a finite space");
    phi_cmd->add_option("--space", space, "trivial:n, discrete:n or n:<opens>")->required();
    phi_cmd->add_option("--group", group, "group on the points (default cyclic)");
    add_common(phi_cmd, c);

    auto* psi_cmd = app.add_subcommand("psi", "the closure of a set system under unconditional summation");
    psi_cmd->add_option("--group", group, "finite abelian group")->required();
    psi_cmd->add_option("--sets", sets, "set system, e.g. \"{0}, {0,2}\"")->required();
    add_common(psi_cmd, c);

    auto* quot = app.add_subcommand("quotient", "quotient by a subgroup or an endomorphism ideal");
    quot->add_option("--model", model, "model reference, or endo");
    quot->add_option("--subgroup", subgroup, "subgroup elements, e.g. 0,2");
    quot->add_option("--param", params, "k=v model parameter");
    quot->add_option("--field", field, "f2, f3, ... or q for endo");
    quot->add_option("--ideal", ideal, "zero, finite-rank or full for endo");
    quot->add_option("--below", below, "restrict endo sums to fewer than this many nonzero members (a number or omega)");
    add_common(quot, c);

    auto* topo_cmd = app.add_subcommand("enumerate-topologies", "all topologies on n points");
    topo_cmd->add_option("n", n, "number of points (at most 5)")->required();
    topo_cmd->add_flag("--list", list, "print every topology");
    add_common(topo_cmd, c);

    auto* build = app.add_subcommand("build", "materialize a model over the bounded universe");
    build->add_option("--model", model, "model name or reference")->required();
    build->add_option("--group", group, "group parameter");
    build->add_option("--param", params, "k=v model parameter");
    build->add_option("--out", out_path, "write the model file here");
    add_common(build, c);

    auto* verify = app.add_subcommand("verify-witness", "re-evaluate failing witnesses of a report");
    verify->add_option("--witness", witness, "report, row or witness JSON file, - for stdin")->required();
    verify->add_option("--model", model, "model reference (default: the report's model)");
    add_common(verify, c);

    auto* schema = app.add_subcommand("report-schema", "print the report schema");

    std::vector<std::string> argv_store = {"sigma"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        std::map<std::string, std::string> pm;
        for (auto& p : params) {
            auto m = parse_params(p);
            pm.insert(m.begin(), m.end());
        }
        if (!group.empty() && (*build || *check)) pm["group"] = group;
        Bounds bounds = Bounds::parse(c.bounds);

        if (*schema) {
            out << report_schema().dump(2) << "\n";
            return 0;
        }

        if (*check) {
            std::optional<System> sys;
            if (!model.empty()) sys = resolve_model(model, pm);
            SuiteOptions o;
            o.bounds = bounds;
            o.seed = c.seed;
            o.window = c.window;
            o.points = points;
            auto rows = run_suite(suite, sys ? &*sys : nullptr, o);
            json doc = {{"command", "check"}, {"suite", suite}, {"model", model.empty() ? json(nullptr) : json(model)}};
            return emit_reports(out, c, doc, rows);
        }

        if (*phi_cmd) {
            Topology t = parse_space(space);
            Carrier g = group.empty() ? Carrier::cyclic(t.size()) : Carrier::from_group_name(group);
            if (g.size() != t.size())
                throw Error(Errc::InvalidSpec, "group has " + std::to_string(g.size()) + " elements, space has " + std::to_string(t.size()));
            Topology p = phi(t, g);
            json doc = {{"command", "phi"},
                        {"space", t.to_json()},
                        {"group", group.empty() ? "z" + std::to_string(t.size()) : group},
                        {"phi", p.to_json()},
                        {"t1", p.is_t1()},
                        {"discrete", p.is_discrete()},
                        {"trivial", p.is_trivial()},
                        {"extensive", t.coarser_than(p)}};
            std::ostringstream text;
            text << "space: " << t.str() << "\n";
            text << "phi:   " << p.str() << "\n";
            text << "t1: " << (p.is_t1() ? "yes" : "no") << ", discrete: " << (p.is_discrete() ? "yes" : "no")
                 << ", contains the space: " << (t.coarser_than(p) ? "yes" : "no") << "\n";
            emit_doc(out, c.format, doc, text.str());
            return 0;
        }

        if (*psi_cmd) {
            Carrier g = Carrier::from_group_name(group);
            SetSystem a = SetSystem::parse(g, sets);
            SetSystem p = psi(a);
            json doc = {{"command", "psi"},  {"group", group},           {"sets", a.to_json()},
                        {"psi", p.to_json()}, {"filter", p.is_filter()}, {"unique_sums", unique_sums(a)}};
            std::ostringstream text;
            text << "A:      " << a.str() << "\n";
            text << "psi(A): " << p.str() << "\n";
            text << "filter: " << (p.is_filter() ? "yes" : "no") << ", unique sums: " << (unique_sums(a) ? "yes" : "no") << "\n";
            emit_doc(out, c.format, doc, text.str());
            return 0;
        }

        if (*quot) {
            if (model == "endo") {
                Field f = field == "q" ? Field::rationals()
                                       : Field::prime(std::uint32_t(std::stoul(field.substr(field[0] == 'f' ? 1 : 0))));
                auto id = endo_ideal_from_name(ideal.empty() ? "zero" : ideal);
                if (!id) throw Error(Errc::InvalidSpec, "unknown ideal '" + ideal + "'");
                EndoSystem s = endo_system(f);
                if (!below.empty())
                    s = restricted_system(s, below == "omega" ? std::nullopt : std::optional<Index>(std::stoull(below)));
                EndoClosedCertificate cert = is_sigma_closed(s, *id, c.window);
                json doc = {{"command", "quotient"}, {"model", "endo"}, {"field", f.name()}, {"certificate", cert.to_json()}};
                int code = 0;
                try {
                    endo_quotient(s, *id, c.window);
                    doc["quotient"] = "defined";
                } catch (const Error& e) {
                    if (e.code() != Errc::NotAFunction) throw;
                    doc["quotient"] = "not a function";
                    doc["witness"] = e.detail();
                    code = 1;
                }
                std::ostringstream text;
                text << "ideal " << endo_ideal_name(*id) << " over " << f.name() << ": "
                     << (cert.closed ? "sigma-closed" : "not sigma-closed") << "\n";
                if (code) text << "quotient is not a function: " << doc["witness"].dump() << "\n";
                else text << "quotient defined\n";
                emit_doc(out, c.format, doc, text.str());
                return code;
            }
            if (model.empty() || subgroup.empty()) throw Error(Errc::InvalidSpec, "quotient needs --model and --subgroup");
            System s = resolve_model(model, pm);
            const Carrier& g = s.carrier();
            Mask m = 0;
            for (Elem e : parse_elements(subgroup, g)) m |= bit(e);
            SigmaClosedCertificate cert = is_sigma_closed(s, m, bounds, c.seed);
            json doc = {{"command", "quotient"}, {"model", model}, {"subgroup", g.mask_str(m)}, {"certificate", cert.to_json(g)}};
            std::ostringstream text;
            text << "subgroup " << g.mask_str(m) << ": " << (cert.closed ? "sigma-closed" : "not sigma-closed") << "\n";
            int code = 0;
            try {
                QuotientSystem q = quotient_system(s, m, bounds);
                json cosets = json::array();
                for (Mask k : q.cosets) cosets.push_back(g.mask_str(k));
                doc["cosets"] = cosets;
                doc["quotient"] = "defined";
                text << "cosets:";
                for (Mask k : q.cosets) text << " " << g.mask_str(k);
                text << "\n";
            } catch (const Error& e) {
                if (e.code() != Errc::NotAFunction && e.code() != Errc::HypothesisNotMet) throw;
                doc["quotient"] = e.code() == Errc::NotAFunction ? "not a function" : "hypothesis not met";
                doc["witness"] = e.detail();
                doc["message"] = e.what();
                text << e.what() << "\n";
                if (!e.detail().is_null()) text << "witness: " << e.detail().dump() << "\n";
                code = 1;
            }
            emit_doc(out, c.format, doc, text.str());
            return code;
        }

        if (*topo_cmd) {
            auto ts = enumerate_topologies(n);
            json doc = {{"command", "enumerate-topologies"}, {"n", n}, {"count", ts.size()}};
            std::ostringstream text;
            text << ts.size() << " topologies on " << n << " points\n";
            if (list) {
                json arr = json::array();
                for (auto& t : ts) {
                    arr.push_back(t.to_json()["opens"]);
                    text << "  " << t.str() << "\n";
                }
                doc["topologies"] = arr;
            }
            emit_doc(out, c.format, doc, text.str());
            return 0;
        }

        if (*build) {
            System s = resolve_model(model, pm);
            const Carrier& g = s.carrier();
            if (!g.finite()) throw Error(Errc::InvalidSpec, "only models over finite carriers can be materialized");
            ModelFile mf;
            mf.name = s.name();
            mf.names = g.names();
            if (g.has_add()) mf.add = g.add_table();
            if (g.has_mul()) {
                mf.mul = g.mul_table();
                mf.one = g.one();
            }
            mf.traits = s.traits();
            mf.traits_given = true;
            for (auto& f : universe(s, bounds))
                if (auto v = s.query(f)) mf.sigma.emplace_back(f, *v);
            std::string text = write_model(mf);
            if (!out_path.empty()) {
                std::ofstream o(out_path);
                if (!o) throw Error(Errc::InvalidSpec, "cannot write '" + out_path + "'");
                o << text;
            }
            json doc = {{"command", "build"}, {"model", model}, {"params", pm}, {"carrier", g.names()},
                        {"pairs", mf.sigma.size()}, {"bounds", bounds.to_json()}, {"file", text}};
            emit_doc(out, c.format, doc, out_path.empty() ? text : "wrote " + std::to_string(mf.sigma.size()) + " pairs to " + out_path + "\n");
            return 0;
        }

        if (*verify) {
            json doc = read_json(witness);
            std::string ref = model;
            if (ref.empty() && doc.is_object() && doc.contains("model") && doc["model"].is_string()) ref = doc["model"];
            std::optional<System> sys;
            if (!ref.empty()) sys = resolve_model(ref, pm);
            std::vector<json> rows;
            if (doc.is_object() && doc.contains("reports")) {
                for (auto& r : doc["reports"])
                    if (r.value("verdict", "") == "fail") rows.push_back(r);
            } else {
                rows.push_back(doc);
            }
            json results = json::array();
            bool any = false;
            std::ostringstream text;
            for (auto& r : rows) {
                auto v = refails(r, sys ? &*sys : nullptr);
                std::string id = r.value("check-id", std::string("witness"));
                if (!v) throw Error(Errc::InvalidSpec, "no verifier for check '" + id + "'");
                any = any || *v;
                results.push_back({{"check-id", id}, {"refails", *v}});
                text << id << ": " << (*v ? "still fails" : "no longer fails") << "\n";
            }
            emit_doc(out, c.format, {{"command", "verify-witness"}, {"results", results}}, text.str());
            return any ? 1 : 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        if (!e.detail().is_null()) err << e.detail().dump() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace sigma
