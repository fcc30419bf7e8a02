#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sigma/cli.hpp"
#include "sigma/modelfile.hpp"

using namespace sigma;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
    json doc() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "sigma-cli-test";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("finitary Z/4 axioms report") {
    Run r = run({"check", "--model", "builtin:finitary-z4", "--suite", "axioms", "--format", "json"});
    CHECK(r.code == 0);
    json d = r.doc();
    CHECK(d["pass"] == true);
    CHECK(d["command"] == "check");
    REQUIRE(d["reports"].size() == 19);
    std::string prev;
    for (auto& row : d["reports"]) {
        // note is only written when there is one
        for (const char* key : {"check-id", "verdict", "witness", "bounds", "millis"}) CHECK(row.contains(key));
        CHECK(row["verdict"] == "pass-within-bounds");
        CHECK(row["check-id"].get<std::string>() >= prev);
        prev = row["check-id"];
    }
}

TEST_CASE("deterministic output is byte-identical") {
    std::vector<std::string> args = {"check", "--model", "builtin:choice:size=2", "--suite", "axioms", "--format", "json", "--deterministic"};
    Run a = run(args), b = run(args);
    CHECK(a.out == b.out);
    json da = a.doc();
    for (auto& row : da["reports"]) CHECK(row["millis"] == 0);
    Run t1 = run({"check", "--model", "builtin:finitary-z2", "--suite", "independence-table", "--deterministic"});
    Run t2 = run({"check", "--model", "builtin:finitary-z2", "--suite", "independence-table", "--deterministic"});
    CHECK(t1.out == t2.out);
}

TEST_CASE("failing reports and witness replay") {
    Run r = run({"check", "--model", "builtin:choice:size=2", "--suite", "axioms", "--format", "json", "--deterministic"});
    CHECK(r.code == 1);
    fs::path report = scratch("choice.json");
    write_file(report, r.out);
    Run v = run({"verify-witness", "--witness", report.string()});
    CHECK(v.code == 1);

    json reindex, d = r.doc();
    for (auto& row : d["reports"])
        if (row["check-id"] == "reindex-invariance") reindex = row;
    REQUIRE(reindex["verdict"] == "fail");
    fs::path row = scratch("reindex-row.json");
    write_file(row, reindex.dump());
    CHECK(run({"verify-witness", "--witness", row.string(), "--model", "builtin:choice:size=2"}).code == 1);
    // the same witness is harmless for a system where the axiom holds
    CHECK(run({"verify-witness", "--witness", row.string(), "--model", "builtin:finitary-z2"}).code == 0);
}

TEST_CASE("usage and specification errors exit 2") {
    CHECK(run({"check", "--bogus"}).code == 2);
    CHECK(run({"check", "--model", "builtin:finitary-z4", "--suite", "nope"}).code == 2);
    CHECK(run({"check", "--model", "builtin:no-such-model", "--suite", "axioms"}).code == 2);
    CHECK(run({"phi", "--space", "sideways:2"}).code == 2);
    CHECK(run({"enumerate-topologies", "9"}).code == 2);

    fs::path bad = scratch("conflict.model");
    write_file(bad, "carrier: 2\nsigma:\n  () -> 0\n  () -> 1\n");
    Run r = run({"check", "--model", bad.string(), "--suite", "axioms"});
    CHECK(r.code == 2);
    CHECK(r.err.find("FunctionhoodConflict") != std::string::npos);
}

TEST_CASE("report schema") {
    Run r = run({"report-schema"});
    CHECK(r.code == 0);
    json s = r.doc();
    json verdict = s["properties"]["reports"]["items"]["properties"]["verdict"];
    CHECK(verdict["enum"] == json::array({"pass-within-bounds", "fail"}));
    CHECK(report_schema() == s);
}

TEST_CASE("topology commands") {
    Run e = run({"enumerate-topologies", "4", "--format", "json"});
    CHECK(e.code == 0);
    CHECK(e.doc()["count"] == 355);
    Run p = run({"phi", "--space", "trivial:2", "--group", "z2", "--format", "json"});
    CHECK(p.code == 0);
    CHECK(p.doc()["discrete"] == true);
    CHECK(run({"phi", "--space", "3:{}, {1}, {0,1,2}", "--format", "json"}).code == 0);
}

TEST_CASE("psi and quotient commands") {
    Run p = run({"psi", "--group", "z4", "--sets", "{0}", "--format", "json"});
    CHECK(p.code == 0);
    Run q = run({"quotient", "--model", "builtin:finitary-z8", "--subgroup", "0,4", "--format", "json"});
    CHECK(q.code == 0);
    CHECK(q.doc().dump().find("cosets") != std::string::npos);
    CHECK(run({"quotient", "--model", "endo", "--ideal", "finite-rank", "--window", "16"}).code == 1);
    CHECK(run({"quotient", "--model", "endo", "--ideal", "finite-rank", "--below", "omega", "--window", "16"}).code == 0);
}

TEST_CASE("build writes a loadable model") {
    fs::path out = scratch("z2.model");
    Run b = run({"build", "--model", "finitary-group", "--group", "z2", "--out", out.string()});
    CHECK(b.code == 0);
    ModelFile m = load_model(out.string());
    CHECK(m.names.size() == 2);
    CHECK(!m.sigma.empty());
    CHECK(parse_model(write_model(m)) == m);
    Run c = run({"check", "--model", out.string(), "--suite", "axioms", "--format", "json"});
    CHECK(c.code != 2);
    CHECK(c.doc()["reports"].size() > 0);
}

TEST_CASE("builtin references") {
    CHECK(resolve_model("builtin:finitary-z4").carrier().size() == 4);
    CHECK(resolve_model("builtin:multiset-2").name() == "multiset-monoid");
    CHECK(resolve_model("choice", {{"size", "2"}}).carrier().size() == 2);
    CHECK_THROWS_AS(resolve_model("builtin:finitary-q8"), Error);
}
