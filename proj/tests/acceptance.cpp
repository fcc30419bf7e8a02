// One line per acceptance criterion; exits 1 when any of them fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sigma/endo.hpp"
#include "sigma/models.hpp"
#include "sigma/quotient.hpp"
#include "sigma/suites.hpp"
#include "sigma/topo.hpp"
#include "sigma/uncond.hpp"

using namespace sigma;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

void all_pass(Outcome& o, const std::vector<CheckReport>& rows) {
    for (auto& r : rows)
        if (!r.pass()) o.fail(r.id + " " + r.witness.dump());
}

int failures = 0;

void criterion(int n, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.fail(std::string("raised ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > budget_s) o.fail("over the " + std::to_string(int(budget_s)) + " s budget");
    if (!o.pass) ++failures;
    std::printf("%s %2d %-28s %8.2f s  %s\n", o.pass ? "PASS" : "FAIL", n, name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
}

const char* mark(bool b) { return b ? "y" : "n"; }

}  // namespace

int main() {
    criterion(1, "independence table", 1, [] {
        Outcome o;
        auto rows = independence_rows();
        all_pass(o, rows);
        for (auto& f : independence_fixtures()) {
            bool a1 = check_axiom(f.system, AxiomId::ReindexInvariance).pass();
            bool a2 = check_axiom(f.system, AxiomId::SubsSummable).pass();
            if (a1 != f.reindex || a2 != f.subfamilies) o.fail(f.name + " verdicts differ");
            if (o.pass) o.detail += f.name + "=(" + mark(a1) + "," + mark(a2) + ") ";
        }
        if (rows.size() != 4) o.fail("expected 4 fixtures");
        return o;
    });

    criterion(2, "zero-extension closures", 30, [] {
        Outcome o;
        CheckReport r = zero_closure_sweep();
        all_pass(o, {r});
        if (o.pass) o.detail = r.bounds.dump();
        return o;
    });

    criterion(3, "finite-extension closure", 5, [] {
        Outcome o;
        CheckReport r = finite_extension_check();
        all_pass(o, {r});
        if (o.pass) o.detail = "compared " + r.bounds["compared"].dump() + " families";
        return o;
    });

    criterion(4, "swindles", 1, [] {
        Outcome o;
        auto rows = swindle_rows();
        all_pass(o, rows);
        if (o.pass) o.detail = std::to_string(rows.size()) + " rows";
        return o;
    });

    criterion(5, "induced self-map", 60, [] {
        Outcome o;
        const std::size_t expect[] = {0, 1, 4, 29};
        for (std::size_t n = 1; n <= 3; ++n) {
            auto ts = enumerate_topologies(n);
            if (ts.size() != expect[n]) o.fail("n=" + std::to_string(n) + " has " + std::to_string(ts.size()) + " topologies");
            Carrier g = Carrier::cyclic(n);
            for (auto& t : ts) {
                Topology p = phi(t, g);
                if (!t.coarser_than(p)) o.fail("not extensive at " + t.str());
                if (!p.is_t1()) o.fail("not T1 at " + t.str());
                if (!(phi(p, g) == p)) o.fail("not idempotent at " + t.str());
            }
        }
        auto four = enumerate_topologies(4);
        std::mt19937_64 rng(1);
        Carrier z4 = Carrier::cyclic(4), klein = Carrier::from_group_name("klein");
        const int samples = 8;
        for (int k = 0; k < samples; ++k) {
            const Topology& t = four[rng() % four.size()];
            if (!(phi(t, z4) == phi(t, klein))) o.fail("Z/4 and Klein differ at " + t.str());
        }
        if (o.pass) o.detail = "counts 1, 4, 29; " + std::to_string(samples) + " of " + std::to_string(four.size()) + " four-point samples agree";
        return o;
    });

    criterion(6, "trivial-topology example", 10, [] {
        Outcome o;
        if (!(phi(Topology::trivial(1), Carrier::cyclic(1)) == Topology::discrete(1))) o.fail("case 1");
        TrivialExample two = trivial_topology_example(2);
        if (two.summable != std::vector<Family>{Family::empty()}) o.fail("case 2: more than the empty family is summable");
        if (!two.sigma.is_discrete()) o.fail("case 2: sigma topology not discrete");
        if (two.topologies != 4) o.fail("case 2a: expected exactly four topologies");
        if (!(two.full == Topology::trivial(2)) || two.full == two.sigma) o.fail("case 2a: full topology is not the trivial one");
        TrivialExample three = trivial_topology_example(3);
        if (!three.full.is_discrete()) o.fail("case 2b: full topology not discrete");
        if (o.pass) o.detail = "cases 1, 2, 2a, 2b";
        return o;
    });

    criterion(7, "induced summation facts", 60, [] {
        Outcome o;
        const TopoTheoremId ids[] = {TopoTheoremId::InducedEmptySum,           TopoTheoremId::InducedOrdinalReindexing,
                                     TopoTheoremId::InducedInitialSummability, TopoTheoremId::InducedPostfix,
                                     TopoTheoremId::InducedLimitsAreTauLimits, TopoTheoremId::InducedPostfixBiconditional,
                                     TopoTheoremId::InducedZeroTails,          TopoTheoremId::InducedCofinalSubsequences};
        for (std::size_t n = 1; n <= 3; ++n)
            for (TopoTheoremId id : ids) {
                TopoScope scope;
                scope.n = n;
                CheckReport r = check_topo_theorem(id, scope);
                if (!r.pass()) o.fail(topo_theorem_slug(id) + " n=" + std::to_string(n) + " " + r.witness.dump());
            }
        if (o.pass) o.detail = "8 items on n = 1, 2, 3";
        return o;
    });

    criterion(8, "unconditional sums", 120, [] {
        Outcome o;
        UncondScope scope;
        for (UncondPropId id : {UncondPropId::ClosedForm, UncondPropId::ZeroIntersectionTrio, UncondPropId::TuUniqueness,
                                UncondPropId::PartitionSums, UncondPropId::SystemAxioms, UncondPropId::DeletedNeighborhoods,
                                UncondPropId::FilterContainsNeighborhoods, UncondPropId::PsiClosureOperator,
                                UncondPropId::PsiGroupDependence})
            all_pass(o, {check_uncond_prop(id, scope)});
        UncondScope small;
        small.groups = {"z2", "z3", "z4", "klein"};
        all_pass(o, {check_uncond_prop(UncondPropId::PsiExtensiveIdempotent, small)});
        if (o.pass) o.detail = "groups z2 z3 z4 z6, psi on z2 z3 z4 klein";
        return o;
    });

    criterion(9, "sum-Cauchy", 30, [] {
        Outcome o;
        for (UncondPropId id : {UncondPropId::SumCauchyClosedForm, UncondPropId::SumCauchyNecessary, UncondPropId::SumCauchySufficiency})
            all_pass(o, {check_uncond_prop(id)});
        return o;
    });

    criterion(10, "endomorphisms", 30, [] {
        Outcome o;
        auto rows = endo_rows(32);
        all_pass(o, rows);
        for (auto& r : rows)
            if (r.id == "reorder-left-reorderability" && r.bounds.value("configurations", 0) < 10)
                o.fail("fewer than 10 left-reorder configurations");
        if (o.pass) o.detail = std::to_string(rows.size()) + " rows, window 32";
        return o;
    });

    criterion(11, "quotients", 60, [] {
        Outcome o;
        for (QuotientTheoremId id : all_quotient_theorems()) all_pass(o, {check_quotient_theorem(id)});
        EndoSystem e = endo_system(Field::prime(2));
        EndoClosedCertificate fr = is_sigma_closed(e, EndoIdeal::FiniteRank);
        if (fr.closed || fr.witness != "diag") o.fail("finite-rank ideal should fail on the diagonal family");
        if (!is_sigma_closed(restricted_system(e, std::nullopt), EndoIdeal::FiniteRank).closed)
            o.fail("finite-rank ideal should be closed for finite sums");
        return o;
    });

    criterion(12, "rational series", 10, [] {
        Outcome o;
        auto rows = series_rows(1, 50);
        all_pass(o, rows);
        if (o.pass) o.detail = std::to_string(rows.size()) + " rows, 50 product pairs";
        return o;
    });

    return failures ? 1 : 0;
}
