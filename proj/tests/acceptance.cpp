// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if
// any criterion fails.

#include "nonterm/abstraction/exactness.hpp"
#include "nonterm/analysis/analyze.hpp"
#include "nonterm/bytecode/desugar.hpp"
#include "nonterm/bytecode/parser.hpp"
#include "nonterm/clp/text.hpp"
#include "corpus.hpp"
#include "golden.hpp"
#include "suites.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>

using namespace nonterm;

namespace {

struct Result {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

bc::Program load(const std::string& file) { return bc::desugar_ifne(bc::parse_program(read_corpus(file))); }

Result ac1() {
    Result r;
    clp::ClpProgram p = clp::compile_program(load("sum.jbc"));
    r.require(p.clauses.size() == golden::kSumClauses.size(), std::to_string(p.clauses.size()) + " clauses");
    int ok = 0;
    for (size_t i = 0; i < std::min(p.clauses.size(), golden::kSumClauses.size()); ++i) {
        clp::Clause want = clp::parse_clause(golden::kSumClauses[i]);
        bool eq = clp::alpha_equivalent(p.clauses[i], want) && p.clauses[i] == want;
        ok += eq;
        r.require(eq, "clause " + std::to_string(i + 1) + " is " + p.clauses[i].str());
    }
    if (r.pass) r.detail = std::to_string(ok) + "/12 clauses match";
    return r;
}

Result ac2() {
    Result r;
    binunf::BinClauseSet s = binunf::unfold(clp::compile_program(load("sum.jbc")), 4);
    for (const auto& g : golden::kUnfolded) {
        auto it = s.index.find(clp::alpha_key(clp::alpha_normal(clp::parse_clause(g.text))));
        r.require(it != s.index.end(), std::string(g.name) + " missing");
        if (it != s.index.end())
            r.require(s.clauses[it->second].iteration == g.iteration,
                      std::string(g.name) + " at iteration " + std::to_string(s.clauses[it->second].iteration));
    }
    if (r.pass) r.detail = "u1..u6 at iterations 1,1,2,2,3,4 among " + std::to_string(s.clauses.size()) + " clauses";
    return r;
}

Result ac3() {
    Result r;
    analysis::Verdict v = analysis::analyze(load("sum.jbc"), "Sum.main");
    r.require(v.nonterminating, "verdict UNKNOWN");
    if (!r.pass) return r;
    const auto& w = v.witnesses.front();
    auto set = analysis::named_set(w.set, v.program);
    r.require(set.constraints == poly::parse_polyhedron("il0 <= -1").constraints,
              "recurrent set " + analysis::set_text(set));
    r.require(w.reach && w.reach->head.pred == "main", "reach clause not headed by main");
    if (r.pass) r.detail = "recurrent set {" + analysis::set_text(set) + "}, reached from main, " + analysis::mode_name(w.mode);
    return r;
}

Result ac4() {
    Result r;
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(NONTERM_CORPUS_DIR))
        if (e.path().extension() == ".jbc") files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    int verdicts = 0, runs = 0;
    for (const auto& f : files) {
        bc::Program p;
        try {
            p = load(f);
        } catch (const std::exception&) {
            continue;
        }
        if (!bc::validate(p).empty()) continue;
        for (const auto& m : p.methods) {
            analysis::Verdict v = analysis::analyze(p, m.sig.qualified());
            if (!v.nonterminating) continue;
            ++verdicts;
            for (const auto& w : v.witnesses) {
                ++runs;
                auto out = analysis::corroborate(p, v, w, 10000);
                r.require(out.kind == interp::RunOutcome::Kind::BudgetExceeded, f + " " + m.sig.qualified() + " halts or gets stuck");
            }
        }
    }
    r.require(verdicts > 0, "no NONTERMINATING verdicts in the corpus");
    if (r.pass) r.detail = std::to_string(runs) + " witnesses over " + std::to_string(verdicts) + " verdicts exceed 10^4 steps";
    return r;
}

Result ac5() {
    Result r;
    int families = 0;
    for (auto fam : abs::all_families()) {
        auto rep = abs::family_check(fam, 100, 1 + static_cast<std::uint64_t>(fam));
        r.require(rep.trials == 100 && rep.passes == 100,
                  abs::family_name(fam) + " " + std::to_string(rep.passes) + "/" + std::to_string(rep.trials));
        ++families;
    }
    auto g = abs::getfield_fixture(100, 1);
    r.require(g.first_failure.has_value(), "getfield fixture found no counterexample");
    if (r.pass)
        r.detail = std::to_string(families) + " families at 100/100; getfield " + std::to_string(g.trials - g.passes) +
                   " counterexamples";
    return r;
}

Result ac6() {
    Result r;
    auto rep = abs::sequence_check(50, 1);
    r.require(rep.trials == 50 && rep.passes == 50, std::to_string(rep.passes) + "/" + std::to_string(rep.trials));
    if (r.pass) r.detail = "50/50 sequences";
    return r;
}

Result ac7() {
    Result r;
    auto t0 = std::chrono::steady_clock::now();
    std::string d;
    for (auto [name, o] : {std::pair{"sat", suites::engine_sat()}, std::pair{"eliminate", suites::engine_eliminate()},
                           std::pair{"entails", suites::engine_entails()}}) {
        r.require(o.ok() && o.cases == 200, std::string(name) + ": " + o.first);
        d += std::string(d.empty() ? "" : ", ") + name + " " + std::to_string(o.cases - o.failures) + "/" + std::to_string(o.cases);
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.require(s < 60, "took " + std::to_string(s) + " s");
    if (r.pass) r.detail = d;
    return r;
}

Result ac8() {
    Result r;
    auto o = suites::criterion_oracle();
    r.require(o.ok() && o.cases == 50, o.first);
    clp::Clause open = clp::parse_clause("p(il0) :- il0 >= 0, p(is0).");
    auto e = analysis::recurrent_set(open);
    r.require(e && analysis::check_existential(open, *e) && !analysis::check_universal(open, *e),
              "p(x) :- x >= 0, p(y) should be existential only");
    if (r.pass)
        r.detail = "50 loops agree (" + std::to_string(o.counts["universal"]) + " universal, " +
                   std::to_string(o.counts["existential"]) + " existential sets); x >= 0 loop existential only";
    return r;
}

Result ac9() {
    Result r;
    const std::vector<std::pair<std::string, std::string>> cases = {{"countdown.jbc", "Count.down"},
                                                                     {"bounded_sum.jbc", "BSum.main"},
                                                                     {"straight.jbc", "Line.run"},
                                                                     {"upto.jbc", "Upto.main"},
                                                                     {"guards.jbc", "Guard.g"}};
    std::string d;
    for (const auto& [f, entry] : cases) {
        auto v = analysis::analyze(load(f), entry);
        r.require(!v.nonterminating, f + " reported NONTERMINATING");
        d += std::string(d.empty() ? "" : ", ") + f.substr(0, f.find('.')) + " " + analysis::reason_name(v.reason);
    }
    if (r.pass) r.detail = d;
    return r;
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* title;
        Result (*run)();
        double limit_s;
    };
    const Criterion all[] = {
        {"AC1", "golden CLP translation", ac1, 1},
        {"AC2", "golden unfolding", ac2, 5},
        {"AC3", "end-to-end verdict", ac3, 5},
        {"AC4", "witness corroboration", ac4, 0},
        {"AC5", "per-instruction exactness", ac5, 0},
        {"AC6", "composition exactness", ac6, 0},
        {"AC7", "constraint engine oracle", ac7, 60},
        {"AC8", "criterion oracle", ac8, 0},
        {"AC9", "soundness corpus", ac9, 0},
    };
    int failed = 0;
    for (const auto& c : all) {
        auto t0 = std::chrono::steady_clock::now();
        Result r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0 && s >= c.limit_s && r.pass) {
            r.pass = false;
            r.detail = "over the " + std::to_string(static_cast<int>(c.limit_s)) + " s limit";
        }
        failed += !r.pass;
        std::cout << c.id << " " << (r.pass ? "PASS" : "FAIL") << "  " << c.title << ": " << r.detail << "  ["
                  << std::fixed << std::setprecision(2) << s << " s]" << std::endl;
    }
    return failed ? 1 : 0;
}
