#include "nonterm/abstraction/exactness.hpp"
#include "nonterm/binunf/unfold.hpp"
#include "nonterm/bytecode/parser.hpp"
#include "nonterm/clp/compile.hpp"
#include "corpus.hpp"
#include "golden.hpp"

#include <gtest/gtest.h>

#include <deque>

using namespace nonterm;
using namespace nonterm::clp;
using namespace nonterm::binunf;

namespace {

ClpProgram sum_clp() { return compile_program(bc::parse_program(read_corpus("sum.jbc"))); }

const BinClause* lookup(const BinClauseSet& s, const std::string& text) {
    auto it = s.index.find(alpha_key(alpha_normal(parse_clause(text))));
    return it == s.index.end() ? nullptr : &s.clauses[it->second];
}


// Leftmost-selection derivations over constraint stores: does some prefix
// starting from goal `from` reach a leftmost call to `to`'s predicate
// whose arguments can take the values in `target`?
bool derivable(const ClpProgram& p, const Atom& from, const Atom& to, const poly::Polyhedron& binding, int depth) {
    struct Goal {
        std::vector<Atom> atoms;
        poly::Polyhedron store;
        int depth;
    };
    std::deque<Goal> work{{{from}, binding, 0}};
    int serial = 0;
    while (!work.empty()) {
        Goal g = std::move(work.front());
        work.pop_front();
        if (g.atoms.empty()) continue;
        const Atom& a = g.atoms.front();
        if (a.pred == to.pred && g.depth > 0) {
            poly::Polyhedron s = g.store;
            for (size_t k = 0; k < a.args.size(); ++k) s.add(poly::LinearConstraint::same(a.args[k], to.args[k]));
            if (poly::sat_int(s)) return true;
        }
        if (g.depth == depth) continue;
        for (const auto& c : p.clauses) {
            if (c.head.pred != a.pred) continue;
            Clause r = binunf::detail::apart(c, "$d" + std::to_string(serial++));
            Goal n{{}, poly::conjoin(g.store, r.constraint), g.depth + 1};
            for (size_t k = 0; k < a.args.size(); ++k) n.store.add(poly::LinearConstraint::same(a.args[k], r.head.args[k]));
            if (!poly::sat_int(n.store)) continue;
            n.atoms = r.body;
            n.atoms.insert(n.atoms.end(), g.atoms.begin() + 1, g.atoms.end());
            work.push_back(std::move(n));
        }
    }
    return false;
}

}  // namespace

TEST(Unfold, IdClause) {
    Clause c = id_clause("sum", 2);
    EXPECT_EQ(c.str(), "sum(v0, v1) :- v0 = v2, v1 = v3, sum(v2, v3).");
    Clause z = id_clause("p", 0);
    EXPECT_EQ(z.str(), "p() :- p().");
}

TEST(Unfold, GoldenIterations) {
    auto t0 = std::chrono::steady_clock::now();
    BinClauseSet s = unfold(sum_clp(), 4);
    EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(5));
    for (const auto& g : golden::kUnfolded) {
        const BinClause* b = lookup(s, g.text);
        ASSERT_NE(b, nullptr) << g.name << " missing";
        EXPECT_EQ(b->iteration, g.iteration) << g.name;
    }
    for (const auto& b : s.clauses) {
        EXPECT_LE(b.clause.body.size(), 1u);
        EXPECT_TRUE(poly::sat_int(b.clause.constraint)) << b.clause.str();
    }
}

TEST(Unfold, FirstIteration) {
    BinClauseSet s = unfold(sum_clp(), 1);
    EXPECT_NE(lookup(s, golden::kUnfolded[0].text), nullptr);
    EXPECT_NE(lookup(s, golden::kUnfolded[1].text), nullptr);
    EXPECT_EQ(lookup(s, golden::kUnfolded[2].text), nullptr);
    // the three facts of the source program
    int facts = 0;
    for (const auto& b : s.clauses) facts += b.clause.is_fact();
    EXPECT_EQ(facts, 3);
}

TEST(Unfold, Monotone) {
    ClpProgram p = sum_clp();
    BinClauseSet prev = unfold(p, 1);
    for (int k = 2; k <= 5; ++k) {
        BinClauseSet cur = unfold(p, k);
        for (const auto& b : prev.clauses) {
            auto it = cur.index.find(alpha_key(b.clause));
            ASSERT_NE(it, cur.index.end()) << b.clause.str();
            EXPECT_EQ(cur.clauses[it->second].iteration, b.iteration);
        }
        prev = std::move(cur);
    }
}

TEST(Unfold, NaiveAgreesWithIncremental) {
    // Recompute each power from scratch and compare with the tagged result.
    ClpProgram p = sum_clp();
    BinClauseSet x;
    for (int k = 1; k <= 4; ++k) {
        BinClauseSet next;
        tbeta_step(p, x, k, std::nullopt, {}, next);
        x = std::move(next);
    }
    BinClauseSet y = unfold(p, 4);
    EXPECT_EQ(x.clauses.size(), y.clauses.size());
    for (const auto& b : x.clauses) EXPECT_TRUE(y.index.count(alpha_key(b.clause))) << b.clause.str();
}

TEST(Unfold, FactsOnly) {
    ClpProgram p;
    p.clauses.push_back(parse_clause("a(il0) :- il0 >= 1."));
    p.clauses.push_back(parse_clause("b(il0) :- il0 >= 1, il0 <= 0."));
    p.clauses.push_back(parse_clause("c(il0, il1) :- il0 = il1."));
    BinClauseSet s = unfold(p, 1);
    ASSERT_EQ(s.clauses.size(), 2u);
    EXPECT_TRUE(s.contains(p.clauses[0]));
    EXPECT_TRUE(s.contains(p.clauses[2]));
    EXPECT_FALSE(s.contains(p.clauses[1]));
    EXPECT_EQ(unfold(p, 3).clauses.size(), 2u);
}

TEST(Unfold, FactsBeforePosition) {
    // q's fact is needed before r, so both resolvents appear one power later.
    ClpProgram p;
    p.clauses.push_back(parse_clause("p(il0) :- q(il0), r(il0)."));
    p.clauses.push_back(parse_clause("q(il0) :- il0 >= 2."));
    p.clauses.push_back(parse_clause("r(il0) :- il0 <= 5, r(il0)."));
    BinClauseSet s = unfold(p, 3);
    const BinClause* b = lookup(s, "p(il0) :- il0 >= 2, r(il0).");
    ASSERT_NE(b, nullptr);
    EXPECT_EQ(b->iteration, 2);
    const BinClause* c = lookup(s, "p(il0) :- il0 >= 2, il0 <= 5, r(il0).");
    ASSERT_NE(c, nullptr);
    EXPECT_EQ(c->iteration, 2);
    // p :- q at position 1 would need a fact for q to be discarded: never
    // produced since q's clause is a fact
    EXPECT_EQ(lookup(s, "p(il0) :- il0 >= 2."), nullptr);
}

TEST(Unfold, Timeout) {
    Options opt;
    opt.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    EXPECT_THROW(unfold(sum_clp(), 4, opt), TimedOut);
    BinClauseSet s = unfold_bounded(sum_clp(), 4, opt);
    EXPECT_TRUE(s.timed_out);
}

TEST(Unfold, DerivationSpotCheck) {
    ClpProgram p = sum_clp();
    BinClauseSet s = unfold(p, 4);
    std::mt19937_64 rng(7);
    int checked = 0;
    for (const auto& b : s.clauses) {
        if (b.clause.is_fact()) continue;
        for (int t = 0; t < 3; ++t) {
            poly::Polyhedron box = b.clause.constraint;
            for (const auto& v : b.clause.atom_vars()) box.scope.insert(v);
            auto rho = abs::sample_model(box, rng, 4);
            poly::Polyhedron bind;
            Atom to = b.clause.body[0];
            int k = 0;
            for (auto& v : to.args) {
                VarId w{poly::VarKind::Tmp, k++, "$target"};
                bind.add(poly::LinearConstraint::eq({{w, 1}}, rho.at(v)));
                v = w;
            }
            for (const auto& v : b.clause.head.args) bind.add(poly::LinearConstraint::eq({{v, 1}}, rho.at(v)));
            EXPECT_TRUE(derivable(p, b.clause.head, to, bind, 8)) << b.clause.str() << " at sample " << t;
            ++checked;
        }
    }
    EXPECT_GT(checked, 20);
}
