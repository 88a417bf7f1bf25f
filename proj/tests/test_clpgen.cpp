#include "nonterm/bytecode/parser.hpp"
#include "nonterm/clp/alpha.hpp"
#include "nonterm/clp/compile.hpp"
#include "nonterm/clp/text.hpp"
#include "corpus.hpp"
#include "golden.hpp"

#include <gtest/gtest.h>

using namespace nonterm;
using namespace nonterm::clp;

namespace {


ClpProgram compile_file(const std::string& f) {
    bc::Program p = bc::parse_program(read_corpus(f));
    EXPECT_TRUE(bc::validate(p).empty());
    return compile_program(p);
}

const Clause* find(const ClpProgram& p, const std::string& head, size_t nth = 0) {
    for (const auto& c : p.clauses)
        if (c.head.pred == head && nth-- == 0) return &c;
    return nullptr;
}

}  // namespace

TEST(Alpha, Normalization) {
    Clause a = parse_clause("p(il0, is0) :- il0 = ol0, ol0 + 1 = os0, q(ol0, os0).");
    Clause b = parse_clause("p(is3, il7) :- is3 + 1 = v9, q(is3, v9).");
    EXPECT_TRUE(alpha_equivalent(a, b));
    Clause c = parse_clause("p(il0, is0) :- il0 + 2 = os0, q(il0, os0).");
    EXPECT_FALSE(alpha_equivalent(a, c));
    // Removable local variable.
    Clause d = parse_clause("p(il0) :- il0 = t0 + 1, t0 >= 3, q(il0).");
    Clause e = parse_clause("p(il0) :- il0 >= 4, q(il0).");
    EXPECT_TRUE(alpha_equivalent(d, e));
    EXPECT_EQ(alpha_normal(alpha_normal(d)), alpha_normal(d));
}

TEST(Compile, SumGolden) {
    ClpProgram p = compile_file("sum.jbc");
    ASSERT_EQ(p.clauses.size(), golden::kSumClauses.size());
    for (size_t i = 0; i < golden::kSumClauses.size(); ++i) {
        Clause want = parse_clause(golden::kSumClauses[i]);
        EXPECT_TRUE(alpha_equivalent(p.clauses[i], want)) << "r" << i + 1 << ": " << p.clauses[i].str();
        EXPECT_EQ(p.clauses[i], want) << "r" << i + 1 << " literal: " << p.clauses[i].str();
    }
    EXPECT_EQ(p.entries.at("Sum.main"), "main");
    EXPECT_EQ(p.entries.at("Sum.sum"), "sum");
}

TEST(Compile, Arities) {
    bc::Program prog = bc::parse_program(read_corpus("sum.jbc"));
    ClpProgram p = compile_program(prog);
    for (const auto& m : prog.methods) {
        auto fm = bc::infer_frames(m, prog);
        for (const auto& b : m.blocks) {
            const auto& f = fm.at({b.name, 0});
            EXPECT_EQ(p.arity(b.name), static_cast<size_t>(f.nl() + f.ns()) + (m.sig.ret ? 1 : 0)) << b.name;
        }
    }
    for (const auto& c : p.clauses)
        for (const auto& a : c.body) EXPECT_EQ(a.args.size(), p.arity(a.pred)) << c.str();
}

TEST(Compile, StraightLineVoid) {
    bc::Program prog = bc::parse_program("method static A.f():void entry a { block a { const 1 ; pop } -> }");
    ClpProgram p = compile_program(prog);
    ASSERT_EQ(p.clauses.size(), 1u);
    EXPECT_TRUE(p.clauses[0].body.empty());
}

TEST(Compile, CallShapes) {
    ClpProgram p = compile_file("calls.jbc");
    const Clause* d1 = find(p, "d1");
    ASSERT_NE(d1, nullptr);
    EXPECT_TRUE(alpha_equivalent(*d1, parse_clause("d1(il0, il1, is0, is1, rin_d1) :- il0 = ol0, il1 = ol1, is0 >= 1, "
                                                   "rin_d1 = rout_d1, step_e(is0, is1, os0), d1__cont(ol0, ol1, os0, rout_d1).")))
        << d1->str();
    const Clause* d1c = find(p, "d1__cont");
    ASSERT_NE(d1c, nullptr);
    EXPECT_TRUE(alpha_equivalent(*d1c, parse_clause("d1__cont(il0, il1, is0, rin_d1__cont) :- il0 = ol0, is0 = ol1, "
                                                    "il0 = os0, rin_d1__cont = rout_d1__cont, d2(ol0, ol1, os0, rout_d1__cont).")))
        << d1c->str();
    const Clause* d2 = find(p, "d2");
    ASSERT_NE(d2, nullptr);
    EXPECT_TRUE(alpha_equivalent(*d2, parse_clause("d2(il0, il1, is0, rin_d2) :- il0 = ol0, il1 = ol1, is0 >= 1, "
                                                   "rin_d2 = rout_d2, reset_e(is0), d2__cont(ol0, ol1, rout_d2).")))
        << d2->str();
    const Clause* d2c = find(p, "d2__cont");
    ASSERT_NE(d2c, nullptr);
    EXPECT_TRUE(alpha_equivalent(*d2c, parse_clause("d2__cont(il0, il1, rin_d2__cont) :- il0 = ol0, il1 = ol1, il1 = os0, "
                                                    "rin_d2__cont = os0.")))
        << d2c->str();
    const Clause* tw1 = find(p, "tw1");
    ASSERT_NE(tw1, nullptr);
    EXPECT_TRUE(alpha_equivalent(*tw1, parse_clause("tw1(il0, is0, rin_tw1) :- rin_tw1 = os0, id_e(is0, os0).")))
        << tw1->str();
}

TEST(Compile, RefNonNegOption) {
    bc::Program prog = bc::parse_program(read_corpus("sum.jbc"));
    CompileOptions opt;
    opt.abs.ref_nonneg = true;
    ClpProgram p = compile_program(prog, opt);
    EXPECT_TRUE(alpha_equivalent(*find(p, "main"), parse_clause("main(il0) :- il0 = ol0, il0 >= 0, -1 = os0, b7(ol0, os0).")));
}

TEST(Emit, TextRoundTrip) {
    ClpProgram p = compile_file("sum.jbc");
    std::string once = emit_text(p);
    ClpProgram q = parse_text(once);
    ASSERT_EQ(q.clauses.size(), 12u);
    EXPECT_EQ(emit_text(q), once);
    for (size_t i = 0; i < p.clauses.size(); ++i) EXPECT_EQ(q.clauses[i], p.clauses[i]);
    EXPECT_EQ(q.entries, p.entries);
    EXPECT_EQ(emit_text(ClpProgram{}), "");
}

TEST(Emit, JsonRoundTrip) {
    ClpProgram p = compile_file("calls.jbc");
    auto j = emit_json(p);
    ClpProgram q = parse_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(emit_json(q), j);
    EXPECT_EQ(emit_text(q), emit_text(p));
}

TEST(Emit, Deterministic) {
    EXPECT_EQ(emit_text(compile_file("sum.jbc")), emit_text(compile_file("sum.jbc")));
}
