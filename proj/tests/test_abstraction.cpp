#include "nonterm/abstraction/exactness.hpp"
#include "nonterm/bytecode/parser.hpp"
#include "corpus.hpp"

#include <gtest/gtest.h>

using namespace nonterm;
using namespace nonterm::abs;
using bc::SlotType;
using poly::parse_polyhedron;

namespace {

Polyhedron C(const std::string& s) { return poly::canonicalize(parse_polyhedron(s)); }

Frame ints(int nl, int ns) {
    Frame f;
    f.locals.assign(static_cast<size_t>(nl), SlotType::integer());
    f.stack.assign(static_cast<size_t>(ns), SlotType::integer());
    return f;
}

// Compare constraint sets only (scopes differ between parsed and built).
void expect_same(const Polyhedron& got, const std::string& want) {
    EXPECT_EQ(poly::canonicalize(got).constraints, C(want).constraints) << got.str() << " vs " << want;
}

}  // namespace

TEST(Unchanged, Examples) {
    expect_same(unchanged(ints(1, 0), {0}, {}), "{il0 = ol0}");
    EXPECT_TRUE(unchanged(ints(2, 2), {}, {}).constraints.empty());
    Frame f{{SlotType::ref("C")}, {}};
    expect_same(unchanged(f, {0}, {}), "{il0 = ol0, il0 >= 0}");
    Options off;
    off.ref_nonneg = false;
    expect_same(unchanged(f, {0}, {}, off), "{il0 = ol0}");
    EXPECT_THROW(unchanged(ints(1, 0), {1}, {}), std::out_of_range);
    Options al;
    al.aliases = {{poly::VarId::in_l(0), poly::VarId::in_s(0)}};
    expect_same(unchanged(ints(1, 1), {0}, {0}, al), "{il0 = ol0, is0 = os0, il0 = is0}");
}

TEST(InsPl, Cases) {
    const bc::Program prog = harness_program();
    expect_same(ins_pl(Instruction::simple(Op::Dup), ints(1, 1), prog), "{il0 = ol0, is0 = os0, is0 = os1}");
    expect_same(ins_pl(Instruction::guard(Op::IfLt), ints(1, 1), prog), "{il0 = ol0, is0 <= -1}");
    expect_same(ins_pl(Instruction::store(0), ints(1, 1), prog), "{is0 = ol0}");
    expect_same(ins_pl(Instruction::const_null(), ints(0, 0), prog), "{os0 = 0}");
    expect_same(ins_pl(Instruction::make_new("C"), ints(0, 1), prog), "{is0 = os0, os1 = 1}");
    expect_same(ins_pl(Instruction::simple(Op::Add), ints(0, 3), prog), "{is0 = os0, is1 + is2 = os1}");
    Frame pf{{}, {SlotType::ref("C"), SlotType::integer()}};
    expect_same(ins_pl(Instruction::putfield("C", "x"), pf, prog), "{is0 >= 1}");
    Frame rf{{SlotType::ref("C")}, {SlotType::ref("C")}};
    expect_same(ins_pl(Instruction::guard(Op::IfEq, SlotType::ref("C")), rf, prog), "{il0 = ol0, il0 >= 0, is0 >= 0, is0 = 0}");
    EXPECT_THROW(ins_pl(Instruction::call({"A", "f", {}, {}}, true), ints(0, 0), prog), std::invalid_argument);
    auto p = ins_pl(Instruction::simple(Op::Dup), ints(1, 1), prog);
    for (const auto& v : p.scope) {
        if (v.kind == poly::VarKind::InL || v.kind == poly::VarKind::OutL) {
            EXPECT_EQ(v.index, 0);
        }
        if (v.kind == poly::VarKind::InS) {
            EXPECT_EQ(v.index, 0);
        }
        if (v.kind == poly::VarKind::OutS) {
            EXPECT_LE(v.index, 1);
        }
        EXPECT_TRUE(v.is_input() || v.is_output());
    }
}

TEST(BlockConstraint, SumBlocks) {
    bc::Program p = bc::parse_program(read_corpus("sum.jbc"));
    auto frames = bc::infer_all_frames(p);
    Options opt;
    opt.ref_nonneg = false;
    auto one = [&](const std::string& b) {
        auto r = block_constraint(*p.find_block(b).second, frames, p, 0, opt);
        EXPECT_EQ(r.size(), 1u);
        return r.front();
    };
    expect_same(one("b1"), "{il0 = ol0, is0 = 0, 0 = os0}");
    expect_same(one("sum"), "{il0 = ol0, il0 = os0}");
    expect_same(one("b4"), "{il0 = ol0, il0 = os0, il0 - 1 = os1}");
    expect_same(one("b6"), "{il0 = ol0, is0 + is1 = os0}");
    expect_same(one("main"), "{il0 = ol0, -1 = os0}");
}

TEST(Exactness, EveryFamily) {
    for (auto fam : all_families()) {
        auto r = family_check(fam, 100, 42);
        EXPECT_EQ(r.trials, 100);
        EXPECT_EQ(r.passes, 100) << r.instruction << ": " << to_json(r).dump();
    }
}

TEST(Exactness, DupAndPutfieldDirect) {
    const bc::Program prog = harness_program();
    auto r = exactness_check(Instruction::simple(Op::Dup), ints(1, 1), prog, 100, 1);
    EXPECT_EQ(r.passes, 100);
    Frame pf{{SlotType::integer()}, {SlotType::ref("C"), SlotType::integer()}};
    auto q = exactness_check(Instruction::putfield("C", "x"), pf, prog, 100, 2);
    EXPECT_EQ(q.passes, 100);
}

TEST(Exactness, WithoutNonNegativityNotExact) {
    // Negative reference lengths have no compatible state.
    Options off;
    off.ref_nonneg = false;
    const bc::Program prog = harness_program();
    Frame f{{SlotType::ref("C")}, {}};
    auto r = exactness_check(Instruction::load(0), f, prog, 200, 9, off);
    EXPECT_LT(r.passes, 200);
}

TEST(Exactness, Sequences) {
    auto r = sequence_check(50, 42);
    EXPECT_EQ(r.trials, 50);
    EXPECT_EQ(r.passes, 50) << to_json(r).dump();
}

TEST(Exactness, Reproducible) {
    EXPECT_EQ(to_json(family_check(Family::Add, 20, 42)).dump(), to_json(family_check(Family::Add, 20, 42)).dump());
}

TEST(Exactness, GetfieldFixtureFails) {
    auto r = getfield_fixture(100, 42);
    EXPECT_LT(r.passes, r.trials);
    ASSERT_TRUE(r.first_failure.has_value());
}

TEST(Exactness, GetfieldWorkedCounterexample) {
    // <[5, l2] || l3 l2 l1 || mu> with top l1; o1.f = l4, o3.f = l5, others null.
    const bc::Program prog = harness_program();
    interp::Heap mu;
    auto obj = [&](interp::Value f) { return interp::Object{"C", {{"x", Int(0)}, {"f", f}}}; };
    auto l4 = mu.alloc(obj(interp::Null{}));
    auto l5 = mu.alloc(obj(interp::Null{}));
    auto l1 = mu.alloc(obj(l4));
    auto l2 = mu.alloc(obj(interp::Null{}));
    auto l3 = mu.alloc(obj(l5));
    interp::State s{{Int(5), l2}, {l3, l2, l1}, mu};
    Frame f{{SlotType::integer(), SlotType::ref("C")}, {SlotType::ref("C"), SlotType::ref("C"), SlotType::ref("C")}};
    auto pl = ins_pl(Instruction::getfield("C", "f", SlotType::ref("C")), f, prog);
    poly::Assignment rho = interp::input_assignment(s);
    for (auto [k, v] : std::vector<std::pair<int, long>>{{0, 5}, {1, 1}}) rho[poly::VarId::out_l(k)] = v;
    rho[poly::VarId::out_s(0)] = 2;
    rho[poly::VarId::out_s(1)] = 1;
    rho[poly::VarId::out_s(2)] = 10;
    ASSERT_TRUE(pl.holds(rho));
    ASSERT_TRUE(interp::exec(Instruction::getfield("C", "f", SlotType::ref("C")), s, prog));
    auto out = interp::output_assignment(s);
    EXPECT_EQ(out.at(poly::VarId::out_s(2)), 1);
    EXPECT_NE(out.at(poly::VarId::out_s(2)), rho.at(poly::VarId::out_s(2)));
}
