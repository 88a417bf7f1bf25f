#pragma once

#include "nonterm/bytecode/frames.hpp"
#include "nonterm/poly/compose.hpp"

namespace nonterm::abs {

using bc::Frame;
using bc::Instruction;
using bc::Op;
using poly::LinearConstraint;
using poly::Polyhedron;
using poly::VarId;

struct Options {
    /// Emit ǐ >= 0 for reference-typed input slots.
    bool ref_nonneg = true;
    /// Input slots known to alias (equal path-lengths), e.g. {il0, is1}.
    std::vector<std::pair<VarId, VarId>> aliases;
    poly::Projection projection = poly::Projection::DarkShadow;
};

/// Equalities ǐl^i = ôl^i (i in L) and š^i = ŝ^i (i in S), plus
/// non-negativity of reference slots and alias equalities at the frame.
inline Polyhedron unchanged(const Frame& f, const std::set<int>& L, const std::set<int>& S, const Options& opt = {}) {
    Polyhedron p;
    for (int i : L) {
        if (i < 0 || i >= f.nl()) throw std::out_of_range("unchanged: local " + std::to_string(i) + " outside frame " + f.str());
        p.add(LinearConstraint::same(VarId::in_l(i), VarId::out_l(i)));
    }
    for (int i : S) {
        if (i < 0 || i >= f.ns()) throw std::out_of_range("unchanged: stack " + std::to_string(i) + " outside frame " + f.str());
        p.add(LinearConstraint::same(VarId::in_s(i), VarId::out_s(i)));
    }
    if (opt.ref_nonneg) {
        for (int i = 0; i < f.nl(); ++i)
            if (f.locals[static_cast<size_t>(i)].is_reference()) p.add(LinearConstraint::ge({{VarId::in_l(i), 1}}, 0));
        for (int i = 0; i < f.ns(); ++i)
            if (f.stack[static_cast<size_t>(i)].is_reference()) p.add(LinearConstraint::ge({{VarId::in_s(i), 1}}, 0));
    }
    auto inside = [&](const VarId& v) {
        return (v.kind == poly::VarKind::InL && v.index < f.nl()) || (v.kind == poly::VarKind::InS && v.index < f.ns());
    };
    for (const auto& [a, b] : opt.aliases)
        if (inside(a) && inside(b)) p.add(LinearConstraint::same(a, b));
    return p;
}

inline std::set<int> upto(int n) {
    std::set<int> s;
    for (int i = 0; i < n; ++i) s.insert(i);
    return s;
}

/// Frame after executing `ins` at `f`.
inline Frame post_frame(const Instruction& ins, const Frame& f, const bc::Program& prog) {
    Frame g = f;
    if (auto v = bc::detail::apply(ins, g, prog)) throw bc::VerifyError(*v);
    return g;
}

/// Path-length abstraction of one non-call instruction at frame f.
inline Polyhedron ins_pl(const Instruction& ins, const Frame& f, const bc::Program& prog, const Options& opt = {}) {
    if (ins.op == Op::Call) throw std::invalid_argument("ins_pl: call instructions are not abstracted");
    if (ins.op == Op::IfNe) throw std::invalid_argument("ins_pl: ifne must be desugared first");
    const Frame g = post_frame(ins, f, prog);
    const int nl = f.nl(), ns = f.ns();
    auto top = [&](int k = 0) { return VarId::in_s(ns - 1 - k); };
    auto le = [](VarId v, long b) { return LinearConstraint::le({{v, 1}}, b); };
    auto ge = [](VarId v, long b) { return LinearConstraint::ge({{v, 1}}, b); };
    Polyhedron p;
    switch (ins.op) {
        case Op::Const:
            p = unchanged(f, upto(nl), upto(ns), opt);
            p.add(LinearConstraint::eq({{VarId::out_s(ns), 1}}, ins.value ? *ins.value : Int(0)));
            break;
        case Op::Dup:
            p = unchanged(f, upto(nl), upto(ns), opt);
            p.add(LinearConstraint::same(top(), VarId::out_s(ns)));
            break;
        case Op::New:
            p = unchanged(f, upto(nl), upto(ns), opt);
            p.add(LinearConstraint::eq({{VarId::out_s(ns), 1}}, 1));
            break;
        case Op::Load:
            p = unchanged(f, upto(nl), upto(ns), opt);
            p.add(LinearConstraint::same(VarId::in_l(ins.index), VarId::out_s(ns)));
            break;
        case Op::Store: {
            std::set<int> L = upto(nl);
            L.erase(ins.index);
            p = unchanged(f, L, upto(ns - 1), opt);
            p.add(LinearConstraint::same(top(), VarId::out_l(ins.index)));
            break;
        }
        case Op::Add:
            p = unchanged(f, upto(nl), upto(ns - 2), opt);
            p.add(LinearConstraint::eq({{top(1), 1}, {top(0), 1}, {VarId::out_s(ns - 2), -1}}, 0));
            break;
        case Op::Pop:
            p = unchanged(f, upto(nl), upto(ns - 1), opt);
            break;
        case Op::Putfield:
            p = unchanged(f, upto(nl), upto(ns - 2), opt);
            p.add(ge(top(1), 1));
            break;
        case Op::IfEq:
            p = unchanged(f, upto(nl), upto(ns - 1), opt);
            p.add(LinearConstraint::eq({{top(), 1}}, 0));
            break;
        case Op::IfLt: p = unchanged(f, upto(nl), upto(ns - 1), opt); p.add(le(top(), -1)); break;
        case Op::IfLe: p = unchanged(f, upto(nl), upto(ns - 1), opt); p.add(le(top(), 0)); break;
        case Op::IfGt: p = unchanged(f, upto(nl), upto(ns - 1), opt); p.add(ge(top(), 1)); break;
        case Op::IfGe: p = unchanged(f, upto(nl), upto(ns - 1), opt); p.add(ge(top(), 0)); break;
        case Op::Getfield:
            // Deliberately inexact: the loaded value's length is left free.
            p = unchanged(f, upto(nl), upto(ns - 1), opt);
            p.add(ge(top(), 1));
            break;
        case Op::Call:
        case Op::IfNe: break;
    }
    const auto in = poly::input_vars(nl, ns);
    const auto out = poly::output_vars(g.nl(), g.ns());
    p.scope.insert(in.begin(), in.end());
    p.scope.insert(out.begin(), out.end());
    return poly::canonicalize(p);
}

/// Composition of the abstractions of b's instructions [from, end).
/// Dark-shadow mode yields one polyhedron; exact mode may yield several.
inline std::vector<Polyhedron> block_constraint(const bc::Block& b, const bc::FrameMap& frames, const bc::Program& prog,
                                                size_t from = 0, const Options& opt = {}) {
    if (from >= b.instructions.size()) throw std::invalid_argument("block_constraint: no instructions in " + b.name);
    auto frame = [&](size_t i) -> const Frame& {
        auto it = frames.find({b.name, static_cast<int>(i)});
        if (it == frames.end()) throw std::logic_error("no frame for " + b.name + ":" + std::to_string(i));
        return it->second;
    };
    if (b.instructions[from].op == Op::Call) throw std::invalid_argument("block_constraint: leading call in " + b.name);
    std::vector<Polyhedron> acc = {ins_pl(b.instructions[from], frame(from), prog, opt)};
    for (size_t i = from + 1; i < b.instructions.size(); ++i) {
        if (b.instructions[i].op == Op::Call) throw std::invalid_argument("block_constraint: call inside " + b.name);
        const Frame& mid = frame(i);
        Polyhedron next = ins_pl(b.instructions[i], mid, prog, opt);
        std::vector<Polyhedron> out;
        for (const auto& a : acc) {
            auto parts = poly::compose_pl(a, next, mid.nl(), mid.ns(), opt.projection);
            if (parts.empty()) {
                std::set<VarId> scope;
                for (const auto& v : a.scope)
                    if (!v.is_output()) scope.insert(v);
                for (const auto& v : next.scope)
                    if (!v.is_input()) scope.insert(v);
                parts.push_back(Polyhedron::empty_set(scope));
            }
            out.insert(out.end(), parts.begin(), parts.end());
        }
        acc = std::move(out);
    }
    return acc;
}

}  // namespace nonterm::abs
