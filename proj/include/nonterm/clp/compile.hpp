#pragma once

#include "nonterm/abstraction/ins_pl.hpp"
#include "nonterm/clp/clause.hpp"

namespace nonterm::clp {

struct CompileOptions {
    abs::Options abs{false, {}, poly::Projection::DarkShadow};
};

inline std::string cont_name(const std::string& block) { return block + "__cont"; }

namespace detail {

inline std::vector<VarId> frame_vars(const bc::Frame& f, bool output) {
    std::vector<VarId> v;
    for (int k = 0; k < f.nl(); ++k) v.push_back(output ? VarId::out_l(k) : VarId::in_l(k));
    for (int k = 0; k < f.ns(); ++k) v.push_back(output ? VarId::out_s(k) : VarId::in_s(k));
    return v;
}

inline const bc::Frame& frame_at(const bc::FrameMap& fm, const std::string& b, size_t i) {
    auto it = fm.find({b, static_cast<int>(i)});
    if (it == fm.end()) throw std::logic_error("no frame for " + b + ":" + std::to_string(i));
    return it->second;
}

struct Ctx {
    const bc::Program& prog;
    const bc::Method& method;
    const bc::FrameMap& frames;
    const CompileOptions& opt;
    ClpProgram& out;
};

/// Clauses for the instructions [from, end) of b under predicate `pred`,
/// with no call among them.
inline void emit_plain(Ctx& cx, const bc::Block& b, size_t from, const std::string& pred) {
    const bool has_ret = cx.method.sig.ret.has_value();
    const bc::Frame& f0 = frame_at(cx.frames, b.name, from);
    const bc::Frame& fe = frame_at(cx.frames, b.name, b.instructions.size());
    Atom head{pred, frame_vars(f0, false)};
    const VarId rin = VarId::ret_in(pred), rout = VarId::ret_out(pred);
    if (has_ret) head.args.push_back(rin);
    cx.out.signatures[pred] = head.args;
    for (const auto& c : abs::block_constraint(b, cx.frames, cx.prog, from, cx.opt.abs)) {
        if (b.successors.empty()) {
            Clause cl{head, c, {}};
            if (has_ret) cl.constraint.add(LinearConstraint::same(rin, VarId::out_s(0)));
            cl.constraint = poly::canonicalize(cl.constraint);
            cx.out.clauses.push_back(std::move(cl));
            continue;
        }
        for (const auto& s : b.successors) {
            Clause cl{head, c, {Atom{s, frame_vars(fe, true)}}};
            if (has_ret) {
                cl.constraint.add(LinearConstraint::same(rin, rout));
                cl.body[0].args.push_back(rout);
            }
            cl.constraint = poly::canonicalize(cl.constraint);
            cx.out.clauses.push_back(std::move(cl));
        }
    }
}

/// Block starting with a call.
inline void emit_call(Ctx& cx, const bc::Block& b) {
    const bc::Instruction& call = b.instructions[0];
    const bc::Method* callee = cx.prog.resolve(call.callee);
    if (!callee) throw std::logic_error("unresolved call " + call.callee.str());
    const bool has_ret = cx.method.sig.ret.has_value();
    const bc::Frame& f0 = frame_at(cx.frames, b.name, 0);
    const bc::Frame& f1 = frame_at(cx.frames, b.name, 1);
    const int h = f0.ns();
    const int k = static_cast<int>(callee->entry_locals().size());
    const int base = h - k;

    Atom head{b.name, frame_vars(f0, false)};
    const VarId rin = VarId::ret_in(b.name), rout = VarId::ret_out(b.name);
    if (has_ret) head.args.push_back(rin);
    cx.out.signatures[b.name] = head.args;

    Atom callee_atom{callee->entry, {}};
    for (int i = base; i < h; ++i) callee_atom.args.push_back(VarId::in_s(i));
    if (callee->sig.ret) callee_atom.args.push_back(VarId::out_s(base));

    Polyhedron ceq;  // locals and untouched stack slots pass through
    for (int i = 0; i < f0.nl(); ++i) ceq.add(LinearConstraint::same(VarId::in_l(i), VarId::out_l(i)));
    for (int i = 0; i < base; ++i) ceq.add(LinearConstraint::same(VarId::in_s(i), VarId::out_s(i)));
    Polyhedron recv;
    if (!call.is_static) recv.add(LinearConstraint::ge({{VarId::in_s(base), 1}}, 1));

    auto finish = [&](Clause cl) {
        cl.constraint = poly::canonicalize(cl.constraint);
        cx.out.clauses.push_back(std::move(cl));
    };

    if (b.instructions.size() >= 2) {
        const std::string cont = cont_name(b.name);
        Clause bridge{head, poly::conjoin(ceq, recv), {callee_atom, Atom{cont, frame_vars(f1, true)}}};
        if (has_ret) {
            bridge.constraint.add(LinearConstraint::same(rin, rout));
            bridge.body[1].args.push_back(rout);
        }
        finish(std::move(bridge));
        emit_plain(cx, b, 1, cont);
        return;
    }
    if (b.successors.empty()) {
        // the result is the whole final stack
        Clause cl{head, recv, {callee_atom}};
        if (has_ret) cl.constraint.add(LinearConstraint::same(rin, VarId::out_s(base)));
        finish(std::move(cl));
        return;
    }
    for (const auto& s : b.successors) {
        Clause cl{head, poly::conjoin(ceq, recv), {callee_atom, Atom{s, frame_vars(f1, true)}}};
        if (has_ret) {
            cl.constraint.add(LinearConstraint::same(rin, rout));
            cl.body[1].args.push_back(rout);
        }
        finish(std::move(cl));
    }
}

inline void compile_into(Ctx& cx, const bc::Block& b) {
    if (b.instructions.empty()) throw std::invalid_argument("empty block " + b.name);
    for (size_t i = 0; i < b.instructions.size(); ++i) {
        if (b.instructions[i].op == bc::Op::IfNe) throw std::invalid_argument("ifne must be desugared before compilation");
        if (b.instructions[i].op == bc::Op::Call && i != 0) throw std::invalid_argument("call not at block start in " + b.name);
    }
    if (b.instructions[0].op == bc::Op::Call) emit_call(cx, b);
    else emit_plain(cx, b, 0, b.name);
}

}  // namespace detail

/// Clauses for one block.
inline std::vector<Clause> compile_block(const bc::Block& b, const bc::Method& m, const bc::FrameMap& frames,
                                         const bc::Program& prog, const CompileOptions& opt = {}) {
    ClpProgram tmp;
    detail::Ctx cx{prog, m, frames, opt, tmp};
    detail::compile_into(cx, b);
    return tmp.clauses;
}

/// The CLP(PL) image of a validated program: methods, blocks and
/// successors in source order.
inline ClpProgram compile_program(const bc::Program& prog, const CompileOptions& opt = {}) {
    ClpProgram out;
    for (const auto& m : prog.methods) {
        const bc::FrameMap frames = bc::infer_frames(m, prog);
        out.entries[m.sig.qualified()] = m.entry;
        detail::Ctx cx{prog, m, frames, opt, out};
        for (const auto& b : m.blocks) detail::compile_into(cx, b);
    }
    return out;
}

}  // namespace nonterm::clp
