#pragma once

#include "nonterm/bytecode/ir.hpp"

#include <deque>
#include <set>

namespace nonterm::bc {

struct Frame {
    std::vector<SlotType> locals;
    std::vector<SlotType> stack;  // base first

    int nl() const { return static_cast<int>(locals.size()); }
    int ns() const { return static_cast<int>(stack.size()); }

    bool operator==(const Frame&) const = default;

    std::string str() const {
        std::string s = "(";
        for (size_t i = 0; i < locals.size(); ++i) s += (i ? "," : "") + locals[i].str();
        s += " | ";
        for (size_t i = 0; i < stack.size(); ++i) s += (i ? "," : "") + stack[i].str();
        return s + ")";
    }
};

/// Frame just before instruction `index` of `block`; index == size is the
/// frame at the block's end.
using FrameMap = std::map<std::pair<std::string, int>, Frame>;

struct Violation {
    std::string kind;  // e.g. "frame mismatch", "exit stack arity"
    std::string message;
};

class VerifyError : public std::runtime_error {
public:
    explicit VerifyError(Violation v) : std::runtime_error(v.kind + ": " + v.message), violation(std::move(v)) {}
    Violation violation;
};

namespace detail {

/// Stack effect of one instruction; returns a violation instead of throwing.
inline std::optional<Violation> apply(const Instruction& ins, Frame& f, const Program& prog) {
    auto need = [&](int n) -> std::optional<Violation> {
        if (f.ns() < n) return Violation{"stack underflow", ins.str() + " needs " + std::to_string(n) + " stack slots at " + f.str()};
        return std::nullopt;
    };
    auto top = [&](int k = 0) -> SlotType& { return f.stack[f.stack.size() - 1 - static_cast<size_t>(k)]; };
    auto mismatch = [&](const std::string& what) { return Violation{"type mismatch", ins.str() + ": " + what + " at " + f.str()}; };
    switch (ins.op) {
        case Op::Const:
            f.stack.push_back(ins.value ? SlotType::integer() : SlotType::null());
            return std::nullopt;
        case Op::Dup:
            if (auto v = need(1)) return v;
            f.stack.push_back(top());
            return std::nullopt;
        case Op::New:
            if (!prog.find_class(ins.cls)) return Violation{"unknown class", ins.str()};
            f.stack.push_back(SlotType::ref(ins.cls));
            return std::nullopt;
        case Op::Load:
            if (ins.index >= f.nl()) return Violation{"bad local index", ins.str() + " with " + std::to_string(f.nl()) + " locals"};
            f.stack.push_back(f.locals[static_cast<size_t>(ins.index)]);
            return std::nullopt;
        case Op::Store:
            if (auto v = need(1)) return v;
            if (ins.index > f.nl()) return Violation{"bad local index", ins.str() + " with " + std::to_string(f.nl()) + " locals"};
            if (ins.index == f.nl()) f.locals.push_back(top());
            else f.locals[static_cast<size_t>(ins.index)] = top();
            f.stack.pop_back();
            return std::nullopt;
        case Op::Add:
            if (auto v = need(2)) return v;
            if (!top().is_int() || !top(1).is_int()) return mismatch("operands must be int");
            f.stack.pop_back();
            return std::nullopt;
        case Op::Pop:
            if (auto v = need(1)) return v;
            f.stack.pop_back();
            return std::nullopt;
        case Op::Putfield: {
            if (auto v = need(2)) return v;
            const ClassDecl* c = prog.find_class(ins.cls);
            if (!c) return Violation{"unknown class", ins.str()};
            bool found = false;
            for (const auto& fd : c->fields) found = found || (fd.name == ins.field && fd.type.is_int());
            if (!found) return Violation{"unknown field", ins.str()};
            if (!top().is_int()) return mismatch("value must be int");
            if (!assignable(top(1), SlotType::ref(ins.cls))) return mismatch("receiver must be " + ins.cls);
            f.stack.resize(f.stack.size() - 2);
            return std::nullopt;
        }
        case Op::Getfield:
            if (auto v = need(1)) return v;
            if (!assignable(top(), SlotType::ref(ins.cls))) return mismatch("receiver must be " + ins.cls);
            top() = ins.type;
            return std::nullopt;
        case Op::IfEq:
        case Op::IfNe:
            if (auto v = need(1)) return v;
            if (ins.type.is_int() ? !top().is_int() : !assignable(top(), ins.type))
                return mismatch("top must be " + ins.type.str());
            if (ins.op == Op::IfNe && !ins.type.is_int()) return Violation{"unsupported construct", "ifne on a class type"};
            f.stack.pop_back();
            return std::nullopt;
        case Op::IfLt:
        case Op::IfLe:
        case Op::IfGt:
        case Op::IfGe:
            if (auto v = need(1)) return v;
            if (!top().is_int()) return mismatch("top must be int");
            f.stack.pop_back();
            return std::nullopt;
        case Op::Call: {
            const Method* m = prog.resolve(ins.callee);
            if (!m) return Violation{"unresolved call target", ins.callee.str()};
            if (m->is_static != ins.is_static)
                return Violation{"unresolved call target", ins.callee.str() + (ins.is_static ? " is not static" : " is static")};
            const auto formals = m->entry_locals();
            const int k = static_cast<int>(formals.size());
            if (auto v = need(k)) return v;
            const size_t base = f.stack.size() - static_cast<size_t>(k);
            for (int i = 0; i < k; ++i)
                if (!assignable(f.stack[base + static_cast<size_t>(i)], formals[static_cast<size_t>(i)]))
                    return mismatch("argument " + std::to_string(i) + " must be " + formals[static_cast<size_t>(i)].str());
            f.stack.resize(base);
            if (ins.callee.ret) f.stack.push_back(*ins.callee.ret);
            return std::nullopt;
        }
    }
    return std::nullopt;
}

/// Forward dataflow over one method.  Records every violation found; a
/// block is abandoned at its first error.
inline FrameMap infer(const Method& m, const Program& prog, std::vector<Violation>& out) {
    FrameMap fm;
    const Block* entry = m.find_block(m.entry);
    if (!entry) {
        out.push_back({"missing entry block", m.sig.qualified() + " entry " + m.entry});
        return fm;
    }
    std::map<std::string, Frame> at_entry;
    std::deque<const Block*> work;
    at_entry[entry->name] = Frame{m.entry_locals(), {}};
    work.push_back(entry);
    std::set<std::string> done;
    while (!work.empty()) {
        const Block* b = work.front();
        work.pop_front();
        if (!done.insert(b->name).second) continue;
        Frame f = at_entry.at(b->name);
        bool ok = true;
        for (size_t i = 0; i < b->instructions.size(); ++i) {
            fm[{b->name, static_cast<int>(i)}] = f;
            if (b->instructions[i].op == Op::Call && i != 0) {
                out.push_back({"call not at block start", b->name + ":" + std::to_string(i)});
                ok = false;
                break;
            }
            if (auto v = apply(b->instructions[i], f, prog)) {
                v->message = b->name + ":" + std::to_string(i) + " " + v->message;
                out.push_back(*v);
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        if (b->instructions.empty()) {
            out.push_back({"empty block", b->name});
            continue;
        }
        fm[{b->name, static_cast<int>(b->instructions.size())}] = f;
        if (b->successors.empty()) {
            const int want = m.sig.ret ? 1 : 0;
            if (f.ns() != want)
                out.push_back({"exit stack arity", b->name + " ends with " + std::to_string(f.ns()) + " stack elements, " +
                                                       m.sig.qualified() + " returns " + std::to_string(want)});
            else if (m.sig.ret && !assignable(f.stack[0], *m.sig.ret))
                out.push_back({"type mismatch", b->name + " returns " + f.stack[0].str() + ", expected " + m.sig.ret->str()});
        }
        for (const auto& s : b->successors) {
            const Block* t = m.find_block(s);
            if (!t) {
                out.push_back({"unknown successor", b->name + " -> " + s});
                continue;
            }
            auto [it, inserted] = at_entry.emplace(s, f);
            if (inserted) work.push_back(t);
            else if (!(it->second == f))
                out.push_back({"frame mismatch", "at join " + s + ": " + it->second.str() + " vs " + f.str() + " from " + b->name});
        }
    }
    for (const auto& b : m.blocks)
        if (!at_entry.count(b.name)) out.push_back({"unreachable block", b.name + " in " + m.sig.qualified()});
    return fm;
}

}  // namespace detail

/// Frame at every program point of `m`; throws VerifyError on the first
/// violation.
inline FrameMap infer_frames(const Method& m, const Program& prog) {
    std::vector<Violation> v;
    FrameMap fm = detail::infer(m, prog, v);
    if (!v.empty()) throw VerifyError(v.front());
    return fm;
}

/// Frames for every method, keyed by block name (unique program-wide).
inline FrameMap infer_all_frames(const Program& prog) {
    FrameMap all;
    for (const auto& m : prog.methods) {
        auto fm = infer_frames(m, prog);
        all.insert(fm.begin(), fm.end());
    }
    return all;
}

/// Every structural and frame violation in the program.
inline std::vector<Violation> validate(const Program& prog) {
    std::vector<Violation> out;
    std::set<std::string> blocks, methods;
    for (const auto& m : prog.methods) {
        if (!methods.insert(m.sig.qualified()).second) out.push_back({"duplicate method", m.sig.qualified()});
        for (const auto& b : m.blocks) {
            if (!blocks.insert(b.name).second) out.push_back({"duplicate block", b.name});
            for (const auto& ins : b.instructions)
                if (ins.op == Op::Getfield) out.push_back({"unsupported construct", b.name + ": getfield"});
        }
        detail::infer(m, prog, out);
    }
    return out;
}

}  // namespace nonterm::bc
