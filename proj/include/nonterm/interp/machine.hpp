#pragma once

#include "nonterm/bytecode/frames.hpp"
#include "nonterm/interp/state.hpp"
#include "nonterm/poly/var.hpp"

namespace nonterm::interp {

using bc::Block;
using bc::Instruction;
using bc::Method;
using bc::Op;
using bc::Program;

/// Default value of a freshly allocated field.
inline Value default_value(const bc::SlotType& t) { return t.is_int() ? Value{Int(0)} : Value{Null{}}; }

inline Object fresh_object(const Program& prog, const std::string& cls) {
    Object o{cls, {}};
    if (const auto* c = prog.find_class(cls))
        for (const auto& f : c->fields) o.fields[f.name] = default_value(f.type);
    return o;
}

/// Executes one instruction other than `call`.  Returns false when the
/// computation stops (failed guard or null dereference).
inline bool exec(const Instruction& ins, State& s, const Program& prog) {
    auto pop = [&] {
        if (s.stack.empty()) throw std::logic_error("stack underflow executing " + ins.str());
        Value v = std::move(s.stack.back());
        s.stack.pop_back();
        return v;
    };
    auto pop_int = [&] {
        Value v = pop();
        if (!std::holds_alternative<Int>(v)) throw std::logic_error(ins.str() + " on a non-int value");
        return std::get<Int>(v);
    };
    switch (ins.op) {
        case Op::Const:
            s.stack.push_back(ins.value ? Value{*ins.value} : Value{Null{}});
            return true;
        case Op::Dup: {
            if (s.stack.empty()) throw std::logic_error("dup on empty stack");
            Value top = s.stack.back();
            s.stack.push_back(std::move(top));
            return true;
        }
        case Op::New:
            s.stack.push_back(s.heap.alloc(fresh_object(prog, ins.cls)));
            return true;
        case Op::Load:
            s.stack.push_back(s.locals.at(static_cast<size_t>(ins.index)));
            return true;
        case Op::Store: {
            Value v = pop();
            const auto i = static_cast<size_t>(ins.index);
            if (i == s.locals.size()) s.locals.push_back(std::move(v));
            else s.locals.at(i) = std::move(v);
            return true;
        }
        case Op::Add: {
            Int b = pop_int();
            Int a = pop_int();
            s.stack.push_back(Int(a + b));
            return true;
        }
        case Op::Pop:
            pop();
            return true;
        case Op::Putfield: {
            Value v = pop();
            Value r = pop();
            if (std::holds_alternative<Null>(r)) return false;
            s.heap.at(std::get<Loc>(r)).fields[ins.field] = std::move(v);
            return true;
        }
        case Op::Getfield: {
            Value r = pop();
            if (std::holds_alternative<Null>(r)) return false;
            const Object& o = s.heap.at(std::get<Loc>(r));
            auto it = o.fields.find(ins.field);
            s.stack.push_back(it == o.fields.end() ? default_value(ins.type) : it->second);
            return true;
        }
        case Op::IfEq: {
            Value v = pop();
            if (ins.type.is_int()) return std::get<Int>(v) == 0;
            return std::holds_alternative<Null>(v);
        }
        case Op::IfLt: return pop_int() < 0;
        case Op::IfLe: return pop_int() <= 0;
        case Op::IfGt: return pop_int() > 0;
        case Op::IfGe: return pop_int() >= 0;
        case Op::IfNe: return pop_int() != 0;
        case Op::Call: throw std::logic_error("exec: call must go through the machine");
    }
    return false;
}

/// One activation on the call stack.
struct Activation {
    const Method* method = nullptr;
    const Block* block = nullptr;
    size_t index = 0;
    std::vector<Value> locals;
    std::vector<Value> stack;
};

struct Config {
    std::vector<Activation> frames;  // innermost last
    Heap heap;
    bool halted = false;
};

/// Program-wide block lookup.
inline std::pair<const Method*, const Block*> locate(const Program& prog, const std::string& block) {
    auto mb = prog.find_block(block);
    if (!mb.second) throw std::invalid_argument("unknown block " + block);
    return mb;
}

using TraceFn = std::function<void(const std::string&)>;

/// Successor configurations of one step; empty means the path stops
/// (failed guard, null receiver).  A halted configuration has no successors.
inline std::vector<Config> step(const Program& prog, Config c, const TraceFn& trace = {}) {
    if (c.halted) return {};
    Activation& a = c.frames.back();
    if (a.index == a.block->instructions.size()) {
        if (a.block->successors.empty()) {
            std::optional<Value> ret;
            if (a.method->sig.ret) ret = a.stack.back();
            if (c.frames.size() == 1) {
                c.halted = true;
                return {std::move(c)};
            }
            c.frames.pop_back();
            Activation& caller = c.frames.back();
            if (ret) caller.stack.push_back(std::move(*ret));
            ++caller.index;
            return {std::move(c)};
        }
        std::vector<Config> out;
        for (const auto& s : a.block->successors) {
            Config n = c;
            n.frames.back().block = a.method->find_block(s);
            n.frames.back().index = 0;
            out.push_back(std::move(n));
        }
        return out;
    }
    const Instruction& ins = a.block->instructions[a.index];
    if (trace) {
        State view{a.locals, a.stack, {}};
        trace(a.block->name + ":" + std::to_string(a.index) + " " + ins.str() + " | " + view.str());
    }
    if (ins.op == Op::Call) {
        const Method* callee = prog.resolve(ins.callee);
        if (!callee) throw std::logic_error("unresolved call " + ins.callee.str());
        const size_t k = callee->entry_locals().size();
        Activation n;
        n.method = callee;
        n.block = callee->find_block(callee->entry);
        n.locals.assign(a.stack.end() - static_cast<long>(k), a.stack.end());
        a.stack.resize(a.stack.size() - k);
        if (!ins.is_static && std::holds_alternative<Null>(n.locals.front())) return {};
        c.frames.push_back(std::move(n));
        return {std::move(c)};
    }
    State s{std::move(a.locals), std::move(a.stack), std::move(c.heap)};
    if (!exec(ins, s, prog)) return {};
    a.locals = std::move(s.locals);
    a.stack = std::move(s.stack);
    c.heap = std::move(s.heap);
    ++a.index;
    return {std::move(c)};
}

struct RunOutcome {
    enum class Kind { Halted, Stuck, BudgetExceeded } kind = Kind::Stuck;
    std::vector<State> finals;  // Halted: final state of every halting path
    long steps = 0;             // longest path explored (instructions executed)

    std::string kind_str() const {
        switch (kind) {
            case Kind::Halted: return "Halted";
            case Kind::Stuck: return "Stuck";
            case Kind::BudgetExceeded: return "BudgetExceeded";
        }
        return "?";
    }
};

/// Depth-first exploration of every path from `entry` with at most
/// `budget` executed instructions per path.  Stops as soon as one path
/// exceeds the budget.
inline RunOutcome run_bounded(const Program& prog, const std::string& entry, const State& s0, long budget,
                              const TraceFn& trace = {}) {
    auto [m, b] = locate(prog, entry);
    Config init;
    Activation a;
    a.method = m;
    a.block = b;
    a.locals = s0.locals;
    a.stack = s0.stack;
    init.frames.push_back(std::move(a));
    init.heap = s0.heap;

    RunOutcome out;
    bool any_halted = false;
    std::vector<std::pair<Config, long>> work;
    work.emplace_back(std::move(init), 0);
    while (!work.empty()) {
        auto [c, used] = std::move(work.back());
        work.pop_back();
        if (c.halted) {
            any_halted = true;
            const Activation& f = c.frames.back();
            out.finals.push_back(State{f.locals, f.stack, c.heap});
            continue;
        }
        const Activation& f = c.frames.back();
        const bool executes = f.index < f.block->instructions.size();
        const long next_used = used + (executes ? 1 : 0);
        if (next_used > budget) {
            out.kind = RunOutcome::Kind::BudgetExceeded;
            out.steps = budget;
            return out;
        }
        out.steps = std::max(out.steps, next_used);
        auto succ = step(prog, std::move(c), trace);
        for (auto it = succ.rbegin(); it != succ.rend(); ++it) work.emplace_back(std::move(*it), next_used);
    }
    out.kind = any_halted ? RunOutcome::Kind::Halted : RunOutcome::Kind::Stuck;
    return out;
}

/// Field name of the synthetic reference chain used by build_state.
inline const std::string& chain_field() {
    static const std::string f = "$chain";
    return f;
}

/// A state whose slots have exactly the given path-lengths: integers as
/// given, references as fresh acyclic chains through a synthetic field.
inline State build_state(const std::map<poly::VarId, Int>& rho, const bc::Frame& frame, const Program& prog) {
    State s;
    auto make = [&](const bc::SlotType& t, const poly::VarId& v) -> Value {
        auto it = rho.find(v);
        if (it == rho.end()) throw std::invalid_argument("build_state: no value for " + v.str());
        const Int& n = it->second;
        if (t.is_int()) return n;
        if (n < 0) throw std::invalid_argument("build_state: negative path-length " + n.get_str() + " for reference " + v.str());
        if (n == 0) return Null{};
        if (t.kind == bc::SlotType::Kind::Null)
            throw std::invalid_argument("build_state: null-typed slot " + v.str() + " needs length 0");
        if (!n.fits_slong_p() || n > 100000) throw std::invalid_argument("build_state: chain too long for " + v.str());
        Value next = Null{};
        for (long k = 0; k < n.get_si(); ++k) {
            Object o = fresh_object(prog, t.cls);
            o.fields[chain_field()] = next;
            next = s.heap.alloc(std::move(o));
        }
        return next;
    };
    for (int k = 0; k < frame.nl(); ++k) s.locals.push_back(make(frame.locals[static_cast<size_t>(k)], poly::VarId::in_l(k)));
    for (int k = 0; k < frame.ns(); ++k) s.stack.push_back(make(frame.stack[static_cast<size_t>(k)], poly::VarId::in_s(k)));
    return s;
}

/// Path-lengths of a state's slots as input (or output) variables.
inline std::map<poly::VarId, Int> length_assignment(const State& s, bool output) {
    std::map<poly::VarId, Int> rho;
    auto put = [&](const Value& v, poly::VarId id) {
        PathLength l = len(v, s.heap);
        if (l.infinite) throw std::domain_error("infinite path-length for " + id.str());
        rho[id] = l.value;
    };
    for (size_t k = 0; k < s.locals.size(); ++k)
        put(s.locals[k], output ? poly::VarId::out_l(static_cast<int>(k)) : poly::VarId::in_l(static_cast<int>(k)));
    for (size_t k = 0; k < s.stack.size(); ++k)
        put(s.stack[k], output ? poly::VarId::out_s(static_cast<int>(k)) : poly::VarId::in_s(static_cast<int>(k)));
    return rho;
}

inline std::map<poly::VarId, Int> input_assignment(const State& s) { return length_assignment(s, false); }
inline std::map<poly::VarId, Int> output_assignment(const State& s) { return length_assignment(s, true); }

}  // namespace nonterm::interp
