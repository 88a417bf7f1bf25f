#pragma once

#include "nonterm/support/bigint.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nonterm::bc {

/// Type of a local or stack slot.  `Null` is the type of the `const null`
/// constant before it meets a class-typed context.
struct SlotType {
    enum class Kind { Int, Ref, Null };
    Kind kind = Kind::Int;
    std::string cls;

    static SlotType integer() { return {Kind::Int, {}}; }
    static SlotType ref(std::string c) { return {Kind::Ref, std::move(c)}; }
    static SlotType null() { return {Kind::Null, {}}; }

    bool is_int() const { return kind == Kind::Int; }
    bool is_reference() const { return kind != Kind::Int; }

    bool operator==(const SlotType&) const = default;

    std::string str() const {
        switch (kind) {
            case Kind::Int: return "int";
            case Kind::Ref: return cls;
            case Kind::Null: return "null";
        }
        return "?";
    }
};

/// A value of type `actual` may flow where `expected` is required.
inline bool assignable(const SlotType& actual, const SlotType& expected) {
    if (actual == expected) return true;
    return actual.kind == SlotType::Kind::Null && expected.kind == SlotType::Kind::Ref;
}

struct MethodSig {
    std::string cls;
    std::string name;
    std::vector<SlotType> params;
    std::optional<SlotType> ret;  // nullopt: void

    std::string qualified() const { return cls + "." + name; }

    std::string str() const {
        std::string s = qualified() + "(";
        for (size_t i = 0; i < params.size(); ++i) {
            if (i) s += ",";
            s += params[i].str();
        }
        return s + "):" + (ret ? ret->str() : "void");
    }

    bool operator==(const MethodSig&) const = default;
};

enum class Op {
    Const, Dup, New, Load, Store, Add, Pop, Putfield,
    IfEq, IfLt, IfLe, IfGt, IfGe,
    IfNe,      // front end only, removed by desugar_ifne
    Call,
    Getfield,  // not part of the language; used by the inexact fixture
};

struct Instruction {
    Op op = Op::Dup;
    std::optional<Int> value;  // Const: nullopt is `null`
    int index = 0;             // Load, Store
    std::string cls;           // New, Putfield, Getfield
    std::string field;         // Putfield, Getfield
    SlotType type;             // IfEq, IfNe, Getfield (field type)
    MethodSig callee;          // Call
    bool is_static = false;    // Call

    static Instruction constant(Int c) { Instruction i; i.op = Op::Const; i.value = std::move(c); return i; }
    static Instruction const_null() { Instruction i; i.op = Op::Const; return i; }
    static Instruction simple(Op op) { Instruction i; i.op = op; return i; }
    static Instruction load(int k) { Instruction i; i.op = Op::Load; i.index = k; return i; }
    static Instruction store(int k) { Instruction i; i.op = Op::Store; i.index = k; return i; }
    static Instruction make_new(std::string c) { Instruction i; i.op = Op::New; i.cls = std::move(c); return i; }
    static Instruction putfield(std::string c, std::string f) {
        Instruction i; i.op = Op::Putfield; i.cls = std::move(c); i.field = std::move(f); return i;
    }
    static Instruction getfield(std::string c, std::string f, SlotType t) {
        Instruction i; i.op = Op::Getfield; i.cls = std::move(c); i.field = std::move(f); i.type = std::move(t); return i;
    }
    static Instruction guard(Op op, SlotType t = SlotType::integer()) { Instruction i; i.op = op; i.type = std::move(t); return i; }
    static Instruction call(MethodSig sig, bool st) {
        Instruction i; i.op = Op::Call; i.callee = std::move(sig); i.is_static = st; return i;
    }

    bool is_guard() const {
        return op == Op::IfEq || op == Op::IfLt || op == Op::IfLe || op == Op::IfGt || op == Op::IfGe || op == Op::IfNe;
    }

    bool operator==(const Instruction&) const = default;

    std::string str() const {
        switch (op) {
            case Op::Const: return value ? "const " + value->get_str() : "const null";
            case Op::Dup: return "dup";
            case Op::New: return "new " + cls;
            case Op::Load: return "load " + std::to_string(index);
            case Op::Store: return "store " + std::to_string(index);
            case Op::Add: return "add";
            case Op::Pop: return "pop";
            case Op::Putfield: return "putfield " + cls + "." + field + ":int";
            case Op::IfEq: return "ifeq " + type.str();
            case Op::IfLt: return "iflt int";
            case Op::IfLe: return "ifle int";
            case Op::IfGt: return "ifgt int";
            case Op::IfGe: return "ifge int";
            case Op::IfNe: return "ifne " + type.str();
            case Op::Call: return std::string("call ") + (is_static ? "static " : "") + callee.str();
            case Op::Getfield: return "getfield " + cls + "." + field + ":" + type.str();
        }
        return "?";
    }
};

struct Block {
    std::string name;
    std::vector<Instruction> instructions;
    std::vector<std::string> successors;
    int line = 0;

    bool operator==(const Block& o) const {
        return name == o.name && instructions == o.instructions && successors == o.successors;
    }
};

struct Method {
    MethodSig sig;
    bool is_static = false;
    std::string entry;
    std::vector<Block> blocks;
    int line = 0;

    const Block* find_block(const std::string& n) const {
        for (const auto& b : blocks)
            if (b.name == n) return &b;
        return nullptr;
    }
    Block* find_block(const std::string& n) {
        for (auto& b : blocks)
            if (b.name == n) return &b;
        return nullptr;
    }

    /// Parameter slots as seen by the entry block (receiver first).
    std::vector<SlotType> entry_locals() const {
        std::vector<SlotType> l;
        if (!is_static) l.push_back(SlotType::ref(sig.cls));
        l.insert(l.end(), sig.params.begin(), sig.params.end());
        return l;
    }

    bool operator==(const Method& o) const {
        return sig == o.sig && is_static == o.is_static && entry == o.entry && blocks == o.blocks;
    }
};

struct Field {
    std::string name;
    SlotType type;
    bool operator==(const Field&) const = default;
};

struct ClassDecl {
    std::string name;
    std::vector<Field> fields;
    bool operator==(const ClassDecl&) const = default;
};

struct Program {
    std::vector<ClassDecl> classes;
    std::vector<Method> methods;

    /// `Object` is always available, with no fields.
    const ClassDecl* find_class(const std::string& n) const {
        static const ClassDecl object{"Object", {}};
        for (const auto& c : classes)
            if (c.name == n) return &c;
        return n == "Object" ? &object : nullptr;
    }

    const Method* find_method(const std::string& qualified) const {
        for (const auto& m : methods)
            if (m.sig.qualified() == qualified) return &m;
        return nullptr;
    }

    const Method* resolve(const MethodSig& s) const {
        const Method* m = find_method(s.qualified());
        return m && m->sig == s ? m : nullptr;
    }

    /// Owning method and block of a (program-wide unique) block name.
    std::pair<const Method*, const Block*> find_block(const std::string& n) const {
        for (const auto& m : methods)
            if (const Block* b = m.find_block(n)) return {&m, b};
        return {nullptr, nullptr};
    }

    bool operator==(const Program&) const = default;
};

}  // namespace nonterm::bc
