#pragma once

#include "nonterm/bytecode/ir.hpp"

#include <functional>
#include <variant>

namespace nonterm::interp {

struct Loc {
    int id = 0;
    bool operator==(const Loc&) const = default;
};
struct Null {
    bool operator==(const Null&) const = default;
};

using Value = std::variant<Int, Loc, Null>;

inline std::string value_str(const Value& v) {
    if (auto i = std::get_if<Int>(&v)) return i->get_str();
    if (auto l = std::get_if<Loc>(&v)) return "l" + std::to_string(l->id);
    return "null";
}

struct Object {
    std::string cls;
    std::map<std::string, Value> fields;
    bool operator==(const Object&) const = default;
};

struct Heap {
    std::map<int, Object> objects;
    int next_id = 1;

    Loc alloc(Object o) {
        const int id = next_id++;
        objects.emplace(id, std::move(o));
        return Loc{id};
    }
    const Object& at(Loc l) const {
        auto it = objects.find(l.id);
        if (it == objects.end()) throw std::logic_error("dangling location l" + std::to_string(l.id));
        return it->second;
    }
    Object& at(Loc l) {
        auto it = objects.find(l.id);
        if (it == objects.end()) throw std::logic_error("dangling location l" + std::to_string(l.id));
        return it->second;
    }
    bool operator==(const Heap&) const = default;
};

/// <locals || stack || heap>; stack[0] is the base.
struct State {
    std::vector<Value> locals;
    std::vector<Value> stack;
    Heap heap;

    bool operator==(const State&) const = default;

    std::string str() const {
        auto list = [](const std::vector<Value>& vs) {
            std::string s = "[";
            for (size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + value_str(vs[i]);
            return s + "]";
        };
        return list(locals) + " | " + list(stack);
    }
};

/// Path-length of a value: an integer, or infinity on cyclic structures.
struct PathLength {
    bool infinite = false;
    Int value = 0;

    static PathLength inf() { return {true, 0}; }
    bool operator==(const PathLength&) const = default;
    std::string str() const { return infinite ? "inf" : value.get_str(); }
};

/// Integers are their own length, null is 0, a location is the number of
/// locations on its longest reference chain (itself included).
inline PathLength len(const Value& v, const Heap& mu) {
    if (auto i = std::get_if<Int>(&v)) return {false, *i};
    if (std::holds_alternative<Null>(v)) return {false, 0};
    enum Mark { Open, Closed };
    std::map<int, Mark> mark;
    std::map<int, Int> memo;
    bool cyclic = false;
    std::function<Int(Loc)> chain = [&](Loc l) -> Int {
        if (auto m = mark.find(l.id); m != mark.end()) {
            if (m->second == Open) cyclic = true;
            return memo[l.id];
        }
        mark[l.id] = Open;
        Int best = 0;
        for (const auto& [f, fv] : mu.at(l).fields)
            if (auto t = std::get_if<Loc>(&fv)) {
                Int c = chain(*t);
                if (c > best) best = c;
            }
        mark[l.id] = Closed;
        return memo[l.id] = best + 1;
    };
    Int n = chain(std::get<Loc>(v));
    if (cyclic) return PathLength::inf();
    return {false, n};
}

}  // namespace nonterm::interp
