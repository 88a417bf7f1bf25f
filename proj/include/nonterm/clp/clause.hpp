#pragma once

#include "nonterm/poly/omega.hpp"

namespace nonterm::clp {

using poly::LinearConstraint;
using poly::Polyhedron;
using poly::VarId;

struct Atom {
    std::string pred;
    std::vector<VarId> args;

    bool operator==(const Atom&) const = default;
    auto operator<=>(const Atom&) const = default;

    std::string str() const {
        std::string s = pred + "(";
        for (size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + args[i].str();
        return s + ")";
    }
};

struct Clause {
    Atom head;
    Polyhedron constraint;
    std::vector<Atom> body;

    bool operator==(const Clause& o) const {
        return head == o.head && constraint.constraints == o.constraint.constraints && body == o.body;
    }

    bool is_fact() const { return body.empty(); }

    std::set<VarId> atom_vars() const {
        std::set<VarId> s(head.args.begin(), head.args.end());
        for (const auto& a : body) s.insert(a.args.begin(), a.args.end());
        return s;
    }

    std::set<VarId> all_vars() const {
        std::set<VarId> s = atom_vars();
        auto c = constraint.support();
        s.insert(c.begin(), c.end());
        return s;
    }

    /// `head :- c1, c2, body.` using the clause's own variable tokens.
    std::string str() const {
        std::string s = head.str() + " :- ";
        std::vector<std::string> items;
        for (const auto& c : constraint.constraints) items.push_back(poly::pretty(c));
        for (const auto& a : body) items.push_back(a.str());
        if (items.empty()) items.push_back("true");
        for (size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + items[i];
        return s + ".";
    }
};

/// A CLP(PL) program: clauses plus, per predicate, the variables of its
/// generated head (used to print readable names) and the entry predicate of
/// every method.
struct ClpProgram {
    std::vector<Clause> clauses;
    std::map<std::string, std::string> entries;             // method -> predicate
    std::map<std::string, std::vector<VarId>> signatures;   // predicate -> head args

    size_t arity(const std::string& pred) const {
        auto it = signatures.find(pred);
        if (it == signatures.end()) throw std::out_of_range("unknown predicate " + pred);
        return it->second.size();
    }
};

inline Clause rename(const Clause& c, const std::map<VarId, VarId>& m) {
    auto f = [&](const VarId& v) {
        auto it = m.find(v);
        return it == m.end() ? v : it->second;
    };
    Clause r;
    r.head.pred = c.head.pred;
    for (const auto& v : c.head.args) r.head.args.push_back(f(v));
    r.constraint = poly::rename(c.constraint, m);
    for (const auto& a : c.body) {
        Atom b{a.pred, {}};
        for (const auto& v : a.args) b.args.push_back(f(v));
        r.body.push_back(std::move(b));
    }
    return r;
}

}  // namespace nonterm::clp
