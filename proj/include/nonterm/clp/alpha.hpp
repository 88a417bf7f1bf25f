#pragma once

// Canonical renaming of clauses so that two clauses that differ only in
// variable names, equality-connected aliases or eliminable local variables
// get the same representation.

#include "nonterm/clp/clause.hpp"

#include <limits>

namespace nonterm::clp {

namespace detail {

/// x - y = 0 with distinct x, y.
inline std::optional<std::pair<VarId, VarId>> as_alias(const LinearConstraint& c) {
    if (c.rel != poly::Rel::Eq || c.bound != 0 || c.coeffs.size() != 2) return std::nullopt;
    auto it = c.coeffs.begin();
    auto [x, a] = *it++;
    auto [y, b] = *it;
    if (a + b != 0 || (a != 1 && a != -1)) return std::nullopt;
    return std::make_pair(x, y);
}

}  // namespace detail

/// Alpha-normal form: aliases substituted towards head then body
/// positions, removable locals projected away, variables renumbered as
/// v0, v1, ... by first occurrence, constraint canonicalized.
inline Clause alpha_normal(const Clause& in) {
    Clause c = in;
    c.constraint = poly::canonicalize(c.constraint);
    if (poly::is_trivially_empty(c.constraint)) c.constraint = Polyhedron::empty_set();

    // rank: head position, then body positions, then everything else
    auto rank = [&](const VarId& v) -> std::pair<size_t, VarId> {
        for (size_t i = 0; i < c.head.args.size(); ++i)
            if (c.head.args[i] == v) return {i, v};
        size_t off = c.head.args.size();
        for (const auto& a : c.body) {
            for (size_t i = 0; i < a.args.size(); ++i)
                if (a.args[i] == v) return {off + i, v};
            off += a.args.size();
        }
        return {std::numeric_limits<size_t>::max(), v};
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& k : c.constraint.constraints) {
            auto al = detail::as_alias(k);
            if (!al) continue;
            auto [x, y] = *al;
            if (rank(y) < rank(x)) std::swap(x, y);
            c = rename(c, {{y, x}});
            c.constraint = poly::canonicalize(c.constraint);
            changed = true;
            break;
        }
    }

    std::set<VarId> keep = c.atom_vars();
    std::set<VarId> locals;
    for (const auto& v : c.constraint.support())
        if (!keep.count(v)) locals.insert(v);
    c.constraint.scope = c.all_vars();
    if (!locals.empty()) {
        auto parts = poly::eliminate(c.constraint, locals, poly::Projection::Exact);
        if (parts.empty()) {
            c.constraint = Polyhedron::empty_set();
        } else if (parts.size() == 1 && poly::wildcards(parts[0], keep).empty()) {
            c.constraint = parts[0];
        }
    }

    std::map<VarId, VarId> num;
    int next = 0;
    auto visit = [&](const VarId& v) {
        if (!num.count(v)) num[v] = VarId::fresh(next++);
    };
    for (const auto& v : c.head.args) visit(v);
    for (const auto& a : c.body)
        for (const auto& v : a.args) visit(v);
    for (const auto& k : c.constraint.constraints)
        for (const auto& [v, a] : k.coeffs) visit(v);
    // Two-phase renaming keeps fresh targets from clashing with sources.
    std::map<VarId, VarId> to_tmp, from_tmp;
    for (const auto& [v, f] : num) {
        VarId t{poly::VarKind::Tmp, 1000000 + f.index, "$alpha"};
        to_tmp[v] = t;
        from_tmp[t] = f;
    }
    c = rename(rename(c, to_tmp), from_tmp);
    c.constraint = poly::canonicalize(c.constraint);
    c.constraint.scope.clear();
    for (const auto& v : c.all_vars()) c.constraint.scope.insert(v);
    return c;
}

inline bool alpha_equivalent(const Clause& a, const Clause& b) { return alpha_normal(a) == alpha_normal(b); }

/// Stable textual key of a normalized clause (for sets and ordering).
inline std::string alpha_key(const Clause& normal) { return normal.str(); }

}  // namespace nonterm::clp
