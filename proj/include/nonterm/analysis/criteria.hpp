#pragma once

// Recurrent sets of binary loops p(x) :- c, p(y) and the two criteria
// that make every point of the set the start of an infinite derivation.

#include "nonterm/clp/clause.hpp"

#include <functional>

namespace nonterm::analysis {

using clp::Atom;
using clp::Clause;
using poly::LinearConstraint;
using poly::Polyhedron;
using poly::VarId;

/// k-th argument position of a predicate.
inline VarId pos(int k) { return {poly::VarKind::Tmp, k, "$pos"}; }

inline std::set<VarId> positions(size_t n) {
    std::set<VarId> s;
    for (size_t k = 0; k < n; ++k) s.insert(pos(static_cast<int>(k)));
    return s;
}

/// A set of argument tuples for `pred` as a polyhedron over pos(0..arity-1).
/// Exact projections may leave stride wildcards (other variables, each in a
/// single equality).
struct RecurrentSet {
    std::string pred;
    size_t arity = 0;
    Polyhedron e;
};

namespace detail {

/// `p` with pos(k) replaced by args[k] and every other variable renamed
/// apart into namespace `tag`.
inline Polyhedron instantiate(const Polyhedron& p, const std::vector<VarId>& args, const std::string& tag) {
    std::map<VarId, VarId> m;
    for (size_t k = 0; k < args.size(); ++k) m[pos(static_cast<int>(k))] = args[k];
    int n = 0;
    for (const auto& v : p.support())
        if (!m.count(v)) m[v] = VarId{poly::VarKind::Tmp, n++, tag};
    Polyhedron r = poly::rename(p, m);
    r.scope.clear();
    for (const auto& v : r.support()) r.scope.insert(v);
    return r;
}

/// Ways of falsifying one disjunct, each a conjunction.  `kept` are the
/// free variables; a constraint mentioning anything else is a stride
/// a.x + k.w = b, false exactly when a.x - b is not a multiple of k.
inline std::vector<std::vector<LinearConstraint>> falsifiers(const Polyhedron& d, const std::set<VarId>& kept,
                                                             const std::string& tag) {
    std::vector<std::vector<LinearConstraint>> out;
    int n = 0;
    for (const auto& c : d.constraints) {
        std::optional<VarId> w;
        for (const auto& [v, a] : c.coeffs)
            if (!kept.count(v)) w = v;
        if (!w) {
            for (auto& n : poly::negate(c)) out.push_back({n});
            continue;
        }
        Int k = magnitude(c.coeffs.at(*w));
        if (k == 1) continue;  // always satisfiable in w
        std::map<VarId, Int> t = c.coeffs;
        t.erase(*w);
        VarId q{poly::VarKind::Tmp, n++, tag};
        t[q] = -k;
        // 1 <= a.x - b - k.q <= k-1
        out.push_back({LinearConstraint::ge(t, c.bound + 1), LinearConstraint::le(t, c.bound + k - 1)});
    }
    return out;
}

}  // namespace detail

/// True iff every integer point of p (over `kept`) lies in some disjunct.
inline bool covered(const Polyhedron& p, const std::vector<Polyhedron>& ds, const std::set<VarId>& kept) {
    std::vector<std::vector<std::vector<LinearConstraint>>> alts;
    for (size_t i = 0; i < ds.size(); ++i) alts.push_back(detail::falsifiers(ds[i], kept, "$neg" + std::to_string(i)));
    std::function<bool(size_t, const Polyhedron&)> escape = [&](size_t i, const Polyhedron& q) {
        if (!poly::sat_int(q)) return false;
        if (i == alts.size()) return true;
        for (const auto& a : alts[i]) {
            Polyhedron n = q;
            for (const auto& c : a) n.add(c);
            if (escape(i + 1, n)) return true;
        }
        return false;
    };
    return !escape(0, p);
}

inline bool is_loop(const Clause& r) { return r.body.size() == 1 && r.body[0].pred == r.head.pred; }

/// c with the head bound to pos(0..): the points are (head tuple, rest).
inline Polyhedron bind_head(const Clause& r) {
    Polyhedron c = r.constraint;
    for (size_t k = 0; k < r.head.args.size(); ++k)
        c.add(LinearConstraint::same(pos(static_cast<int>(k)), r.head.args[k]));
    c.scope = positions(r.head.args.size());
    for (const auto& v : r.all_vars()) c.scope.insert(v);
    return c;
}

/// Projections of the loop constraint onto the head: one set in dark-shadow
/// mode, the disjuncts in exact mode.  Empty when c is unsatisfiable.
inline std::vector<RecurrentSet> recurrent_sets(const Clause& r, poly::Projection mode) {
    if (!is_loop(r)) throw std::invalid_argument("not a recursive binary clause: " + r.str());
    std::vector<RecurrentSet> out;
    for (auto& e : poly::project_onto(bind_head(r), positions(r.head.args.size()), mode))
        out.push_back({r.head.pred, r.head.args.size(), std::move(e)});
    return out;
}

inline std::optional<RecurrentSet> recurrent_set(const Clause& r) {
    auto v = recurrent_sets(r, poly::Projection::DarkShadow);
    if (v.empty()) return std::nullopt;
    return v.front();
}

/// forall x. e(x) -> exists y. c(x, y) and e(y).
inline bool check_existential(const Clause& r, const RecurrentSet& e, poly::Projection mode = poly::Projection::DarkShadow) {
    Polyhedron c = bind_head(r);
    c = poly::conjoin(c, detail::instantiate(e.e, r.body[0].args, "$y"));
    auto keep = positions(e.arity);
    auto d = poly::project_onto(c, keep, mode);
    return covered(e.e, d, keep);
}

/// forall x. e(x) -> forall y. c(x, y) -> e(y).
inline bool check_universal(const Clause& r, const RecurrentSet& e) {
    Polyhedron lhs = poly::conjoin(detail::instantiate(e.e, r.head.args, "$x"), r.constraint);
    Polyhedron rhs = detail::instantiate(e.e, r.body[0].args, "$y");
    std::set<VarId> kept = lhs.support();
    for (const auto& v : r.all_vars()) kept.insert(v);
    return covered(lhs, {rhs}, kept);
}

/// A model of c' and e(y'), restricted to the head of r'.  `extra` is
/// conjoined over pos(..) of r'.head (used for entry argument domains).
inline std::optional<std::vector<Int>> check_reachable(const Clause& reach, const RecurrentSet& e,
                                                       const Polyhedron& extra = {}) {
    if (reach.body.size() != 1 || reach.body[0].pred != e.pred) throw std::invalid_argument("reach clause does not call the loop");
    Polyhedron c = poly::conjoin(bind_head(reach), detail::instantiate(e.e, reach.body[0].args, "$y"));
    c = poly::conjoin(c, extra);
    auto m = poly::sat_model(c);
    if (!m) return std::nullopt;
    std::vector<Int> vals;
    for (size_t k = 0; k < reach.head.args.size(); ++k) vals.push_back(m->at(pos(static_cast<int>(k))));
    return vals;
}

/// A point of e itself (the loop starts at the entry).
inline std::optional<std::vector<Int>> sample_point(const RecurrentSet& e, const Polyhedron& extra = {}) {
    Polyhedron c = poly::conjoin(e.e, extra);
    auto ps = positions(e.arity);
    c.scope.insert(ps.begin(), ps.end());
    auto m = poly::sat_model(c);
    if (!m) return std::nullopt;
    std::vector<Int> vals;
    for (size_t k = 0; k < e.arity; ++k) vals.push_back(m->at(pos(static_cast<int>(k))));
    return vals;
}

}  // namespace nonterm::analysis
