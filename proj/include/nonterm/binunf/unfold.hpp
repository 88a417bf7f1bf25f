#pragma once

// Binary unfolding: a truncated fixpoint iteration that compresses
// leftmost derivation prefixes of a CLP program into clauses with at most
// one body atom.

#include "nonterm/clp/alpha.hpp"
#include "nonterm/clp/text.hpp"

#include <chrono>
#include <functional>

namespace nonterm::binunf {

using clp::Atom;
using clp::Clause;
using clp::ClpProgram;
using poly::VarId;

/// p(x0..) :- x0 = y0, ..., p(y0..).
inline Clause id_clause(const std::string& pred, size_t arity) {
    Clause c;
    c.head.pred = c.body.emplace_back().pred = pred;
    for (size_t i = 0; i < arity; ++i) {
        VarId x = VarId::fresh(static_cast<int>(i)), y = VarId::fresh(static_cast<int>(arity + i));
        c.head.args.push_back(x);
        c.body[0].args.push_back(y);
        c.constraint.add(poly::LinearConstraint::same(x, y));
    }
    c.constraint.scope = c.all_vars();
    return c;
}

struct BinClause {
    Clause clause;  // alpha-normal
    int iteration = 0;
};

struct BinClauseSet {
    std::vector<BinClause> clauses;
    std::map<std::string, size_t> index;  // alpha key -> position
    int iterations = 0;                   // completed iterations
    bool saturated = false;               // last iteration added nothing
    bool timed_out = false;

    bool contains(const Clause& c) const { return index.count(clp::alpha_key(clp::alpha_normal(c))) > 0; }

    /// Adds an already-normalized clause; false when an equivalent one is present.
    bool insert(const Clause& normal, int iteration) {
        auto key = clp::alpha_key(normal);
        if (index.count(key)) return false;
        index.emplace(key, clauses.size());
        clauses.push_back({normal, iteration});
        return true;
    }

    /// Clauses ordered by (iteration, text).
    std::vector<BinClause> sorted() const {
        auto v = clauses;
        std::stable_sort(v.begin(), v.end(), [](const BinClause& a, const BinClause& b) {
            if (a.iteration != b.iteration) return a.iteration < b.iteration;
            return a.clause.str() < b.clause.str();
        });
        return v;
    }
};

struct TimedOut : std::runtime_error {
    TimedOut() : std::runtime_error("unfolding timed out") {}
};

namespace detail {

/// Renames every variable of c into its own namespace `tag`.
inline Clause apart(const Clause& c, const std::string& tag) {
    std::map<VarId, VarId> m;
    int k = 0;
    for (const auto& v : c.all_vars()) m[v] = VarId{poly::VarKind::Tmp, k++, tag};
    return clp::rename(c, m);
}

/// Resolves r's first i body atoms against `chosen` (renamed apart) and
/// returns the normalized resolvents, one per projection disjunct.
inline std::vector<Clause> resolve(const Clause& r, const std::vector<const Clause*>& chosen, poly::Projection mode) {
    poly::Polyhedron c = r.constraint;
    c.scope = r.all_vars();
    Clause out;
    out.head = r.head;
    for (size_t j = 0; j < chosen.size(); ++j) {
        Clause d = apart(*chosen[j], "$u" + std::to_string(j));
        const Atom& call = r.body[j];
        for (size_t k = 0; k < call.args.size(); ++k) c.add(poly::LinearConstraint::same(call.args[k], d.head.args[k]));
        c = poly::conjoin(c, d.constraint);
        c.scope.insert(d.head.args.begin(), d.head.args.end());
        if (!d.body.empty()) out.body = d.body;
    }
    std::set<VarId> keep = out.atom_vars();
    std::vector<Clause> res;
    for (auto& part : poly::project_onto(c, keep, mode)) {
        Clause k = out;
        k.constraint = std::move(part);
        res.push_back(clp::alpha_normal(k));
    }
    return res;
}

}  // namespace detail

struct Options {
    poly::Projection projection = poly::Projection::DarkShadow;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// One application of the operator to `x`.  With `delta` set, only
/// combinations that use at least one clause of iteration `delta` are
/// formed (the others were produced by the previous application).
inline void tbeta_step(const ClpProgram& p, const BinClauseSet& x, int iteration, std::optional<int> delta,
                       const Options& opt, BinClauseSet& into) {
    std::map<std::string, std::vector<const BinClause*>> facts, all;
    for (const auto& b : x.clauses) {
        all[b.clause.head.pred].push_back(&b);
        if (b.clause.is_fact()) facts[b.clause.head.pred].push_back(&b);
    }
    std::map<std::string, Clause> ids;
    auto id_of = [&](const Atom& a) -> const Clause& {
        auto it = ids.find(a.pred);
        if (it == ids.end()) it = ids.emplace(a.pred, id_clause(a.pred, a.args.size())).first;
        return it->second;
    };
    auto check_time = [&] {
        if (opt.deadline && std::chrono::steady_clock::now() > *opt.deadline) throw TimedOut();
    };

    auto add = [&](const Clause& r, const std::vector<const Clause*>& chosen) {
        check_time();
        for (const auto& k : detail::resolve(r, chosen, opt.projection)) into.insert(k, iteration);
    };

    for (const auto& r : p.clauses) {
        const size_t m = r.body.size();
        if (m == 0) {
            if (!delta && poly::sat_int(r.constraint)) into.insert(clp::alpha_normal(r), iteration);
            continue;
        }
        for (size_t i = 1; i <= m; ++i) {
            std::vector<const Clause*> chosen(i, nullptr);
            // Depth-first over the fact choices for positions 0..i-2.
            std::function<void(size_t, bool)> rec = [&](size_t j, bool fresh) {
                if (j + 1 < i) {
                    auto it = facts.find(r.body[j].pred);
                    if (it == facts.end()) return;
                    for (const auto* f : it->second) {
                        chosen[j] = &f->clause;
                        rec(j + 1, fresh || (delta && f->iteration == *delta));
                    }
                    return;
                }
                const Atom& last = r.body[j];
                // id has a body, so it is eligible at every position
                if (!delta || fresh) {
                    chosen[j] = &id_of(last);
                    add(r, chosen);
                }
                auto it = all.find(last.pred);
                if (it == all.end()) return;
                for (const auto* b : it->second) {
                    if (i < m && b->clause.is_fact()) continue;
                    if (delta && !fresh && b->iteration != *delta) continue;
                    chosen[j] = &b->clause;
                    add(r, chosen);
                }
            };
            rec(0, false);
        }
    }
}

/// The first `max` powers of the operator, each clause tagged with the
/// power that first produced it.  Throws TimedOut past the deadline.
inline BinClauseSet unfold(const ClpProgram& p, int max, const Options& opt = {},
                           const std::function<void(const BinClauseSet&)>& on_iteration = {}) {
    if (max < 1) throw std::invalid_argument("max-unfold must be at least 1");
    BinClauseSet x;
    for (int k = 1; k <= max; ++k) {
        size_t before = x.clauses.size();
        std::optional<int> delta;
        if (k > 1) delta = k - 1;
        BinClauseSet next = x;
        tbeta_step(p, x, k, delta, opt, next);
        x = std::move(next);
        x.iterations = k;
        if (on_iteration) on_iteration(x);
        if (x.clauses.size() == before) {
            x.saturated = true;
            break;
        }
    }
    return x;
}

/// Same, but reports a timeout in the result instead of throwing; the
/// clauses of the completed iterations are kept.
inline BinClauseSet unfold_bounded(const ClpProgram& p, int max, const Options& opt = {}) {
    BinClauseSet last;
    try {
        return unfold(p, max, opt, [&](const BinClauseSet& s) { last = s; });
    } catch (const TimedOut&) {
        last.timed_out = true;
        return last;
    }
}

/// The set as a program (clauses in canonical order) plus their iteration tags.
inline std::pair<ClpProgram, std::vector<int>> as_program(const BinClauseSet& s, const ClpProgram& source) {
    ClpProgram out;
    out.entries = source.entries;
    out.signatures = source.signatures;
    std::vector<int> its;
    for (const auto& b : s.sorted()) {
        out.clauses.push_back(clp::readable(b.clause, source));
        its.push_back(b.iteration);
    }
    return {out, its};
}

}  // namespace nonterm::binunf
