#pragma once

// Integer satisfiability and projection in the style of Pugh's Omega test:
// equalities are eliminated by substitution (with the mod-hat reduction when
// no unit coefficient is available), inequalities by Fourier-Motzkin with
// real shadow, dark shadow and splinters.

#include "nonterm/poly/polyhedron.hpp"

#include <atomic>
#include <cassert>
#include <functional>
#include <optional>

namespace nonterm::poly {

/// Number of integer satisfiability decisions performed so far.
inline std::atomic<std::uint64_t>& sat_counter() {
    static std::atomic<std::uint64_t> n{0};
    return n;
}

enum class Projection { Exact, DarkShadow };

namespace omega {

struct Row {
    std::vector<Int> a;  // coefficient per variable index
    Int b;               // a . x  (<= | =)  b
    bool eq = false;
};

/// Linear expression used when a variable is solved for.
struct Expr {
    std::vector<Int> a;
    Int c;
};

class System {
public:
    std::vector<Row> rows;
    size_t nvars = 0;
    std::vector<bool> dropped;   // projection: eliminate this variable
    std::vector<bool> wildcard;  // projection: kept, occurs in one equality only

    size_t add_var(bool drop) {
        ++nvars;
        for (auto& r : rows) r.a.resize(nvars, 0);
        dropped.push_back(drop);
        wildcard.push_back(false);
        return nvars - 1;
    }

    bool mentions(const Row& r, size_t k) const { return k < r.a.size() && r.a[k] != 0; }

    bool occurs(size_t k) const {
        for (const auto& r : rows)
            if (mentions(r, k)) return true;
        return false;
    }

    /// Substitutes x_k := e.a . x + e.c into every row.
    void substitute(size_t k, const Expr& e) {
        for (auto& r : rows) {
            if (!mentions(r, k)) continue;
            const Int f = r.a[k];
            r.a[k] = 0;
            for (size_t i = 0; i < nvars; ++i)
                if (e.a[i] != 0) r.a[i] += f * e.a[i];
            r.b -= f * e.c;
        }
    }

    /// Normalizes every row, merges parallel rows and detects conflicts.
    /// Returns false when the system is trivially infeasible.
    bool simplify() {
        std::vector<Row> out;
        std::map<std::vector<Int>, size_t> ineq_at;  // coeffs -> index in out
        std::map<std::vector<Int>, size_t> eq_at;
        for (auto& r : rows) {
            r.a.resize(nvars, 0);
            Int g = 0;
            for (const auto& x : r.a) g = gcd(g, x);
            if (g == 0) {
                if (r.eq ? r.b != 0 : r.b < 0) return false;
                continue;
            }
            if (r.eq) {
                if (r.b % g != 0) return false;
                if (g != 1) {
                    for (auto& x : r.a) x /= g;
                    r.b /= g;
                }
                size_t first = 0;
                while (r.a[first] == 0) ++first;
                if (sgn(r.a[first]) < 0) {
                    for (auto& x : r.a) x = -x;
                    r.b = -r.b;
                }
                auto it = eq_at.find(r.a);
                if (it != eq_at.end()) {
                    if (out[it->second].b != r.b) return false;
                    continue;
                }
                eq_at.emplace(r.a, out.size());
                out.push_back(std::move(r));
            } else {
                if (g != 1) {
                    for (auto& x : r.a) x /= g;
                    r.b = floor_div(r.b, g);
                }
                auto it = ineq_at.find(r.a);
                if (it != ineq_at.end()) {
                    if (r.b < out[it->second].b) out[it->second].b = r.b;
                    continue;
                }
                ineq_at.emplace(r.a, out.size());
                out.push_back(std::move(r));
            }
        }
        // Opposite inequalities: conflict or equality.
        std::vector<bool> remove(out.size(), false);
        std::vector<Row> extra;
        for (const auto& [coeffs, i] : ineq_at) {
            if (remove[i]) continue;
            std::vector<Int> neg = coeffs;
            for (auto& x : neg) x = -x;
            auto it = ineq_at.find(neg);
            if (it == ineq_at.end()) continue;
            const Int sum = out[i].b + out[it->second].b;
            if (sum < 0) return false;
            if (sum == 0) {
                remove[i] = remove[it->second] = true;
                Row e{coeffs, out[i].b, true};
                size_t first = 0;
                while (e.a[first] == 0) ++first;
                if (sgn(e.a[first]) < 0) {
                    for (auto& x : e.a) x = -x;
                    e.b = -e.b;
                }
                auto eit = eq_at.find(e.a);
                if (eit != eq_at.end()) {
                    if (out[eit->second].b != e.b) return false;
                    continue;
                }
                extra.push_back(std::move(e));
            }
        }
        rows.clear();
        for (size_t i = 0; i < out.size(); ++i)
            if (!remove[i]) rows.push_back(std::move(out[i]));
        for (auto& e : extra) rows.push_back(std::move(e));
        return true;
    }
};

inline Int mod_hat(const Int& a, const Int& m) { return a - m * floor_div(2 * a + m, 2 * m); }

/// Applies one mod-hat reduction to equality `row` on variable k.
/// Introduces sigma and returns the expression substituted for x_k.
inline Expr pugh_step(System& s, size_t row, size_t k, bool sigma_dropped) {
    const Row e = s.rows[row];
    const Int ak = e.a[k];
    const Int m = magnitude(ak) + 1;
    const int sg = sgn(ak);
    const size_t sigma = s.add_var(sigma_dropped);
    Expr x;
    x.a.assign(s.nvars, 0);
    // m*sigma = sum_i (a_i mod^ m) x_i + ((-b) mod^ m)
    // x_k = -sg * (m*sigma - sum_{i!=k} (a_i mod^ m) x_i - ((-b) mod^ m))
    x.a[sigma] = -sg * m;
    for (size_t i = 0; i < e.a.size(); ++i) {
        if (i == k || e.a[i] == 0) continue;
        x.a[i] = sg * mod_hat(e.a[i], m);
    }
    x.c = sg * mod_hat(-e.b, m);
    s.substitute(k, x);
    return x;
}

inline Int eval(const Expr& e, const std::vector<Int>& model) {
    Int v = e.c;
    for (size_t i = 0; i < e.a.size(); ++i)
        if (e.a[i] != 0) v += e.a[i] * model[i];
    return v;
}

/// Chooses the variable to eliminate from inequalities: smallest product of
/// positive and negative occurrence counts, then lowest index.
inline std::optional<size_t> pick_ineq_var(const System& s, const std::function<bool(size_t)>& eligible) {
    std::optional<size_t> best;
    Int best_score = 0;
    for (size_t k = 0; k < s.nvars; ++k) {
        if (!eligible(k)) continue;
        long pos = 0, neg = 0;
        for (const auto& r : s.rows) {
            if (!s.mentions(r, k)) continue;
            (sgn(r.a[k]) > 0 ? pos : neg)++;
        }
        if (pos + neg == 0) continue;
        Int score = Int(pos) * neg;
        if (!best || score < best_score) {
            best = k;
            best_score = score;
        }
    }
    return best;
}

struct Shadows {
    std::vector<Row> lower, upper, rest;
    bool exact = true;
    Int max_upper = 0;
};

inline Shadows split_bounds(const System& s, size_t k) {
    Shadows sh;
    bool all_lower_unit = true, all_upper_unit = true;
    for (const auto& r : s.rows) {
        if (!s.mentions(r, k)) sh.rest.push_back(r);
        else if (sgn(r.a[k]) > 0) {
            sh.upper.push_back(r);
            if (r.a[k] != 1) all_upper_unit = false;
            if (r.a[k] > sh.max_upper) sh.max_upper = r.a[k];
        } else {
            sh.lower.push_back(r);
            if (r.a[k] != -1) all_lower_unit = false;
        }
    }
    sh.exact = all_lower_unit || all_upper_unit;
    return sh;
}

/// Fourier-Motzkin combination of one lower and one upper bound on x_k.
inline Row combine(const Row& lo, const Row& up, size_t k, bool dark) {
    const Int p = -lo.a[k];  // lower: -p x + t_L <= b_L
    const Int q = up.a[k];   // upper:  q x + t_U <= b_U
    Row r;
    r.a.resize(lo.a.size());
    for (size_t i = 0; i < lo.a.size(); ++i) r.a[i] = q * lo.a[i] + p * up.a[i];
    r.a[k] = 0;
    r.b = q * lo.b + p * up.b;
    if (dark) r.b -= (p - 1) * (q - 1);
    return r;
}

inline System shadow(const System& s, const Shadows& sh, size_t k, bool dark) {
    System out = s;
    out.rows = sh.rest;
    for (const auto& lo : sh.lower)
        for (const auto& up : sh.upper) out.rows.push_back(combine(lo, up, k, dark));
    return out;
}

/// Picks a value for x_k between its bounds given values for the others.
inline Int choose_value(const std::vector<Row>& lower, const std::vector<Row>& upper, size_t k,
                        const std::vector<Int>& model) {
    std::optional<Int> lo, hi;
    for (const auto& r : lower) {
        Int t = 0;  // -p x + t <= b  ->  x >= (t - b) / p
        for (size_t i = 0; i < r.a.size(); ++i)
            if (i != k && r.a[i] != 0) t += r.a[i] * model[i];
        Int v = ceil_div(t - r.b, -r.a[k]);
        if (!lo || v > *lo) lo = v;
    }
    for (const auto& r : upper) {
        Int t = 0;
        for (size_t i = 0; i < r.a.size(); ++i)
            if (i != k && r.a[i] != 0) t += r.a[i] * model[i];
        Int v = floor_div(r.b - t, r.a[k]);
        if (!hi || v < *hi) hi = v;
    }
    if (lo && hi && *lo > *hi) throw std::logic_error("omega: empty bound interval during model reconstruction");
    if (lo && hi) return (*lo <= 0 && 0 <= *hi) ? Int(0) : (sgn(*lo) > 0 ? *lo : *hi);
    if (lo) return sgn(*lo) > 0 ? *lo : Int(0);
    if (hi) return sgn(*hi) < 0 ? *hi : Int(0);
    return 0;
}

/// Exact integer satisfiability with model reconstruction.
inline std::optional<std::vector<Int>> solve(System s) {
    if (!s.simplify()) return std::nullopt;

    // Equalities first.
    for (size_t ri = 0; ri < s.rows.size(); ++ri) {
        if (!s.rows[ri].eq) continue;
        const Row& e = s.rows[ri];
        std::optional<size_t> unit, smallest;
        for (size_t i = 0; i < s.nvars; ++i) {
            if (e.a[i] == 0) continue;
            if (magnitude(e.a[i]) == 1 && !unit) unit = i;
            if (!smallest || magnitude(e.a[i]) < magnitude(e.a[*smallest])) smallest = i;
        }
        if (unit) {
            const size_t k = *unit;
            const int sg = sgn(e.a[k]);
            Expr x;
            x.a.assign(s.nvars, 0);
            for (size_t i = 0; i < s.nvars; ++i)
                if (i != k) x.a[i] = -sg * e.a[i];
            x.c = sg * e.b;
            s.rows.erase(s.rows.begin() + static_cast<long>(ri));
            s.substitute(k, x);
            auto m = solve(std::move(s));
            if (!m) return std::nullopt;
            (*m)[k] = eval(x, *m);
            return m;
        }
        const size_t k = *smallest;
        const size_t n_before = s.nvars;
        Expr x = pugh_step(s, ri, k, true);
        auto m = solve(std::move(s));
        if (!m) return std::nullopt;
        x.a.resize(m->size(), 0);
        (*m)[k] = eval(x, *m);
        m->resize(std::max(n_before, k + 1));
        return m;
    }

    auto k_opt = pick_ineq_var(s, [](size_t) { return true; });
    if (!k_opt) return std::vector<Int>(s.nvars, 0);
    const size_t k = *k_opt;
    Shadows sh = split_bounds(s, k);

    auto finish = [&](std::optional<std::vector<Int>> m) -> std::optional<std::vector<Int>> {
        if (!m) return std::nullopt;
        m->resize(s.nvars, 0);
        (*m)[k] = choose_value(sh.lower, sh.upper, k, *m);
        return m;
    };

    if (sh.lower.empty() || sh.upper.empty()) {
        System r = s;
        r.rows = sh.rest;
        return finish(solve(std::move(r)));
    }
    if (sh.exact) return finish(solve(shadow(s, sh, k, false)));
    if (auto m = solve(shadow(s, sh, k, true))) return finish(std::move(m));
    if (!solve(shadow(s, sh, k, false))) return std::nullopt;
    for (const auto& lo : sh.lower) {
        const Int p = -lo.a[k];
        const Int jmax = floor_div(sh.max_upper * p - sh.max_upper - p, sh.max_upper);
        for (Int j = 0; j <= jmax; ++j) {
            System sp = s;
            Row e = lo;
            e.eq = true;
            e.b = lo.b - j;
            sp.rows.push_back(std::move(e));
            if (auto m = solve(std::move(sp))) {
                m->resize(s.nvars, 0);
                return m;
            }
        }
    }
    return std::nullopt;
}

/// A wildcard must occur in exactly one row, an equality; otherwise it
/// falls back to an ordinary dropped variable.
inline void refresh_wildcards(System& s) {
    for (size_t k = 0; k < s.nvars; ++k) {
        if (!s.wildcard[k]) continue;
        int rows = 0;
        bool in_eq = true;
        for (const auto& r : s.rows) {
            if (!s.mentions(r, k)) continue;
            ++rows;
            in_eq = in_eq && r.eq;
        }
        if (rows != 1 || !in_eq) s.wildcard[k] = false;
    }
}

/// Projects away every `dropped` variable.  Exact mode returns a union of
/// systems (wildcards may remain, each occurring in a single equality);
/// dark-shadow mode returns at most one system whose points are a subset.
inline void project(System s, Projection mode, std::vector<System>& out) {
    if (!s.simplify()) return;
    const bool exact = mode == Projection::Exact;

    std::optional<size_t> forced;
    for (;;) {
        refresh_wildcards(s);
        bool progressed = false;
        for (size_t ri = 0; ri < s.rows.size() && !progressed; ++ri) {
            Row& e = s.rows[ri];
            if (!e.eq) continue;
            std::vector<size_t> ds;
            for (size_t k = 0; k < s.nvars; ++k)
                if (e.a[k] != 0 && s.dropped[k] && !s.wildcard[k]) ds.push_back(k);
            if (ds.empty()) continue;
            progressed = true;
            std::optional<size_t> unit;
            for (size_t k : ds)
                if (magnitude(e.a[k]) == 1) {
                    unit = k;
                    break;
                }
            if (unit) {
                const size_t k = *unit;
                const int sg = sgn(e.a[k]);
                Expr x;
                x.a.assign(s.nvars, 0);
                for (size_t i = 0; i < s.nvars; ++i)
                    if (i != k) x.a[i] = -sg * e.a[i];
                x.c = sg * e.b;
                s.rows.erase(s.rows.begin() + static_cast<long>(ri));
                s.substitute(k, x);
                break;
            }
            if (ds.size() >= 2) {
                size_t k = ds[0];
                for (size_t d : ds)
                    if (magnitude(e.a[d]) < magnitude(e.a[k])) k = d;
                pugh_step(s, ri, k, true);
                break;
            }
            const size_t k = ds[0];
            if (!exact) {
                // Dark shadow: the equality becomes two inequalities and k is
                // eliminated right away (simplify would merge them back).
                e.eq = false;
                Row opp = e;
                for (auto& x : opp.a) x = -x;
                opp.b = -opp.b;
                s.rows.push_back(std::move(opp));
                forced = k;
                break;
            }
            // a*x + t = b pins x up to a stride; eliminate x elsewhere.
            Row pin = e;
            if (sgn(pin.a[k]) < 0) {
                for (auto& x : pin.a) x = -x;
                pin.b = -pin.b;
            }
            const Int a = pin.a[k];
            for (size_t rj = 0; rj < s.rows.size(); ++rj) {
                if (rj == ri || !s.mentions(s.rows[rj], k)) continue;
                Row& r = s.rows[rj];
                const Int c = r.a[k];
                for (size_t i = 0; i < s.nvars; ++i) r.a[i] = a * r.a[i] - c * pin.a[i];
                r.a[k] = 0;
                r.b = a * r.b - c * pin.b;
            }
            s.rows[ri] = pin;
            s.wildcard[k] = true;
            break;
        }
        if (!progressed || forced) break;
        if (!s.simplify()) return;
    }
    refresh_wildcards(s);

    auto k_opt = forced ? forced : pick_ineq_var(s, [&](size_t k) { return s.dropped[k] && !s.wildcard[k]; });
    if (!k_opt) {
        out.push_back(std::move(s));
        return;
    }
    const size_t k = *k_opt;
    Shadows sh = split_bounds(s, k);
    if (sh.lower.empty() || sh.upper.empty()) {
        s.rows = sh.rest;
        project(std::move(s), mode, out);
        return;
    }
    if (sh.exact) {
        project(shadow(s, sh, k, false), mode, out);
        return;
    }
    project(shadow(s, sh, k, true), mode, out);
    if (!exact) return;
    for (const auto& lo : sh.lower) {
        const Int p = -lo.a[k];
        const Int jmax = floor_div(sh.max_upper * p - sh.max_upper - p, sh.max_upper);
        for (Int j = 0; j <= jmax; ++j) {
            System sp = s;
            Row e = lo;
            e.eq = true;
            e.b = lo.b - j;
            sp.rows.push_back(std::move(e));
            project(std::move(sp), mode, out);
        }
    }
}

/// Dense encoding of a polyhedron, variables indexed in VarId order.
struct Encoding {
    std::vector<VarId> vars;
    std::map<VarId, size_t> index;
    System sys;
};

inline Encoding encode(const Polyhedron& p) {
    Encoding enc;
    std::set<VarId> all = p.scope;
    for (const auto& c : p.constraints)
        for (const auto& [v, a] : c.coeffs) all.insert(v);
    for (const auto& v : all) {
        enc.index.emplace(v, enc.vars.size());
        enc.vars.push_back(v);
    }
    enc.sys.nvars = enc.vars.size();
    enc.sys.dropped.assign(enc.sys.nvars, false);
    enc.sys.wildcard.assign(enc.sys.nvars, false);
    for (const auto& c : p.constraints) {
        Row r;
        r.a.assign(enc.sys.nvars, 0);
        for (const auto& [v, a] : c.coeffs) r.a[enc.index.at(v)] += a;
        r.b = c.bound;
        r.eq = c.rel == Rel::Eq;
        enc.sys.rows.push_back(std::move(r));
    }
    return enc;
}

/// Converts a projected system back; extra (sigma/wildcard) variables become
/// Fresh ids above every Fresh id already in use.
inline Polyhedron decode(const System& s, const std::vector<VarId>& vars, const std::set<VarId>& kept_scope) {
    int next_fresh = 0;
    for (const auto& v : vars)
        if (v.kind == VarKind::Fresh) next_fresh = std::max(next_fresh, v.index + 1);
    std::vector<VarId> names = vars;
    while (names.size() < s.nvars) names.push_back(VarId::fresh(next_fresh++));
    Polyhedron p;
    p.scope = kept_scope;
    for (const auto& r : s.rows) {
        LinearConstraint c;
        c.rel = r.eq ? Rel::Eq : Rel::Le;
        c.bound = r.b;
        for (size_t i = 0; i < s.nvars && i < r.a.size(); ++i)
            if (r.a[i] != 0) c.coeffs[names[i]] = r.a[i];
        p.add(std::move(c));
    }
    return canonicalize(p);
}

}  // namespace omega

/// Exact integer satisfiability; returns a model over the scope when sat.
inline std::optional<Assignment> sat_model(const Polyhedron& p) {
    ++sat_counter();
    auto enc = omega::encode(p);
    auto m = omega::solve(enc.sys);
    if (!m) return std::nullopt;
    Assignment rho;
    for (size_t i = 0; i < enc.vars.size(); ++i) rho[enc.vars[i]] = i < m->size() ? (*m)[i] : Int(0);
    if (!p.holds(rho)) throw std::logic_error("omega: reconstructed model violates " + p.str());
    return rho;
}

inline bool sat_int(const Polyhedron& p) { return sat_model(p).has_value(); }

/// Projection of p onto scope \ drop.  Exact mode: union of disjuncts whose
/// integer points are exactly the projection (a disjunct may keep Fresh
/// wildcards, each occurring in a single equality).  Dark-shadow mode: at most one
/// polyhedron, a subset of the projection.  Unsatisfiable disjuncts are
/// dropped; an empty result means the projection is empty.
inline std::vector<Polyhedron> eliminate(const Polyhedron& p, const std::set<VarId>& drop, Projection mode) {
    auto enc = omega::encode(p);
    for (size_t i = 0; i < enc.vars.size(); ++i) enc.sys.dropped[i] = drop.count(enc.vars[i]) > 0;
    std::set<VarId> kept;
    for (const auto& v : p.scope)
        if (!drop.count(v)) kept.insert(v);
    std::vector<omega::System> parts;
    omega::project(enc.sys, mode, parts);
    std::vector<Polyhedron> out;
    for (const auto& s : parts) {
        Polyhedron d = omega::decode(s, enc.vars, kept);
        if (is_trivially_empty(d) || !sat_int(d)) continue;
        if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(std::move(d));
    }
    if (mode == Projection::DarkShadow && out.size() > 1) throw std::logic_error("dark shadow produced a disjunction");
    return out;
}

/// Dark-shadow projection as a single polyhedron (empty set when none).
inline Polyhedron eliminate_dark(const Polyhedron& p, const std::set<VarId>& drop) {
    auto parts = eliminate(p, drop, Projection::DarkShadow);
    std::set<VarId> kept;
    for (const auto& v : p.scope)
        if (!drop.count(v)) kept.insert(v);
    if (parts.empty()) return Polyhedron::empty_set(kept);
    return parts.front();
}

/// Projection onto `keep` (all other variables are dropped).
inline std::vector<Polyhedron> project_onto(const Polyhedron& p, const std::set<VarId>& keep, Projection mode) {
    std::set<VarId> drop;
    for (const auto& v : p.scope)
        if (!keep.count(v)) drop.insert(v);
    for (const auto& v : p.support())
        if (!keep.count(v)) drop.insert(v);
    Polyhedron q = p;
    q.scope.insert(keep.begin(), keep.end());
    return eliminate(q, drop, mode);
}

/// Variables of a disjunct that are not in `kept` (stride wildcards).
inline std::set<VarId> wildcards(const Polyhedron& p, const std::set<VarId>& kept) {
    std::set<VarId> w;
    for (const auto& v : p.support())
        if (!kept.count(v)) w.insert(v);
    return w;
}

/// The negation of a single constraint as one or two alternatives.
inline std::vector<LinearConstraint> negate(const LinearConstraint& c) {
    // not(t <= b)  ==  -t <= -b-1 ;  not(t = b)  ==  t <= b-1  or  -t <= -b-1
    std::map<VarId, Int> neg = c.coeffs;
    for (auto& [v, a] : neg) a = -a;
    if (c.rel == Rel::Le) return {LinearConstraint::le(neg, -c.bound - 1)};
    return {LinearConstraint::le(c.coeffs, c.bound - 1), LinearConstraint::le(neg, -c.bound - 1)};
}

/// True iff every integer point of p satisfies q.
inline bool entails(const Polyhedron& p, const Polyhedron& q) {
    for (const auto& g : q.constraints) {
        for (const auto& ng : negate(g)) {
            Polyhedron t = p;
            t.add(ng);
            if (sat_int(t)) return false;
        }
    }
    return true;
}

}  // namespace nonterm::poly
