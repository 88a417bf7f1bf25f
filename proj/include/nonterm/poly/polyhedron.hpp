#pragma once

#include "nonterm/poly/var.hpp"
#include "nonterm/support/bigint.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nonterm::poly {

enum class Rel { Le, Eq };

using Assignment = std::map<VarId, Int>;

/// sum(coeffs[v] * v)  rel  bound.  `a >= b` is stored as `-a <= -b`.
struct LinearConstraint {
    std::map<VarId, Int> coeffs;
    Rel rel = Rel::Le;
    Int bound = 0;

    static LinearConstraint le(std::map<VarId, Int> c, Int b) { return {std::move(c), Rel::Le, std::move(b)}; }
    static LinearConstraint ge(std::map<VarId, Int> c, const Int& b) {
        for (auto& [v, a] : c) a = -a;
        return {std::move(c), Rel::Le, -b};
    }
    static LinearConstraint eq(std::map<VarId, Int> c, Int b) { return {std::move(c), Rel::Eq, std::move(b)}; }
    /// x = y
    static LinearConstraint same(const VarId& x, const VarId& y) {
        if (x == y) return eq({}, 0);
        return eq({{x, 1}, {y, -1}}, 0);
    }

    bool is_ground() const { return coeffs.empty(); }
    bool ground_holds() const { return rel == Rel::Eq ? bound == 0 : bound >= 0; }

    bool holds(const Assignment& rho) const {
        Int lhs = 0;
        for (const auto& [v, a] : coeffs) {
            auto it = rho.find(v);
            if (it == rho.end()) throw std::out_of_range("assignment misses " + v.str());
            lhs += a * it->second;
        }
        return rel == Rel::Eq ? lhs == bound : lhs <= bound;
    }

    std::weak_ordering operator<=>(const LinearConstraint& o) const {
        if (auto c = coeffs <=> o.coeffs; c != 0) return c;
        if (auto c = static_cast<int>(rel) <=> static_cast<int>(o.rel); c != 0) return c;
        return cmp(bound, o.bound) <=> 0;
    }
    bool operator==(const LinearConstraint& o) const = default;

    std::string str() const {
        // Print `>=` when the leading coefficient is negative.
        std::map<VarId, Int> c = coeffs;
        Int b = bound;
        std::string op = rel == Rel::Eq ? "=" : "<=";
        if (!c.empty() && sgn(c.begin()->second) < 0) {
            for (auto& [v, a] : c) a = -a;
            b = -b;
            if (rel == Rel::Le) op = ">=";
        }
        std::ostringstream os;
        bool first = true;
        for (const auto& [v, a] : c) {
            Int mag = magnitude(a);
            if (first) {
                if (sgn(a) < 0) os << "-";
            } else {
                os << (sgn(a) < 0 ? " - " : " + ");
            }
            if (mag != 1) os << mag.get_str() << "*";
            os << v.str();
            first = false;
        }
        if (first) os << "0";
        os << " " << op << " " << b.get_str();
        return os.str();
    }
};

/// Reader-friendly form: positive terms on the left, negated negative
/// terms and the constant on the right (`il0 = os1 + 1`, `is0 >= 1`).
inline std::string pretty(const LinearConstraint& c) {
    std::vector<std::pair<VarId, Int>> lhs, rhs;
    for (const auto& [v, a] : c.coeffs) {
        if (sgn(a) > 0) lhs.emplace_back(v, a);
        else rhs.emplace_back(v, -a);
    }
    std::string op = c.rel == Rel::Eq ? "=" : "<=";
    Int k = c.bound;
    if (lhs.empty()) {
        std::swap(lhs, rhs);
        k = -k;
        if (c.rel == Rel::Le) op = ">=";
    }
    auto terms = [](const std::vector<std::pair<VarId, Int>>& ts) {
        std::string s;
        for (const auto& [v, a] : ts) {
            if (!s.empty()) s += " + ";
            if (a != 1) s += a.get_str() + "*";
            s += v.str();
        }
        return s;
    };
    std::string left = lhs.empty() ? "0" : terms(lhs);
    std::string right = terms(rhs);
    if (right.empty()) right = k.get_str();
    else if (sgn(k) > 0) right += " + " + k.get_str();
    else if (sgn(k) < 0) right += " - " + Int(-k).get_str();
    return left + " " + op + " " + right;
}

/// Normalization result of a single constraint.
enum class Trivial { No, True, False };

/// gcd-normalizes in place; equalities are oriented so their first
/// coefficient (in VarId order) is positive.
inline Trivial normalize(LinearConstraint& c) {
    for (auto it = c.coeffs.begin(); it != c.coeffs.end();) {
        if (it->second == 0) it = c.coeffs.erase(it);
        else ++it;
    }
    if (c.coeffs.empty()) return c.ground_holds() ? Trivial::True : Trivial::False;
    Int g = 0;
    for (const auto& [v, a] : c.coeffs) g = gcd(g, a);
    if (c.rel == Rel::Eq) {
        if (c.bound % g != 0) return Trivial::False;
        for (auto& [v, a] : c.coeffs) a /= g;
        c.bound /= g;
        if (sgn(c.coeffs.begin()->second) < 0) {
            for (auto& [v, a] : c.coeffs) a = -a;
            c.bound = -c.bound;
        }
    } else {
        for (auto& [v, a] : c.coeffs) a /= g;
        c.bound = floor_div(c.bound, g);
    }
    return Trivial::No;
}

/// A finite set of integer linear constraints over an explicit scope.
struct Polyhedron {
    std::vector<LinearConstraint> constraints;
    std::set<VarId> scope;

    Polyhedron() = default;
    explicit Polyhedron(std::vector<LinearConstraint> cs) : constraints(std::move(cs)) { extend_scope(); }
    Polyhedron(std::vector<LinearConstraint> cs, std::set<VarId> sc) : constraints(std::move(cs)), scope(std::move(sc)) {
        extend_scope();
    }

    static Polyhedron universe(std::set<VarId> sc = {}) { return Polyhedron({}, std::move(sc)); }
    static Polyhedron empty_set(std::set<VarId> sc = {}) { return Polyhedron({LinearConstraint::le({}, -1)}, std::move(sc)); }

    void extend_scope() {
        for (const auto& c : constraints)
            for (const auto& [v, a] : c.coeffs) scope.insert(v);
    }

    void add(LinearConstraint c) {
        for (const auto& [v, a] : c.coeffs) scope.insert(v);
        constraints.push_back(std::move(c));
    }

    std::set<VarId> support() const {
        std::set<VarId> s;
        for (const auto& c : constraints)
            for (const auto& [v, a] : c.coeffs) s.insert(v);
        return s;
    }

    bool holds(const Assignment& rho) const {
        return std::all_of(constraints.begin(), constraints.end(), [&](const auto& c) { return c.holds(rho); });
    }

    bool operator==(const Polyhedron&) const = default;

    std::string str() const {
        if (constraints.empty()) return "{}";
        std::string s = "{";
        for (size_t i = 0; i < constraints.size(); ++i) {
            if (i) s += ", ";
            s += constraints[i].str();
        }
        return s + "}";
    }

    std::vector<std::string> strings() const {
        std::vector<std::string> out;
        for (const auto& c : constraints) out.push_back(c.str());
        return out;
    }
};

inline Polyhedron conjoin(const Polyhedron& a, const Polyhedron& b) {
    Polyhedron r = a;
    for (const auto& c : b.constraints) r.add(c);
    r.scope.insert(b.scope.begin(), b.scope.end());
    return r;
}

/// Applies a variable renaming; unmapped variables are kept.
inline Polyhedron rename(const Polyhedron& p, const std::map<VarId, VarId>& m) {
    auto map_var = [&](const VarId& v) {
        auto it = m.find(v);
        return it == m.end() ? v : it->second;
    };
    Polyhedron r;
    for (const auto& c : p.constraints) {
        LinearConstraint n{{}, c.rel, c.bound};
        for (const auto& [v, a] : c.coeffs) n.coeffs[map_var(v)] += a;
        r.constraints.push_back(std::move(n));
    }
    for (const auto& v : p.scope) r.scope.insert(map_var(v));
    r.extend_scope();
    return r;
}

/// gcd-normalizes, orients, merges parallel inequalities (and opposite pairs
/// into equalities), deduplicates and sorts.  An infeasible ground or
/// parallel conflict collapses the whole set to {0 <= -1}.
inline Polyhedron canonicalize(const Polyhedron& p) {
    std::map<std::map<VarId, Int>, Int> upper;  // coeffs -> tightest bound
    std::set<LinearConstraint> eqs;
    auto infeasible = [&] { return Polyhedron::empty_set(p.scope); };
    for (auto c : p.constraints) {
        switch (normalize(c)) {
            case Trivial::True: continue;
            case Trivial::False: return infeasible();
            case Trivial::No: break;
        }
        if (c.rel == Rel::Eq) {
            eqs.insert(std::move(c));
            continue;
        }
        auto [it, inserted] = upper.emplace(c.coeffs, c.bound);
        if (!inserted && c.bound < it->second) it->second = c.bound;
    }
    std::vector<LinearConstraint> out;
    std::set<std::map<VarId, Int>> consumed;
    for (const auto& [coeffs, b] : upper) {
        if (consumed.count(coeffs)) continue;
        std::map<VarId, Int> neg = coeffs;
        for (auto& [v, a] : neg) a = -a;
        auto it = upper.find(neg);
        if (it != upper.end()) {
            // t <= b and -t <= b2  ==>  -b2 <= t <= b
            if (b + it->second < 0) return infeasible();
            if (b + it->second == 0) {
                LinearConstraint e = LinearConstraint::eq(coeffs, b);
                normalize(e);
                eqs.insert(std::move(e));
                consumed.insert(coeffs);
                consumed.insert(neg);
                continue;
            }
        }
        out.push_back(LinearConstraint::le(coeffs, b));
    }
    // Equalities with the same left-hand side must agree.
    std::map<std::map<VarId, Int>, Int> eq_by_lhs;
    for (const auto& e : eqs) {
        auto [it, ins] = eq_by_lhs.emplace(e.coeffs, e.bound);
        if (!ins && it->second != e.bound) return infeasible();
    }
    // An inequality implied by an equality with the same left-hand side is
    // dropped; one contradicting it makes the set infeasible.
    std::vector<LinearConstraint> kept;
    for (auto& c : out) {
        auto it = eq_by_lhs.find(c.coeffs);
        if (it != eq_by_lhs.end()) {
            if (it->second <= c.bound) continue;
            return infeasible();
        }
        std::map<VarId, Int> neg = c.coeffs;
        for (auto& [v, a] : neg) a = -a;
        it = eq_by_lhs.find(neg);
        if (it != eq_by_lhs.end()) {
            if (-it->second <= c.bound) continue;
            return infeasible();
        }
        kept.push_back(std::move(c));
    }
    for (const auto& e : eqs) kept.push_back(e);
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    Polyhedron r(std::move(kept), p.scope);
    return r;
}

inline bool is_trivially_empty(const Polyhedron& p) {
    return std::any_of(p.constraints.begin(), p.constraints.end(),
                       [](const auto& c) { return c.is_ground() && !c.ground_holds(); });
}

// ---------------------------------------------------------------------------
// Text syntax:  `2*il0 - os1 <= 3`, `il0 = os0`, `-1 = os0`, `x >= y + 1`.

namespace detail {

class ExprLexer {
public:
    explicit ExprLexer(std::string s) : src_(std::move(s)) {}

    /// Parses `term (+|- term)*` into coeffs/constant (added with `sign`).
    void expr(std::map<VarId, Int>& coeffs, Int& constant, int sgn_mul) {
        skip();
        int s = 1;
        if (peek() == '-') { ++pos_; s = -1; }
        else if (peek() == '+') { ++pos_; }
        term(coeffs, constant, s * sgn_mul);
        for (;;) {
            skip();
            char c = peek();
            if (c == '+' || c == '-') {
                ++pos_;
                term(coeffs, constant, (c == '-' ? -1 : 1) * sgn_mul);
            } else {
                return;
            }
        }
    }

    std::string rel() {
        skip();
        if (src_.compare(pos_, 2, "<=") == 0) { pos_ += 2; return "<="; }
        if (src_.compare(pos_, 2, ">=") == 0) { pos_ += 2; return ">="; }
        if (src_.compare(pos_, 2, "==") == 0) { pos_ += 2; return "="; }
        if (peek() == '=') { ++pos_; return "="; }
        fail("expected comparison operator");
        return {};
    }

    bool done() { skip(); return pos_ >= src_.size(); }

private:
    void term(std::map<VarId, Int>& coeffs, Int& constant, int s) {
        skip();
        Int factor = 1;
        bool have_number = false;
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
            factor = number();
            have_number = true;
            skip();
            if (peek() == '*') { ++pos_; skip(); }
            else if (!std::isalpha(static_cast<unsigned char>(peek()))) {
                constant += s * factor;
                return;
            }
        }
        std::string id = ident();
        if (id.empty()) fail(have_number ? "expected variable after '*'" : "expected term");
        auto v = VarId::parse(id);
        if (!v) fail("unknown variable token '" + id + "'");
        coeffs[*v] += s * factor;
    }

    Int number() {
        size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        return parse_int(src_.substr(start, pos_ - start));
    }

    std::string ident() {
        size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                                      src_[pos_] == '\'' || src_[pos_] == '$'))
            ++pos_;
        return src_.substr(start, pos_ - start);
    }

    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
    void skip() { while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_; }
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("constraint syntax error at offset " + std::to_string(pos_) + " in '" + src_ +
                                    "': " + what);
    }

    std::string src_;
    size_t pos_ = 0;
};

}  // namespace detail

inline LinearConstraint parse_constraint(const std::string& text) {
    detail::ExprLexer lx(text);
    std::map<VarId, Int> coeffs;
    Int constant = 0;
    lx.expr(coeffs, constant, 1);
    const std::string op = lx.rel();
    lx.expr(coeffs, constant, -1);  // move the right-hand side over
    if (!lx.done()) throw std::invalid_argument("trailing input in constraint '" + text + "'");
    // lhs - rhs (op) 0  ->  coeffs (op) -constant
    for (auto it = coeffs.begin(); it != coeffs.end();) {
        if (it->second == 0) it = coeffs.erase(it);
        else ++it;
    }
    if (op == "<=") return LinearConstraint::le(std::move(coeffs), -constant);
    if (op == ">=") return LinearConstraint::ge(std::move(coeffs), -constant);
    return LinearConstraint::eq(std::move(coeffs), -constant);
}

/// Parses a comma-separated list, optionally wrapped in braces.
inline Polyhedron parse_polyhedron(std::string text) {
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t\r\n");
        size_t b = s.find_last_not_of(" \t\r\n");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    text = trim(text);
    if (!text.empty() && text.front() == '{') {
        if (text.back() != '}') throw std::invalid_argument("unbalanced braces in '" + text + "'");
        text = trim(text.substr(1, text.size() - 2));
    }
    Polyhedron p;
    if (text.empty() || text == "true") return p;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty() || item == "true") continue;
        p.add(parse_constraint(item));
    }
    return p;
}

}  // namespace nonterm::poly
