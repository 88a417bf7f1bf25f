#pragma once

#include "nonterm/clp/clause.hpp"

#include <json.hpp>

#include <regex>
#include <sstream>

namespace nonterm::clp {

/// Renames a clause for display: head variables take the predicate's
/// signature names, variables first seen in the body take the output
/// counterparts of the body predicate's names, the rest become v<k>.
inline Clause readable(const Clause& c, const ClpProgram& p) {
    std::map<VarId, VarId> m;
    std::set<VarId> used;
    auto assign = [&](const VarId& v, const VarId& name) {
        if (m.count(v) || used.count(name)) return;
        m[v] = name;
        used.insert(name);
    };
    auto out_of = [](VarId v) {
        switch (v.kind) {
            case poly::VarKind::InL: v.kind = poly::VarKind::OutL; break;
            case poly::VarKind::InS: v.kind = poly::VarKind::OutS; break;
            case poly::VarKind::RetIn: v.kind = poly::VarKind::RetOut; break;
            default: break;
        }
        return v;
    };
    if (auto it = p.signatures.find(c.head.pred); it != p.signatures.end() && it->second.size() == c.head.args.size())
        for (size_t i = 0; i < c.head.args.size(); ++i) assign(c.head.args[i], it->second[i]);
    for (const auto& a : c.body)
        if (auto it = p.signatures.find(a.pred); it != p.signatures.end() && it->second.size() == a.args.size())
            for (size_t i = 0; i < a.args.size(); ++i) assign(a.args[i], out_of(it->second[i]));
    int next = 0;
    for (const auto& v : c.all_vars()) {
        if (m.count(v)) continue;
        while (used.count(VarId::fresh(next))) ++next;
        assign(v, VarId::fresh(next));
    }
    // Route through temporaries so targets cannot capture sources.
    std::map<VarId, VarId> a, b;
    int k = 0;
    for (const auto& [from, to] : m) {
        VarId t{poly::VarKind::Tmp, 2000000 + k++, "$show"};
        a[from] = t;
        b[t] = to;
    }
    Clause r = rename(rename(c, a), b);
    r.constraint = poly::canonicalize(r.constraint);
    return r;
}

/// Prolog-like listing; `iterations[i]`, when given, is printed as a
/// `% iteration: k` comment before clause i.
inline std::string emit_text(const ClpProgram& p, const std::vector<int>* iterations = nullptr) {
    std::ostringstream os;
    for (const auto& [m, pred] : p.entries) os << "% entry " << m << " " << pred << "\n";
    for (size_t i = 0; i < p.clauses.size(); ++i) {
        if (iterations) os << "% iteration: " << (*iterations)[i] << "\n";
        os << p.clauses[i].str() << "\n";
    }
    return os.str();
}

inline nlohmann::json atom_json(const Atom& a) {
    nlohmann::json args = nlohmann::json::array();
    for (const auto& v : a.args) args.push_back(v.str());
    return {{"pred", a.pred}, {"args", args}};
}

inline nlohmann::json clause_json(const Clause& c) {
    nlohmann::json cs = nlohmann::json::array(), body = nlohmann::json::array();
    for (const auto& k : c.constraint.constraints) cs.push_back(poly::pretty(k));
    for (const auto& a : c.body) body.push_back(atom_json(a));
    return {{"head", atom_json(c.head)}, {"constraint", cs}, {"body", body}};
}

inline nlohmann::json emit_json(const ClpProgram& p, const std::vector<int>* iterations = nullptr) {
    nlohmann::json cl = nlohmann::json::array();
    for (size_t i = 0; i < p.clauses.size(); ++i) {
        auto j = clause_json(p.clauses[i]);
        if (iterations) j["iteration"] = (*iterations)[i];
        cl.push_back(std::move(j));
    }
    nlohmann::json entries = nlohmann::json::object();
    for (const auto& [m, pred] : p.entries) entries[m] = pred;
    return {{"clauses", cl}, {"entries", entries}};
}

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

inline VarId var_token(const std::string& t) {
    auto v = VarId::parse(trim(t));
    if (!v) throw std::invalid_argument("bad variable token '" + t + "'");
    return *v;
}

inline Atom parse_atom(const std::string& text) {
    static const std::regex re(R"(^\s*([A-Za-z_$][A-Za-z0-9_$]*)\s*\((.*)\)\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) throw std::invalid_argument("bad atom '" + text + "'");
    Atom a{m[1].str(), {}};
    std::string args = trim(m[2].str());
    if (!args.empty()) {
        std::stringstream ss(args);
        std::string t;
        while (std::getline(ss, t, ',')) a.args.push_back(var_token(t));
    }
    return a;
}

/// Splits on commas outside parentheses.
inline std::vector<std::string> split_top(const std::string& s) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) out.push_back(cur);
    return out;
}

inline void record_signature(ClpProgram& p, const Clause& c) { p.signatures.emplace(c.head.pred, c.head.args); }

}  // namespace detail

inline Clause parse_clause(const std::string& line) {
    static const std::regex atom_start(R"(^\s*[A-Za-z_$][A-Za-z0-9_$]*\s*\()");
    std::string s = detail::trim(line);
    if (s.empty() || s.back() != '.') throw std::invalid_argument("clause must end with '.': " + line);
    s.pop_back();
    size_t arrow = s.find(":-");
    Clause c;
    c.head = detail::parse_atom(s.substr(0, arrow));
    if (arrow != std::string::npos) {
        for (const auto& item : detail::split_top(s.substr(arrow + 2))) {
            std::string t = detail::trim(item);
            if (t == "true") continue;
            if (std::regex_search(t, atom_start)) c.body.push_back(detail::parse_atom(t));
            else c.constraint.add(poly::parse_constraint(t));
        }
    }
    c.constraint = poly::canonicalize(c.constraint);
    return c;
}

/// Companion parser of emit_text.  Iteration comments are returned through
/// `iterations` when requested.
inline ClpProgram parse_text(const std::string& text, std::vector<int>* iterations = nullptr) {
    ClpProgram p;
    std::stringstream ss(text);
    std::string line;
    int pending = -1;
    while (std::getline(ss, line)) {
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (t[0] == '%') {
            std::stringstream cs(t.substr(1));
            std::string word;
            cs >> word;
            if (word == "entry") {
                std::string m, pred;
                cs >> m >> pred;
                p.entries[m] = pred;
            } else if (word == "iteration:") {
                cs >> pending;
            }
            continue;
        }
        Clause c = parse_clause(t);
        detail::record_signature(p, c);
        p.clauses.push_back(std::move(c));
        if (iterations) iterations->push_back(pending);
        pending = -1;
    }
    return p;
}

inline ClpProgram parse_json(const nlohmann::json& j) {
    ClpProgram p;
    auto atom = [](const nlohmann::json& a) {
        Atom r{a.at("pred").get<std::string>(), {}};
        for (const auto& v : a.at("args")) r.args.push_back(detail::var_token(v.get<std::string>()));
        return r;
    };
    for (const auto& jc : j.at("clauses")) {
        Clause c;
        c.head = atom(jc.at("head"));
        for (const auto& k : jc.at("constraint")) c.constraint.add(poly::parse_constraint(k.get<std::string>()));
        for (const auto& b : jc.at("body")) c.body.push_back(atom(b));
        c.constraint = poly::canonicalize(c.constraint);
        detail::record_signature(p, c);
        p.clauses.push_back(std::move(c));
    }
    for (const auto& [m, pred] : j.at("entries").items()) p.entries[m] = pred.get<std::string>();
    return p;
}

}  // namespace nonterm::clp
