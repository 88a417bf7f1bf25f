#pragma once

// End-to-end driver: compile, unfold, then look for a recursive binary
// clause with a recurrent set that the entry predicate can reach.

#include "nonterm/analysis/criteria.hpp"
#include "nonterm/binunf/unfold.hpp"
#include "nonterm/bytecode/frames.hpp"
#include "nonterm/clp/compile.hpp"
#include "nonterm/interp/machine.hpp"

#include <json.hpp>

namespace nonterm::analysis {

struct Options {
    int max_unfold = 10;
    long timeout_ms = 20000;
    poly::Projection projection = poly::Projection::DarkShadow;
    bool all_witnesses = false;
    bool ref_nonneg = false;  // put the domain constraint into the clauses themselves
};

enum class Mode { Universal, Existential };
enum class Reason { None, NoLoopFound, CriteriaFailed, MaxUnfoldExhausted, Timeout };

inline const char* mode_name(Mode m) { return m == Mode::Universal ? "universal" : "existential"; }

inline const char* reason_name(Reason r) {
    switch (r) {
        case Reason::NoLoopFound: return "no-loop-found";
        case Reason::CriteriaFailed: return "criteria-failed";
        case Reason::MaxUnfoldExhausted: return "max-unfold-exhausted";
        case Reason::Timeout: return "timeout";
        default: return "";
    }
}

struct Witness {
    Clause loop;                  // alpha-normal
    std::optional<Clause> reach;  // none when the loop is on the entry predicate
    RecurrentSet set;
    std::vector<Int> entry_values;  // one per head position of the entry predicate
    Mode mode = Mode::Universal;
};

struct Stats {
    size_t clauses = 0;
    int unfold_iterations = 0;
    std::uint64_t sat_checks = 0;
    long wall_ms = 0;
};

struct Verdict {
    bool nonterminating = false;
    Reason reason = Reason::None;
    std::string entry;       // method
    std::string entry_pred;  // its predicate
    std::vector<Witness> witnesses;
    Stats stats;
    clp::ClpProgram program;  // the compiled clauses (for display)
};

struct Timeout : std::runtime_error {
    Timeout() : std::runtime_error("analysis timed out") {}
};

/// pos(k) >= 0 for every reference-typed head position of the entry block.
inline Polyhedron entry_domain(const bc::Method& m) {
    Polyhedron d;
    auto locals = m.entry_locals();
    for (size_t k = 0; k < locals.size(); ++k)
        if (locals[k].is_reference()) d.add(LinearConstraint::ge({{pos(static_cast<int>(k)), 1}}, 0));
    return d;
}

inline Verdict analyze(const bc::Program& prog, const std::string& entry, const Options& opt = {}) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    auto deadline = t0 + std::chrono::milliseconds(opt.timeout_ms);
    auto sat0 = poly::sat_counter().load();

    Verdict v;
    v.entry = entry;
    const bc::Method* m = prog.find_method(entry);
    if (!m) throw std::invalid_argument("unknown entry method " + entry);
    v.entry_pred = m->entry;

    auto finish = [&] {
        v.stats.sat_checks = poly::sat_counter().load() - sat0;
        v.stats.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t0).count();
        return v;
    };
    auto check_time = [&] {
        if (clock::now() > deadline) throw Timeout();
    };

    clp::CompileOptions copt;
    copt.abs.ref_nonneg = opt.ref_nonneg;
    copt.abs.projection = opt.projection;
    v.program = clp::compile_program(prog, copt);

    binunf::Options uopt;
    uopt.projection = opt.projection;
    uopt.deadline = deadline;
    binunf::BinClauseSet s = binunf::unfold_bounded(v.program, opt.max_unfold, uopt);
    v.stats.clauses = s.clauses.size();
    v.stats.unfold_iterations = s.iterations;
    if (s.timed_out) {
        v.reason = Reason::Timeout;
        return finish();
    }

    const Polyhedron domain = entry_domain(*m);
    auto sorted = s.sorted();
    // Loops are tried by iteration; within one, loops on method entry
    // predicates (recursion through calls) go before loops on inner blocks.
    std::set<std::string> method_preds;
    for (const auto& [name, pred] : v.program.entries) method_preds.insert(pred);
    auto loops = sorted;
    std::stable_sort(loops.begin(), loops.end(), [&](const binunf::BinClause& a, const binunf::BinClause& b) {
        if (a.iteration != b.iteration) return a.iteration < b.iteration;
        return method_preds.count(a.clause.head.pred) > method_preds.count(b.clause.head.pred);
    });
    Reason deepest = Reason::NoLoopFound;
    try {
        for (const auto& r : loops) {
            if (!is_loop(r.clause)) continue;
            for (const auto& e : recurrent_sets(r.clause, opt.projection)) {
                check_time();
                deepest = std::max(deepest, Reason::CriteriaFailed);
                Mode mode = Mode::Universal;
                if (!check_universal(r.clause, e)) {
                    if (!check_existential(r.clause, e, opt.projection)) continue;
                    mode = Mode::Existential;
                }
                deepest = std::max(deepest, Reason::MaxUnfoldExhausted);
                std::vector<Witness> found;
                if (r.clause.head.pred == v.entry_pred) {
                    if (auto vals = sample_point(e, domain)) found.push_back({r.clause, std::nullopt, e, *vals, mode});
                } else {
                    for (const auto& q : sorted) {
                        const Clause& c = q.clause;
                        if (c.head.pred != v.entry_pred || c.body.size() != 1 || c.body[0].pred != e.pred) continue;
                        check_time();
                        if (auto vals = check_reachable(c, e, domain)) {
                            found.push_back({r.clause, c, e, *vals, mode});
                            if (!opt.all_witnesses) break;
                        }
                    }
                }
                for (auto& w : found) {
                    v.witnesses.push_back(std::move(w));
                    if (!opt.all_witnesses) {
                        v.nonterminating = true;
                        return finish();
                    }
                }
            }
        }
    } catch (const Timeout&) {
        if (v.witnesses.empty()) {
            v.reason = Reason::Timeout;
            return finish();
        }
    }
    v.nonterminating = !v.witnesses.empty();
    if (!v.nonterminating) v.reason = deepest;
    return finish();
}

/// Runs the interpreter from a state whose path-lengths are the witness's
/// entry values.
inline interp::RunOutcome corroborate(const bc::Program& prog, const Verdict& v, const Witness& w, long budget) {
    const bc::Method* m = prog.find_method(v.entry);
    const bc::FrameMap frames = bc::infer_frames(*m, prog);
    const bc::Frame& f = frames.at({m->entry, 0});
    std::map<VarId, Int> rho;
    for (int k = 0; k < f.nl(); ++k) rho[VarId::in_l(k)] = w.entry_values.at(static_cast<size_t>(k));
    return interp::run_bounded(prog, m->entry, interp::build_state(rho, f, prog), budget);
}

// ---- reporting ----

/// Names for pos(0..) of a predicate: its signature when it has the arity.
inline std::map<VarId, VarId> position_names(const clp::ClpProgram& p, const std::string& pred, size_t arity) {
    std::map<VarId, VarId> m;
    auto it = p.signatures.find(pred);
    for (size_t k = 0; k < arity; ++k) {
        VarId name = VarId::fresh(static_cast<int>(k));
        if (it != p.signatures.end() && it->second.size() == arity) name = it->second[k];
        m[pos(static_cast<int>(k))] = name;
    }
    return m;
}

/// The recurrent set over the predicate's own head names.
inline Polyhedron named_set(const RecurrentSet& e, const clp::ClpProgram& p) {
    auto m = position_names(p, e.pred, e.arity);
    int k = 0;
    for (const auto& v : e.e.support())
        if (!m.count(v)) m[v] = VarId{poly::VarKind::Tmp, k++, {}};
    return poly::canonicalize(poly::rename(e.e, m));
}

inline std::vector<std::pair<std::string, Int>> named_values(const Witness& w, const Verdict& v) {
    auto m = position_names(v.program, v.entry_pred, w.entry_values.size());
    std::vector<std::pair<std::string, Int>> out;
    for (size_t k = 0; k < w.entry_values.size(); ++k) out.emplace_back(m.at(pos(static_cast<int>(k))).str(), w.entry_values[k]);
    return out;
}

inline std::string set_text(const Polyhedron& p) {
    if (p.constraints.empty()) return "true";
    std::string s;
    for (const auto& c : p.constraints) s += (s.empty() ? "" : ", ") + poly::pretty(c);
    return s;
}

inline nlohmann::json to_json(const Verdict& v) {
    nlohmann::json j;
    j["verdict"] = v.nonterminating ? "NONTERMINATING" : "UNKNOWN";
    if (!v.nonterminating) j["reason"] = reason_name(v.reason);
    j["entry"] = v.entry;
    j["witnesses"] = nlohmann::json::array();
    for (const auto& w : v.witnesses) {
        nlohmann::json x;
        x["loop_clause"] = clp::readable(w.loop, v.program).str();
        x["reach_clause"] = w.reach ? nlohmann::json(clp::readable(*w.reach, v.program).str()) : nlohmann::json(nullptr);
        nlohmann::json set = nlohmann::json::array();
        for (const auto& c : named_set(w.set, v.program).constraints) set.push_back(poly::pretty(c));
        x["recurrent_set"] = set;
        nlohmann::json vals = nlohmann::json::object();
        for (const auto& [n, val] : named_values(w, v)) {
            if (fits_long(val)) vals[n] = to_long(val);
            else vals[n] = to_string(val);
        }
        x["entry_values"] = vals;
        x["mode"] = mode_name(w.mode);
        j["witnesses"].push_back(x);
    }
    j["stats"] = {{"clauses", v.stats.clauses},
                  {"unfold_iterations", v.stats.unfold_iterations},
                  {"sat_checks", v.stats.sat_checks},
                  {"wall_ms", v.stats.wall_ms}};
    return j;
}

inline std::string to_text(const Verdict& v) {
    std::ostringstream os;
    if (v.nonterminating) os << "NONTERMINATING";
    else os << "UNKNOWN (" << reason_name(v.reason) << ")";
    os << "\nentry " << v.entry << " (" << v.entry_pred << ")\n";
    for (size_t i = 0; i < v.witnesses.size(); ++i) {
        const auto& w = v.witnesses[i];
        os << "witness " << i + 1 << " [" << mode_name(w.mode) << "]\n";
        os << "  loop:          " << clp::readable(w.loop, v.program).str() << "\n";
        if (w.reach) os << "  reach:         " << clp::readable(*w.reach, v.program).str() << "\n";
        os << "  recurrent set: " << set_text(named_set(w.set, v.program)) << "\n";
        os << "  entry values: ";
        for (const auto& [n, val] : named_values(w, v)) os << " " << n << " = " << to_string(val);
        os << "\n";
    }
    os << "clauses " << v.stats.clauses << ", iterations " << v.stats.unfold_iterations << ", sat checks "
       << v.stats.sat_checks << ", " << v.stats.wall_ms << " ms\n";
    return os.str();
}

}  // namespace nonterm::analysis
