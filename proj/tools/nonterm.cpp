// nonterm: compile, unfold and analyze stack bytecode for non-termination.

#include "nonterm/abstraction/exactness.hpp"
#include "nonterm/analysis/analyze.hpp"
#include "nonterm/bytecode/desugar.hpp"
#include "nonterm/bytecode/parser.hpp"
#include "nonterm/clp/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace nonterm;

namespace {

enum Exit { Ok = 0, Failed = 1, BadInput = 2, TimedOut = 3 };

struct Config {
    std::string input;
    std::string entry;
    int max_unfold = 10;
    long timeout_ms = 20000;
    std::string format = "text";
    bool exact = false;
    bool all_witnesses = false;
    bool ref_nonneg = false;
    bool canonical = false;
    std::uint64_t seed = 1;
    long max_steps = 10000;
    std::string args;
    bool trace = false;
    int trials = 100;
    int sequences = 50;
    std::string fixture;
};

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> logger() {
    static auto log = [] {
        auto l = spdlog::stderr_color_mt("nonterm");
        l->set_pattern("[%l] %v");
        l->set_level(spdlog::level::warn);
        if (const char* e = std::getenv("NONTERM_LOG")) {
            std::string v = e;
            if (v == "debug") l->set_level(spdlog::level::debug);
            else if (v == "info") l->set_level(spdlog::level::info);
        }
        return l;
    }();
    return log;
}

poly::Projection projection(const Config& c) { return c.exact ? poly::Projection::Exact : poly::Projection::DarkShadow; }

bc::Program load(const Config& c) {
    std::ifstream in(c.input);
    if (!in) throw InputError("cannot open " + c.input);
    std::stringstream ss;
    ss << in.rdbuf();
    bc::Program p;
    try {
        p = bc::desugar_ifne(bc::parse_program(ss.str()));
    } catch (const bc::ParseError& e) {
        throw InputError(c.input + ":" + e.what());
    } catch (const std::invalid_argument& e) {
        throw InputError(c.input + ": " + e.what());
    }
    auto violations = bc::validate(p);
    if (!violations.empty()) {
        std::string msg;
        for (const auto& v : violations) msg += c.input + ": " + v.kind + ": " + v.message + "\n";
        msg.pop_back();
        throw InputError(msg);
    }
    logger()->info("parsed {}: {} methods", c.input, p.methods.size());
    return p;
}

std::string entry_of(const bc::Program& p, const Config& c) {
    if (!c.entry.empty()) {
        if (!p.find_method(c.entry)) throw InputError("unknown entry method " + c.entry);
        return c.entry;
    }
    for (const auto& m : p.methods)
        if (m.sig.name == "main") return m.sig.qualified();
    if (p.methods.empty()) throw InputError("no methods in " + c.input);
    return p.methods.front().sig.qualified();
}

void print(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_analyze(const Config& c) {
    bc::Program p = load(c);
    analysis::Options opt;
    opt.max_unfold = c.max_unfold;
    opt.timeout_ms = c.timeout_ms;
    opt.projection = projection(c);
    opt.all_witnesses = c.all_witnesses;
    opt.ref_nonneg = c.ref_nonneg;
    std::string entry = entry_of(p, c);
    logger()->info("analyzing {} (max-unfold {}, timeout {} ms)", entry, c.max_unfold, c.timeout_ms);
    analysis::Verdict v = analysis::analyze(p, entry, opt);
    logger()->debug("{} binary clauses after {} iterations", v.stats.clauses, v.stats.unfold_iterations);
    if (c.format == "json") print(analysis::to_json(v));
    else std::cout << analysis::to_text(v);
    return !v.nonterminating && v.reason == analysis::Reason::Timeout ? TimedOut : Ok;
}

clp::ClpProgram compiled(const bc::Program& p, const Config& c) {
    clp::CompileOptions opt;
    opt.abs.ref_nonneg = c.ref_nonneg;
    opt.abs.projection = projection(c);
    return clp::compile_program(p, opt);
}

int cmd_compile(const Config& c) {
    clp::ClpProgram cp = compiled(load(c), c);
    if (c.canonical) {
        for (auto& k : cp.clauses) k = clp::alpha_normal(k);
        std::stable_sort(cp.clauses.begin(), cp.clauses.end(),
                         [](const clp::Clause& a, const clp::Clause& b) { return a.str() < b.str(); });
    }
    if (c.format == "json") print(clp::emit_json(cp));
    else std::cout << clp::emit_text(cp);
    return Ok;
}

int cmd_unfold(const Config& c) {
    clp::ClpProgram cp = compiled(load(c), c);
    binunf::Options opt;
    opt.projection = projection(c);
    opt.deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(c.timeout_ms);
    binunf::BinClauseSet s = binunf::unfold_bounded(cp, c.max_unfold, opt);
    logger()->info("{} binary clauses after {} iterations", s.clauses.size(), s.iterations);
    auto [out, its] = binunf::as_program(s, cp);
    if (c.format == "json") print(clp::emit_json(out, &its));
    else std::cout << clp::emit_text(out, &its);
    if (s.timed_out) {
        logger()->warn("timed out after {} complete iterations", s.iterations);
        return TimedOut;
    }
    return Ok;
}

int cmd_run(const Config& c) {
    bc::Program p = load(c);
    const bc::Method* m = p.find_method(entry_of(p, c));
    const bc::FrameMap frames = bc::infer_frames(*m, p);
    const bc::Frame& f = frames.at({m->entry, 0});
    std::vector<Int> seeds;
    std::stringstream ss(c.args);
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) seeds.push_back(parse_int(tok));
    if (seeds.size() != static_cast<size_t>(f.nl()))
        throw InputError(m->sig.qualified() + " takes " + std::to_string(f.nl()) + " arguments, got " + std::to_string(seeds.size()));
    std::map<poly::VarId, Int> rho;
    for (int k = 0; k < f.nl(); ++k) rho[poly::VarId::in_l(k)] = seeds[static_cast<size_t>(k)];
    interp::State s0;
    try {
        s0 = interp::build_state(rho, f, p);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    std::vector<std::string> lines;
    interp::TraceFn trace;
    if (c.trace) trace = [&](const std::string& l) { lines.push_back(l); };
    auto out = interp::run_bounded(p, m->entry, s0, c.max_steps, trace);
    const char* kind = out.kind == interp::RunOutcome::Kind::Halted   ? "Halted"
                       : out.kind == interp::RunOutcome::Kind::Stuck ? "Stuck"
                                                                     : "BudgetExceeded";
    auto lengths = [](const interp::State& st) {
        std::vector<std::string> v;
        for (const auto& x : st.stack) {
            auto l = interp::len(x, st.heap);
            v.push_back(l.infinite ? "inf" : to_string(l.value));
        }
        return v;
    };
    if (c.format == "json") {
        nlohmann::json j = {{"outcome", kind}, {"steps", out.steps}, {"entry", m->sig.qualified()}};
        j["finals"] = nlohmann::json::array();
        for (const auto& st : out.finals) j["finals"].push_back({{"state", st.str()}, {"result_lengths", lengths(st)}});
        if (c.trace) j["trace"] = lines;
        print(j);
    } else {
        for (const auto& l : lines) std::cout << l << "\n";
        std::cout << "outcome " << kind << "\nsteps " << out.steps << "\n";
        for (const auto& st : out.finals) {
            std::cout << "final " << st.str() << "   result lengths [";
            auto v = lengths(st);
            for (size_t i = 0; i < v.size(); ++i) std::cout << (i ? "," : "") << v[i];
            std::cout << "]\n";
        }
    }
    return Ok;
}

int cmd_check_exactness(const Config& c) {
    std::vector<abs::ExactnessReport> reports;
    if (c.fixture == "getfield") {
        reports.push_back(abs::getfield_fixture(c.trials, c.seed));
    } else if (c.fixture.empty()) {
        for (auto fam : abs::all_families())
            reports.push_back(abs::family_check(fam, c.trials, c.seed + static_cast<std::uint64_t>(fam)));
        reports.push_back(abs::sequence_check(c.sequences, c.seed));
    } else {
        throw InputError("unknown fixture " + c.fixture);
    }
    bool all = true;
    for (const auto& r : reports) all = all && r.passes == r.trials;
    if (c.format == "json") {
        nlohmann::json j = {{"seed", c.seed}, {"reports", nlohmann::json::array()}};
        for (const auto& r : reports) j["reports"].push_back(abs::to_json(r));
        print(j);
    } else {
        for (const auto& r : reports) {
            std::cout << (r.passes == r.trials ? "pass " : "FAIL ") << r.instruction << "  " << r.passes << "/" << r.trials << "\n";
            if (r.first_failure) {
                const auto& f = *r.first_failure;
                std::cout << "  counterexample: " << f.reason << "\n  state " << f.state << "\n  model";
                for (const auto& [v, x] : f.model) std::cout << " " << v.str() << "=" << to_string(x);
                std::cout << "\n";
                if (f.got) {
                    std::cout << "  actual";
                    for (const auto& [v, x] : *f.got) std::cout << " " << v.str() << "=" << to_string(x);
                    std::cout << "\n";
                }
            }
        }
    }
    // the getfield fixture is expected to fail; finding it is the point
    if (c.fixture == "getfield") return Ok;
    return all ? Ok : Failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-termination analysis of stack bytecode via path-length CLP programs"};
    app.require_subcommand(1);
    Config c;

    auto common = [&](CLI::App* s, bool needs_input = true) {
        if (needs_input) s->add_option("input", c.input, "bytecode file")->required();
        s->add_option("--format", c.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    };
    auto pipeline = [&](CLI::App* s) {
        s->add_flag("--exact-projection", c.exact, "exact Omega projection (disjunctive) instead of dark shadow");
        s->add_flag("--ref-nonneg", c.ref_nonneg, "add length >= 0 for reference slots to every clause");
    };
    auto unfolding = [&](CLI::App* s) {
        s->add_option("--max-unfold", c.max_unfold, "unfolding iterations")->check(CLI::PositiveNumber);
        s->add_option("--timeout-ms", c.timeout_ms, "wall-clock limit")->check(CLI::PositiveNumber);
    };

    auto* analyze = app.add_subcommand("analyze", "prove non-termination of an entry method");
    common(analyze);
    pipeline(analyze);
    unfolding(analyze);
    analyze->add_option("--entry", c.entry, "Class.method (default: a method named main, else the first)");
    analyze->add_flag("--all-witnesses", c.all_witnesses, "report every witness instead of the first");

    auto* compile = app.add_subcommand("compile", "print the CLP(PL) program");
    common(compile);
    pipeline(compile);
    compile->add_flag("--canonical", c.canonical, "alpha-normal clauses in sorted order");

    auto* unfold = app.add_subcommand("unfold", "print the binary unfolding");
    common(unfold);
    pipeline(unfold);
    unfolding(unfold);

    auto* run = app.add_subcommand("run", "run the interpreter from given path-lengths");
    common(run);
    run->add_option("--entry", c.entry, "Class.method");
    run->add_option("--args", c.args, "comma separated path-lengths of the parameters");
    run->add_option("--max-steps", c.max_steps, "per-path step budget")->check(CLI::PositiveNumber);
    run->add_flag("--trace", c.trace, "print every executed instruction");

    auto* exact = app.add_subcommand("check-exactness", "property test of the per-instruction abstraction");
    common(exact, false);
    exact->add_option("--seed", c.seed, "random seed");
    exact->add_option("--trials", c.trials, "trials per instruction family")->check(CLI::PositiveNumber);
    exact->add_option("--sequences", c.sequences, "random two-instruction sequences")->check(CLI::PositiveNumber);
    exact->add_option("--fixture", c.fixture, "named negative fixture (getfield)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return cmd_analyze(c);
        if (compile->parsed()) return cmd_compile(c);
        if (unfold->parsed()) return cmd_unfold(c);
        if (run->parsed()) return cmd_run(c);
        if (exact->parsed()) return cmd_check_exactness(c);
    } catch (const InputError& e) {
        std::cerr << e.what() << "\n";
        return BadInput;
    } catch (const bc::VerifyError& e) {
        std::cerr << c.input << ": " << e.what() << "\n";
        return BadInput;
    }
    return Failed;
}
