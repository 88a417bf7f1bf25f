#pragma once

#include "nonterm/abstraction/ins_pl.hpp"
#include "nonterm/interp/machine.hpp"

#include <json.hpp>

#include <random>

namespace nonterm::abs {

/// Draws a model of p, pushing variables towards random values in
/// [-radius, radius] where p allows it.
inline poly::Assignment sample_model(const Polyhedron& p, std::mt19937_64& rng, int radius = 10) {
    std::vector<VarId> vars(p.scope.begin(), p.scope.end());
    std::shuffle(vars.begin(), vars.end(), rng);
    std::uniform_int_distribution<int> pick(-radius, radius);
    Polyhedron q = p;
    for (const auto& v : vars) {
        for (int attempt = 0; attempt < 4; ++attempt) {
            Polyhedron t = q;
            t.add(LinearConstraint::eq({{v, 1}}, pick(rng)));
            if (poly::sat_int(t)) {
                q = std::move(t);
                break;
            }
        }
    }
    auto m = poly::sat_model(q);
    if (!m) throw std::logic_error("sample_model: unsatisfiable " + p.str());
    return *m;
}

struct Failure {
    poly::Assignment model;
    std::string state;
    poly::Assignment expected;
    std::optional<poly::Assignment> got;  // nullopt: the step was undefined
    std::string reason;
};

struct ExactnessReport {
    std::string instruction;
    int trials = 0;
    int passes = 0;
    std::optional<Failure> first_failure;
};

inline nlohmann::json assignment_json(const poly::Assignment& a) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [v, x] : a) j[v.str()] = x.get_str();
    return j;
}

inline nlohmann::json to_json(const ExactnessReport& r) {
    nlohmann::json j = {{"instruction", r.instruction}, {"trials", r.trials}, {"passes", r.passes}};
    if (!r.first_failure) {
        j["first_failure"] = nullptr;
    } else {
        const Failure& f = *r.first_failure;
        j["first_failure"] = {{"model", assignment_json(f.model)},
                              {"state", f.state},
                              {"expected", assignment_json(f.expected)},
                              {"got", f.got ? assignment_json(*f.got) : nlohmann::json(nullptr)},
                              {"reason", f.reason}};
    }
    return j;
}

/// Checks one model against concrete execution of `code` from a
/// compatible state at `entry`.
inline std::optional<Failure> check_model(const std::vector<Instruction>& code, const Frame& entry,
                                          const poly::Assignment& rho, const bc::Program& prog) {
    poly::Assignment in, out;
    for (const auto& [v, x] : rho) {
        if (v.is_input()) in[v] = x;
        else if (v.is_output()) out[v] = x;
    }
    interp::State s;
    try {
        s = interp::build_state(in, entry, prog);
    } catch (const std::invalid_argument& e) {
        return Failure{rho, "", out, std::nullopt, std::string("no compatible state: ") + e.what()};
    }
    const std::string shown = s.str();
    for (const auto& ins : code)
        if (!interp::exec(ins, s, prog)) return Failure{rho, shown, out, std::nullopt, "step undefined"};
    auto got = interp::output_assignment(s);
    if (got != out) return Failure{rho, shown, out, got, "output lengths differ"};
    return std::nullopt;
}

inline ExactnessReport run_trials(const std::string& label, const std::vector<Instruction>& code,
                                  const Frame& entry, const Polyhedron& pl, const bc::Program& prog,
                                  int trials, std::mt19937_64& rng) {
    ExactnessReport r;
    r.instruction = label;
    for (int t = 0; t < trials; ++t) {
        ++r.trials;
        auto rho = sample_model(pl, rng);
        auto f = check_model(code, entry, rho, prog);
        if (!f) ++r.passes;
        else if (!r.first_failure) r.first_failure = std::move(*f);
    }
    return r;
}

/// Exactness of ins_pl(ins, frame) on `trials` sampled models.
inline ExactnessReport exactness_check(const Instruction& ins, const Frame& frame, const bc::Program& prog, int trials,
                                       std::uint64_t seed, const Options& opt = {}) {
    std::mt19937_64 rng(seed);
    return run_trials(ins.str(), {ins}, frame, ins_pl(ins, frame, prog, opt), prog, trials, rng);
}

/// Class table used by the harness.
inline bc::Program harness_program() {
    bc::Program p;
    p.classes.push_back({"C", {{"x", bc::SlotType::integer()}, {"f", bc::SlotType::ref("C")}}});
    return p;
}

/// Instruction families for the harness.
enum class Family { ConstInt, ConstNull, Dup, New, Load, Store, Add, Putfield, IfEqInt, IfEqRef, IfLt, IfLe, IfGt, IfGe, Pop };

inline const std::vector<Family>& all_families() {
    static const std::vector<Family> f = {Family::ConstInt, Family::ConstNull, Family::Dup,     Family::New,
                                          Family::Load,     Family::Store,     Family::Add,     Family::Putfield,
                                          Family::IfEqInt,  Family::IfEqRef,   Family::IfLt,    Family::IfLe,
                                          Family::IfGt,     Family::IfGe,     Family::Pop};
    return f;
}

inline std::string family_name(Family f) {
    switch (f) {
        case Family::ConstInt: return "const int";
        case Family::ConstNull: return "const null";
        case Family::Dup: return "dup";
        case Family::New: return "new";
        case Family::Load: return "load";
        case Family::Store: return "store";
        case Family::Add: return "add";
        case Family::Putfield: return "putfield int";
        case Family::IfEqInt: return "ifeq int";
        case Family::IfEqRef: return "ifeq C";
        case Family::IfLt: return "iflt";
        case Family::IfLe: return "ifle";
        case Family::IfGt: return "ifgt";
        case Family::IfGe: return "ifge";
        case Family::Pop: return "pop";
    }
    return "?";
}

/// Random frame over int and C slots, never null-typed.
inline bc::SlotType random_slot(std::mt19937_64& rng) {
    return rng() % 2 ? bc::SlotType::integer() : bc::SlotType::ref("C");
}

inline Frame random_frame(std::mt19937_64& rng, int min_locals = 0) {
    Frame f;
    const int nl = min_locals + static_cast<int>(rng() % 3);
    const int ns = static_cast<int>(rng() % 3);
    for (int i = 0; i < nl; ++i) f.locals.push_back(random_slot(rng));
    for (int i = 0; i < ns; ++i) f.stack.push_back(random_slot(rng));
    return f;
}

/// A random instance of a family together with a frame it is legal at.
inline std::pair<Instruction, Frame> random_instance(Family fam, std::mt19937_64& rng) {
    using bc::SlotType;
    Frame f = random_frame(rng);
    auto push = [&](SlotType t) { f.stack.push_back(std::move(t)); };
    switch (fam) {
        case Family::ConstInt: return {Instruction::constant(static_cast<long>(rng() % 41) - 20), f};
        case Family::ConstNull: return {Instruction::const_null(), f};
        case Family::Dup:
            push(random_slot(rng));
            return {Instruction::simple(Op::Dup), f};
        case Family::New: return {Instruction::make_new("C"), f};
        case Family::Load: {
            if (f.locals.empty()) f.locals.push_back(random_slot(rng));
            return {Instruction::load(static_cast<int>(rng() % f.locals.size())), f};
        }
        case Family::Store:
            push(random_slot(rng));
            return {Instruction::store(static_cast<int>(rng() % (f.locals.size() + 1))), f};
        case Family::Add:
            push(SlotType::integer());
            push(SlotType::integer());
            return {Instruction::simple(Op::Add), f};
        case Family::Putfield:
            push(SlotType::ref("C"));
            push(SlotType::integer());
            return {Instruction::putfield("C", "x"), f};
        case Family::IfEqInt:
            push(SlotType::integer());
            return {Instruction::guard(Op::IfEq), f};
        case Family::IfEqRef:
            push(SlotType::ref("C"));
            return {Instruction::guard(Op::IfEq, SlotType::ref("C")), f};
        case Family::IfLt: push(SlotType::integer()); return {Instruction::guard(Op::IfLt), f};
        case Family::IfLe: push(SlotType::integer()); return {Instruction::guard(Op::IfLe), f};
        case Family::IfGt: push(SlotType::integer()); return {Instruction::guard(Op::IfGt), f};
        case Family::IfGe: push(SlotType::integer()); return {Instruction::guard(Op::IfGe), f};
        case Family::Pop:
            push(random_slot(rng));
            return {Instruction::simple(Op::Pop), f};
    }
    throw std::logic_error("unknown family");
}

/// `trials` random (frame, model) pairs of one family.
inline ExactnessReport family_check(Family fam, int trials, std::uint64_t seed, const Options& opt = {}) {
    const bc::Program prog = harness_program();
    std::mt19937_64 rng(seed);
    ExactnessReport total;
    total.instruction = family_name(fam);
    for (int t = 0; t < trials; ++t) {
        auto [ins, frame] = random_instance(fam, rng);
        auto r = run_trials(ins.str(), {ins}, frame, ins_pl(ins, frame, prog, opt), prog, 1, rng);
        total.trials += r.trials;
        total.passes += r.passes;
        if (r.first_failure && !total.first_failure) total.first_failure = r.first_failure;
    }
    return total;
}

/// Random two-instruction sequences: the composition of exact abstractions
/// is checked against two-step execution.
inline ExactnessReport sequence_check(int sequences, std::uint64_t seed, const Options& opt = {}) {
    const bc::Program prog = harness_program();
    std::mt19937_64 rng(seed);
    ExactnessReport total;
    total.instruction = "two-instruction sequences";
    const auto& fams = all_families();
    while (total.trials < sequences) {
        auto [first, frame] = random_instance(fams[rng() % fams.size()], rng);
        const Frame mid = post_frame(first, frame, prog);
        // Pick a second instruction legal at `mid`.
        std::vector<Instruction> options = {Instruction::constant(static_cast<long>(rng() % 11) - 5), Instruction::const_null(),
                                            Instruction::make_new("C")};
        if (!mid.locals.empty()) options.push_back(Instruction::load(static_cast<int>(rng() % mid.locals.size())));
        if (mid.ns() >= 1) {
            options.push_back(Instruction::simple(Op::Dup));
            options.push_back(Instruction::simple(Op::Pop));
            options.push_back(Instruction::store(static_cast<int>(rng() % (mid.locals.size() + 1))));
            const auto& t = mid.stack.back();
            if (t.is_int()) {
                for (Op g : {Op::IfEq, Op::IfLt, Op::IfLe, Op::IfGt, Op::IfGe}) options.push_back(Instruction::guard(g));
            } else if (t.kind == bc::SlotType::Kind::Ref) {
                options.push_back(Instruction::guard(Op::IfEq, t));
            }
        }
        if (mid.ns() >= 2 && mid.stack[mid.stack.size() - 1].is_int()) {
            const auto& r = mid.stack[mid.stack.size() - 2];
            if (r.is_int()) options.push_back(Instruction::simple(Op::Add));
            if (r.kind == bc::SlotType::Kind::Ref) options.push_back(Instruction::putfield("C", "x"));
        }
        const Instruction second = options[rng() % options.size()];
        auto parts = poly::compose_pl(ins_pl(first, frame, prog, opt), ins_pl(second, mid, prog, opt), mid.nl(), mid.ns(),
                                      poly::Projection::Exact);
        if (parts.empty()) continue;  // unsatisfiable sequence, e.g. const 3 ; ifeq int
        const Polyhedron& pl = parts[rng() % parts.size()];
        auto r = run_trials(first.str() + " ; " + second.str(), {first, second}, frame, pl, prog, 1, rng);
        total.trials += r.trials;
        total.passes += r.passes;
        if (r.first_failure && !total.first_failure) total.first_failure = r.first_failure;
    }
    return total;
}

/// The inexact getfield abstraction at the frame (#l=2, #s=3).
inline ExactnessReport getfield_fixture(int trials, std::uint64_t seed) {
    const bc::Program prog = harness_program();
    using bc::SlotType;
    Frame f{{SlotType::integer(), SlotType::ref("C")}, {SlotType::ref("C"), SlotType::ref("C"), SlotType::ref("C")}};
    return exactness_check(Instruction::getfield("C", "f", SlotType::ref("C")), f, prog, trials, seed);
}

}  // namespace nonterm::abs
