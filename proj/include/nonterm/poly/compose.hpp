#pragma once

#include "nonterm/poly/omega.hpp"

namespace nonterm::poly {

/// Input/output variables of a frame with `nl` locals and `ns` stack slots.
inline std::set<VarId> input_vars(int nl, int ns) {
    std::set<VarId> s;
    for (int k = 0; k < nl; ++k) s.insert(VarId::in_l(k));
    for (int k = 0; k < ns; ++k) s.insert(VarId::in_s(k));
    return s;
}

inline std::set<VarId> output_vars(int nl, int ns) {
    std::set<VarId> s;
    for (int k = 0; k < nl; ++k) s.insert(VarId::out_l(k));
    for (int k = 0; k < ns; ++k) s.insert(VarId::out_s(k));
    return s;
}

class ArityMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Sequential composition: pl1's outputs and pl2's inputs (a frame of `lt`
/// locals and `st` stack slots) are identified through temporaries which
/// are then eliminated.
inline std::vector<Polyhedron> compose_pl(const Polyhedron& pl1, const Polyhedron& pl2, int lt, int st,
                                          Projection mode = Projection::DarkShadow) {
    std::set<VarId> out1, in2;
    for (const auto& v : pl1.scope)
        if (v.is_output()) out1.insert(v);
    for (const auto& v : pl2.scope)
        if (v.is_input()) in2.insert(v);
    if (out1 != output_vars(lt, st) || in2 != input_vars(lt, st))
        throw ArityMismatch("compose_pl: arity mismatch at the middle frame (" + std::to_string(lt) + "," +
                            std::to_string(st) + ")");
    for (const auto& p : {&pl1, &pl2})
        for (const auto& v : p->scope)
            if (v.kind == VarKind::Tmp) throw std::invalid_argument("compose_pl: operand already mentions " + v.str());

    std::map<VarId, VarId> r1, r2;
    std::set<VarId> tmps;
    for (int k = 0; k < lt; ++k) {
        r1[VarId::out_l(k)] = r2[VarId::in_l(k)] = VarId::tmp(k);
        tmps.insert(VarId::tmp(k));
    }
    for (int k = 0; k < st; ++k) {
        r1[VarId::out_s(k)] = r2[VarId::in_s(k)] = VarId::tmp(lt + k);
        tmps.insert(VarId::tmp(lt + k));
    }
    Polyhedron joined = conjoin(rename(pl1, r1), rename(pl2, r2));
    return eliminate(joined, tmps, mode);
}

/// Dark-shadow composition as a single polyhedron.
inline Polyhedron compose_dark(const Polyhedron& pl1, const Polyhedron& pl2, int lt, int st) {
    auto parts = compose_pl(pl1, pl2, lt, st, Projection::DarkShadow);
    if (!parts.empty()) return parts.front();
    std::set<VarId> scope;
    for (const auto& v : pl1.scope)
        if (!v.is_output()) scope.insert(v);
    for (const auto& v : pl2.scope)
        if (!v.is_input()) scope.insert(v);
    return Polyhedron::empty_set(scope);
}

}  // namespace nonterm::poly
