#pragma once

#include <compare>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>

namespace nonterm::poly {

/// Kinds of variables a path-length polyhedron may mention.  The enumerator
/// order is part of the total order on VarId.
enum class VarKind {
    InL,     // input local      (token il<k>)
    InS,     // input stack slot (token is<k>)
    OutL,    // output local     (token ol<k>)
    OutS,    // output stack     (token os<k>)
    Tmp,     // composition temporary (token t<k>)
    RetIn,   // return length at block entry (token rin_<block>)
    RetOut,  // return length at block exit  (token rout_<block>)
    Fresh,   // renamed-apart / wildcard variable (token v<n>)
};

struct VarId {
    VarKind kind = VarKind::Fresh;
    int index = 0;
    std::string block;

    static VarId in_l(int k) { return {VarKind::InL, k, {}}; }
    static VarId in_s(int k) { return {VarKind::InS, k, {}}; }
    static VarId out_l(int k) { return {VarKind::OutL, k, {}}; }
    static VarId out_s(int k) { return {VarKind::OutS, k, {}}; }
    static VarId tmp(int k) { return {VarKind::Tmp, k, {}}; }
    static VarId ret_in(std::string b) { return {VarKind::RetIn, 0, std::move(b)}; }
    static VarId ret_out(std::string b) { return {VarKind::RetOut, 0, std::move(b)}; }
    static VarId fresh(int n) { return {VarKind::Fresh, n, {}}; }

    bool is_input() const { return kind == VarKind::InL || kind == VarKind::InS; }
    bool is_output() const { return kind == VarKind::OutL || kind == VarKind::OutS; }

    auto operator<=>(const VarId&) const = default;
    bool operator==(const VarId&) const = default;

    std::string str() const {
        switch (kind) {
            case VarKind::InL: return "il" + std::to_string(index);
            case VarKind::InS: return "is" + std::to_string(index);
            case VarKind::OutL: return "ol" + std::to_string(index);
            case VarKind::OutS: return "os" + std::to_string(index);
            case VarKind::Tmp: return "t" + std::to_string(index);
            case VarKind::RetIn: return "rin_" + block;
            case VarKind::RetOut: return "rout_" + block;
            case VarKind::Fresh: return "v" + std::to_string(index);
        }
        return "?";
    }

    static std::optional<VarId> parse(const std::string& tok) {
        static const std::regex indexed(R"((il|is|ol|os|t|v)(\d+))");
        std::smatch m;
        if (std::regex_match(tok, m, indexed)) {
            const int k = std::stoi(m[2].str());
            const std::string p = m[1].str();
            if (p == "il") return in_l(k);
            if (p == "is") return in_s(k);
            if (p == "ol") return out_l(k);
            if (p == "os") return out_s(k);
            if (p == "t") return tmp(k);
            return fresh(k);
        }
        if (tok.rfind("rin_", 0) == 0 && tok.size() > 4) return ret_in(tok.substr(4));
        if (tok.rfind("rout_", 0) == 0 && tok.size() > 5) return ret_out(tok.substr(5));
        return std::nullopt;
    }
};

}  // namespace nonterm::poly
