#pragma once

#include "nonterm/bytecode/ir.hpp"

namespace nonterm::bc {

/// Replaces every block starting with `ifne int` by two copies guarded by
/// `iflt` and `ifgt`; predecessors branch to both.
inline Program desugar_ifne(Program p) {
    for (auto& m : p.methods) {
        std::vector<Block> out;
        std::map<std::string, std::pair<std::string, std::string>> split;
        for (auto& b : m.blocks) {
            for (size_t i = 0; i < b.instructions.size(); ++i)
                if (b.instructions[i].op == Op::IfNe && i != 0)
                    throw std::invalid_argument("ifne must be the first instruction of block " + b.name);
            if (b.instructions.empty() || b.instructions[0].op != Op::IfNe) {
                out.push_back(std::move(b));
                continue;
            }
            if (!b.instructions[0].type.is_int()) throw std::invalid_argument("unsupported construct: ifne on class type in " + b.name);
            if (b.name == m.entry) throw std::invalid_argument("unsupported construct: ifne in entry block " + b.name);
            for (auto suffix : {"_lt", "_gt"})
                if (p.find_block(b.name + suffix).second)
                    throw std::invalid_argument("desugaring " + b.name + " would clash with block " + b.name + suffix);
            Block lt = b, gt = b;
            lt.name = b.name + "_lt";
            gt.name = b.name + "_gt";
            lt.instructions[0] = Instruction::guard(Op::IfLt);
            gt.instructions[0] = Instruction::guard(Op::IfGt);
            split[b.name] = {lt.name, gt.name};
            out.push_back(std::move(lt));
            out.push_back(std::move(gt));
        }
        for (auto& b : out) {
            std::vector<std::string> succ;
            for (const auto& s : b.successors) {
                auto it = split.find(s);
                if (it == split.end()) {
                    succ.push_back(s);
                } else {
                    succ.push_back(it->second.first);
                    succ.push_back(it->second.second);
                }
            }
            b.successors = std::move(succ);
        }
        m.blocks = std::move(out);
    }
    return p;
}

}  // namespace nonterm::bc
