#pragma once

// Expected clauses for corpus/sum.jbc: the twelve generated clauses in
// order, and the six binary clauses with the iteration that first
// produces them.

#include <string>
#include <vector>

namespace golden {

inline const std::vector<std::string> kSumClauses = {
    "sum(il0, rin_sum) :- il0 = ol0, il0 = os0, rin_sum = rout_sum, b1(ol0, os0, rout_sum).",
    "sum(il0, rin_sum) :- il0 = ol0, il0 = os0, rin_sum = rout_sum, b2(ol0, os0, rout_sum).",
    "sum(il0, rin_sum) :- il0 = ol0, il0 = os0, rin_sum = rout_sum, b3(ol0, os0, rout_sum).",
    "b1(il0, is0, rin_b1) :- il0 = ol0, is0 = 0, 0 = os0, rin_b1 = os0.",
    "b2(il0, is0, rin_b2) :- il0 = ol0, is0 <= -1, rin_b2 = rout_b2, b4(ol0, rout_b2).",
    "b3(il0, is0, rin_b3) :- il0 = ol0, is0 >= 1, rin_b3 = rout_b3, b4(ol0, rout_b3).",
    "b4(il0, rin_b4) :- il0 = ol0, il0 = os0, il0 - 1 = os1, rin_b4 = rout_b4, b5(ol0, os0, os1, rout_b4).",
    "b5(il0, is0, is1, rin_b5) :- il0 = ol0, is0 = os0, rin_b5 = rout_b5, sum(is1, os1), b6(ol0, os0, os1, rout_b5).",
    "b6(il0, is0, is1, rin_b6) :- il0 = ol0, is0 + is1 = os0, rin_b6 = os0.",
    "main(il0) :- il0 = ol0, -1 = os0, b7(ol0, os0).",
    "b7(il0, is0) :- il0 = ol0, sum(is0, os0), b8(ol0, os0).",
    "b8(il0, is0) :- il0 = ol0.",
};

struct Golden {
    const char* name;
    const char* text;
    int iteration;
};

inline const Golden kUnfolded[] = {
    {"u1", "b5(il0, is0, is1, rin_b5) :- sum(is1, os1).", 1},
    {"u2", "b7(il0, is0) :- sum(is0, os0).", 1},
    {"u3", "b4(il0, rin_b4) :- il0 - 1 = is1, sum(is1, os1).", 2},
    {"u4", "main(il0) :- -1 = is0, sum(is0, os0).", 2},
    {"u5", "b2(il0, is0, rin_b2) :- il0 - 1 = is1, is0 <= -1, sum(is1, os1).", 3},
    {"u6", "sum(il0, rin_sum) :- il0 <= -1, il0 - 1 = is1, sum(is1, os1).", 4},
};

}  // namespace golden
