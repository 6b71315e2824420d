#ifndef MULTIACC_SAT_REDUCTION_HPP
#define MULTIACC_SAT_REDUCTION_HPP

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "multiacc/bigcount.hpp"
#include "multiacc/pairing.hpp"

namespace multiacc {

// Literal (var, bit): satisfied when x_var = bit.
struct Literal {
    int var = 0;
    int bit = 1;
};

// A 3CNF: every clause has exactly three literal slots (duplicates allowed).
struct CnfFormula {
    int num_vars = 0;
    std::vector<std::array<Literal, 3>> clauses;
};

// DIMACS cnf subset: "p cnf <vars> <clauses>", 'c' comment lines, clauses of
// exactly 3 literals terminated by 0. Positive literal l -> (l, 1), negative
// -> (-l, 0).
CnfFormula parse_dimacs(std::string_view text);

// Output of the #3SAT-to-pairing-structure construction over the index set
// {(j,s,c1,c2)} of size 12k, flattened to 1-based integers.
struct ReductionOutput {
    PairingStructure t;               // per-variable assignment structure, |S(T)| = 2^m'
    PairingStructure u;               // per-clause satisfaction structure, |S(U)| = 7^k
    std::vector<int> occurring_vars;  // ascending; m' of them
    BigCount multiplier;              // 2^(declared vars - occurring vars)
};

// Flat index for (clause j in [k], slot s in [3], c1, c2 in {0,1}):
// 12(j-1) + 4(s-1) + 2 c1 + c2 + 1.
int reduction_index(int j, int s, int c1, int c2);

// Builds T and U so that |S(T) ∩ S(U)| equals the number of satisfying
// assignments of phi over its occurring variables. Requires k >= 1.
ReductionOutput build_reduction(const CnfFormula& phi);

// Exact satisfying-assignment count over all declared variables; m <= 24.
std::uint64_t sat_count_bruteforce(const CnfFormula& phi);

// Count over occurring variables only (the quantity the reduction encodes).
std::uint64_t sat_count_occurring(const CnfFormula& phi);

struct ReductionVerification {
    BigCount intersection;
    std::uint64_t sat_count_occurring = 0;
    bool match = false;
};

ReductionVerification verify_reduction(const CnfFormula& phi, const BigCount& cap);

}  // namespace multiacc

#endif
