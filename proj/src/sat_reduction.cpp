#include "multiacc/sat_reduction.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>

#include "multiacc/errors.hpp"

namespace multiacc {

namespace {

struct DimacsScanner {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws_and_comments() {
        for (;;) {
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
            // Comment lines start with 'c' in column one; the 'cnf' keyword
            // inside the header must not match.
            if (pos < text.size() && text[pos] == 'c' && (pos == 0 || text[pos - 1] == '\n')) {
                while (pos < text.size() && text[pos] != '\n') ++pos;
                continue;
            }
            return;
        }
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos); }

    bool at_end() {
        skip_ws_and_comments();
        return pos >= text.size();
    }

    std::string token() {
        skip_ws_and_comments();
        const std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) fail("unexpected end of input");
        return std::string(text.substr(start, pos - start));
    }

    long integer() {
        const std::size_t at = pos;
        const std::string w = token();
        try {
            std::size_t used = 0;
            const long v = std::stol(w, &used);
            if (used != w.size()) throw std::invalid_argument(w);
            return v;
        } catch (const std::exception&) {
            pos = at;
            fail("expected an integer, got '" + w + "'");
        }
    }
};

}  // namespace

CnfFormula parse_dimacs(std::string_view text) {
    DimacsScanner sc{text};
    sc.skip_ws_and_comments();
    if (sc.token() != "p") sc.fail("expected 'p cnf <vars> <clauses>' header");
    if (sc.token() != "cnf") sc.fail("expected format 'cnf'");
    const long num_vars = sc.integer();
    const long num_clauses = sc.integer();
    if (num_vars < 1 || num_vars > 1'000'000) sc.fail("variable count out of range");
    if (num_clauses < 0) sc.fail("negative clause count");

    CnfFormula out;
    out.num_vars = static_cast<int>(num_vars);
    std::vector<Literal> current;
    while (!sc.at_end()) {
        const long lit = sc.integer();
        if (lit == 0) {
            if (current.size() != 3)
                throw ParseError("clause has " + std::to_string(current.size()) + " literals, expected exactly 3",
                                 sc.pos);
            out.clauses.push_back({current[0], current[1], current[2]});
            current.clear();
            continue;
        }
        const long var = lit > 0 ? lit : -lit;
        if (var > num_vars) sc.fail("literal " + std::to_string(lit) + " references an undeclared variable");
        current.push_back(Literal{static_cast<int>(var), lit > 0 ? 1 : 0});
    }
    if (!current.empty()) throw ParseError("unterminated clause (missing 0)", sc.pos);
    if (static_cast<long>(out.clauses.size()) != num_clauses)
        throw ParseError("header declares " + std::to_string(num_clauses) + " clauses, found " +
                             std::to_string(out.clauses.size()),
                         sc.pos);
    return out;
}

int reduction_index(int j, int s, int c1, int c2) {
    return 12 * (j - 1) + 4 * (s - 1) + 2 * c1 + c2 + 1;
}

namespace {

// The pairing block for one (clause, slot) with assignment bit r:
// {(j,s,0,0),(j,s,1,r)} and {(j,s,0,1),(j,s,1,1-r)}, as a product of bases.
PairingStructure slot_block(int j, int s, int r) {
    return PairingStructure::product(
        PairingStructure::base(reduction_index(j, s, 0, 0), reduction_index(j, s, 1, r)),
        PairingStructure::base(reduction_index(j, s, 0, 1), reduction_index(j, s, 1, 1 - r)));
}

}  // namespace

ReductionOutput build_reduction(const CnfFormula& phi) {
    const int k = static_cast<int>(phi.clauses.size());
    if (k < 1) throw InvariantError("build_reduction: formula must have at least one clause");
    for (const auto& clause : phi.clauses) {
        for (const Literal& lit : clause) {
            if (lit.var < 1 || lit.var > phi.num_vars)
                throw InvariantError("build_reduction: literal variable out of range");
            if (lit.bit != 0 && lit.bit != 1) throw InvariantError("build_reduction: literal bit must be 0 or 1");
        }
    }

    // Occurrences of each variable as (clause j, slot s), in (j, s) order.
    std::vector<std::vector<std::pair<int, int>>> occ(static_cast<std::size_t>(phi.num_vars) + 1);
    for (int j = 1; j <= k; ++j) {
        for (int s = 1; s <= 3; ++s) {
            const Literal& lit = phi.clauses[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(s - 1)];
            occ[static_cast<std::size_t>(lit.var)].emplace_back(j, s);
        }
    }

    ReductionOutput out{PairingStructure::base(1, 2), PairingStructure::base(1, 2), {}, 1};

    // T: one union per occurring variable (assignment 1 branch, then 0),
    // product over variables.
    std::vector<PairingStructure> var_parts;
    for (int a = 1; a <= phi.num_vars; ++a) {
        const auto& slots = occ[static_cast<std::size_t>(a)];
        if (slots.empty()) continue;
        out.occurring_vars.push_back(a);
        std::vector<PairingStructure> when_one, when_zero;
        when_one.reserve(slots.size());
        when_zero.reserve(slots.size());
        for (const auto& [j, s] : slots) {
            when_one.push_back(slot_block(j, s, 1));
            when_zero.push_back(slot_block(j, s, 0));
        }
        var_parts.push_back(PairingStructure::union_of(product_all(when_one), product_all(when_zero)));
    }
    out.t = product_all(var_parts);

    // U: one union per clause over the seven satisfying slot assignments
    // (r1, r2, r3), in lexicographic order; product over clauses.
    std::vector<PairingStructure> clause_parts;
    clause_parts.reserve(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j) {
        const auto& clause = phi.clauses[static_cast<std::size_t>(j - 1)];
        std::vector<PairingStructure> branches;
        branches.reserve(7);
        for (int r1 = 0; r1 <= 1; ++r1) {
            for (int r2 = 0; r2 <= 1; ++r2) {
                for (int r3 = 0; r3 <= 1; ++r3) {
                    const bool satisfied = r1 == clause[0].bit || r2 == clause[1].bit || r3 == clause[2].bit;
                    if (!satisfied) continue;
                    branches.push_back(product_all(
                        {slot_block(j, 1, r1), slot_block(j, 2, r2), slot_block(j, 3, r3)}));
                }
            }
        }
        clause_parts.push_back(union_all(branches));
    }
    out.u = product_all(clause_parts);

    const int occurring = static_cast<int>(out.occurring_vars.size());
    out.multiplier = big_pow(2, static_cast<unsigned>(phi.num_vars - occurring));
    return out;
}

namespace {

bool clause_satisfied(const std::array<Literal, 3>& clause, std::uint32_t assignment) {
    for (const Literal& lit : clause) {
        const int value = (assignment >> (lit.var - 1)) & 1;
        if (value == lit.bit) return true;
    }
    return false;
}

}  // namespace

std::uint64_t sat_count_bruteforce(const CnfFormula& phi) {
    if (phi.num_vars > 24)
        throw CapacityError("sat_count_bruteforce: m = " + std::to_string(phi.num_vars) + " exceeds bound 24");
    std::uint64_t count = 0;
    const std::uint32_t limit = std::uint32_t{1} << phi.num_vars;
    for (std::uint32_t assignment = 0; assignment < limit; ++assignment) {
        bool ok = true;
        for (const auto& clause : phi.clauses) {
            if (!clause_satisfied(clause, assignment)) {
                ok = false;
                break;
            }
        }
        if (ok) ++count;
    }
    return count;
}

std::uint64_t sat_count_occurring(const CnfFormula& phi) {
    if (phi.clauses.empty()) return 1;  // the empty assignment
    std::set<int> occurring;
    for (const auto& clause : phi.clauses)
        for (const Literal& lit : clause) occurring.insert(lit.var);
    const int m_prime = static_cast<int>(occurring.size());
    if (m_prime > 24) throw CapacityError("sat_count_occurring: m' exceeds bound 24");
    // Remap occurring variables to compact bit positions.
    std::map<int, int> position;
    for (int v : occurring) position.emplace(v, static_cast<int>(position.size()));
    CnfFormula compact;
    compact.num_vars = m_prime;
    compact.clauses.reserve(phi.clauses.size());
    for (const auto& clause : phi.clauses) {
        std::array<Literal, 3> remapped;
        for (std::size_t s = 0; s < 3; ++s)
            remapped[s] = Literal{position.at(clause[s].var) + 1, clause[s].bit};
        compact.clauses.push_back(remapped);
    }
    return sat_count_bruteforce(compact);
}

ReductionVerification verify_reduction(const CnfFormula& phi, const BigCount& cap) {
    const ReductionOutput red = build_reduction(phi);
    ReductionVerification out;
    out.intersection = intersection_count(red.t, red.u, cap);
    out.sat_count_occurring = sat_count_occurring(phi);
    out.match = out.intersection == BigCount(static_cast<unsigned long>(out.sat_count_occurring));
    return out;
}

}  // namespace multiacc
