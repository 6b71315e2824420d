#include "multiacc/pairing.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace multiacc {

namespace {

using PairVec = std::vector<std::pair<Index, Index>>;
using Node = PairingStructure::Node;

void canonicalize(PairVec& pairs) {
    for (auto& pr : pairs) {
        if (pr.first > pr.second) std::swap(pr.first, pr.second);
    }
    std::sort(pairs.begin(), pairs.end());
}

// Partner lookup for index values <= 64; entry 0 means "not present".
struct PartnerMap {
    std::array<Index, 65> partner{};
    void clear_for(const std::vector<Index>& index_set) {
        for (Index v : index_set) partner[static_cast<std::size_t>(v)] = 0;
    }
};

}  // namespace

Pairing canonical_pairing_unchecked(PairVec pairs) {
    canonicalize(pairs);
    Pairing p;
    p.pairs_ = std::move(pairs);
    return p;
}

Pairing Pairing::from_pairs(PairVec pairs) {
    canonicalize(pairs);
    std::vector<Index> seen;
    seen.reserve(pairs.size() * 2);
    for (const auto& [lo, hi] : pairs) {
        if (lo == hi) throw InvariantError("pairing: pair {" + std::to_string(lo) + "," + std::to_string(hi) + "} repeats an index");
        if (lo < 1) throw InvariantError("pairing: indices must be positive");
        seen.push_back(lo);
        seen.push_back(hi);
    }
    std::sort(seen.begin(), seen.end());
    for (std::size_t k = 1; k < seen.size(); ++k) {
        if (seen[k] == seen[k - 1])
            throw InvariantError("pairing: index " + std::to_string(seen[k]) + " appears in more than one pair");
    }
    Pairing p;
    p.pairs_ = std::move(pairs);
    return p;
}

std::vector<Index> Pairing::indices() const {
    std::vector<Index> out;
    out.reserve(pairs_.size() * 2);
    for (const auto& [lo, hi] : pairs_) {
        out.push_back(lo);
        out.push_back(hi);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string Pairing::to_string() const {
    std::string out = "{";
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
        if (k > 0) out += ",";
        out += "{" + std::to_string(pairs_[k].first) + "," + std::to_string(pairs_[k].second) + "}";
    }
    out += "}";
    return out;
}

std::optional<Pairing> split(const Pairing& p, const std::vector<Index>& K) {
    PairVec kept;
    kept.reserve(K.size() / 2);
    for (const auto& [lo, hi] : p.pairs()) {
        const bool in_lo = std::binary_search(K.begin(), K.end(), lo);
        const bool in_hi = std::binary_search(K.begin(), K.end(), hi);
        if (in_lo != in_hi) return std::nullopt;  // crosses the boundary
        if (in_lo) kept.emplace_back(lo, hi);
    }
    return canonical_pairing_unchecked(std::move(kept));
}

// ---------------------------------------------------------------------------
// PairingStructure construction

namespace {

void finish_node(Node& n) {
    n.count_fits = fits_u64(n.count);
    if (n.count_fits) n.count_u64 = to_u64(n.count);
    n.maskable = !n.index_set.empty() && n.index_set.back() <= 64;
    if (n.maskable) {
        n.mask = 0;
        for (Index v : n.index_set) n.mask |= std::uint64_t{1} << (v - 1);
    }
}

}  // namespace

PairingStructure PairingStructure::base(Index i, Index j) {
    if (i == j) throw InvariantError("base: indices must differ");
    if (i < 1 || j < 1) throw InvariantError("base: indices must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::base;
    n->lo = std::min(i, j);
    n->hi = std::max(i, j);
    n->index_set = {n->lo, n->hi};
    n->count = 1;
    n->rsize = 1;
    finish_node(*n);
    return PairingStructure(std::move(n));
}

PairingStructure PairingStructure::union_of(const PairingStructure& l, const PairingStructure& r) {
    if (l.index_set() != r.index_set())
        throw InvariantError("union: children must have identical index sets");
    auto n = std::make_shared<Node>();
    n->kind = Kind::union_node;
    n->left = l.node_;
    n->right = r.node_;
    n->index_set = l.index_set();
    n->count = l.num_pairings() + r.num_pairings();
    n->rsize = l.rsize() + r.rsize() + 1;
    finish_node(*n);
    return PairingStructure(std::move(n));
}

PairingStructure PairingStructure::product(const PairingStructure& l, const PairingStructure& r) {
    const auto& a = l.index_set();
    const auto& b = r.index_set();
    std::vector<Index> merged;
    merged.resize(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), merged.begin());
    for (std::size_t k = 1; k < merged.size(); ++k) {
        if (merged[k] == merged[k - 1])
            throw InvariantError("product: index " + std::to_string(merged[k]) + " appears in both children");
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::product;
    n->left = l.node_;
    n->right = r.node_;
    n->index_set = std::move(merged);
    n->count = l.num_pairings() * r.num_pairings();
    n->rsize = l.rsize() + r.rsize() + 1;
    finish_node(*n);
    return PairingStructure(std::move(n));
}

PairingStructure PairingStructure::left() const { return PairingStructure(node_->left); }
PairingStructure PairingStructure::right() const { return PairingStructure(node_->right); }

bool PairingStructure::structurally_equal(const PairingStructure& other) const {
    const Node* a = node_.get();
    const Node* b = other.node_.get();
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    if (a->kind == Kind::base) return a->lo == b->lo && a->hi == b->hi;
    return PairingStructure(a->left).structurally_equal(PairingStructure(b->left)) &&
           PairingStructure(a->right).structurally_equal(PairingStructure(b->right));
}

PairingStructure union_all(const std::vector<PairingStructure>& parts) {
    if (parts.empty()) throw InvariantError("union_all: empty list");
    PairingStructure acc = parts.front();
    for (std::size_t k = 1; k < parts.size(); ++k) acc = PairingStructure::union_of(acc, parts[k]);
    return acc;
}

PairingStructure product_all(const std::vector<PairingStructure>& parts) {
    if (parts.empty()) throw InvariantError("product_all: empty list");
    PairingStructure acc = parts.front();
    for (std::size_t k = 1; k < parts.size(); ++k) acc = PairingStructure::product(acc, parts[k]);
    return acc;
}

PairingStructure full_structure(const std::vector<Index>& indices) {
    if (indices.size() < 2 || indices.size() % 2 != 0)
        throw InvariantError("full_structure: index set must have even size >= 2");
    std::vector<Index> sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() == 2) return PairingStructure::base(sorted[0], sorted[1]);
    std::vector<PairingStructure> branches;
    branches.reserve(sorted.size() - 1);
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        PairingStructure first = PairingStructure::base(sorted[0], sorted[k]);
        std::vector<Index> rest;
        rest.reserve(sorted.size() - 2);
        for (std::size_t m = 1; m < sorted.size(); ++m)
            if (m != k) rest.push_back(sorted[m]);
        branches.push_back(PairingStructure::product(first, full_structure(rest)));
    }
    return union_all(branches);
}

PairingStructure singleton_structure(const Pairing& p) {
    if (p.empty()) throw InvariantError("singleton_structure: empty pairing");
    std::vector<PairingStructure> bases;
    bases.reserve(p.size());
    for (const auto& [lo, hi] : p.pairs()) bases.push_back(PairingStructure::base(lo, hi));
    return product_all(bases);
}

// ---------------------------------------------------------------------------
// Sampling and membership

namespace {

// Picks the left branch of a union with probability |S(left)| / |S(T)| using
// an exactly uniform integer draw.
bool pick_left(const Node& n, Rng& rng) {
    if (n.count_fits) return rng.below(n.count_u64) < n.left->count_u64;
    return random_below(n.count, rng) < n.left->count;
}

void sample_pairs(const Node& n, Rng& rng, PairVec& out) {
    switch (n.kind) {
        case PairingStructure::Kind::base:
            out.emplace_back(n.lo, n.hi);
            return;
        case PairingStructure::Kind::product:
            sample_pairs(*n.left, rng, out);
            sample_pairs(*n.right, rng, out);
            return;
        case PairingStructure::Kind::union_node:
            sample_pairs(pick_left(n, rng) ? *n.left : *n.right, rng, out);
            return;
    }
}

void sample_partner(const Node& n, Rng& rng, PartnerMap& pm) {
    switch (n.kind) {
        case PairingStructure::Kind::base:
            pm.partner[static_cast<std::size_t>(n.lo)] = n.hi;
            pm.partner[static_cast<std::size_t>(n.hi)] = n.lo;
            return;
        case PairingStructure::Kind::product:
            sample_partner(*n.left, rng, pm);
            sample_partner(*n.right, rng, pm);
            return;
        case PairingStructure::Kind::union_node:
            sample_partner(pick_left(n, rng) ? *n.left : *n.right, rng, pm);
            return;
    }
}

bool contains_partner(const Node& n, const PartnerMap& pm) {
    switch (n.kind) {
        case PairingStructure::Kind::base:
            return pm.partner[static_cast<std::size_t>(n.lo)] == n.hi;
        case PairingStructure::Kind::product: {
            // Split check: the partner of every left index must stay inside
            // the left child's index set.
            const Node& left = *n.left;
            for (Index v : left.index_set) {
                const Index w = pm.partner[static_cast<std::size_t>(v)];
                if (w < 1 || (left.mask >> (w - 1) & 1) == 0) return false;
            }
            return contains_partner(left, pm) && contains_partner(*n.right, pm);
        }
        case PairingStructure::Kind::union_node:
            return contains_partner(*n.left, pm) || contains_partner(*n.right, pm);
    }
    return false;
}

bool contains_rec(const Node& n, const Pairing& p) {
    switch (n.kind) {
        case PairingStructure::Kind::base:
            return p.pairs().size() == 1 && p.pairs()[0] == std::make_pair(n.lo, n.hi);
        case PairingStructure::Kind::product: {
            auto p1 = split(p, n.left->index_set);
            if (!p1) return false;
            auto p2 = split(p, n.right->index_set);
            return contains_rec(*n.left, *p1) && contains_rec(*n.right, *p2);
        }
        case PairingStructure::Kind::union_node:
            return contains_rec(*n.left, p) || contains_rec(*n.right, p);
    }
    return false;
}

void fill_partner(const Pairing& p, PartnerMap& pm) {
    for (const auto& [lo, hi] : p.pairs()) {
        pm.partner[static_cast<std::size_t>(lo)] = hi;
        pm.partner[static_cast<std::size_t>(hi)] = lo;
    }
}

}  // namespace

Pairing sample(const PairingStructure& t, Rng& rng) {
    PairVec pairs;
    pairs.reserve(t.index_set().size() / 2);
    sample_pairs(t.node(), rng, pairs);
    return canonical_pairing_unchecked(std::move(pairs));
}

bool contains(const PairingStructure& t, const Pairing& p) {
    if (p.indices() != t.index_set())
        throw InvariantError("contains: pairing does not pair the structure's index set");
    if (t.node().maskable) {
        PartnerMap pm;
        fill_partner(p, pm);
        return contains_partner(t.node(), pm);
    }
    return contains_rec(t.node(), p);
}

bool probe_sample_contains(const PairingStructure& src, const PairingStructure& dst, Rng& rng) {
    if (src.node().maskable && dst.node().maskable) {
        PartnerMap pm;
        sample_partner(src.node(), rng, pm);
        return contains_partner(dst.node(), pm);
    }
    return contains(dst, sample(src, rng));
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

std::vector<PairVec> enumerate_rec(const Node& n) {
    switch (n.kind) {
        case PairingStructure::Kind::base:
            return {{{n.lo, n.hi}}};
        case PairingStructure::Kind::union_node: {
            auto out = enumerate_rec(*n.left);
            auto rhs = enumerate_rec(*n.right);
            out.insert(out.end(), std::make_move_iterator(rhs.begin()), std::make_move_iterator(rhs.end()));
            return out;
        }
        case PairingStructure::Kind::product: {
            auto lhs = enumerate_rec(*n.left);
            auto rhs = enumerate_rec(*n.right);
            std::vector<PairVec> out;
            out.reserve(lhs.size() * rhs.size());
            for (const auto& a : lhs) {
                for (const auto& b : rhs) {
                    PairVec merged = a;
                    merged.insert(merged.end(), b.begin(), b.end());
                    out.push_back(std::move(merged));
                }
            }
            return out;
        }
    }
    return {};
}

}  // namespace

std::vector<Pairing> enumerate_pairings(const PairingStructure& t, const BigCount& cap) {
    if (t.num_pairings() > cap)
        throw CapacityError("enumerate: |S(T)| = " + t.num_pairings().get_str() + " exceeds cap " + cap.get_str());
    auto raw = enumerate_rec(t.node());
    std::vector<Pairing> out;
    out.reserve(raw.size());
    for (auto& pv : raw) out.push_back(canonical_pairing_unchecked(std::move(pv)));
    std::sort(out.begin(), out.end());
    return out;
}

BigCount intersection_count(const PairingStructure& t, const PairingStructure& u, const BigCount& cap) {
    if (t.index_set() != u.index_set())
        throw InvariantError("intersection_count: structures must share an index set");
    const bool t_smaller = t.num_pairings() <= u.num_pairings();
    const PairingStructure& small = t_smaller ? t : u;
    const PairingStructure& other = t_smaller ? u : t;
    if (small.num_pairings() > cap)
        throw CapacityError("intersection_count: both sets exceed cap " + cap.get_str());
    BigCount hits = 0;
    for (const Pairing& p : enumerate_pairings(small, cap)) {
        if (contains(other, p)) ++hits;
    }
    return hits;
}

namespace {

void all_pairings_rec(std::vector<Index>& remaining, PairVec& acc, std::vector<Pairing>& out) {
    if (remaining.empty()) {
        out.push_back(canonical_pairing_unchecked(acc));
        return;
    }
    const Index first = remaining.front();
    for (std::size_t k = 1; k < remaining.size(); ++k) {
        const Index partner = remaining[k];
        std::vector<Index> rest;
        rest.reserve(remaining.size() - 2);
        for (std::size_t m = 1; m < remaining.size(); ++m)
            if (m != k) rest.push_back(remaining[m]);
        acc.emplace_back(first, partner);
        all_pairings_rec(rest, acc, out);
        acc.pop_back();
    }
}

}  // namespace

std::vector<Pairing> all_pairings(int n) {
    if (n % 2 != 0 || n <= 0) return {};
    if (n > 16) throw CapacityError("all_pairings: n = " + std::to_string(n) + " exceeds the enumeration bound 16");
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) idx[static_cast<std::size_t>(k)] = k + 1;
    std::vector<Pairing> out;
    PairVec acc;
    all_pairings_rec(idx, acc, out);
    return out;
}

double eval_x(const PairingStructure& t, const Eigen::MatrixXd& sigma) {
    const Node& n = t.node();
    switch (n.kind) {
        case PairingStructure::Kind::base:
            if (n.hi > sigma.rows() || n.hi > sigma.cols())
                throw std::out_of_range("eval_x: index " + std::to_string(n.hi) + " out of range for " +
                                        std::to_string(sigma.rows()) + "x" + std::to_string(sigma.cols()) + " matrix");
            return sigma(n.lo - 1, n.hi - 1);
        case PairingStructure::Kind::union_node:
            return eval_x(t.left(), sigma) + eval_x(t.right(), sigma);
        case PairingStructure::Kind::product:
            return eval_x(t.left(), sigma) * eval_x(t.right(), sigma);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

struct Parser {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos); }

    void expect(char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c) fail(std::string("expected '") + c + "'");
        ++pos;
    }

    std::string word() {
        skip_ws();
        const std::size_t start = pos;
        while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '-' || text[pos] == '_'))
            ++pos;
        if (pos == start) fail("expected a token");
        return std::string(text.substr(start, pos - start));
    }

    Index integer() {
        skip_ws();
        const std::size_t at = pos;
        const std::string w = word();
        try {
            std::size_t used = 0;
            const long v = std::stol(w, &used);
            if (used != w.size() || v < 1 || v > 1'000'000'000) throw std::invalid_argument(w);
            return static_cast<Index>(v);
        } catch (const std::exception&) {
            pos = at;
            fail("expected a positive integer index, got '" + w + "'");
        }
    }

    PairingStructure sexpr() {
        expect('(');
        const std::string head = word();
        if (head == "base") {
            const Index i = integer();
            const Index j = integer();
            expect(')');
            return PairingStructure::base(i, j);
        }
        if (head == "union" || head == "prod") {
            PairingStructure l = sexpr();
            PairingStructure r = sexpr();
            expect(')');
            return head == "union" ? PairingStructure::union_of(l, r) : PairingStructure::product(l, r);
        }
        fail("unknown node kind '" + head + "' (expected base/union/prod)");
    }
};

void serialize_rec(const PairingStructure& t, std::string& out) {
    switch (t.kind()) {
        case PairingStructure::Kind::base:
            out += "(base " + std::to_string(t.base_lo()) + " " + std::to_string(t.base_hi()) + ")";
            return;
        case PairingStructure::Kind::union_node:
            out += "(union ";
            serialize_rec(t.left(), out);
            out += " ";
            serialize_rec(t.right(), out);
            out += ")";
            return;
        case PairingStructure::Kind::product:
            out += "(prod ";
            serialize_rec(t.left(), out);
            out += " ";
            serialize_rec(t.right(), out);
            out += ")";
            return;
    }
}

}  // namespace

PairingStructure parse_structure(std::string_view text) {
    Parser p{text};
    PairingStructure out = p.sexpr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input after structure");
    return out;
}

std::string serialize_structure(const PairingStructure& t) {
    std::string out;
    serialize_rec(t, out);
    return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void validate_rec(const PairingStructure& t, const BigCount& cap, ValidationReport& report, const std::string& path) {
    switch (t.kind()) {
        case PairingStructure::Kind::base:
            return;
        case PairingStructure::Kind::product:
            validate_rec(t.left(), cap, report, path + "L");
            validate_rec(t.right(), cap, report, path + "R");
            return;
        case PairingStructure::Kind::union_node: {
            const PairingStructure l = t.left();
            const PairingStructure r = t.right();
            const bool l_smaller = l.num_pairings() <= r.num_pairings();
            const PairingStructure& small = l_smaller ? l : r;
            const PairingStructure& other = l_smaller ? r : l;
            if (small.num_pairings() <= cap) {
                bool overlap = false;
                for (const Pairing& p : enumerate_pairings(small, cap)) {
                    if (contains(other, p)) {
                        report.ok = false;
                        report.problems.push_back("union at " + (path.empty() ? std::string("root") : path) +
                                                  ": children share pairing " + p.to_string());
                        overlap = true;
                        break;
                    }
                }
                if (!overlap) ++report.unions_verified;
            } else {
                ++report.unions_trusted;
            }
            validate_rec(l, cap, report, path + "L");
            validate_rec(r, cap, report, path + "R");
            return;
        }
    }
}

}  // namespace

ValidationReport validate(const PairingStructure& t, const BigCount& cap) {
    ValidationReport report;
    validate_rec(t, cap, report, "");
    return report;
}

}  // namespace multiacc
