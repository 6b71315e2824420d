#ifndef MULTIACC_PAIRING_HPP
#define MULTIACC_PAIRING_HPP

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <eigen3/Eigen/Dense>

#include "multiacc/bigcount.hpp"
#include "multiacc/errors.hpp"
#include "multiacc/rng.hpp"

namespace multiacc {

using Index = int;  // 1-based positive indices

// One perfect pairing of an index set, stored in canonical form: lo < hi in
// each pair, pairs sorted by lo. Structural equality is therefore set equality.
class Pairing {
public:
    Pairing() = default;

    // Canonicalizes and checks that every index appears exactly once.
    static Pairing from_pairs(std::vector<std::pair<Index, Index>> pairs);

    const std::vector<std::pair<Index, Index>>& pairs() const { return pairs_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }
    std::vector<Index> indices() const;  // sorted

    friend bool operator==(const Pairing&, const Pairing&) = default;
    friend auto operator<=>(const Pairing& a, const Pairing& b) { return a.pairs_ <=> b.pairs_; }

    std::string to_string() const;  // e.g. "{{1,2},{3,4}}"

private:
    friend class PairingStructure;
    friend Pairing canonical_pairing_unchecked(std::vector<std::pair<Index, Index>>);
    std::vector<std::pair<Index, Index>> pairs_;
};

// Restriction of p to the sorted index set K: the sub-pairing on K if no pair
// of p crosses the boundary of K, otherwise nullopt.
std::optional<Pairing> split(const Pairing& p, const std::vector<Index>& K);

// A base/union/product tree denoting a subset S(T) of the perfect pairings of
// its index set. Nodes are immutable and shared; index set, |S(T)| and rsize
// are computed once at construction.
class PairingStructure {
public:
    enum class Kind { base, union_node, product };

    static PairingStructure base(Index i, Index j);
    // Children must have identical index sets. Disjointness of the two pairing
    // sets is NOT checked here (it can be exponential); see validate().
    static PairingStructure union_of(const PairingStructure& l, const PairingStructure& r);
    // Children must have disjoint index sets.
    static PairingStructure product(const PairingStructure& l, const PairingStructure& r);

    Kind kind() const;
    PairingStructure left() const;
    PairingStructure right() const;
    Index base_lo() const;
    Index base_hi() const;

    const std::vector<Index>& index_set() const;
    const BigCount& num_pairings() const;
    std::uint64_t rsize() const;

    bool structurally_equal(const PairingStructure& other) const;

    struct Node;
    const Node& node() const { return *node_; }

private:
    explicit PairingStructure(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

struct PairingStructure::Node {
    Kind kind = Kind::base;
    std::shared_ptr<const Node> left, right;
    Index lo = 0, hi = 0;            // base only
    std::vector<Index> index_set;    // sorted
    BigCount count;                  // |S(T)|
    std::uint64_t count_u64 = 0;     // valid iff count_fits
    bool count_fits = false;
    std::uint64_t rsize = 0;
    std::uint64_t mask = 0;          // bit (v-1) per index v; valid iff maskable
    bool maskable = false;           // all indices <= 64
};

inline PairingStructure::Kind PairingStructure::kind() const { return node_->kind; }
inline Index PairingStructure::base_lo() const { return node_->lo; }
inline Index PairingStructure::base_hi() const { return node_->hi; }
inline const std::vector<Index>& PairingStructure::index_set() const { return node_->index_set; }
inline const BigCount& PairingStructure::num_pairings() const { return node_->count; }
inline std::uint64_t PairingStructure::rsize() const { return node_->rsize; }

// Left-associative folds; the list must be nonempty.
PairingStructure union_all(const std::vector<PairingStructure>& parts);
PairingStructure product_all(const std::vector<PairingStructure>& parts);

// Structure whose pairing set is ALL perfect pairings of the given (sorted,
// even-sized) index set: smallest index paired with each partner in turn.
PairingStructure full_structure(const std::vector<Index>& indices);

// Structure representing exactly one pairing (product of bases).
PairingStructure singleton_structure(const Pairing& p);

// Uniform over S(T). Union branches are chosen by comparing an exactly-uniform
// integer below |S(T)| against |S(left)|, not by floating-point ratios.
Pairing sample(const PairingStructure& t, Rng& rng);

// p must pair exactly T's index set (otherwise InvariantError).
bool contains(const PairingStructure& t, const Pairing& p);

// Samples from src and tests membership in dst without materializing a
// canonical Pairing; the adaptive merge hot path.
bool probe_sample_contains(const PairingStructure& src, const PairingStructure& dst, Rng& rng);

// All of S(T) in canonical order. CapacityError if |S(T)| > cap.
std::vector<Pairing> enumerate_pairings(const PairingStructure& t, const BigCount& cap);

// |S(T) ∩ S(U)| by enumerating the smaller set and probing the other.
// Exponential in general. CapacityError if both sets exceed cap.
BigCount intersection_count(const PairingStructure& t, const PairingStructure& u, const BigCount& cap);

// All (n-1)!! pairings of {1..n} in canonical order; empty for odd n.
std::vector<Pairing> all_pairings(int n);

// X_T evaluated against sigma: base -> sigma(i,j), union -> sum,
// product -> product. O(rsize) arithmetic operations.
double eval_x(const PairingStructure& t, const Eigen::MatrixXd& sigma);

// S-expression text format: (base i j), (union S S), (prod S S).
PairingStructure parse_structure(std::string_view text);
std::string serialize_structure(const PairingStructure& t);

struct ValidationReport {
    bool ok = true;
    int unions_verified = 0;
    int unions_trusted = 0;  // disjointness not checkable under the cap
    std::vector<std::string> problems;
};

// Checks union disjointness wherever the smaller child has at most cap
// pairings; larger unions are reported as trusted.
ValidationReport validate(const PairingStructure& t, const BigCount& cap = 4096);

}  // namespace multiacc

#endif
