#ifndef MULTIACC_ERRORS_HPP
#define MULTIACC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace multiacc {

// Structural invariant violated (base with i == j, union index-set mismatch,
// overlapping product index sets, pairing that is not a perfect pairing, ...).
class InvariantError : public std::invalid_argument {
public:
    explicit InvariantError(const std::string& what) : std::invalid_argument(what) {}
};

// Input text could not be parsed. `position` is a 0-based byte offset.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at offset " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// A requested computation exceeds a configured enumeration/size cap.
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (singular matrix, non-positive-definite factorization,
// zero denominator).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace multiacc

#endif
