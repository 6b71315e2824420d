#ifndef MULTIACC_BIGCOUNT_HPP
#define MULTIACC_BIGCOUNT_HPP

#include <cstdint>
#include <string>

#include <gmpxx.h>

#include "multiacc/rng.hpp"

namespace multiacc {

// Exact pairing counts. |S(T)| grows like 3^(n/4) (and 7^k in the CNF
// reduction), so counts are arbitrary-precision integers.
using BigCount = mpz_class;

BigCount big_pow(std::uint64_t base, unsigned exp);
BigCount factorial(unsigned n);

// n!! = n (n-2) (n-4) ... ; 0!! = (-1)!! = 1.
BigCount double_factorial(long n);

BigCount binomial(unsigned n, unsigned k);

bool fits_u64(const BigCount& v);
std::uint64_t to_u64(const BigCount& v);  // precondition: fits_u64
double to_double(const BigCount& v);

// Correctly-rounded double for the exact rational num/den (den > 0).
double ratio_as_double(const BigCount& num, const BigCount& den);

// Natural log of v > 0 computed from the top 64 bits of the mantissa plus the
// exact bit shift, so the result carries ~64 bits of mantissa information even
// when v itself overflows double.
double big_log(const BigCount& v);

// Uniform integer in [0, bound), bound >= 1, driven by the caller's Rng via
// bit-level rejection sampling (exact, no floating point).
BigCount random_below(const BigCount& bound, Rng& rng);

}  // namespace multiacc

#endif
