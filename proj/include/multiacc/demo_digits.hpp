#ifndef MULTIACC_DEMO_DIGITS_HPP
#define MULTIACC_DEMO_DIGITS_HPP

#include <cstdint>
#include <vector>

namespace multiacc {

// floor(sqrt(v)) computed purely in integer arithmetic.
std::uint64_t isqrt_u64(std::uint64_t v);

// k-th decimal digit of sqrt(n) past the point: floor(sqrt(n * 10^(2k))) mod 10.
int sqrt_digit(std::uint64_t n, int k);

// The running-estimate demo: digits d6(sqrt(n)) for n = 101..120, and the
// estimate sequence e_k = (sum of the first k digits) + (20 - k) * 4.5 as the
// digits are revealed one by one.
struct DigitDemo {
    std::vector<int> digits;       // 20 entries
    std::vector<double> estimates; // 21 entries, e_0 .. e_20
};

DigitDemo demo_digits();

}  // namespace multiacc

#endif
