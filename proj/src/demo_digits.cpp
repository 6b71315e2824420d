#include "multiacc/demo_digits.hpp"

#include <cmath>
#include <stdexcept>

namespace multiacc {

std::uint64_t isqrt_u64(std::uint64_t v) {
    if (v == 0) return 0;
    std::uint64_t r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(v)));
    // Fix up the floating-point guess; at most a couple of steps.
    while (r > 0 && r > v / r) --r;
    while ((r + 1) <= v / (r + 1)) ++r;
    return r;
}

int sqrt_digit(std::uint64_t n, int k) {
    if (k < 1 || k > 9) throw std::out_of_range("sqrt_digit: k must be in [1, 9]");
    std::uint64_t scale = 1;
    for (int i = 0; i < k; ++i) scale *= 100;  // 10^(2k)
    if (n > ~std::uint64_t{0} / scale) throw std::overflow_error("sqrt_digit: n too large");
    return static_cast<int>(isqrt_u64(n * scale) % 10);
}

DigitDemo demo_digits() {
    DigitDemo out;
    out.digits.reserve(20);
    for (std::uint64_t n = 101; n <= 120; ++n) out.digits.push_back(sqrt_digit(n, 6));
    out.estimates.reserve(21);
    double prefix = 0.0;
    for (int k = 0; k <= 20; ++k) {
        if (k > 0) prefix += out.digits[static_cast<std::size_t>(k - 1)];
        out.estimates.push_back(prefix + (20 - k) * 4.5);
    }
    return out;
}

}  // namespace multiacc
