#include "multiacc/bigcount.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace multiacc {

BigCount big_pow(std::uint64_t base, unsigned exp) {
    BigCount b;
    mpz_import(b.get_mpz_t(), 1, 1, sizeof(base), 0, 0, &base);
    BigCount out;
    mpz_pow_ui(out.get_mpz_t(), b.get_mpz_t(), exp);
    return out;
}

BigCount factorial(unsigned n) {
    BigCount out;
    mpz_fac_ui(out.get_mpz_t(), n);
    return out;
}

BigCount double_factorial(long n) {
    if (n <= 0) return 1;
    BigCount out;
    mpz_2fac_ui(out.get_mpz_t(), static_cast<unsigned long>(n));
    return out;
}

BigCount binomial(unsigned n, unsigned k) {
    BigCount out;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return out;
}

bool fits_u64(const BigCount& v) {
    return mpz_sgn(v.get_mpz_t()) >= 0 && mpz_sizeinbase(v.get_mpz_t(), 2) <= 64;
}

std::uint64_t to_u64(const BigCount& v) {
    std::uint64_t out = 0;
    mpz_export(&out, nullptr, 1, sizeof(out), 0, 0, v.get_mpz_t());
    return out;
}

double to_double(const BigCount& v) { return mpz_get_d(v.get_mpz_t()); }

double ratio_as_double(const BigCount& num, const BigCount& den) {
    mpq_class q(num, den);
    q.canonicalize();
    return q.get_d();
}

double big_log(const BigCount& v) {
    if (mpz_sgn(v.get_mpz_t()) <= 0) throw std::domain_error("big_log: nonpositive argument");
    // Work from the top 64 bits in long double so the log carries more
    // mantissa than a straight double conversion would.
    constexpr long double kLn2 = 0.693147180559945309417232121458176568L;
    const std::size_t bits = mpz_sizeinbase(v.get_mpz_t(), 2);
    if (bits <= 64) return static_cast<double>(std::log(static_cast<long double>(to_u64(v))));
    const unsigned long shift = static_cast<unsigned long>(bits - 64);
    BigCount top = v >> shift;
    const long double mant = static_cast<long double>(to_u64(top));
    return static_cast<double>(std::log(mant) + static_cast<long double>(shift) * kLn2);
}

BigCount random_below(const BigCount& bound, Rng& rng) {
    if (mpz_sgn(bound.get_mpz_t()) <= 0) throw std::domain_error("random_below: bound must be >= 1");
    if (fits_u64(bound)) {
        const std::uint64_t b = to_u64(bound);
        if (b == 1) return 0;
        std::uint64_t r = rng.below(b);
        BigCount out;
        mpz_import(out.get_mpz_t(), 1, 1, sizeof(r), 0, 0, &r);
        return out;
    }
    const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
    const std::size_t words = (bits + 63) / 64;
    const unsigned top_shift = static_cast<unsigned>(words * 64 - bits);
    std::vector<std::uint64_t> buf(words);
    for (;;) {
        for (auto& w : buf) w = rng();
        buf[0] >>= top_shift;  // keep exactly `bits` random bits
        BigCount candidate;
        mpz_import(candidate.get_mpz_t(), words, 1, sizeof(std::uint64_t), 0, 0, buf.data());
        if (candidate < bound) return candidate;
    }
}

}  // namespace multiacc
