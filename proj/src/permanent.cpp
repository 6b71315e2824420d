#include "multiacc/permanent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "multiacc/bigcount.hpp"
#include "multiacc/errors.hpp"
#include "multiacc/rng.hpp"
#include "multiacc/stats.hpp"

namespace multiacc {

namespace {

int square_dim(const Eigen::MatrixXd& a, const char* who) {
    if (a.rows() != a.cols()) throw InvariantError(std::string(who) + ": matrix must be square");
    if (a.rows() < 1) throw InvariantError(std::string(who) + ": matrix must be nonempty");
    return static_cast<int>(a.rows());
}

bool is_zero_one(const Eigen::MatrixXd& a) {
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0 && a(i, j) != 1.0) return false;
    return true;
}

// b = n! / ((2n-1)!! - [n even] ((n-1)!!)^2), the regression coefficient of
// the permanent onto E_ms; exact integer arithmetic avoids the cancellation
// in the denominator.
mpq_class ms_regression_coeff(int n) {
    BigCount den = double_factorial(2 * n - 1);
    if (n % 2 == 0) den -= double_factorial(n - 1) * double_factorial(n - 1);
    mpq_class b(factorial(static_cast<unsigned>(n)), den);
    b.canonicalize();
    return b;
}

mpq_class ms_mean(int n) {  // E[E_ms] = [n even] n! (n-1)!! / n^n
    if (n % 2 != 0) return 0;
    mpq_class mu(factorial(static_cast<unsigned>(n)) * double_factorial(n - 1),
                 big_pow(static_cast<std::uint64_t>(n), static_cast<unsigned>(n)));
    mu.canonicalize();
    return mu;
}

}  // namespace

double perm_naive(const Eigen::MatrixXd& a) {
    const int n = square_dim(a, "perm_naive");
    if (n > 10) throw CapacityError("perm_naive: n = " + std::to_string(n) + " exceeds bound 10");
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double total = 0.0;
    do {
        double term = 1.0;
        for (int i = 0; i < n; ++i) term *= a(i, perm[static_cast<std::size_t>(i)]);
        total += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

double perm_ryser(const Eigen::MatrixXd& a) {
    const int n = square_dim(a, "perm_ryser");
    if (n > 20) throw CapacityError("perm_ryser: n = " + std::to_string(n) + " exceeds bound 20");
    // Gray-code subset walk; row_sums tracks sum_{j in S} a(i, j).
    std::vector<double> row_sums(static_cast<std::size_t>(n), 0.0);
    double total = 0.0;
    std::uint64_t prev_gray = 0;
    const std::uint64_t limit = std::uint64_t{1} << n;
    for (std::uint64_t k = 1; k < limit; ++k) {
        const std::uint64_t gray = k ^ (k >> 1);
        const std::uint64_t changed = gray ^ prev_gray;
        const int col = std::countr_zero(changed);
        const double sign_col = (gray & changed) ? 1.0 : -1.0;
        for (int i = 0; i < n; ++i) row_sums[static_cast<std::size_t>(i)] += sign_col * a(i, col);
        prev_gray = gray;
        double prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= row_sums[static_cast<std::size_t>(i)];
        const int popcount = std::popcount(gray);
        total += (popcount % 2 == 0 ? 1.0 : -1.0) * prod;
    }
    return (n % 2 == 0 ? 1.0 : -1.0) * total;
}

double perm_bruteforce(const Eigen::MatrixXd& a) {
    const int n = square_dim(a, "perm_bruteforce");
    if (n > 20) throw CapacityError("perm_bruteforce: n = " + std::to_string(n) + " exceeds bound 20");
    const double by_ryser = perm_ryser(a);
    if (n <= 10) {
        const double by_naive = perm_naive(a);
        const double scale = std::max({std::fabs(by_naive), std::fabs(by_ryser), 1.0});
        if (std::fabs(by_naive - by_ryser) > 1e-9 * scale)
            throw NumericError("perm_bruteforce: oracles disagree (" + std::to_string(by_naive) + " vs " +
                               std::to_string(by_ryser) + ")");
        return by_naive;
    }
    return by_ryser;
}

double e_row(const Eigen::MatrixXd& a) {
    const int n = square_dim(a, "e_row");
    mpq_class coeff(factorial(static_cast<unsigned>(n)), big_pow(static_cast<std::uint64_t>(n), static_cast<unsigned>(n)));
    coeff.canonicalize();
    double prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= a.row(i).sum();
    return coeff.get_d() * prod;
}

double e_col(const Eigen::MatrixXd& a) {
    const int n = square_dim(a, "e_col");
    mpq_class coeff(factorial(static_cast<unsigned>(n)), big_pow(static_cast<std::uint64_t>(n), static_cast<unsigned>(n)));
    coeff.canonicalize();
    double prod = 1.0;
    for (int j = 0; j < n; ++j) prod *= a.col(j).sum();
    return coeff.get_d() * prod;
}

double e_ms(const Eigen::MatrixXd& a) {
    const int n = square_dim(a, "e_ms");
    mpq_class coeff(factorial(static_cast<unsigned>(n)), big_pow(static_cast<std::uint64_t>(n), 2 * static_cast<unsigned>(n)));
    coeff.canonicalize();
    return coeff.get_d() * std::pow(a.sum(), n);
}

double e_ms_prime(const Eigen::MatrixXd& a) {
    const int n = square_dim(a, "e_ms_prime");
    return ms_regression_coeff(n).get_d() * (e_ms(a) - ms_mean(n).get_d());
}

double e_row_col(const Eigen::MatrixXd& a) {
    const int n = square_dim(a, "e_row_col");
    const BigCount nn = big_pow(static_cast<std::uint64_t>(n), static_cast<unsigned>(n));
    mpq_class coeff(nn, nn + factorial(static_cast<unsigned>(n)));
    coeff.canonicalize();
    return coeff.get_d() * (e_row(a) + e_col(a));
}

double e_row_col_ms(const Eigen::MatrixXd& a) {
    const int n = square_dim(a, "e_row_col_ms");
    // The {1, E_row, E_col, E_ms} OLS merge:
    //   [ (1 - q b)(E_row + E_col) - (1 - q) E'_ms ] / [ 2(1 - q b) - (1 - q) ]
    // with q = n!/n^n and b the E_ms regression coefficient.
    mpq_class q(factorial(static_cast<unsigned>(n)), big_pow(static_cast<std::uint64_t>(n), static_cast<unsigned>(n)));
    q.canonicalize();
    const mpq_class b = ms_regression_coeff(n);
    const mpq_class one_minus_qb = 1 - q * b;
    const mpq_class one_minus_q = 1 - q;
    const mpq_class denom = 2 * one_minus_qb - one_minus_q;
    return (one_minus_qb.get_d() * (e_row(a) + e_col(a)) - one_minus_q.get_d() * e_ms_prime(a)) /
           denom.get_d();
}

double e_us(const Eigen::MatrixXd& a) {
    const int n = square_dim(a, "e_us");
    const unsigned cells = static_cast<unsigned>(n) * static_cast<unsigned>(n);
    mpq_class coeff(factorial(static_cast<unsigned>(n)), binomial(cells, static_cast<unsigned>(n)));
    coeff.canonicalize();
    if (is_zero_one(a)) {
        // Each size-n subset contributes iff all its entries are ones.
        unsigned ones = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (a(i, j) == 1.0) ++ones;
        mpq_class value = coeff * binomial(ones, static_cast<unsigned>(n));
        value.canonicalize();
        return value.get_d();
    }
    if (n > 4)
        throw CapacityError("e_us: general matrices supported only up to n = 4 (C(n^2,n) subsets)");
    // Enumerate all C(n^2, n) position subsets.
    std::vector<int> comb(static_cast<std::size_t>(n));
    std::iota(comb.begin(), comb.end(), 0);
    const int m = static_cast<int>(cells);
    double sum = 0.0;
    for (;;) {
        double prod = 1.0;
        for (int v : comb) prod *= a(v / n, v % n);
        sum += prod;
        int k = n - 1;
        while (k >= 0 && comb[static_cast<std::size_t>(k)] == m - n + k) --k;
        if (k < 0) break;
        ++comb[static_cast<std::size_t>(k)];
        for (int t = k + 1; t < n; ++t) comb[static_cast<std::size_t>(t)] = comb[static_cast<std::size_t>(t - 1)] + 1;
    }
    return coeff.get_d() * sum;
}

double multiplicative(const Eigen::MatrixXd& a, MultiplicativeDenominator denom) {
    const double d = denom == MultiplicativeDenominator::ms ? e_ms(a) : e_us(a);
    if (d == 0.0) throw NumericError("multiplicative: denominator estimate is zero");
    return e_row(a) * e_col(a) / d;
}

// ---------------------------------------------------------------------------
// R/C/S/U moments

RcsuMoments rcsu_exact(const Eigen::MatrixXd& a) {
    const int n = square_dim(a, "rcsu_exact");
    if (!is_zero_one(a)) throw InvariantError("rcsu_exact: matrix must be 0-1");
    if (a.sum() == 0.0) throw InvariantError("rcsu_exact: matrix must not be all zero");
    const double tuples_d = std::pow(static_cast<double>(n), 2.0 * n);
    if (tuples_d > 1e7)
        throw CapacityError("rcsu_exact: n^(2n) = " + std::to_string(tuples_d) + " exceeds 10^7");
    const std::uint64_t cells = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
    std::uint64_t tuples = 1;
    for (int k = 0; k < n; ++k) tuples *= cells;

    if (cells > 64) throw CapacityError("rcsu_exact: n too large for the cell bitmask");
    std::uint64_t sum_s = 0, sum_r = 0, sum_c = 0, sum_rc = 0, sum_u = 0;
    std::vector<int> pos(static_cast<std::size_t>(n), 0);  // odometer over [n^2]^n
    for (;;) {
        bool s_val = true;
        bool rows_distinct = true, cols_distinct = true, cells_distinct = true;
        std::uint32_t rows_seen = 0, cols_seen = 0;
        std::uint64_t cells_seen = 0;
        for (int k = 0; k < n; ++k) {
            const int p = pos[static_cast<std::size_t>(k)];
            const int i = p / n, j = p % n;
            if (a(i, j) == 0.0) s_val = false;
            if (rows_seen & (1u << i)) rows_distinct = false;
            if (cols_seen & (1u << j)) cols_distinct = false;
            if (cells_seen & (std::uint64_t{1} << p)) cells_distinct = false;
            rows_seen |= 1u << i;
            cols_seen |= 1u << j;
            cells_seen |= std::uint64_t{1} << p;
        }
        if (s_val) {
            ++sum_s;
            if (rows_distinct) ++sum_r;
            if (cols_distinct) ++sum_c;
            if (rows_distinct && cols_distinct) ++sum_rc;
            if (cells_distinct) ++sum_u;
        }
        int k = n - 1;
        while (k >= 0 && pos[static_cast<std::size_t>(k)] == static_cast<int>(cells) - 1) {
            pos[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
        ++pos[static_cast<std::size_t>(k)];
    }

    RcsuMoments out;
    const double t = static_cast<double>(tuples);
    out.e_s = static_cast<double>(sum_s) / t;
    out.e_r = static_cast<double>(sum_r) / t;
    out.e_c = static_cast<double>(sum_c) / t;
    out.e_rc = static_cast<double>(sum_rc) / t;
    out.e_u = static_cast<double>(sum_u) / t;
    out.degenerate_var_s = (sum_s == 0 || sum_s == tuples);
    return out;
}

RcsuMoments rcsu_monte_carlo(const Eigen::MatrixXd& a, std::uint64_t samples, std::uint64_t seed,
                             int threads) {
    const int n = square_dim(a, "rcsu_monte_carlo");
    if (!is_zero_one(a)) throw InvariantError("rcsu_monte_carlo: matrix must be 0-1");
    if (a.sum() == 0.0) throw InvariantError("rcsu_monte_carlo: matrix must not be all zero");
    const std::uint64_t cells = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);

    struct TupleValues {
        double s, r, c, rc, u;
    };
    auto draw_tuple = [&](Rng& rng) {
        double s_val = 1.0;
        std::uint32_t rows_seen = 0, cols_seen = 0;
        std::uint64_t cells_seen = 0;
        bool rows_distinct = true, cols_distinct = true, cells_distinct = true;
        for (int k = 0; k < n; ++k) {
            const int p = static_cast<int>(rng.below(cells));
            const int i = p / n, j = p % n;
            s_val *= a(i, j);
            if (rows_seen & (1u << i)) rows_distinct = false;
            if (cols_seen & (1u << j)) cols_distinct = false;
            if (p < 64) {
                if (cells_seen & (std::uint64_t{1} << p)) cells_distinct = false;
                cells_seen |= std::uint64_t{1} << p;
            }
            rows_seen |= 1u << i;
            cols_seen |= 1u << j;
        }
        TupleValues v;
        v.s = s_val;
        v.r = rows_distinct ? s_val : 0.0;
        v.c = cols_distinct ? s_val : 0.0;
        v.rc = (rows_distinct && cols_distinct) ? s_val : 0.0;
        v.u = cells_distinct ? s_val : 0.0;
        return v;
    };
    if (cells > 64) throw CapacityError("rcsu_monte_carlo: n too large for the cell bitmask");

    // Five passes over the same seeded stream keep the moment estimates
    // mutually consistent.
    const McSummary s = mc_run(samples, seed, threads, [&](Rng& r) { return draw_tuple(r).s; });
    const McSummary rr = mc_run(samples, seed, threads, [&](Rng& r) { return draw_tuple(r).r; });
    const McSummary cc = mc_run(samples, seed, threads, [&](Rng& r) { return draw_tuple(r).c; });
    const McSummary rc = mc_run(samples, seed, threads, [&](Rng& r) { return draw_tuple(r).rc; });
    const McSummary u = mc_run(samples, seed, threads, [&](Rng& r) { return draw_tuple(r).u; });

    RcsuMoments out;
    out.e_s = s.mean;
    out.se_s = s.std_error;
    out.e_r = rr.mean;
    out.se_r = rr.std_error;
    out.e_c = cc.mean;
    out.se_c = cc.std_error;
    out.e_rc = rc.mean;
    out.se_rc = rc.std_error;
    out.e_u = u.mean;
    out.se_u = u.std_error;
    out.degenerate_var_s = (s.mean == 0.0 || s.mean == 1.0);
    return out;
}

Eigen::MatrixXd sample_matrix(int n, Rng& rng) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    return a;
}

// ---------------------------------------------------------------------------
// Closed-form moments over the N(0,1) entry distribution

ExactMoments perm_exact_moments(int n) {
    if (n < 1) throw InvariantError("perm_exact_moments: n must be >= 1");
    const unsigned un = static_cast<unsigned>(n);
    const BigCount fact = factorial(un);
    const BigCount nn = big_pow(static_cast<std::uint64_t>(n), un);
    const BigCount n2n = big_pow(static_cast<std::uint64_t>(n), 2 * un);

    auto q = [](const BigCount& num, const BigCount& den) {
        mpq_class v(num, den);
        v.canonicalize();
        return v.get_d();
    };

    ExactMoments m;
    m.set("1", "1", 1.0);
    m.set("E_row", "1", 0.0);
    m.set("E_col", "1", 0.0);
    m.set("E_ms", "1", ms_mean(n).get_d());
    m.set("perm", "1", 0.0);
    m.set("E_row", "E_row", q(fact * fact, nn));
    m.set("E_col", "E_col", q(fact * fact, nn));
    m.set("E_row", "E_col", q(fact * fact * fact, n2n));
    m.set("E_row", "E_ms", q(fact * fact * fact, n2n));
    m.set("E_col", "E_ms", q(fact * fact * fact, n2n));
    m.set("E_ms", "E_ms", q(fact * fact * double_factorial(2 * n - 1), n2n));
    m.set("perm", "E_row", q(fact * fact, nn));
    m.set("perm", "E_col", q(fact * fact, nn));
    m.set("perm", "E_ms", q(fact * fact * fact, n2n));
    m.set("perm", "perm", to_double(fact));
    return m;
}

Predictor<Eigen::MatrixXd> permanent_predictor(const std::string& name) {
    using M = Eigen::MatrixXd;
    if (name == "1") return constant_one<M>();
    if (name == "E_row") return {name, [](const M& a) { return e_row(a); }};
    if (name == "E_col") return {name, [](const M& a) { return e_col(a); }};
    if (name == "E_ms") return {name, [](const M& a) { return e_ms(a); }};
    if (name == "E_ms_prime") return {name, [](const M& a) { return e_ms_prime(a); }};
    if (name == "E_row_col") return {name, [](const M& a) { return e_row_col(a); }};
    if (name == "E_row_col_ms") return {name, [](const M& a) { return e_row_col_ms(a); }};
    if (name == "E_us") return {name, [](const M& a) { return e_us(a); }};
    if (name == "multiplicative") return {name, [](const M& a) { return multiplicative(a); }};
    if (name == "perm") return {name, [](const M& a) { return perm_bruteforce(a); }};
    throw InvariantError("permanent_predictor: unknown predictor '" + name + "'");
}

}  // namespace multiacc
