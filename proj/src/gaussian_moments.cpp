#include "multiacc/gaussian_moments.hpp"

#include <cmath>
#include <string>

#include <eigen3/Eigen/Cholesky>

#include "multiacc/errors.hpp"

namespace multiacc {

namespace {

constexpr int kHafEnumerationBound = 14;

double haf_rec_impl(const Eigen::MatrixXd& s) {
    const int n = static_cast<int>(s.rows());
    if (n == 0) return 1.0;
    if (n == 2) return s(0, 1);
    double total = 0.0;
    for (int j = 1; j < n; ++j) {
        if (s(0, j) == 0.0) continue;
        Eigen::MatrixXd minor(n - 2, n - 2);
        int rr = 0;
        for (int r = 1; r < n; ++r) {
            if (r == j) continue;
            int cc = 0;
            for (int c = 1; c < n; ++c) {
                if (c == j) continue;
                minor(rr, cc) = s(r, c);
                ++cc;
            }
            ++rr;
        }
        total += s(0, j) * haf_rec_impl(minor);
    }
    return total;
}

void check_square(const Eigen::MatrixXd& s, const char* who) {
    if (s.rows() != s.cols()) throw InvariantError(std::string(who) + ": matrix must be square");
}

}  // namespace

double haf_enumeration(const Eigen::MatrixXd& sigma) {
    check_square(sigma, "haf_enumeration");
    const int n = static_cast<int>(sigma.rows());
    if (n % 2 != 0) return 0.0;
    if (n > kHafEnumerationBound)
        throw CapacityError("haf_enumeration: n = " + std::to_string(n) + " exceeds bound " +
                            std::to_string(kHafEnumerationBound));
    double total = 0.0;
    for (const Pairing& p : all_pairings(n)) {
        double term = 1.0;
        for (const auto& [lo, hi] : p.pairs()) term *= sigma(lo - 1, hi - 1);
        total += term;
    }
    return total;
}

double haf_recursive(const Eigen::MatrixXd& sigma) {
    check_square(sigma, "haf_recursive");
    const int n = static_cast<int>(sigma.rows());
    if (n % 2 != 0) return 0.0;
    if (n > kHafEnumerationBound)
        throw CapacityError("haf_recursive: n = " + std::to_string(n) + " exceeds bound " +
                            std::to_string(kHafEnumerationBound));
    return haf_rec_impl(sigma);
}

double haf_bruteforce(const Eigen::MatrixXd& sigma) {
    const double by_enum = haf_enumeration(sigma);
    const double by_rec = haf_recursive(sigma);
    const double scale = std::max({std::fabs(by_enum), std::fabs(by_rec), 1.0});
    if (std::fabs(by_enum - by_rec) > 1e-9 * scale)
        throw NumericError("haf_bruteforce: oracles disagree (" + std::to_string(by_enum) + " vs " +
                           std::to_string(by_rec) + ")");
    return by_enum;
}

Eigen::MatrixXd sample_sigma(int n, Rng& rng) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = rng.normal();
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    for (int i = 0; i < n; ++i) {
        double row_abs = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) row_abs += std::fabs(s(i, j));
        s(i, i) = 1.0 + row_abs;
    }
    return s;
}

McSummary mc_product_moment(const Eigen::MatrixXd& sigma, std::uint64_t samples, std::uint64_t seed,
                            int threads) {
    check_square(sigma, "mc_product_moment");
    const int n = static_cast<int>(sigma.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw NumericError("mc_product_moment: covariance matrix is not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();
    return mc_run(samples, seed, threads, [n, &chol](Rng& rng) {
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) g(i) = rng.normal();
        const Eigen::VectorXd z = chol * g;
        double prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= z(i);
        return prod;
    });
}

BigCount exact_moment_xs(const PairingStructure& t, const PairingStructure& u, const BigCount& cap) {
    return intersection_count(t, u, cap);
}

}  // namespace multiacc
