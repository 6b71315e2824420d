#ifndef MULTIACC_PERMANENT_HPP
#define MULTIACC_PERMANENT_HPP

#include <cstdint>

#include <eigen3/Eigen/Dense>

#include "multiacc/accuracy.hpp"
#include "multiacc/rng.hpp"

namespace multiacc {

// perm(A) = sum over permutations of prod_i A(i, sigma(i)). Permutation
// enumeration up to n = 10; Ryser's inclusion-exclusion up to n = 20.
double perm_naive(const Eigen::MatrixXd& a);
double perm_ryser(const Eigen::MatrixXd& a);

// Cross-checks the two oracles (1e-9 relative) where both apply and returns
// the result. CapacityError past n = 20.
double perm_bruteforce(const Eigen::MatrixXd& a);

// The closed-form estimates derived from presumptions of independence.
double e_row(const Eigen::MatrixXd& a);  // (n!/n^n) prod_i (row sum)
double e_col(const Eigen::MatrixXd& a);
double e_ms(const Eigen::MatrixXd& a);   // (n!/n^2n) (total sum)^n

// OLS merge of {1, E_ms}: b (E_ms - E[E_ms]) with b and the offset computed
// in exact integer arithmetic.
double e_ms_prime(const Eigen::MatrixXd& a);

// n^n/(n^n + n!) (E_row + E_col); the {1, E_row, E_col} merge.
double e_row_col(const Eigen::MatrixXd& a);

// The {1, E_row, E_col, E_ms} merge.
double e_row_col_ms(const Eigen::MatrixXd& a);

// Unique sum estimate: (n!/C(n^2,n)) sum over n-entry position subsets of the
// product. Closed form for 0-1 matrices; subset enumeration up to n = 4
// otherwise (CapacityError past that).
double e_us(const Eigen::MatrixXd& a);

enum class MultiplicativeDenominator { ms, us };

// E_row E_col / E_ms (or / E_us). Nonnegative whenever the entries are and
// the denominator is nonzero; NumericError on a zero denominator.
double multiplicative(const Eigen::MatrixXd& a, MultiplicativeDenominator denom = MultiplicativeDenominator::ms);

// Moments of S, R, C, U over uniform index tuples (I_1,J_1)..(I_n,J_n):
// S = prod A(I_k,J_k), R = S * [rows distinct], C = S * [cols distinct],
// U = S * [cells distinct]. For 0-1 matrices these tie the estimators to the
// permanent: E[S] = E_ms/n!, E[R] = E_row/n^n, E[C] = E_col/n^n,
// E[RC] = (n!/n^2n) perm(A).
struct RcsuMoments {
    double e_s = 0, e_r = 0, e_c = 0, e_rc = 0, e_u = 0;
    double se_s = 0, se_r = 0, se_c = 0, se_rc = 0, se_u = 0;  // 0 in exact mode
    bool degenerate_var_s = false;  // Var(S) = 0, regression substitution undefined
};

// Full tuple enumeration; requires n^(2n) <= 10^7 and a 0-1 matrix.
RcsuMoments rcsu_exact(const Eigen::MatrixXd& a);
RcsuMoments rcsu_monte_carlo(const Eigen::MatrixXd& a, std::uint64_t samples, std::uint64_t seed,
                             int threads = 1);

// Entries i.i.d. N(0,1): the matrix distribution the accuracy claims above
// are stated over.
Eigen::MatrixXd sample_matrix(int n, Rng& rng);

// Closed-form moment table over the i.i.d. N(0,1) matrix distribution for the
// predictor names "1", "E_row", "E_col", "E_ms" and the target "perm".
ExactMoments perm_exact_moments(int n);

// Named predictor for the permanent family: "1", "E_row", "E_col", "E_ms",
// "E_ms_prime", "E_row_col", "E_row_col_ms", "E_us", "multiplicative", or the
// target "perm". InvariantError for unknown names.
Predictor<Eigen::MatrixXd> permanent_predictor(const std::string& name);

}  // namespace multiacc

#endif
