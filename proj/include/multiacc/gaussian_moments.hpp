#ifndef MULTIACC_GAUSSIAN_MOMENTS_HPP
#define MULTIACC_GAUSSIAN_MOMENTS_HPP

#include <cstdint>

#include <eigen3/Eigen/Dense>

#include "multiacc/bigcount.hpp"
#include "multiacc/pairing.hpp"
#include "multiacc/rng.hpp"
#include "multiacc/stats.hpp"

namespace multiacc {

// E[Z_1...Z_n] for Z ~ N(0, Sigma): sum over all pairings of products of the
// paired entries. Enumeration oracle; n <= 14 (135135 terms).
double haf_enumeration(const Eigen::MatrixXd& sigma);

// Second, independent oracle: expand on index 1, haf(S) = sum_j S(1,j) *
// haf(S with rows/cols 1 and j removed).
double haf_recursive(const Eigen::MatrixXd& sigma);

// Runs both oracles and checks that they agree to 1e-9 relative tolerance
// (NumericError otherwise); returns the enumeration value. Odd n gives 0.
double haf_bruteforce(const Eigen::MatrixXd& sigma);

// Covariance matrix distribution: off-diagonal entries i.i.d. N(0,1)
// (mirrored); diagonal entry i is 1 + sum_j |Sigma_ij|, so the matrix is
// strictly diagonally dominant, hence positive definite. The diagonal does
// not affect the hafnian.
Eigen::MatrixXd sample_sigma(int n, Rng& rng);

// Sample mean and standard error of prod_i Z_i over `samples` draws
// Z ~ N(0, Sigma). Sigma must be positive definite (NumericError otherwise).
McSummary mc_product_moment(const Eigen::MatrixXd& sigma, std::uint64_t samples, std::uint64_t seed,
                            int threads = 1);

// Exact E[X_T X_U] over the covariance distribution: |S(T) ∩ S(U)|. With U the
// full structure this is E[X_T * haf] = |S(T)|.
BigCount exact_moment_xs(const PairingStructure& t, const PairingStructure& u, const BigCount& cap);

}  // namespace multiacc

#endif
