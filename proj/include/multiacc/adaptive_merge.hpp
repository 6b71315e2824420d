#ifndef MULTIACC_ADAPTIVE_MERGE_HPP
#define MULTIACC_ADAPTIVE_MERGE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <eigen3/Eigen/Dense>

#include "multiacc/accuracy.hpp"
#include "multiacc/bigcount.hpp"
#include "multiacc/pairing.hpp"

namespace multiacc {

struct MergeConfig {
    double delta = 0.1;
    double eps = 0.1;
    // Guard on the total number of sample-contains probes. The sampling loop
    // cannot terminate when the true correlation matrix is singular (e.g.
    // duplicated structures), so the guard converts divergence into an error.
    std::uint64_t max_samples = 100'000'000;
};

struct MergeResult {
    std::vector<double> beta;            // regression coefficients, sorted order
    std::uint64_t samples = 0;           // rounds s at termination
    Eigen::MatrixXd c_hat;               // estimated correlation matrix
    double sigma_hat_m = 0.0;            // smallest singular value of c_hat
    std::vector<int> ordering;           // sorted[i] = input[ordering[i]]
    std::uint64_t probes = 0;            // sample-contains probes spent
    MergeConfig config;
    std::vector<PairingStructure> structures;  // sorted by |S| descending

    // x -> beta^T (X_T1(x), ..., X_Tm(x)) as a linear estimator over the
    // predictors X_Ti; names carry the original input positions.
    LinearEstimator<Eigen::MatrixXd> estimator() const;
};

class BudgetExceededError : public CapacityError {
public:
    BudgetExceededError(const std::string& what, MergeResult partial_state)
        : CapacityError(what), partial(std::move(partial_state)) {}
    MergeResult partial;
};

// The adaptive sampling merge: estimates the correlation matrix of
// X_T1..X_Tm by sampling pairings, runs until sigma_hat_m > 0 and
// s >= 80 m^2 (m^2 + 3 ln(2/delta)) / (eps^2 sigma_hat_m^4), then returns
// beta = D^-1 C_hat^-1 d with d = (sqrt|S_1|, ..., sqrt|S_m|).
// Structures are sorted by |S| descending first (ties keep input order).
// Probe randomness is derived from (seed, round, i, j), so results are
// reproducible for a fixed seed.
MergeResult merge_estimator(const std::vector<PairingStructure>& structures, const MergeConfig& config,
                            std::uint64_t seed);

// Evaluates the (eps, X)-accuracy bound for every X in {1, X_T1..X_Tm, f}
// using exact moments (E[X_i X_j] = |S_i ∩ S_j|, E[Y X_i] = |S_i|,
// E[Y^2] = (n-1)!!). No sampling; requires every |S_i| <= cap.
// `structures` is the same list that was passed to merge_estimator.
std::vector<AccuracyReport> verify_merge_exact(const MergeResult& result,
                                               const std::vector<PairingStructure>& structures,
                                               const BigCount& cap);

// The stopping-rule floor 80 m^2 (m^2 + 3 ln(2/delta)) / eps^2 (sigma_hat <= 1
// always, so no run can stop earlier than this many rounds).
double stopping_rule_floor(int m, double delta, double eps);

}  // namespace multiacc

#endif
