#include "multiacc/adaptive_merge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "multiacc/gaussian_moments.hpp"
#include "multiacc/log.hpp"

namespace multiacc {

namespace {

double smallest_singular_value_sym(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    return eig.eigenvalues().cwiseAbs().minCoeff();
}

std::string estimator_term_name(int original_position) {
    return "X_T" + std::to_string(original_position + 1);
}

}  // namespace

double stopping_rule_floor(int m, double delta, double eps) {
    const double md = static_cast<double>(m);
    return 80.0 * md * md * (md * md + 3.0 * std::log(2.0 / delta)) / (eps * eps);
}

LinearEstimator<Eigen::MatrixXd> MergeResult::estimator() const {
    LinearEstimator<Eigen::MatrixXd> f;
    for (std::size_t i = 0; i < structures.size(); ++i) {
        const PairingStructure t = structures[i];
        Predictor<Eigen::MatrixXd> p{estimator_term_name(ordering[i]),
                                     [t](const Eigen::MatrixXd& sigma) { return eval_x(t, sigma); }};
        f.terms.emplace_back(std::move(p), beta[i]);
    }
    return f;
}

MergeResult merge_estimator(const std::vector<PairingStructure>& structures, const MergeConfig& config,
                            std::uint64_t seed) {
    const int m = static_cast<int>(structures.size());
    if (m < 1) throw InvariantError("merge_estimator: need at least one structure");
    for (int i = 1; i < m; ++i) {
        if (structures[static_cast<std::size_t>(i)].index_set() != structures[0].index_set())
            throw InvariantError("merge_estimator: structures must share an index set");
    }
    if (config.delta <= 0.0 || config.delta >= 1.0 || config.eps <= 0.0 || config.eps >= 1.0)
        throw InvariantError("merge_estimator: delta and eps must lie in (0,1)");
    if (config.eps > 0.4)
        log_info("merge_estimator: eps = %g above 2/5; the accuracy guarantee is proved for eps <= 2/5",
                 config.eps);

    MergeResult result;
    result.config = config;
    result.ordering.resize(static_cast<std::size_t>(m));
    std::iota(result.ordering.begin(), result.ordering.end(), 0);
    std::stable_sort(result.ordering.begin(), result.ordering.end(), [&](int a, int b) {
        return structures[static_cast<std::size_t>(a)].num_pairings() >
               structures[static_cast<std::size_t>(b)].num_pairings();
    });
    result.structures.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        result.structures.push_back(structures[static_cast<std::size_t>(result.ordering[static_cast<std::size_t>(i)])]);

    // sqrt(|S_j| / |S_i|) for i < j, from exact big-integer logs. Sorted
    // descending, so every ratio is <= 1.
    std::vector<double> half_log(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) half_log[static_cast<std::size_t>(i)] = 0.5 * big_log(result.structures[static_cast<std::size_t>(i)].num_pairings());
    Eigen::MatrixXd ratio(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            ratio(i, j) = std::exp(half_log[static_cast<std::size_t>(j)] - half_log[static_cast<std::size_t>(i)]);

    Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> hits =
        Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(m, m);

    const std::uint64_t probes_per_round = static_cast<std::uint64_t>(m) * (static_cast<std::uint64_t>(m) - 1) / 2;

    auto build_c_hat = [&](std::uint64_t s) {
        Eigen::MatrixXd c = Eigen::MatrixXd::Identity(m, m);
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) {
                // Symmetrized estimate: (M_ij / s) sqrt(|S_j|/|S_i|) for
                // i < j, mirrored onto the lower triangle.
                const double v = static_cast<double>(hits(i, j)) / static_cast<double>(s) * ratio(i, j);
                c(i, j) = v;
                c(j, i) = v;
            }
        }
        return c;
    };

    std::uint64_t s = 0;
    std::uint64_t probes = 0;
    std::uint64_t next_eval = 1;
    Eigen::MatrixXd c_hat;
    double sigma_hat = 0.0;

    for (;;) {
        if (probes_per_round > 0 && probes + probes_per_round > config.max_samples) {
            result.samples = s;
            result.probes = probes;
            result.c_hat = s > 0 ? build_c_hat(s) : Eigen::MatrixXd::Identity(m, m);
            result.sigma_hat_m = s > 0 ? smallest_singular_value_sym(result.c_hat) : 0.0;
            throw BudgetExceededError(
                "merge_estimator: probe budget " + std::to_string(config.max_samples) +
                    " exhausted after " + std::to_string(s) + " rounds (sigma_hat_m = " +
                    std::to_string(result.sigma_hat_m) + ")",
                result);
        }
        ++s;
        for (int i = 0; i < m; ++i) {
            hits(i, i) += 1;
            for (int j = i + 1; j < m; ++j) {
                Rng probe_rng(mix_seed(seed, s, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)));
                ++probes;
                if (probe_sample_contains(result.structures[static_cast<std::size_t>(j)],
                                          result.structures[static_cast<std::size_t>(i)], probe_rng)) {
                    hits(i, j) += 1;
                    hits(j, i) += 1;
                }
            }
        }

        if (s < next_eval) continue;
        // Re-estimating sigma_hat costs an eigendecomposition; past 10^4
        // rounds it is amortized to every ceil(s/100) rounds.
        next_eval = s < 10'000 ? s + 1 : s + (s + 99) / 100;

        c_hat = build_c_hat(s);
        sigma_hat = smallest_singular_value_sym(c_hat);
        if (sigma_hat <= 0.0) continue;
        const double required = stopping_rule_floor(m, config.delta, config.eps) /
                                (sigma_hat * sigma_hat * sigma_hat * sigma_hat);
        log_debug("merge round %llu: sigma_hat=%g required=%g", static_cast<unsigned long long>(s),
                  sigma_hat, required);
        if (static_cast<double>(s) >= required) break;
    }

    result.samples = s;
    result.probes = probes;
    result.c_hat = c_hat;
    result.sigma_hat_m = sigma_hat;

    // beta = D^-1 C_hat^-1 d with D = diag(sqrt|S_i|) and d = diag(D), folded
    // as beta_i = sum_j (C^-1)_ij sqrt(|S_j|/|S_i|) so that only the
    // overflow-safe ratios appear.
    Eigen::MatrixXd c_inv = c_hat.partialPivLu().inverse();
    if (!c_inv.allFinite()) throw NumericError("merge_estimator: c_hat inversion failed");
    result.beta.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += c_inv(i, j) * ratio(i, j);
        result.beta[static_cast<std::size_t>(i)] = acc;
    }
    return result;
}

std::vector<AccuracyReport> verify_merge_exact(const MergeResult& result,
                                               const std::vector<PairingStructure>& structures,
                                               const BigCount& cap) {
    const int m = static_cast<int>(result.structures.size());
    if (structures.size() != result.structures.size())
        throw InvariantError("verify_merge_exact: structure list does not match the merge result");
    std::vector<PairingStructure> sorted;
    sorted.reserve(structures.size());
    for (int i = 0; i < m; ++i)
        sorted.push_back(structures[static_cast<std::size_t>(result.ordering[static_cast<std::size_t>(i)])]);

    const int n = static_cast<int>(sorted[0].index_set().size());

    using Sample = Eigen::MatrixXd;
    ExactMoments moments;
    std::vector<Predictor<Sample>> preds;
    preds.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const PairingStructure t = sorted[static_cast<std::size_t>(i)];
        preds.push_back(Predictor<Sample>{estimator_term_name(result.ordering[static_cast<std::size_t>(i)]),
                                          [t](const Sample& sigma) { return eval_x(t, sigma); }});
    }
    Predictor<Sample> one = constant_one<Sample>();
    Predictor<Sample> target{"Y", [](const Sample& sigma) { return haf_bruteforce(sigma); }};

    moments.set("1", "1", 1.0);
    moments.set("Y", "1", 0.0);
    moments.set("Y", "Y", to_double(double_factorial(n - 1)));
    for (int i = 0; i < m; ++i) {
        const auto& pi = preds[static_cast<std::size_t>(i)];
        moments.set(pi.name, "1", 0.0);  // every X_p is zero-mean
        moments.set(pi.name, "Y", to_double(sorted[static_cast<std::size_t>(i)].num_pairings()));
        for (int j = i; j < m; ++j) {
            const BigCount overlap = intersection_count(sorted[static_cast<std::size_t>(i)],
                                                        sorted[static_cast<std::size_t>(j)], cap);
            moments.set(pi.name, preds[static_cast<std::size_t>(j)].name, to_double(overlap));
        }
    }

    LinearEstimator<Sample> f;
    for (int i = 0; i < m; ++i) f.terms.emplace_back(preds[static_cast<std::size_t>(i)], result.beta[static_cast<std::size_t>(i)]);

    std::vector<AccuracyReport> reports;
    reports.push_back(check_approx_accuracy(f, one, target, moments, result.config.eps));
    for (int i = 0; i < m; ++i)
        reports.push_back(check_approx_accuracy(f, preds[static_cast<std::size_t>(i)], target, moments, result.config.eps));
    reports.push_back(check_approx_self_accuracy(f, target, moments, result.config.eps));
    return reports;
}

}  // namespace multiacc
