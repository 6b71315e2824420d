#ifndef MULTIACC_ACCURACY_HPP
#define MULTIACC_ACCURACY_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <eigen3/Eigen/Dense>

#include "multiacc/errors.hpp"
#include "multiacc/rng.hpp"
#include "multiacc/stats.hpp"

namespace multiacc {

// A named real-valued function of a sample-space element (covariance matrix,
// plain matrix, or anything else the distribution produces).
template <typename S>
struct Predictor {
    std::string name;
    std::function<double(const S&)> eval;
};

template <typename S>
Predictor<S> constant_one() {
    return {"1", [](const S&) { return 1.0; }};
}

// A linear combination of named predictors; the shape every merge result
// takes.
template <typename S>
struct LinearEstimator {
    std::string name = "f";
    std::vector<std::pair<Predictor<S>, double>> terms;

    double evaluate(const S& s) const {
        double out = 0.0;
        for (const auto& [p, c] : terms) out += c * p.eval(s);
        return out;
    }
};

// Formal linear combination used to pose moment queries like E[(Y - f) X].
template <typename S>
struct LinComb {
    std::vector<std::pair<Predictor<S>, double>> terms;

    static LinComb of(const Predictor<S>& p, double coeff = 1.0) { return LinComb{{{p, coeff}}}; }
    static LinComb of(const LinearEstimator<S>& f, double scale = 1.0) {
        LinComb out;
        for (const auto& [p, c] : f.terms) out.terms.emplace_back(p, scale * c);
        return out;
    }
    // Y - f
    static LinComb residual(const Predictor<S>& y, const LinearEstimator<S>& f) {
        LinComb out = of(y);
        for (const auto& [p, c] : f.terms) out.terms.emplace_back(p, -c);
        return out;
    }

    double evaluate(const S& s) const {
        double out = 0.0;
        for (const auto& [p, c] : terms) out += c * p.eval(s);
        return out;
    }
};

struct MomentEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double abs_scale = 0.0;  // magnitude of the contributions, for roundoff budgets
};

// Closed-form second moments keyed by predictor name (symmetric). Queries for
// unregistered pairs throw, so a missing closed form is loud.
class ExactMoments {
public:
    static constexpr bool exact = true;

    void set(const std::string& a, const std::string& b, double value) {
        table_[key(a, b)] = value;
    }

    double moment(const std::string& a, const std::string& b) const {
        auto it = table_.find(key(a, b));
        if (it == table_.end())
            throw InvariantError("ExactMoments: no registered moment E[" + a + " * " + b + "]");
        return it->second;
    }

    template <typename S>
    MomentEstimate product(const LinComb<S>& a, const LinComb<S>& b) const {
        MomentEstimate out;
        for (const auto& [pa, ca] : a.terms) {
            for (const auto& [pb, cb] : b.terms) {
                const double contribution = ca * cb * moment(pa.name, pb.name);
                out.value += contribution;
                out.abs_scale += std::fabs(contribution);
            }
        }
        return out;
    }

private:
    static std::pair<std::string, std::string> key(const std::string& a, const std::string& b) {
        return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
    }
    std::map<std::pair<std::string, std::string>, double> table_;
};

// Monte-Carlo moments over a seeded sampler. Every query replays the same
// sample stream (common random numbers), so verdicts are deterministic and
// mutually consistent for a fixed seed.
template <typename S>
class McMoments {
public:
    static constexpr bool exact = false;

    McMoments(std::function<S(Rng&)> sampler, std::uint64_t samples, std::uint64_t seed, int threads = 1)
        : sampler_(std::move(sampler)), samples_(samples), seed_(seed), threads_(threads) {}

    MomentEstimate product(const LinComb<S>& a, const LinComb<S>& b) const {
        const McSummary s = mc_run(samples_, seed_, threads_, [&](Rng& rng) {
            const S x = sampler_(rng);
            return a.evaluate(x) * b.evaluate(x);
        });
        return {s.mean, s.std_error, s.mean_abs};
    }

    std::uint64_t samples() const { return samples_; }

private:
    std::function<S(Rng&)> sampler_;
    std::uint64_t samples_;
    std::uint64_t seed_;
    int threads_;
};

enum class Verdict { accurate, violated, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::accurate: return "accurate";
        case Verdict::violated: return "violated";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct AccuracyReport {
    std::string predictor;
    double defect = 0.0;
    double threshold = 0.0;
    double std_error = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

inline Verdict verdict_for(double defect, double threshold, double std_error) {
    const double mag = std::fabs(defect);
    if (mag <= threshold + 5.0 * std_error) return Verdict::accurate;
    if (mag - threshold >= 5.0 * std_error) return Verdict::violated;
    return Verdict::inconclusive;
}

// E[(Y - f) X] with an exact-roundoff threshold in exact mode and a
// standard-error band in MC mode.
template <typename S, typename Moments>
AccuracyReport check_accuracy(const LinearEstimator<S>& f, const Predictor<S>& x, const Predictor<S>& y,
                              const Moments& moments) {
    const MomentEstimate d = moments.product(LinComb<S>::residual(y, f), LinComb<S>::of(x));
    AccuracyReport report;
    report.predictor = x.name;
    report.defect = d.value;
    report.std_error = d.std_error;
    report.threshold = Moments::exact ? 1e-9 * d.abs_scale : 0.0;
    report.verdict = verdict_for(report.defect, report.threshold, report.std_error);
    return report;
}

// Convenience overload for f given as X = f (self-accuracy).
template <typename S, typename Moments>
AccuracyReport check_self_accuracy(const LinearEstimator<S>& f, const Predictor<S>& y, const Moments& moments) {
    const MomentEstimate d = moments.product(LinComb<S>::residual(y, f), LinComb<S>::of(f));
    AccuracyReport report;
    report.predictor = f.name;
    report.defect = d.value;
    report.std_error = d.std_error;
    report.threshold = Moments::exact ? 1e-9 * d.abs_scale : 0.0;
    report.verdict = verdict_for(report.defect, report.threshold, report.std_error);
    return report;
}

template <typename S, typename Moments>
std::vector<AccuracyReport> check_multiaccuracy(const LinearEstimator<S>& f,
                                                const std::vector<Predictor<S>>& predictors,
                                                const Predictor<S>& y, const Moments& moments) {
    std::vector<AccuracyReport> out;
    out.reserve(predictors.size());
    for (const auto& x : predictors) out.push_back(check_accuracy(f, x, y, moments));
    return out;
}

inline bool all_accurate(const std::vector<AccuracyReport>& reports) {
    for (const auto& r : reports)
        if (r.verdict != Verdict::accurate) return false;
    return true;
}

// (eps, X)-accuracy: defect^2 <= eps^2 E[X^2] E[f^2]. The report's threshold
// is the bound mapped back to defect scale, eps * sqrt(E[X^2] E[f^2]), and the
// std_error combines the defect error with a delta-method error for the bound.
template <typename S, typename Moments>
AccuracyReport check_approx_accuracy_comb(const LinearEstimator<S>& f, const LinComb<S>& x,
                                          const std::string& x_name, const Predictor<S>& y,
                                          const Moments& moments, double eps) {
    if (eps < 0.0) throw InvariantError("check_approx_accuracy: eps must be >= 0");
    const MomentEstimate d = moments.product(LinComb<S>::residual(y, f), x);
    const MomentEstimate xx = moments.product(x, x);
    const MomentEstimate ff = moments.product(LinComb<S>::of(f), LinComb<S>::of(f));

    const double a = std::max(xx.value, 0.0);
    const double b = std::max(ff.value, 0.0);
    const double bound = eps * std::sqrt(a * b);
    double bound_se = 0.0;
    if (a * b > 0.0) {
        const double var = (eps * eps / (4.0 * a * b)) *
                           (b * b * xx.std_error * xx.std_error + a * a * ff.std_error * ff.std_error);
        bound_se = std::sqrt(var);
    }

    AccuracyReport report;
    report.predictor = x_name;
    report.defect = d.value;
    report.threshold = bound + (Moments::exact ? 1e-9 * (d.abs_scale + bound) : 0.0);
    report.std_error = d.std_error + bound_se;
    report.verdict = verdict_for(report.defect, report.threshold, report.std_error);
    return report;
}

template <typename S, typename Moments>
AccuracyReport check_approx_accuracy(const LinearEstimator<S>& f, const Predictor<S>& x,
                                     const Predictor<S>& y, const Moments& moments, double eps) {
    return check_approx_accuracy_comb(f, LinComb<S>::of(x), x.name, y, moments, eps);
}

// Approximate self-accuracy: X = f.
template <typename S, typename Moments>
AccuracyReport check_approx_self_accuracy(const LinearEstimator<S>& f, const Predictor<S>& y,
                                          const Moments& moments, double eps) {
    return check_approx_accuracy_comb(f, LinComb<S>::of(f), f.name, y, moments, eps);
}

// OLS merge: coefficients (E[Y X_i])_i^T M^+ where M is the Gram matrix of the
// predictors; singular values below 1e-10 * sigma_max are dropped. The output
// is multiaccurate with respect to every input predictor and self-accurate
// when the moments are exact.
template <typename S, typename Moments>
LinearEstimator<S> ols_merge(const std::vector<Predictor<S>>& predictors, const Predictor<S>& y,
                             const Moments& moments) {
    const int m = static_cast<int>(predictors.size());
    if (m == 0) throw InvariantError("ols_merge: need at least one predictor");
    Eigen::MatrixXd gram(m, m);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
        rhs(i) = moments.product(LinComb<S>::of(y), LinComb<S>::of(predictors[i])).value;
        for (int j = i; j < m; ++j) {
            const double v = moments.product(LinComb<S>::of(predictors[i]), LinComb<S>::of(predictors[j])).value;
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double sigma_max = lambda.cwiseAbs().maxCoeff();
    const double cutoff = 1e-10 * sigma_max;
    Eigen::VectorXd inv_lambda(m);
    for (int i = 0; i < m; ++i)
        inv_lambda(i) = std::fabs(lambda(i)) > cutoff ? 1.0 / lambda(i) : 0.0;
    const Eigen::VectorXd beta =
        eig.eigenvectors() * inv_lambda.asDiagonal() * eig.eigenvectors().transpose() * rhs;

    LinearEstimator<S> f;
    for (int i = 0; i < m; ++i) f.terms.emplace_back(predictors[i], beta(i));
    return f;
}

}  // namespace multiacc

#endif
