#ifndef MULTIACC_JSON_OUT_HPP
#define MULTIACC_JSON_OUT_HPP

#include <json.hpp>

#include "multiacc/accuracy.hpp"
#include "multiacc/adaptive_merge.hpp"
#include "multiacc/pairing.hpp"
#include "multiacc/sat_reduction.hpp"

namespace multiacc {

inline nlohmann::json report_json(const AccuracyReport& r) {
    return {{"predictor", r.predictor},
            {"defect", r.defect},
            {"threshold", r.threshold},
            {"std_error", r.std_error},
            {"verdict", to_string(r.verdict)}};
}

inline nlohmann::json reports_json(const std::vector<AccuracyReport>& reports) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : reports) out.push_back(report_json(r));
    return out;
}

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline nlohmann::json merge_result_json(const MergeResult& r) {
    return {{"beta", r.beta},
            {"samples", r.samples},
            {"sigma_hat_m", r.sigma_hat_m},
            {"c_hat", matrix_json(r.c_hat)},
            {"ordering", r.ordering},
            {"probes", r.probes}};
}

inline nlohmann::json validation_json(const ValidationReport& v) {
    return {{"ok", v.ok},
            {"unions_verified", v.unions_verified},
            {"unions_trusted", v.unions_trusted},
            {"problems", v.problems}};
}

inline nlohmann::json reduction_json(const CnfFormula& phi, const ReductionOutput& red) {
    nlohmann::json index_map = nlohmann::json::array();
    const int k = static_cast<int>(phi.clauses.size());
    for (int j = 1; j <= k; ++j)
        for (int s = 1; s <= 3; ++s)
            for (int c1 = 0; c1 <= 1; ++c1)
                for (int c2 = 0; c2 <= 1; ++c2)
                    index_map.push_back({{"clause", j},
                                         {"slot", s},
                                         {"c1", c1},
                                         {"c2", c2},
                                         {"index", reduction_index(j, s, c1, c2)}});
    return {{"t", serialize_structure(red.t)},
            {"u", serialize_structure(red.u)},
            {"num_pairings_t", red.t.num_pairings().get_str()},
            {"num_pairings_u", red.u.num_pairings().get_str()},
            {"occurring_vars", red.occurring_vars},
            {"multiplier", red.multiplier.get_str()},
            {"index_map", index_map}};
}

// CSV projection of a JSON report: arrays of flat objects become header+rows;
// a flat object becomes header+row; nested values are embedded as JSON text.
std::string json_to_csv(const nlohmann::json& j);

}  // namespace multiacc

#endif
