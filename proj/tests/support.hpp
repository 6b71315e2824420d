#ifndef MULTIACC_TESTS_SUPPORT_HPP
#define MULTIACC_TESTS_SUPPORT_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "multiacc/pairing.hpp"
#include "multiacc/rng.hpp"

namespace multiacc::testsupport {

// 0.99 quantiles of the chi-square distribution, dof 1..19.
inline double chi2_critical_99(int dof) {
    static const double table[] = {6.635,  9.210,  11.345, 13.277, 15.086, 16.812, 18.475,
                                   20.090, 21.666, 23.209, 24.725, 26.217, 27.688, 29.141,
                                   30.578, 32.000, 33.409, 34.805, 36.191};
    return table[dof - 1];
}

// Union of singleton structures, one per pairing; S(T) is exactly `pairings`.
inline PairingStructure structure_from_pairings(const std::vector<Pairing>& pairings) {
    std::vector<PairingStructure> parts;
    parts.reserve(pairings.size());
    for (const auto& p : pairings) parts.push_back(singleton_structure(p));
    return union_all(parts);
}

// k distinct pairings of [n], uniformly chosen.
inline std::vector<Pairing> random_pairing_subset(int n, int k, Rng& rng) {
    std::vector<Pairing> all = all_pairings(n);
    for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[rng.below(i)]);
    all.resize(static_cast<std::size_t>(k));
    std::sort(all.begin(), all.end());
    return all;
}

// Random enumerable structure over [n] with a known pairing set: either a
// union of singletons, or (for n >= 8, sometimes) a product of two such
// structures over the halves, exercising product-over-union shapes.
inline PairingStructure random_structure(int n, Rng& rng, std::vector<Pairing>* out_set = nullptr) {
    const bool split_halves = n >= 8 && n % 4 == 0 && rng.below(2) == 0;
    if (!split_halves) {
        const int total = static_cast<int>(all_pairings(n).size());
        const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(total, 20))));
        auto subset = random_pairing_subset(n, k, rng);
        if (out_set) *out_set = subset;
        return structure_from_pairings(subset);
    }
    const int half = n / 2;
    auto left_set = random_pairing_subset(half, 1 + static_cast<int>(rng.below(3)), rng);
    PairingStructure left = structure_from_pairings(left_set);
    // Shift the right half's indices up by `half`.
    std::vector<Pairing> right_set_raw = random_pairing_subset(half, 1 + static_cast<int>(rng.below(3)), rng);
    std::vector<Pairing> right_set;
    for (const auto& p : right_set_raw) {
        std::vector<std::pair<Index, Index>> shifted;
        for (auto [lo, hi] : p.pairs()) shifted.emplace_back(lo + half, hi + half);
        right_set.push_back(Pairing::from_pairs(shifted));
    }
    PairingStructure right = structure_from_pairings(right_set);
    PairingStructure prod = PairingStructure::product(left, right);
    if (out_set) {
        out_set->clear();
        for (const auto& a : left_set) {
            for (const auto& b : right_set) {
                std::vector<std::pair<Index, Index>> merged(a.pairs());
                merged.insert(merged.end(), b.pairs().begin(), b.pairs().end());
                out_set->push_back(Pairing::from_pairs(merged));
            }
        }
        std::sort(out_set->begin(), out_set->end());
    }
    return prod;
}

// Minimal JSON-schema checker covering the subset the shipped schemas use:
// type (string or list), required, properties, items. Returns an error
// message or empty string.
inline std::string schema_check(const nlohmann::json& value, const nlohmann::json& schema,
                                const std::string& path = "$") {
    if (schema.contains("type")) {
        auto matches = [&](const std::string& t) {
            if (t == "object") return value.is_object();
            if (t == "array") return value.is_array();
            if (t == "string") return value.is_string();
            if (t == "number") return value.is_number();
            if (t == "integer") return value.is_number_integer() || value.is_number_unsigned();
            if (t == "boolean") return value.is_boolean();
            if (t == "null") return value.is_null();
            return false;
        };
        const auto& ty = schema["type"];
        bool ok = false;
        if (ty.is_string()) ok = matches(ty.get<std::string>());
        else
            for (const auto& t : ty) ok = ok || matches(t.get<std::string>());
        if (!ok) return path + ": type mismatch (got " + std::string(value.type_name()) + ")";
    }
    if (schema.contains("required")) {
        for (const auto& k : schema["required"]) {
            if (!value.contains(k.get<std::string>())) return path + ": missing required key " + k.get<std::string>();
        }
    }
    if (schema.contains("properties") && value.is_object()) {
        for (const auto& [k, sub] : schema["properties"].items()) {
            if (value.contains(k)) {
                const std::string msg = schema_check(value[k], sub, path + "." + k);
                if (!msg.empty()) return msg;
            }
        }
    }
    if (schema.contains("items") && value.is_array()) {
        for (std::size_t i = 0; i < value.size(); ++i) {
            const std::string msg = schema_check(value[static_cast<int>(i)], schema["items"],
                                                 path + "[" + std::to_string(i) + "]");
            if (!msg.empty()) return msg;
        }
    }
    return "";
}

}  // namespace multiacc::testsupport

#endif
