#include "multiacc/json_out.hpp"

#include <set>
#include <sstream>

namespace multiacc {

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string cell(const nlohmann::json& v) {
    if (v.is_string()) return csv_escape(v.get<std::string>());
    return csv_escape(v.dump());
}

}  // namespace

std::string json_to_csv(const nlohmann::json& j) {
    std::ostringstream out;
    if (j.is_array()) {
        // Union of keys across rows, in first-seen order.
        std::vector<std::string> keys;
        std::set<std::string> seen;
        for (const auto& row : j) {
            if (!row.is_object()) {
                // Array of scalars: one value per line.
                for (const auto& v : j) out << cell(v) << "\n";
                return out.str();
            }
            for (const auto& [k, v] : row.items()) {
                if (seen.insert(k).second) keys.push_back(k);
            }
        }
        for (std::size_t i = 0; i < keys.size(); ++i) out << (i ? "," : "") << csv_escape(keys[i]);
        out << "\n";
        for (const auto& row : j) {
            for (std::size_t i = 0; i < keys.size(); ++i) {
                out << (i ? "," : "");
                if (row.contains(keys[i])) out << cell(row[keys[i]]);
            }
            out << "\n";
        }
        return out.str();
    }
    if (j.is_object()) {
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            out << (first ? "" : ",") << csv_escape(k);
            first = false;
        }
        out << "\n";
        first = true;
        for (const auto& [k, v] : j.items()) {
            out << (first ? "" : ",") << cell(v);
            first = false;
        }
        out << "\n";
        return out.str();
    }
    out << cell(j) << "\n";
    return out.str();
}

}  // namespace multiacc
