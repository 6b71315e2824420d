#include "multiacc/matrix_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "multiacc/errors.hpp"

namespace multiacc {

namespace {

Eigen::MatrixXd from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    if (n == 0) throw ParseError("matrix: no rows", 0);
    for (const auto& r : rows) {
        if (r.size() != n)
            throw ParseError("matrix: expected " + std::to_string(n) + " columns, found " +
                                 std::to_string(r.size()),
                             0);
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

Eigen::MatrixXd parse_json_matrix(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("matrix JSON: ") + e.what(), 0);
    }
    if (j.is_object()) {
        if (!j.contains("entries")) throw ParseError("matrix JSON object must contain \"entries\"", 0);
        j = j["entries"];
    }
    if (!j.is_array()) throw ParseError("matrix JSON must be an array of rows", 0);
    std::vector<std::vector<double>> rows;
    for (const auto& row : j) {
        if (!row.is_array()) throw ParseError("matrix JSON rows must be arrays", 0);
        std::vector<double> r;
        for (const auto& v : row) {
            if (!v.is_number()) throw ParseError("matrix JSON entries must be numbers", 0);
            r.push_back(v.get<double>());
        }
        rows.push_back(std::move(r));
    }
    return from_rows(rows);
}

Eigen::MatrixXd parse_grid_matrix(std::string_view text) {
    std::vector<std::vector<double>> rows;
    std::istringstream lines{std::string(text)};
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::vector<double> r;
        double v = 0.0;
        while (fields >> v) r.push_back(v);
        if (!fields.eof()) throw ParseError("matrix grid: non-numeric field in line '" + line + "'", 0);
        if (!r.empty()) rows.push_back(std::move(r));
    }
    return from_rows(rows);
}

}  // namespace

Eigen::MatrixXd parse_matrix(std::string_view text) {
    std::size_t k = 0;
    while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
    if (k == text.size()) throw ParseError("matrix: empty input", k);
    if (text[k] == '[' || text[k] == '{') return parse_json_matrix(text);
    return parse_grid_matrix(text);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file '" + path + "'", 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Eigen::MatrixXd load_matrix(const std::string& path) { return parse_matrix(read_file(path)); }

}  // namespace multiacc
